#include "uniseq/baselines/layout.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "uniseq/common/error.hpp"

namespace uniseq::baselines {

std::string_view layout_name(LayoutKind k) {
  switch (k) {
    case LayoutKind::Flatten: return "flatten";
    case LayoutKind::CoarseFirst: return "coarse";
    case LayoutKind::Parallel: return "parallel";
    case LayoutKind::Delay: return "delay";
    case LayoutKind::MultiScale: return "multiscale";
  }
  return "?";
}

LayoutKind layout_from_name(std::string_view name) {
  for (auto k : {LayoutKind::Flatten, LayoutKind::CoarseFirst, LayoutKind::Parallel, LayoutKind::Delay,
                 LayoutKind::MultiScale})
    if (layout_name(k) == name) return k;
  if (name == "coarse-first" || name == "coarse_first") return LayoutKind::CoarseFirst;
  fail("unknown layout '" + std::string(name) + "' (expected flatten, coarse, parallel, delay or multiscale)");
}

namespace {

using SeesFn = std::function<bool(Cell viewer, Cell other)>;

LayoutSpec finish(LayoutKind kind, std::size_t T, std::size_t n_q, std::vector<std::vector<Cell>> steps,
                  const SeesFn& sees) {
  LayoutSpec L;
  L.kind = kind;
  L.T = T;
  L.n_q = n_q;
  L.steps = std::move(steps);
  L.step_of.assign(T * n_q, 0);
  for (std::size_t s = 0; s < L.steps.size(); ++s)
    for (auto c : L.steps[s]) L.step_of[L.cell_index(c)] = s;
  L.visible.resize(T * n_q);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < n_q; ++k)
      for (std::size_t t2 = 0; t2 < T; ++t2)
        for (std::size_t k2 = 0; k2 < n_q; ++k2)
          if (sees({t, k}, {t2, k2})) L.visible[t * n_q + k].push_back({t2, k2});
  return L;
}

void check_dims(std::size_t T, std::size_t n_q) {
  require(T >= 1 && n_q >= 1, "layout: T and n_q must be >= 1");
}

}  // namespace

LayoutSpec layout_flatten(std::size_t T, std::size_t n_q) {
  check_dims(T, n_q);
  std::vector<std::vector<Cell>> steps;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < n_q; ++k) steps.push_back({{t, k}});
  return finish(LayoutKind::Flatten, T, n_q, std::move(steps),
                [](Cell a, Cell b) { return b.t < a.t || (b.t == a.t && b.k < a.k); });
}

LayoutSpec layout_coarse_first(std::size_t T, std::size_t n_q) {
  check_dims(T, n_q);
  std::vector<std::vector<Cell>> steps;
  for (std::size_t k = 0; k < n_q; ++k)
    for (std::size_t t = 0; t < T; ++t) steps.push_back({{t, k}});
  return finish(LayoutKind::CoarseFirst, T, n_q, std::move(steps),
                [](Cell a, Cell b) { return b.k < a.k || (b.k == a.k && b.t < a.t); });
}

LayoutSpec layout_parallel(std::size_t T, std::size_t n_q) {
  check_dims(T, n_q);
  std::vector<std::vector<Cell>> steps(T);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < n_q; ++k) steps[t].push_back({t, k});
  return finish(LayoutKind::Parallel, T, n_q, std::move(steps), [](Cell a, Cell b) { return b.t < a.t; });
}

LayoutSpec layout_delay(std::size_t T, std::size_t n_q) {
  check_dims(T, n_q);
  const std::size_t S = T + n_q - 1;
  std::vector<std::vector<Cell>> steps(S);
  std::vector<PadSlot> pads;
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < n_q; ++k) {
      if (s >= k && s - k < T) steps[s].push_back({s - k, k});
      else pads.push_back({s, k});
    }
  // order each step by level descending to match the diagonal reading (3,1),(2,2),(1,3)
  for (auto& st : steps) std::sort(st.begin(), st.end(), [](Cell a, Cell b) { return a.t > b.t; });
  auto L = finish(LayoutKind::Delay, T, n_q, std::move(steps),
                  [](Cell a, Cell b) { return b.t + b.k < a.t + a.k; });
  L.padding = std::move(pads);
  return L;
}

LayoutSpec layout_multiscale(std::size_t T, std::size_t n_q) {
  check_dims(T, n_q);
  std::vector<std::vector<Cell>> steps;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < n_q; ++k) steps.push_back({{t, k}});
  // global context covers whole earlier frames; local model covers earlier levels of this frame
  return finish(LayoutKind::MultiScale, T, n_q, std::move(steps), [](Cell a, Cell b) {
    const bool earlier_frame = b.t < a.t;
    const bool same_frame_earlier_level = b.t == a.t && b.k < a.k;
    return earlier_frame || same_frame_earlier_level;
  });
}

LayoutSpec make_layout(LayoutKind kind, std::size_t T, std::size_t n_q) {
  switch (kind) {
    case LayoutKind::Flatten: return layout_flatten(T, n_q);
    case LayoutKind::CoarseFirst: return layout_coarse_first(T, n_q);
    case LayoutKind::Parallel: return layout_parallel(T, n_q);
    case LayoutKind::Delay: return layout_delay(T, n_q);
    case LayoutKind::MultiScale: return layout_multiscale(T, n_q);
  }
  fail("unknown layout kind");
}

const std::vector<Cell>& visible_set(const LayoutSpec& layout, Cell cell) {
  require(cell.t < layout.T && cell.k < layout.n_q,
          "visible_set: cell (" + std::to_string(cell.t) + "," + std::to_string(cell.k) + ") outside " +
              std::to_string(layout.T) + "x" + std::to_string(layout.n_q) + " grid");
  return layout.visible[layout.cell_index(cell)];
}

std::string render_layout(const LayoutSpec& layout) {
  std::ostringstream out;
  const std::size_t w = std::to_string(layout.steps.size()).size() + 1;
  out << layout_name(layout.kind) << " T=" << layout.T << " n_q=" << layout.n_q << " steps=" << layout.steps.size()
      << "\n";
  for (std::size_t k = 0; k < layout.n_q; ++k) {
    out << "k" << (k + 1) << " |";
    for (std::size_t t = 0; t < layout.T; ++t) {
      const std::string s = std::to_string(layout.step_of[t * layout.n_q + k] + 1);
      out << std::string(w - s.size(), ' ') << s;
    }
    out << "\n";
  }
  if (layout.kind == LayoutKind::Delay) {
    // rows = levels, columns = steps, entry = frame number or 0 for empty
    out << "emission (frame per step, 0 = empty)\n";
    const std::size_t fw = std::to_string(layout.T).size() + 1;
    for (std::size_t k = 0; k < layout.n_q; ++k) {
      out << "k" << (k + 1) << " |";
      for (std::size_t s = 0; s < layout.steps.size(); ++s) {
        std::string e = "0";
        for (auto c : layout.steps[s])
          if (c.k == k) e = std::to_string(c.t + 1);
        out << std::string(fw - e.size(), ' ') << e;
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace uniseq::baselines
