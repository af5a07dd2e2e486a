#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace uniseq::baselines {

enum class LayoutKind : std::uint8_t { Flatten, CoarseFirst, Parallel, Delay, MultiScale };
std::string_view layout_name(LayoutKind k);
LayoutKind layout_from_name(std::string_view name);

// Grid cell: frame t, level k (both 0-based).
struct Cell {
  std::size_t t = 0;
  std::size_t k = 0;
  auto operator<=>(const Cell&) const = default;
};

// Empty-token position in a step-major layout: step s, head/row k.
struct PadSlot {
  std::size_t step = 0;
  std::size_t row = 0;
  auto operator<=>(const PadSlot&) const = default;
};

struct LayoutSpec {
  LayoutKind kind = LayoutKind::Flatten;
  std::size_t T = 0;
  std::size_t n_q = 0;
  std::vector<std::vector<Cell>> steps;    // cells emitted together
  std::vector<std::size_t> step_of;        // per cell, index t * n_q + k
  std::vector<std::vector<Cell>> visible;  // per cell, sorted
  std::vector<PadSlot> padding;

  std::size_t sequence_length() const { return steps.size(); }
  std::size_t cell_index(Cell c) const { return c.t * n_q + c.k; }
};

LayoutSpec layout_flatten(std::size_t T, std::size_t n_q);
LayoutSpec layout_coarse_first(std::size_t T, std::size_t n_q);
LayoutSpec layout_parallel(std::size_t T, std::size_t n_q);
LayoutSpec layout_delay(std::size_t T, std::size_t n_q);
// Frame-by-frame patches with within-frame order; same emission order as
// flattening.
LayoutSpec layout_multiscale(std::size_t T, std::size_t n_q);
LayoutSpec make_layout(LayoutKind kind, std::size_t T, std::size_t n_q);

// Throws when the cell lies outside the grid.
const std::vector<Cell>& visible_set(const LayoutSpec& layout, Cell cell);

// Level rows top to bottom, frames left to right, 1-based step number per
// cell. Delay layouts append the per-step emission table with 0 for empty
// positions.
std::string render_layout(const LayoutSpec& layout);

}  // namespace uniseq::baselines
