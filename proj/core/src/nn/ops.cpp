#include "uniseq/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "uniseq/common/error.hpp"

namespace uniseq::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using Strided = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStrided = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;

ConstMatMap view(const Tensor& t) {
  return ConstMatMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}
MatMap view(Tensor& t) {
  return MatMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

// Vectorized elementwise exp.
void vexp(const double* in, double* out, std::size_t n) {
  using Arr = Eigen::Array<double, Eigen::Dynamic, 1>;
  Eigen::Map<Arr>(out, static_cast<Eigen::Index>(n)) = Eigen::Map<const Arr>(in, static_cast<Eigen::Index>(n)).exp();
}

// tanh(u) = 1 - 2 / (exp(2u) + 1), through the vectorized exp.
void vtanh(const double* in, double* out, std::size_t n) {
  using Arr = Eigen::Array<double, Eigen::Dynamic, 1>;
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::Map<Arr> o(out, m);
  o = (2.0 * Eigen::Map<const Arr>(in, m)).exp();
  o = 1.0 - 2.0 / (o + 1.0);
}

void require_matrix(const Tensor& t, const char* op) {
  require(t.rank() == 2, std::string(op) + ": expected a matrix, got shape " + shape_str(t.shape()));
}

void require_vector_len(const Tensor& t, std::size_t n, const char* op) {
  require(t.numel() == n, std::string(op) + ": expected " + std::to_string(n) + " values, got shape " +
                              shape_str(t.shape()));
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "matmul");
  require_matrix(bv, "matmul");
  require(av.cols() == bv.rows(), "matmul: inner dimensions " + shape_str(av.shape()) + " x " +
                                      shape_str(bv.shape()));
  Tensor out({av.rows(), bv.cols()});
  view(out).noalias() = view(av) * view(bv);
  return make_result(std::move(out), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    auto g = view(std::as_const(n.grad));
    if (pa.requires_grad) view(pa.grad_buffer()).noalias() += g * view(std::as_const(pb.value)).transpose();
    if (pb.requires_grad) view(pb.grad_buffer()).noalias() += view(std::as_const(pa.value)).transpose() * g;
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  require_matrix(xv, "linear");
  require_matrix(wv, "linear");
  require(xv.cols() == wv.rows(), "linear: input width " + std::to_string(xv.cols()) +
                                      " does not match weight " + shape_str(wv.shape()));
  require_vector_len(b.value(), wv.cols(), "linear bias");
  Tensor out({xv.rows(), wv.cols()});
  auto o = view(out);
  o.noalias() = view(xv) * view(wv);
  Eigen::Map<const Eigen::RowVectorXd> bias(b.value().data(), static_cast<Eigen::Index>(wv.cols()));
  o.rowwise() += bias;
  return make_result(std::move(out), {x, w, b}, [](Node& n) {
    Node& px = *n.parents[0];
    Node& pw = *n.parents[1];
    Node& pb = *n.parents[2];
    auto g = view(std::as_const(n.grad));
    if (px.requires_grad) view(px.grad_buffer()).noalias() += g * view(std::as_const(pw.value)).transpose();
    if (pw.requires_grad) view(pw.grad_buffer()).noalias() += view(std::as_const(px.value)).transpose() * g;
    if (pb.requires_grad) {
      Tensor& gb = pb.grad_buffer();
      Eigen::Map<Eigen::RowVectorXd>(gb.data(), static_cast<Eigen::Index>(gb.numel())) += g.colwise().sum();
    }
  });
}

Var add(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "add: shape " + shape_str(a.value().shape()) + " vs " +
                                               shape_str(b.value().shape()));
  Tensor out = a.value();
  out.accumulate(b.value());
  return make_result(std::move(out), {a, b}, [](Node& n) {
    for (auto& p : n.parents)
      if (p->requires_grad) p->grad_buffer().accumulate(n.grad);
  });
}

Var add_row(const Var& x, const Var& b) {
  const Tensor& xv = x.value();
  require_vector_len(b.value(), xv.cols(), "add_row");
  Tensor out = xv;
  const std::size_t cols = xv.cols();
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) += b.value()[c];
  return make_result(std::move(out), {x, b}, [cols](Node& n) {
    Node& px = *n.parents[0];
    Node& pb = *n.parents[1];
    if (px.requires_grad) px.grad_buffer().accumulate(n.grad);
    if (pb.requires_grad) {
      Tensor& gb = pb.grad_buffer();
      for (std::size_t r = 0; r < n.grad.rows(); ++r)
        for (std::size_t c = 0; c < cols; ++c) gb[c] += n.grad(r, c);
    }
  });
}

Var scale(const Var& x, double s) {
  Tensor out = x.value();
  for (double& v : out.values()) v *= s;
  return make_result(std::move(out), {x}, [s](Node& n) {
    Tensor& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += s * n.grad[i];
  });
}

Var gelu(const Var& x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  const Tensor& xv = x.value();
  const std::size_t n = xv.numel();
  Storage t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = xv[i];
    t[i] = kC * (v + kA * v * v * v);
  }
  vtanh(t.data(), t.data(), n);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * xv[i] * (1.0 + t[i]);
  return make_result(std::move(out), {x}, [t = std::move(t)](Node& n) {
    Node& px = *n.parents[0];
    double* g = px.grad_buffer().data();
    const double* v = px.value.data();
    const double* up = n.grad.data();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double du = kC * (1.0 + 3.0 * kA * v[i] * v[i]);
      g[i] += up[i] * (0.5 * (1.0 + t[i]) + 0.5 * v[i] * (1.0 - t[i] * t[i]) * du);
    }
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const Tensor& xv = x.value();
  require_matrix(xv, "layer_norm");
  const std::size_t rows = xv.rows();
  const std::size_t cols = xv.cols();
  require_vector_len(gain.value(), cols, "layer_norm gain");
  require_vector_len(bias.value(), cols, "layer_norm bias");

  Tensor out({rows, cols});
  Tensor xhat({rows, cols});
  Storage inv_std(rows);
  const double* gv = gain.value().data();
  const double* bv = bias.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * cols;
    double* xh = xhat.data() + r * cols;
    double* o = out.data() + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += in[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (in[c] - mean) * (in[c] - mean);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      xh[c] = (in[c] - mean) * inv_std[r];
      o[c] = xh[c] * gv[c] + bv[c];
    }
  }
  return make_result(std::move(out), {x, gain, bias},
                     [xhat = std::move(xhat), inv_std = std::move(inv_std), rows, cols](Node& n) {
    Node& px = *n.parents[0];
    Node& pg = *n.parents[1];
    Node& pb = *n.parents[2];
    const double* g = n.grad.data();
    if (pg.requires_grad) {
      double* gg = pg.grad_buffer().data();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gg[c] += g[r * cols + c] * xhat.data()[r * cols + c];
    }
    if (pb.requires_grad) {
      double* gb = pb.grad_buffer().data();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
    }
    if (!px.requires_grad) return;
    double* gx = px.grad_buffer().data();
    const double* gain = pg.value.data();
    Storage dxhat(cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* gr = g + r * cols;
      const double* xh = xhat.data() + r * cols;
      double mean_d = 0.0;
      double mean_dx = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        dxhat[c] = gr[c] * gain[c];
        mean_d += dxhat[c];
        mean_dx += dxhat[c] * xh[c];
      }
      mean_d /= static_cast<double>(cols);
      mean_dx /= static_cast<double>(cols);
      double* out = gx + r * cols;
      for (std::size_t c = 0; c < cols; ++c) out[c] += inv_std[r] * (dxhat[c] - mean_d - xh[c] * mean_dx);
    }
  });
}

Var reshape(const Var& x, std::size_t rows, std::size_t cols) {
  require(rows * cols == x.value().numel(), "reshape: " + shape_str(x.value().shape()) + " to [" +
                                                std::to_string(rows) + "," + std::to_string(cols) + "]");
  Tensor out({rows, cols});
  out.values() = x.value().values();
  return make_result(std::move(out), {x}, [](Node& n) {
    Tensor& g = n.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
  });
}

Var gather_rows(const Var& table, std::span<const std::size_t> ids) {
  const Tensor& tv = table.value();
  require_matrix(tv, "gather_rows");
  const std::size_t cols = tv.cols();
  Tensor out({ids.size(), cols});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] < tv.rows(), "gather_rows: id " + std::to_string(ids[i]) + " out of range " +
                                    std::to_string(tv.rows()));
    std::copy_n(tv.data() + ids[i] * cols, cols, out.data() + i * cols);
  }
  return make_result(std::move(out), {table},
                     [ids = std::vector<std::size_t>(ids.begin(), ids.end()), cols](Node& n) {
    double* g = n.parents[0]->grad_buffer().data();
    const double* src = n.grad.data();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      double* dst = g + ids[i] * cols;
      const double* row = src + i * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += row[c];
    }
  });
}

Var embedding_bag(const Var& table, const std::vector<std::vector<BagEntry>>& bags) {
  const Tensor& tv = table.value();
  require_matrix(tv, "embedding_bag");
  const std::size_t cols = tv.cols();
  Tensor out({bags.size(), cols});
  for (std::size_t i = 0; i < bags.size(); ++i) {
    for (const auto& e : bags[i]) {
      require(e.id < tv.rows(), "embedding_bag: id " + std::to_string(e.id) + " out of range " +
                                    std::to_string(tv.rows()));
      const double* src = tv.data() + e.id * cols;
      double* dst = out.data() + i * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += e.weight * src[c];
    }
  }
  return make_result(std::move(out), {table}, [bags, cols](Node& n) {
    double* g = n.parents[0]->grad_buffer().data();
    for (std::size_t i = 0; i < bags.size(); ++i) {
      const double* row = n.grad.data() + i * cols;
      for (const auto& e : bags[i]) {
        double* dst = g + e.id * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += e.weight * row[c];
      }
    }
  });
}

Var scatter_add_rows(const Var& base, const Var& src, std::span<const std::size_t> rows) {
  const Tensor& bv = base.value();
  const Tensor& sv = src.value();
  require(sv.rows() == rows.size() && (rows.empty() || sv.cols() == bv.cols()),
          "scatter_add_rows: source " + shape_str(sv.shape()) + " does not match " +
              std::to_string(rows.size()) + " target rows of width " + std::to_string(bv.cols()));
  Tensor out = bv;
  const std::size_t cols = bv.cols();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < bv.rows(), "scatter_add_rows: row out of range");
    for (std::size_t c = 0; c < cols; ++c) out(rows[i], c) += sv(i, c);
  }
  return make_result(std::move(out), {base, src},
                     [rows = std::vector<std::size_t>(rows.begin(), rows.end()), cols](Node& n) {
    Node& pb = *n.parents[0];
    Node& ps = *n.parents[1];
    if (pb.requires_grad) pb.grad_buffer().accumulate(n.grad);
    if (ps.requires_grad) {
      Tensor& g = ps.grad_buffer();
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < cols; ++c) g(i, c) += n.grad(rows[i], c);
    }
  });
}

Var repeat_rows(const Var& x, std::size_t times) {
  const Tensor& xv = x.value();
  require_matrix(xv, "repeat_rows");
  const std::size_t rows = xv.rows();
  const std::size_t cols = xv.cols();
  Tensor out({rows * times, cols});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < times; ++t) std::copy_n(xv.data() + r * cols, cols, out.data() + (r * times + t) * cols);
  return make_result(std::move(out), {x}, [rows, cols, times](Node& n) {
    double* g = n.parents[0]->grad_buffer().data();
    const double* src = n.grad.data();
    for (std::size_t r = 0; r < rows; ++r) {
      double* dst = g + r * cols;
      for (std::size_t t = 0; t < times; ++t) {
        const double* row = src + (r * times + t) * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += row[c];
      }
    }
  });
}

Var concat_rows(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix(av, "concat_rows");
  require_matrix(bv, "concat_rows");
  require(av.cols() == bv.cols(), "concat_rows: widths differ");
  Tensor out({av.rows() + bv.rows(), av.cols()});
  std::copy(av.values().begin(), av.values().end(), out.values().begin());
  std::copy(bv.values().begin(), bv.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(av.numel()));
  const std::size_t split = av.numel();
  return make_result(std::move(out), {a, b}, [split](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < split; ++i) g[i] += n.grad[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += n.grad[split + i];
    }
  });
}

Var segment_causal_attention(const Var& q, const Var& k, const Var& v, std::size_t heads,
                             std::span<const std::size_t> segments, AttentionCounter* counter) {
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  require_matrix(qv, "attention");
  require(qv.same_shape(kv) && qv.same_shape(vv), "attention: q/k/v shapes differ");
  const std::size_t n_rows = qv.rows();
  const std::size_t width = qv.cols();
  require(heads >= 1 && width % heads == 0, "attention: width " + std::to_string(width) +
                                                " not divisible by " + std::to_string(heads) + " heads");
  require(std::accumulate(segments.begin(), segments.end(), std::size_t{0}) == n_rows,
          "attention: segment lengths do not sum to " + std::to_string(n_rows) + " rows");
  require(qv.all_finite() && kv.all_finite() && vv.all_finite(), "attention: non-finite input");

  const std::size_t dh = width / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  const auto W = static_cast<Eigen::Index>(width);

  std::size_t prob_size = 0;
  for (std::size_t s : segments) prob_size += heads * s * s;
  Storage probs(prob_size, 0.0);

  Tensor out({n_rows, width});
  std::size_t row0 = 0;
  std::size_t pofs = 0;
  for (std::size_t seg : segments) {
    const auto S = static_cast<Eigen::Index>(seg);
    if (counter) {
      counter->score_entries += static_cast<std::uint64_t>(seg) * seg;
    }
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t base = row0 * width + h * dh;
      ConstStrided Q(qv.data() + base, S, static_cast<Eigen::Index>(dh), Eigen::OuterStride<>(W));
      ConstStrided K(kv.data() + base, S, static_cast<Eigen::Index>(dh), Eigen::OuterStride<>(W));
      ConstStrided V(vv.data() + base, S, static_cast<Eigen::Index>(dh), Eigen::OuterStride<>(W));
      MatMap P(probs.data() + pofs, S, S);
      P.noalias() = (Q * K.transpose()) * inv_sqrt;
      for (Eigen::Index i = 0; i < S; ++i) {
        double* row = P.data() + i * S;
        double mx = row[0];
        for (Eigen::Index j = 1; j <= i; ++j) mx = std::max(mx, row[j]);
        for (Eigen::Index j = 0; j <= i; ++j) row[j] -= mx;
        vexp(row, row, static_cast<std::size_t>(i + 1));
        double sum = 0.0;
        for (Eigen::Index j = 0; j <= i; ++j) sum += row[j];
        const double inv = 1.0 / sum;
        for (Eigen::Index j = 0; j <= i; ++j) row[j] *= inv;
        for (Eigen::Index j = i + 1; j < S; ++j) row[j] = 0.0;
      }
      Strided O(out.data() + base, S, static_cast<Eigen::Index>(dh), Eigen::OuterStride<>(W));
      O.noalias() = P * V;
      pofs += seg * seg;
    }
    row0 += seg;
  }
  if (counter) ++counter->calls;

  return make_result(std::move(out), {q, k, v},
                     [probs = std::move(probs), segs = std::vector<std::size_t>(segments.begin(), segments.end()),
                      heads, dh, width, inv_sqrt](Node& n) {
    Node& pq = *n.parents[0];
    Node& pk = *n.parents[1];
    Node& pv = *n.parents[2];
    Tensor& gq = pq.grad_buffer();
    Tensor& gk = pk.grad_buffer();
    Tensor& gv = pv.grad_buffer();
    const auto W = static_cast<Eigen::Index>(width);
    const auto DH = static_cast<Eigen::Index>(dh);
    std::size_t row0 = 0;
    std::size_t pofs = 0;
    RowMat dP;
    for (std::size_t seg : segs) {
      const auto S = static_cast<Eigen::Index>(seg);
      for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t base = row0 * width + h * dh;
        ConstStrided Q(pq.value.data() + base, S, DH, Eigen::OuterStride<>(W));
        ConstStrided K(pk.value.data() + base, S, DH, Eigen::OuterStride<>(W));
        ConstStrided V(pv.value.data() + base, S, DH, Eigen::OuterStride<>(W));
        ConstStrided dO(n.grad.data() + base, S, DH, Eigen::OuterStride<>(W));
        ConstMatMap P(probs.data() + pofs, S, S);
        Strided dQ(gq.data() + base, S, DH, Eigen::OuterStride<>(W));
        Strided dK(gk.data() + base, S, DH, Eigen::OuterStride<>(W));
        Strided dV(gv.data() + base, S, DH, Eigen::OuterStride<>(W));
        dV.noalias() += P.transpose() * dO;
        dP.noalias() = dO * V.transpose();
        for (Eigen::Index i = 0; i < S; ++i) {
          double dot = 0.0;
          for (Eigen::Index j = 0; j <= i; ++j) dot += P(i, j) * dP(i, j);
          for (Eigen::Index j = 0; j <= i; ++j) dP(i, j) = P(i, j) * (dP(i, j) - dot) * inv_sqrt;
          for (Eigen::Index j = i + 1; j < S; ++j) dP(i, j) = 0.0;
        }
        dQ.noalias() += dP * K;
        dK.noalias() += dP.transpose() * Q;
        pofs += seg * seg;
      }
      row0 += seg;
    }
  });
}

std::vector<double> log_softmax(std::span<const double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = row[i] - mx;
  std::vector<double> e(row.size());
  vexp(out.data(), e.data(), e.size());
  const double lse = std::log(std::accumulate(e.begin(), e.end(), 0.0));
  for (double& v : out) v -= lse;
  return out;
}

Var cross_entropy(const Var& logits, std::span<const std::size_t> targets, const std::vector<bool>& mask,
                  std::vector<double>* per_position) {
  const Tensor& lv = logits.value();
  require_matrix(lv, "cross_entropy");
  const std::size_t rows = lv.rows();
  const std::size_t vocab = lv.cols();
  require(targets.size() == rows && mask.size() == rows,
          "cross_entropy: " + std::to_string(rows) + " rows but " + std::to_string(targets.size()) +
              " targets and " + std::to_string(mask.size()) + " mask entries");
  const auto count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  require(count > 0, "cross_entropy: empty mask (every position masked out)");

  Tensor probs({rows, vocab});
  double total = 0.0;
  if (per_position) per_position->assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    require(targets[r] < vocab, "cross_entropy: target " + std::to_string(targets[r]) +
                                    " outside vocabulary of " + std::to_string(vocab));
    const double* in = lv.data() + r * vocab;
    double* p = probs.data() + r * vocab;
    const double mx = *std::max_element(in, in + vocab);
    for (std::size_t c = 0; c < vocab; ++c) p[c] = in[c] - mx;
    vexp(p, p, vocab);
    double sum = 0.0;
    for (std::size_t c = 0; c < vocab; ++c) sum += p[c];
    const double nll = std::log(sum) - (in[targets[r]] - mx);
    const double inv_sum = 1.0 / sum;
    for (std::size_t c = 0; c < vocab; ++c) p[c] *= inv_sum;
    total += nll;
    if (per_position) (*per_position)[r] = nll;
  }
  const double inv = 1.0 / static_cast<double>(count);
  return make_result(Tensor::scalar(total * inv), {logits},
                     [probs = std::move(probs), tg = std::vector<std::size_t>(targets.begin(), targets.end()),
                      mask, inv, vocab](Node& n) {
    double* g = n.parents[0]->grad_buffer().data();
    const double up = n.grad[0] * inv;
    for (std::size_t r = 0; r < tg.size(); ++r) {
      if (!mask[r]) continue;
      double* dst = g + r * vocab;
      const double* p = probs.data() + r * vocab;
      for (std::size_t c = 0; c < vocab; ++c) dst[c] += up * p[c];
      dst[tg[r]] -= up;
    }
  });
}

}  // namespace uniseq::nn
