#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uniseq/nn/autograd.hpp"

namespace uniseq::nn {

// Counts attention score-matrix entries: every call adds the square of each
// segment length, independent of head count and masking.
struct AttentionCounter {
  std::uint64_t score_entries = 0;
  std::uint64_t calls = 0;
};

Var matmul(const Var& a, const Var& b);
// x[m,k] * w[k,n] + b[n]
Var linear(const Var& x, const Var& w, const Var& b);
Var add(const Var& a, const Var& b);
// x[m,n] + b[n] broadcast over rows
Var add_row(const Var& x, const Var& b);
Var scale(const Var& x, double s);
Var gelu(const Var& x);
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);
Var reshape(const Var& x, std::size_t rows, std::size_t cols);

// out[i] = table[ids[i]]
Var gather_rows(const Var& table, std::span<const std::size_t> ids);

struct BagEntry {
  std::size_t id;
  double weight;
};
// out[i] = sum_j bags[i][j].weight * table[bags[i][j].id]; empty bag -> zero row
Var embedding_bag(const Var& table, const std::vector<std::vector<BagEntry>>& bags);

// out = base; out[rows[i]] += src[i]
Var scatter_add_rows(const Var& base, const Var& src, std::span<const std::size_t> rows);
// Each row of x repeated `times` times consecutively.
Var repeat_rows(const Var& x, std::size_t times);
Var concat_rows(const Var& a, const Var& b);

// Multi-head causal attention over already-projected q, k, v [N, D]. Rows are
// split into consecutive segments (lengths summing to N); a row attends to
// rows of its own segment at or before it, never across segments.
Var segment_causal_attention(const Var& q, const Var& k, const Var& v, std::size_t heads,
                             std::span<const std::size_t> segments, AttentionCounter* counter);

// Mean negative log-likelihood of targets over rows with mask[i] set.
// per_position, if given, receives the NLL of every row (0 where masked out).
Var cross_entropy(const Var& logits, std::span<const std::size_t> targets,
                  const std::vector<bool>& mask, std::vector<double>* per_position = nullptr);

// Numerically stable log-softmax of one row.
std::vector<double> log_softmax(std::span<const double> row);

}  // namespace uniseq::nn
