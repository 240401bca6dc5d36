#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "netprec/errors.hpp"
#include "netprec/matrix.hpp"

namespace netprec {

// Known graphical structure: for each column i the sorted list of indices
// where the precision matrix may be nonzero. Every support contains i itself
// (a positive definite precision matrix has a nonzero diagonal) and
// membership is symmetric. Immutable after construction.
class GraphStructure {
public:
  // Builds from explicit supports; validates order, range, diagonal
  // membership, and symmetric membership.
  GraphStructure(std::size_t p, std::vector<std::vector<std::size_t>> supports)
      : p_(p), supports_(std::move(supports)) {
    if (supports_.size() != p_)
      throw DimensionMismatch("structure needs one support per column");
    std::size_t off_diag = 0;
    for (std::size_t i = 0; i < p_; ++i) {
      const auto& s = supports_[i];
      bool self = false;
      for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] >= p_) throw IndexOutOfRange("support index out of range");
        if (k > 0 && s[k] <= s[k - 1])
          throw ConfigError("support of column " + std::to_string(i) +
                            " is not strictly increasing");
        if (s[k] == i) self = true;
      }
      if (!self)
        throw ConfigError("support of column " + std::to_string(i) + " must contain " +
                          std::to_string(i));
      off_diag += s.size() - 1;
    }
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j : supports_[i])
        if (!std::binary_search(supports_[j].begin(), supports_[j].end(), i))
          throw NotSymmetric("support membership is not symmetric between " +
                             std::to_string(i) + " and " + std::to_string(j));
    edge_count_ = off_diag / 2;
  }

  std::size_t p() const { return p_; }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<std::size_t>& support(std::size_t i) const { return supports_[i]; }
  std::size_t support_size(std::size_t i) const { return supports_[i].size(); }

  // Largest support size, the working definition of s0 for diagnostics.
  std::size_t max_support_size() const {
    std::size_t m = 0;
    for (const auto& s : supports_) m = std::max(m, s.size());
    return m;
  }

private:
  std::size_t p_;
  std::vector<std::vector<std::size_t>> supports_;
  std::size_t edge_count_ = 0;
};

// Builds the structure from a 0/1 adjacency matrix. The diagonal is forced
// into every support regardless of a(i,i). Asymmetry is a hard error, never
// silently closed: a lopsided adjacency usually means a data-preparation bug.
inline GraphStructure from_adjacency(const DenseMatrix& a) {
  if (!a.square()) throw NotSquare("adjacency matrix must be square");
  const std::size_t p = a.rows();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const double v = a(i, j);
      if (v != 0.0 && v != 1.0)
        throw NotBinary("adjacency entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") is not 0 or 1");
    }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (a(i, j) != a(j, i))
        throw NotSymmetric("adjacency entries (" + std::to_string(i) + "," +
                           std::to_string(j) + ") and transpose differ");

  std::vector<std::vector<std::size_t>> supports(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j)
      if (j == i || a(i, j) == 1.0) supports[i].push_back(j);
  }
  return GraphStructure(p, std::move(supports));
}

// Index-list representation of the 0/1 selection matrix picking out one
// column's support; pivot is the position of the column index inside it.
// The p x s matrix itself is never materialized.
struct SelectionMap {
  std::size_t column;
  std::vector<std::size_t> support;
  std::size_t pivot;
};

inline SelectionMap selection(const GraphStructure& g, std::size_t i) {
  if (i >= g.p()) throw IndexOutOfRange("column " + std::to_string(i) + " out of range");
  const auto& s = g.support(i);
  const auto it = std::lower_bound(s.begin(), s.end(), i);
  return SelectionMap{i, s, static_cast<std::size_t>(it - s.begin())};
}

// B^T S B: the support-rows/columns submatrix of a p x p matrix.
inline DenseMatrix extract_submatrix(const DenseMatrix& s, const SelectionMap& map) {
  if (!s.square()) throw DimensionMismatch("extract_submatrix requires a square matrix");
  const std::size_t k = map.support.size();
  if (k > 0 && map.support.back() >= s.rows())
    throw DimensionMismatch("selection support exceeds matrix dimension");
  DenseMatrix sub(k, k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) sub(a, b) = s(map.support[a], map.support[b]);
  return sub;
}

// B v: places support values into a length-p vector, zero elsewhere.
inline std::vector<double> scatter_column(const std::vector<double>& values,
                                          const SelectionMap& map, std::size_t p) {
  if (values.size() != map.support.size())
    throw DimensionMismatch("scatter_column: value count does not match support size");
  if (!map.support.empty() && map.support.back() >= p)
    throw DimensionMismatch("scatter_column: support exceeds target length");
  std::vector<double> out(p, 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) out[map.support[k]] = values[k];
  return out;
}

}  // namespace netprec
