#pragma once

// Exact integer combinatorics of the symmetric (bosonic) subspace: occupation
// vectors, block dimensions and the eigenvalue multiplicities of the
// universal cloner output.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unruh/error.hpp"

namespace unruh {

using Count = std::uint64_t;

/// A point of N(k): d nonnegative occupation numbers summing to k. Indexes a
/// basis state of the k-excitation symmetric subspace.
class OccupationVector {
 public:
  OccupationVector() = default;

  explicit OccupationVector(std::vector<int> entries) : entries_(std::move(entries)) {
    detail::require(entries_.size() >= 2, "OccupationVector: dimension must be >= 2");
    for (int n : entries_) {
      detail::require(n >= 0, "OccupationVector: entries must be nonnegative");
      weight_ += n;
    }
  }

  std::size_t dim() const noexcept { return entries_.size(); }
  int weight() const noexcept { return weight_; }
  int operator[](std::size_t i) const { return entries_[i]; }
  std::span<const int> entries() const noexcept { return entries_; }

  /// Adds one excitation to mode i (the action of a creation operator up to
  /// its sqrt(1+n_i) amplitude).
  OccupationVector raised(std::size_t i) const {
    OccupationVector out = *this;
    ++out.entries_.at(i);
    ++out.weight_;
    return out;
  }

  friend bool operator==(const OccupationVector&, const OccupationVector&) = default;
  friend auto operator<=>(const OccupationVector& a, const OccupationVector& b) {
    return a.entries_ <=> b.entries_;
  }

 private:
  std::vector<int> entries_;
  int weight_ = 0;
};

/// Exact binomial coefficient. Throws OverflowError if the result does not
/// fit in 64 bits.
inline Count binomial(Count n, Count r) {
  __extension__ using Wide = unsigned __int128;
  if (r > n) return 0;
  if (r > n - r) r = n - r;
  Wide c = 1;
  for (Count i = 0; i < r; ++i) {
    // c * (n - i) is divisible by (i + 1): it equals (i + 1) * C(n, i + 1).
    c = c * (n - i) / (i + 1);
    if (c > std::numeric_limits<Count>::max()) {
      throw OverflowError("binomial(" + std::to_string(n) + ", " + std::to_string(r) +
                          ") exceeds 64-bit range");
    }
  }
  return static_cast<Count>(c);
}

/// Visits every composition of k into d nonnegative parts in lexicographic
/// descending order, starting at (k,0,...,0) and ending at (0,...,0,k). The
/// span passed to `f` is reused between calls.
template <typename F>
void for_each_composition(int d, int k, F&& f) {
  detail::require(d >= 2, "compositions: d must be >= 2");
  detail::require(k >= 0, "compositions: k must be >= 0");
  std::vector<int> a(static_cast<std::size_t>(d), 0);
  a[0] = k;
  const auto last = static_cast<std::size_t>(d - 1);
  for (;;) {
    f(std::span<const int>(a));
    // rightmost nonzero entry strictly before the last position
    std::size_t i = last;
    while (i > 0 && a[i - 1] == 0) --i;
    if (i == 0) return;
    --i;
    const int tail = a[last] + (i + 1 == last ? 0 : a[i + 1]);
    --a[i];
    if (i + 1 == last) {
      ++a[last];
    } else {
      a[i + 1] = tail + 1;
      a[last] = 0;
    }
  }
}

inline std::vector<OccupationVector> compositions(int d, int k) {
  std::vector<OccupationVector> out;
  for_each_composition(d, k, [&](std::span<const int> c) {
    out.emplace_back(std::vector<int>(c.begin(), c.end()));
  });
  return out;
}

/// Dimension C(k+d-1, d-1) of the k-excitation block. k = 0 is accepted and
/// gives the one-dimensional vacuum sector.
inline Count block_dimension(int d, int k) {
  detail::require(d >= 2, "block_dimension: d must be >= 2");
  detail::require(k >= 0, "block_dimension: k must be >= 0");
  return binomial(static_cast<Count>(k + d - 1), static_cast<Count>(d - 1));
}

/// Trace normalizer M_k = C(k+d-1, d) of the k-th cloner block.
inline Count block_normalizer(int d, int k) {
  detail::require(d >= 2, "block_normalizer: d must be >= 2");
  detail::require(k >= 1, "block_normalizer: k must be >= 1");
  return binomial(static_cast<Count>(k + d - 1), static_cast<Count>(d));
}

/// Multiplicity m_b = C(k-b+d-2, d-2) of the eigenvalue b / M_k.
inline Count eigen_multiplicity(int d, int k, int b) {
  detail::require(d >= 2, "eigen_multiplicity: d must be >= 2");
  detail::require(b >= 1 && b <= k, "eigen_multiplicity: b must lie in [1, k]");
  return binomial(static_cast<Count>(k - b + d - 2), static_cast<Count>(d - 2));
}

/// Ordered basis of a symmetric block with reverse lookup.
class CompositionBasis {
 public:
  CompositionBasis(int d, int k) : d_(d), k_(k), states_(compositions(d, k)) {
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
  }

  int d() const noexcept { return d_; }
  int k() const noexcept { return k_; }
  std::size_t size() const noexcept { return states_.size(); }
  const OccupationVector& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<OccupationVector>& states() const noexcept { return states_; }

  std::size_t index_of(const OccupationVector& v) const {
    auto it = index_.find(v);
    detail::require(it != index_.end(), "CompositionBasis: vector not in basis");
    return it->second;
  }

 private:
  int d_;
  int k_;
  std::vector<OccupationVector> states_;
  std::map<OccupationVector, std::size_t> index_;
};

}  // namespace unruh
