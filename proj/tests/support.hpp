#pragma once

// Seeded generators and brute-force oracles shared by the unit suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "unruh/spectra.hpp"

namespace testing_support {

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Random point of the simplex: normalized exponentials (flat Dirichlet),
/// with each coordinate zeroed with probability `zero_rate` to hit faces.
inline unruh::EnsembleParams random_ensemble(int d, std::mt19937_64& rng, double zero_rate = 0.15) {
  std::vector<double> w(static_cast<std::size_t>(d));
  double s = 0.0;
  for (double& x : w) {
    x = uniform01(rng) < zero_rate ? 0.0 : -std::log(1.0 - uniform01(rng));
    s += x;
  }
  if (s == 0.0) {
    w[static_cast<std::size_t>(uniform_int(rng, 0, d - 1))] = 1.0;
    s = 1.0;
  }
  for (double& x : w) x /= s;
  // absorb the rounding residue so the sum is 1 to the last bit or so
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) rest -= w[i];
  w.back() = std::max(0.0, rest);
  return unruh::EnsembleParams(std::move(w));
}

/// Every d-tuple in [0,k]^d summing to k, sorted lexicographically descending.
inline std::vector<std::vector<int>> brute_compositions(int d, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> t(static_cast<std::size_t>(d), 0);
  std::function<void(int)> rec = [&](int i) {
    if (i == d) {
      int s = 0;
      for (int x : t) s += x;
      if (s == k) out.push_back(t);
      return;
    }
    for (int v = 0; v <= k; ++v) {
      t[static_cast<std::size_t>(i)] = v;
      rec(i + 1);
    }
  };
  rec(0);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Pascal's triangle in doubles; exact for the small n used in tests.
inline double pascal(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  std::vector<double> row{1.0};
  for (int i = 1; i <= n; ++i) {
    std::vector<double> next(static_cast<std::size_t>(i) + 1, 1.0);
    for (int j = 1; j < i; ++j) next[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j) - 1] + row[static_cast<std::size_t>(j)];
    row = std::move(next);
  }
  return row[static_cast<std::size_t>(r)];
}

/// -sum p log_base p over a plain probability list.
inline double plain_entropy(const std::vector<double>& p, double base) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h / std::log(base);
}

}  // namespace testing_support
