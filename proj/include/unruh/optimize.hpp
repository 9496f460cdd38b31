#pragma once

// Search over the probability simplex: a deterministic lattice and a
// Nelder-Mead refinement whose trial points are projected back onto the
// simplex.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "unruh/combinat.hpp"
#include "unruh/error.hpp"

namespace unruh {

/// All lattice points c / n of the (d-1)-simplex as integer count vectors, in
/// the lexicographic-descending composition order.
inline std::vector<std::vector<int>> simplex_lattice(int d, int n) {
  detail::require(n >= 1, "simplex_lattice: resolution must be >= 1");
  std::vector<std::vector<int>> out;
  out.reserve(block_dimension(d, n));
  for_each_composition(d, n, [&](std::span<const int> c) { out.emplace_back(c.begin(), c.end()); });
  return out;
}

/// Euclidean projection onto {x : x_i >= 0, sum x_i = 1}.
inline std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumulative += u[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(v[i] - theta, 0.0);
    s += out[i];
  }
  for (double& x : out) x /= s;
  return out;
}

/// Nearest-style rounding of a simplex point to counts c with sum c = n
/// (largest remainder; ties go to the lower index).
inline std::vector<int> round_to_lattice(std::span<const double> x, int n) {
  detail::require(n >= 1, "round_to_lattice: resolution must be >= 1");
  std::vector<int> c(x.size());
  std::vector<std::pair<double, std::size_t>> frac(x.size());
  int used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scaled = std::max(0.0, x[i]) * n;
    c[i] = static_cast<int>(std::floor(scaled));
    frac[i] = {scaled - c[i], i};
    used += c[i];
  }
  std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; used < n; ++j, ++used) ++c[frac[j % frac.size()].second];
  for (std::size_t j = c.size(); used > n && j > 0; --j) {
    // only reachable through rounding noise in x summing above 1
    while (used > n && c[j - 1] > 0) {
      --c[j - 1];
      --used;
    }
  }
  return c;
}

struct SimplexSearchResult {
  std::vector<double> point;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Maximizes f over the probability simplex by Nelder-Mead in the free
/// coordinates (x_1..x_{d-1}), x_d = 1 - sum. Every trial point is projected
/// before evaluation, so f only ever sees feasible points. The start point is
/// a vertex of the initial polytope, hence the result never falls below
/// f(start). Stops once the vertex values agree within `tolerance` and the
/// polytope has shrunk below `x_tolerance` in every free coordinate.
inline SimplexSearchResult nelder_mead_maximize(
    const std::function<double(std::span<const double>)>& f, std::span<const double> start,
    double step, int max_iterations, double tolerance, double x_tolerance = 1e-7) {
  const std::size_t d = start.size();
  detail::require(d >= 2, "nelder_mead_maximize: need at least two coordinates");
  const std::size_t n = d - 1;

  SimplexSearchResult result;
  const auto to_simplex = [&](const std::vector<double>& y) {
    std::vector<double> full(d);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      full[i] = y[i];
      s += y[i];
    }
    full[n] = 1.0 - s;
    return project_to_simplex(full);
  };
  const auto eval = [&](const std::vector<double>& y) {
    ++result.evaluations;
    return f(to_simplex(y));
  };

  struct Vertex {
    std::vector<double> y;
    double value;
    bool is_start = false;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  {
    std::vector<double> y0(start.begin(), start.begin() + static_cast<std::ptrdiff_t>(n));
    // evaluate the start point exactly as given
    ++result.evaluations;
    simplex.push_back({y0, f(start), true});
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> y = y0;
      const double s = std::accumulate(y0.begin(), y0.end(), 0.0);
      y[i] += (s + step <= 1.0) ? step : -step;
      simplex.push_back({y, eval(y)});
    }
  }

  const auto by_value = [](const Vertex& a, const Vertex& b) { return a.value > b.value; };
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  for (result.iterations = 0; result.iterations < max_iterations; ++result.iterations) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    if (simplex.front().value - simplex.back().value <= tolerance) {
      double width = 0.0;
      for (std::size_t v = 1; v <= n; ++v) {
        for (std::size_t i = 0; i < n; ++i) width = std::max(width, std::abs(simplex[v].y[i] - simplex[0].y[i]));
      }
      // equal values alone can mean the vertices straddle a level set
      if (width <= x_tolerance) break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].y[i] / static_cast<double>(n);
    }
    const auto along = [&](const std::vector<double>& from, double t) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = centroid[i] + t * (from[i] - centroid[i]);
      return y;
    };

    Vertex& worst = simplex.back();
    const double second_worst = simplex[n - 1].value;
    Vertex reflected{along(worst.y, -kReflect), 0.0, false};
    reflected.value = eval(reflected.y);

    if (reflected.value > simplex.front().value) {
      Vertex expanded{along(worst.y, -kExpand), 0.0, false};
      expanded.value = eval(expanded.y);
      worst = expanded.value > reflected.value ? expanded : reflected;
      continue;
    }
    if (reflected.value > second_worst) {
      worst = reflected;
      continue;
    }
    const bool outside = reflected.value > worst.value;
    Vertex contracted{along(outside ? reflected.y : worst.y, kContract), 0.0, false};
    contracted.value = eval(contracted.y);
    if (contracted.value > (outside ? reflected.value : worst.value)) {
      worst = contracted;
      continue;
    }
    for (std::size_t v = 1; v <= n; ++v) {
      for (std::size_t i = 0; i < n; ++i) {
        simplex[v].y[i] = simplex[0].y[i] + kShrink * (simplex[v].y[i] - simplex[0].y[i]);
      }
      simplex[v].value = eval(simplex[v].y);
      simplex[v].is_start = false;
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), by_value);
  if (simplex.front().is_start) {
    result.point.assign(start.begin(), start.end());
  } else {
    result.point = to_simplex(simplex.front().y);
  }
  result.value = simplex.front().value;
  return result;
}

}  // namespace unruh
