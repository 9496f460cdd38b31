#pragma once

// Trade-off regions of the 1 -> k cloner and the truncated Unruh channel:
// CQ / CE curves, CQE (quantum dynamic) bounds, RPS (private dynamic)
// bounds, the dynamic capacity formula and 2-D Pareto hulls.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unruh/entropy.hpp"
#include "unruh/error.hpp"
#include "unruh/model.hpp"
#include "unruh/optimize.hpp"
#include "unruh/parallel.hpp"
#include "unruh/spectra.hpp"

namespace unruh {

struct RatePair {
  double x = 0.0;
  double y = 0.0;
};

/// Right-hand sides of C + 2Q <= b1, Q + E <= b2, C + Q + E <= b3.
struct CqeBounds {
  double b1 = 0.0;  // I(AX;B)
  double b2 = 0.0;  // I(A>BX)
  double b3 = 0.0;  // I(X;B) + I(A>BX)
};

/// Right-hand sides of R + P, P + S and R + P + S.
struct RpsBounds {
  double rp = 0.0;
  double ps = 0.0;
  double rps = 0.0;
};

/// Lagrange weights (lambda, mu) of the dynamic capacity formula. Not to be
/// confused with the ensemble weights mu_i.
struct CapacityWeights {
  double lambda = 0.0;
  double mu = 0.0;

  void validate() const {
    detail::require(std::isfinite(lambda) && lambda >= 0.0, "CapacityWeights: lambda must be >= 0");
    detail::require(std::isfinite(mu) && mu >= 0.0, "CapacityWeights: mu must be >= 0");
  }
};

struct ChannelTag {
  int d = 2;
  std::optional<int> k;
  std::optional<double> z;
  int horizon = 1;
  double base = 2.0;

  static ChannelTag of(const ChannelModel& m) {
    return {m.d(), m.k(), m.z(), m.horizon(), m.base()};
  }
};

/// A rate tuple together with the parameters that generated it.
struct RegionSample {
  std::vector<double> rates;
  EnsembleParams ensemble;
  ChannelTag channel;
};

// ---------------------------------------------------------------------------
// Entropy triples and region points

inline EntropyTriple cloner_entropy_triple(int d, int k, const EnsembleParams& mu, double base) {
  return evaluate(ChannelModel::cloner(d, k, base), mu).weighted;
}

/// Aggregated Unruh entropies with per-block values attached.
inline ModelEntropies unruh_entropy_triple(const UnruhConfig& cfg, const EnsembleParams& mu) {
  return evaluate(ChannelModel::unruh(cfg), mu, /*keep_blocks=*/true);
}

/// (C, Q) = (I(X;B), I(A>BX)).
inline RatePair cq_point(const EntropyTriple& t) {
  return {t.h_B - t.h_B_given_X, t.h_B_given_X - t.h_E_given_X};
}

/// (C, E) = (I(AX;B), H(A|X)).
inline RatePair ce_point(const EntropyTriple& t) {
  return {t.h_B + t.h_A_given_X - t.h_E_given_X, t.h_A_given_X};
}

inline CqeBounds cqe_bounds(const EntropyTriple& t) {
  const double coherent = t.h_B_given_X - t.h_E_given_X;
  const double b3 = t.h_B - t.h_E_given_X;
  return {t.h_A_given_X + b3, coherent, b3};
}

/// Private-region bounds from aggregated entropies. R + P uses
/// H(B|XY) = -sum_b m_b (b/M) log(b/M) >= 0 per block.
inline RpsBounds rps_bounds(const ModelEntropies& e) {
  const EntropyTriple& w = e.weighted;
  return {w.h_B - e.weighted_h_B_given_XY, w.h_B_given_X - w.h_E_given_X, w.h_B - w.h_E_given_X};
}

inline RpsBounds rps_bounds(const UnruhConfig& cfg, const EnsembleParams& nu) {
  return rps_bounds(evaluate(ChannelModel::unruh(cfg), nu));
}

/// I(AX;B) + lambda I(A>BX) + mu (I(X;B) + I(A>BX)).
inline double dynamic_objective(const EntropyTriple& t, const CapacityWeights& w) {
  const CqeBounds b = cqe_bounds(t);
  return b.b1 + w.lambda * b.b2 + w.mu * b.b3;
}

// ---------------------------------------------------------------------------
// Grid sweeps

inline int default_grid(int d) { return d <= 3 ? 64 : 16; }

struct GridPoint {
  std::vector<int> counts;  // ensemble = counts / resolution
  int resolution = 1;
  EnsembleParams ensemble;
  ModelEntropies entropies;
};

/// Evaluates every lattice ensemble c / n via lattice counting, in lattice
/// order. When d does not divide n the uniform ensemble, where the CQ and CE
/// boundaries end, is appended so those endpoints are always sampled exactly.
inline std::vector<GridPoint> sweep_lattice(const ChannelModel& model, int n) {
  const int d = model.d();
  const auto lattice = simplex_lattice(d, n);
  const LatticeEvaluator evaluator(model, n);
  const bool add_center = n % d != 0;
  std::vector<GridPoint> out(lattice.size() + (add_center ? 1 : 0));
  parallel_for(lattice.size(), [&](std::size_t i) {
    out[i].counts = lattice[i];
    out[i].resolution = n;
    out[i].ensemble = EnsembleParams::from_lattice(lattice[i], n);
    out[i].entropies = evaluator.evaluate(lattice[i]);
  });
  if (add_center) {
    GridPoint& c = out.back();
    c.counts.assign(static_cast<std::size_t>(d), 1);
    c.resolution = d;
    c.ensemble = EnsembleParams::uniform(d);
    c.entropies = LatticeEvaluator(model, d).evaluate(c.counts);
  }
  return out;
}

inline std::vector<RegionSample> cq_samples(const ChannelModel& model, std::span<const GridPoint> grid) {
  std::vector<RegionSample> out;
  out.reserve(grid.size());
  for (const GridPoint& g : grid) {
    const RatePair p = cq_point(g.entropies.weighted);
    out.push_back({{p.x, p.y}, g.ensemble, ChannelTag::of(model)});
  }
  return out;
}

inline std::vector<RegionSample> ce_samples(const ChannelModel& model, std::span<const GridPoint> grid) {
  std::vector<RegionSample> out;
  out.reserve(grid.size());
  for (const GridPoint& g : grid) {
    const RatePair p = ce_point(g.entropies.weighted);
    out.push_back({{p.x, p.y}, g.ensemble, ChannelTag::of(model)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pareto hull in 2-D

/// Which direction is "better" along y. CQ maximizes both rates; CE
/// maximizes C while minimizing the entanglement E consumed.
enum class YSense { Maximize, Minimize };

inline constexpr double kHullCollinearity = 1e-9;

/// Indices of the vertices of the Pareto boundary of the convex hull of
/// `points`, ordered by increasing x. The boundary runs from the best-y
/// vertex to the max-x vertex; dominated, interior and collinear points are
/// dropped.
inline std::vector<std::size_t> pareto_hull_indices(std::span<const RatePair> points,
                                                    YSense sense = YSense::Maximize) {
  detail::require(!points.empty(), "pareto_hull_2d: need at least one sample");
  const double s = sense == YSense::Maximize ? 1.0 : -1.0;
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].x != points[b].x) return points[a].x < points[b].x;
    return s * points[a].y < s * points[b].y;
  });
  const auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    const double ax = points[a].x - points[o].x, ay = s * (points[a].y - points[o].y);
    const double bx = points[b].x - points[o].x, by = s * (points[b].y - points[o].y);
    return ax * by - ay * bx;
  };
  // upper hull (in transformed coordinates), left to right
  std::vector<std::size_t> hull;
  for (std::size_t idx : order) {
    if (!hull.empty() && points[hull.back()].x == points[idx].x) hull.pop_back();
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), idx) >= -kHullCollinearity) {
      hull.pop_back();
    }
    hull.push_back(idx);
  }
  // keep from the best-y vertex onwards (ties: the one furthest right)
  std::size_t start = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (s * points[hull[i]].y >= best - kHullCollinearity) {
      if (s * points[hull[i]].y > best) best = s * points[hull[i]].y;
      start = i;
    }
  }
  return {hull.begin() + static_cast<std::ptrdiff_t>(start), hull.end()};
}

inline std::vector<RegionSample> pareto_hull_2d(std::span<const RegionSample> samples,
                                                YSense sense = YSense::Maximize) {
  std::vector<RatePair> pts;
  pts.reserve(samples.size());
  for (const RegionSample& r : samples) {
    detail::require(r.rates.size() == 2, "pareto_hull_2d: samples must be 2-D");
    pts.push_back({r.rates[0], r.rates[1]});
  }
  std::vector<RegionSample> out;
  for (std::size_t i : pareto_hull_indices(pts, sense)) out.push_back(samples[i]);
  return out;
}

/// Boundary ordinate at abscissa x. Left of the first vertex the boundary is
/// flat (region closed towards worse x); right of the last vertex it is
/// undefined and NaN is returned.
inline double boundary_y_at(std::span<const RatePair> boundary, double x) {
  detail::require(!boundary.empty(), "boundary_y_at: empty boundary");
  if (x <= boundary.front().x) return boundary.front().y;
  for (std::size_t i = 1; i < boundary.size(); ++i) {
    const RatePair& a = boundary[i - 1];
    const RatePair& b = boundary[i];
    if (x <= b.x) {
      const double t = (x - a.x) / (b.x - a.x);
      return a.y + t * (b.y - a.y);
    }
  }
  return x <= boundary.back().x ? boundary.back().y : std::numeric_limits<double>::quiet_NaN();
}

/// Advantage of the Pareto boundary over the time-sharing chord joining its
/// two endpoints, measured at the chord's midpoint abscissa. Positive means
/// trade-off coding beats time-sharing.
inline double time_sharing_gap(std::span<const RatePair> boundary, YSense sense = YSense::Maximize) {
  detail::require(!boundary.empty(), "time_sharing_gap: empty boundary");
  RatePair first = boundary.front();
  const RatePair last = boundary.back();
  if (sense == YSense::Maximize) first.x = 0.0;  // downward-closed region reaches the y axis
  const double x_mid = 0.5 * (first.x + last.x);
  const double chord = 0.5 * (first.y + last.y);
  const double s = sense == YSense::Maximize ? 1.0 : -1.0;
  return s * (boundary_y_at(boundary, x_mid) - chord);
}

/// Builds the boundary polyline of a CQ or CE sample set.
inline std::vector<RatePair> boundary_polyline(std::span<const RegionSample> samples, YSense sense) {
  std::vector<RatePair> out;
  for (const RegionSample& r : pareto_hull_2d(samples, sense)) out.push_back({r.rates[0], r.rates[1]});
  return out;
}

// ---------------------------------------------------------------------------
// CQE corner cloud

/// Unit protocol rays (C, Q, E) that extend each one-state region. E is the
/// entanglement generation rate, negative when entanglement is consumed.
inline constexpr std::array<double, 3> kTeleportationRay{-2.0, 1.0, -1.0};
inline constexpr std::array<double, 3> kSuperDenseRay{2.0, -1.0, -1.0};
inline constexpr std::array<double, 3> kEntanglementDistributionRay{0.0, -1.0, 1.0};

struct CqeCorner {
  EnsembleParams ensemble;
  std::string kind;  // "apex", "tp", "sd", "ed"
  std::array<double, 3> point{};
  CqeBounds bounds;
};

/// Apex of {C+2Q <= b1, Q+E <= b2, C+Q+E <= b3}: all three hold with
/// equality at (b3 - b2, (b1 - b3 + b2)/2, (b2 - b1 + b3)/2).
inline std::array<double, 3> cqe_apex(const CqeBounds& b) {
  const double q = 0.5 * (b.b2 + b.b1 - b.b3);
  const double e = 0.5 * (b.b2 - b.b1 + b.b3);
  return {b.b3 - b.b2, q, e};
}

/// Number of the three CQE inequalities met with equality (within tol).
inline int cqe_active_constraints(const std::array<double, 3>& p, const CqeBounds& b, double tol = 1e-12) {
  const double scale = 1.0 + std::abs(b.b1) + std::abs(b.b2) + std::abs(b.b3);
  int n = 0;
  if (std::abs(p[0] + 2 * p[1] - b.b1) <= tol * scale) ++n;
  if (std::abs(p[1] + p[2] - b.b2) <= tol * scale) ++n;
  if (std::abs(p[0] + p[1] + p[2] - b.b3) <= tol * scale) ++n;
  return n;
}

inline bool cqe_feasible(const std::array<double, 3>& p, const CqeBounds& b, double tol = 1e-12) {
  const double scale = 1.0 + std::abs(b.b1) + std::abs(b.b2) + std::abs(b.b3);
  return p[0] + 2 * p[1] <= b.b1 + tol * scale && p[1] + p[2] <= b.b2 + tol * scale &&
         p[0] + p[1] + p[2] <= b.b3 + tol * scale;
}

/// For every grid ensemble: the apex plus one unit step along each of the
/// TP, SD and ED rays. Each emitted point lies on at least two of the three
/// bounding planes.
inline std::vector<CqeCorner> region_surface_cqe(const ChannelModel& model, std::span<const GridPoint> grid) {
  std::vector<CqeCorner> out;
  out.reserve(4 * grid.size());
  const std::array<std::pair<const char*, std::array<double, 3>>, 3> rays{{
      {"tp", kTeleportationRay}, {"sd", kSuperDenseRay}, {"ed", kEntanglementDistributionRay}}};
  (void)model;
  for (const GridPoint& g : grid) {
    const CqeBounds b = cqe_bounds(g.entropies.weighted);
    const auto apex = cqe_apex(b);
    out.push_back({g.ensemble, "apex", apex, b});
    for (const auto& [name, ray] : rays) {
      out.push_back({g.ensemble, name, {apex[0] + ray[0], apex[1] + ray[1], apex[2] + ray[2]}, b});
    }
  }
  return out;
}

inline std::vector<CqeCorner> region_surface_cqe(const UnruhConfig& cfg, int grid) {
  const ChannelModel model = ChannelModel::unruh(cfg);
  const auto points = sweep_lattice(model, grid);
  return region_surface_cqe(model, points);
}

// ---------------------------------------------------------------------------
// Dynamic capacity

struct OptimizerOptions {
  int grid = 0;  // 0: default_grid(d)
  int max_iterations = 200;
  double tolerance = 1e-9;
  /// Above this many spectrum atoms per evaluation, refinement switches from
  /// enumeration to lattice counting at resolution grid * refine_factor.
  double enumeration_budget = 4e6;
  int refine_factor = 16;
};

struct DynamicCapacityResult {
  double value = 0.0;
  EnsembleParams argmax;
  double grid_value = 0.0;
  EnsembleParams grid_argmax;
  int iterations = 0;
  int evaluations = 0;
};

/// Number of atoms an enumeration-route evaluation visits.
inline double enumeration_cost(const ChannelModel& model) {
  double atoms = 0.0;
  for (int k : model.blocks()) {
    atoms += std::exp(log_block_dimension(model.d(), k)) + std::exp(log_block_dimension(model.d(), k - 1));
  }
  return atoms;
}

/// Maximizes the dynamic capacity objective over the ensemble simplex. The
/// lattice sweep runs once at construction and is shared across weight
/// pairs; solve() is const and safe to call concurrently.
class DynamicCapacitySolver {
 public:
  DynamicCapacitySolver(ChannelModel model, OptimizerOptions opts = {})
      : model_(std::move(model)), opts_(opts) {
    if (opts_.grid <= 0) opts_.grid = default_grid(model_.d());
    detail::require(opts_.max_iterations >= 0, "OptimizerOptions: max_iterations must be >= 0");
    detail::require(opts_.tolerance > 0.0, "OptimizerOptions: tolerance must be > 0");
    detail::require(opts_.refine_factor >= 1, "OptimizerOptions: refine_factor must be >= 1");
    if (enumeration_cost(model_) > opts_.enumeration_budget) {
      fine_ = std::make_shared<LatticeEvaluator>(model_, opts_.grid * opts_.refine_factor);
    }
    grid_ = std::make_shared<const std::vector<GridPoint>>(sweep_lattice(model_, opts_.grid));
  }

  const ChannelModel& model() const noexcept { return model_; }
  const OptimizerOptions& options() const noexcept { return opts_; }
  /// True when refinement runs on the fine lattice instead of enumeration.
  bool refines_on_lattice() const noexcept { return fine_ != nullptr; }

  const std::vector<GridPoint>& grid() const noexcept { return *grid_; }

  DynamicCapacityResult solve(const CapacityWeights& w) const {
    w.validate();
    const auto& points = grid();
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double v = dynamic_objective(points[i].entropies.weighted, w);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    DynamicCapacityResult r;
    r.grid_value = best_value;
    r.grid_argmax = points[best].ensemble;

    const int fine_n = opts_.grid * opts_.refine_factor;
    const auto objective = [&](std::span<const double> mu) {
      if (fine_) return dynamic_objective(fine_->evaluate(round_to_lattice(mu, fine_n)).weighted, w);
      return dynamic_objective(evaluate(model_, EnsembleParams(std::vector<double>(mu.begin(), mu.end()))).weighted, w);
    };
    const auto start = points[best].ensemble.weights();
    // on the fine lattice the objective is flat below 1/fine_n
    const double x_tol = fine_ ? 0.5 / fine_n : 1e-7;
    const SimplexSearchResult nm = nelder_mead_maximize(objective, start, 1.0 / opts_.grid,
                                                        opts_.max_iterations, opts_.tolerance, x_tol);
    r.iterations = nm.iterations;
    r.evaluations = nm.evaluations;
    // the refined point is never worse than its start; keep the lattice
    // value if it is marginally higher through the two evaluation routes
    if (nm.value >= best_value) {
      r.value = nm.value;
      r.argmax = fine_ ? EnsembleParams::from_lattice(round_to_lattice(nm.point, fine_n), fine_n)
                       : EnsembleParams(nm.point);
    } else {
      r.value = best_value;
      r.argmax = r.grid_argmax;
    }
    return r;
  }

 private:
  ChannelModel model_;
  OptimizerOptions opts_;
  std::shared_ptr<const LatticeEvaluator> fine_;
  std::shared_ptr<const std::vector<GridPoint>> grid_;
};

inline DynamicCapacityResult dynamic_capacity(const UnruhConfig& cfg, const CapacityWeights& w,
                                              const OptimizerOptions& opts = {}) {
  return DynamicCapacitySolver(ChannelModel::unruh(cfg), opts).solve(w);
}

}  // namespace unruh
