#pragma once

// Closed-form output spectra of the 1 -> k universal cloner for the cyclic
// optimal ensembles, the Unruh block weights p_k(z) and their truncation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unruh/combinat.hpp"
#include "unruh/error.hpp"

namespace unruh {

struct Atom {
  double probability;
  Count multiplicity;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite distribution stored as (probability, multiplicity) atoms. Atoms are
/// kept unmerged and in construction order.
class Spectrum {
 public:
  Spectrum() = default;

  explicit Spectrum(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    for (const Atom& a : atoms_) {
      detail::require(std::isfinite(a.probability) && a.probability >= 0.0,
                      "Spectrum: probabilities must be finite and >= 0");
      detail::require(a.multiplicity >= 1, "Spectrum: multiplicities must be positive");
    }
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double mass() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.probability * static_cast<double>(a.multiplicity);
    return s;
  }

  Count support_size() const {
    Count n = 0;
    for (const Atom& a : atoms_) n += a.multiplicity;
    return n;
  }

  /// Every eigenvalue repeated by multiplicity, sorted ascending, padded with
  /// zeros up to `min_length`.
  std::vector<double> expanded(std::size_t min_length = 0) const {
    std::vector<double> out;
    for (const Atom& a : atoms_) out.insert(out.end(), a.multiplicity, a.probability);
    if (out.size() < min_length) out.resize(min_length, 0.0);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<Atom> atoms_;
};

/// Probability weights (mu_1, ..., mu_d) of the cyclic ensemble. Also used for
/// the nu_i of the private-capacity ensemble.
class EnsembleParams {
 public:
  static constexpr double kSumTolerance = 1e-12;

  EnsembleParams() = default;

  explicit EnsembleParams(std::vector<double> mu) : mu_(std::move(mu)) {
    detail::require(mu_.size() >= 2, "EnsembleParams: need at least two weights");
    double s = 0.0;
    for (double m : mu_) {
      detail::require(std::isfinite(m) && m >= 0.0, "EnsembleParams: weights must be >= 0");
      s += m;
    }
    detail::require(std::abs(s - 1.0) <= kSumTolerance,
                    "EnsembleParams: weights must sum to 1");
  }

  static EnsembleParams uniform(int d) {
    detail::require(d >= 2, "EnsembleParams: d must be >= 2");
    return EnsembleParams(std::vector<double>(static_cast<std::size_t>(d), 1.0 / d));
  }

  /// The point mass e_j (0-based j).
  static EnsembleParams vertex(int d, int j) {
    detail::require(d >= 2 && j >= 0 && j < d, "EnsembleParams: bad vertex");
    std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
    mu[static_cast<std::size_t>(j)] = 1.0;
    return EnsembleParams(std::move(mu));
  }

  /// mu_i = counts_i / n for a point of the simplex lattice.
  static EnsembleParams from_lattice(std::span<const int> counts, int n) {
    detail::require(n >= 1, "EnsembleParams: lattice resolution must be >= 1");
    std::vector<double> mu(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) mu[i] = static_cast<double>(counts[i]) / n;
    return EnsembleParams(std::move(mu));
  }

  int d() const noexcept { return static_cast<int>(mu_.size()); }
  double operator[](std::size_t i) const { return mu_[i]; }
  std::span<const double> weights() const noexcept { return mu_; }

  /// Cyclic relabeling mu_i -> mu_{i+shift mod d}.
  EnsembleParams rotated(int shift) const {
    std::vector<double> out(mu_.size());
    const auto d = static_cast<int>(mu_.size());
    for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = mu_[static_cast<std::size_t>(((i + shift) % d + d) % d)];
    return EnsembleParams(std::move(out));
  }

 private:
  std::vector<double> mu_;
};

struct UnruhConfig {
  int d = 2;
  double z = 0.0;
  double truncation_eps = 1e-8;
  double log_base = 0.0;  // <= 0 means "use d"
  int hard_cap = 10'000;

  double base() const { return log_base > 0.0 ? log_base : static_cast<double>(d); }

  void validate() const {
    detail::require(d >= 2, "UnruhConfig: d must be >= 2");
    detail::require(z >= 0.0 && z < 1.0, "UnruhConfig: z must lie in [0, 1)");
    detail::require(truncation_eps > 0.0, "UnruhConfig: truncation_eps must be > 0");
    detail::require(log_base <= 0.0 || log_base > 1.0, "UnruhConfig: log_base must be > 1");
    detail::require(hard_cap >= 1, "UnruhConfig: hard_cap must be >= 1");
  }
};

inline Spectrum cloner_spectrum(int d, int k) {
  detail::require(k >= 1, "cloner_spectrum: k must be >= 1");
  const double m = static_cast<double>(block_normalizer(d, k));
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(k));
  for (int b = 1; b <= k; ++b) atoms.push_back({b / m, eigen_multiplicity(d, k, b)});
  return Spectrum(std::move(atoms));
}

namespace detail {

inline void require_ensemble_dim(int d, const EnsembleParams& mu) {
  require(mu.d() == d, "ensemble dimension does not match d = " + std::to_string(d));
}

inline double dot(std::span<const double> mu, std::span<const int> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += mu[i] * b[i];
  return s;
}

}  // namespace detail

/// Eigenvalues alpha(b)/M_k over b in B(k), one atom per composition.
inline Spectrum ensemble_spectrum_B(int d, int k, const EnsembleParams& mu) {
  detail::require(k >= 1, "ensemble_spectrum_B: k must be >= 1");
  detail::require_ensemble_dim(d, mu);
  const double m = static_cast<double>(block_normalizer(d, k));
  std::vector<Atom> atoms;
  for_each_composition(d, k, [&](std::span<const int> b) {
    atoms.push_back({detail::dot(mu.weights(), b) / m, 1});
  });
  return Spectrum(std::move(atoms));
}

/// Eigenvalues gamma(b)/M_k = (1 + mu.b)/M_k over b in B(k-1).
inline Spectrum ensemble_spectrum_E(int d, int k, const EnsembleParams& mu) {
  detail::require(k >= 1, "ensemble_spectrum_E: k must be >= 1");
  detail::require_ensemble_dim(d, mu);
  const double m = static_cast<double>(block_normalizer(d, k));
  std::vector<Atom> atoms;
  for_each_composition(d, k - 1, [&](std::span<const int> b) {
    atoms.push_back({(1.0 + detail::dot(mu.weights(), b)) / m, 1});
  });
  return Spectrum(std::move(atoms));
}

/// p_k(z) = (1-z)^{d+1} z^{k-1} C(k+d-1, d).
inline double unruh_weight(int d, double z, int k) {
  detail::require(d >= 2, "unruh_weight: d must be >= 2");
  detail::require(k >= 1, "unruh_weight: k must be >= 1");
  detail::require(z >= 0.0 && z < 1.0, "unruh_weight: z must lie in [0, 1)");
  if (z == 0.0) return k == 1 ? 1.0 : 0.0;
  // C(k+d-1, d) = prod_{i=1..d} (k-1+i)/i, in floating point
  double log_binom = 0.0;
  for (int i = 1; i <= d; ++i) log_binom += std::log(static_cast<double>(k - 1 + i) / i);
  return std::exp((d + 1) * std::log1p(-z) + (k - 1) * std::log(z) + log_binom);
}

/// Natural log of the block dimension C(k+d-1, d-1), valid far beyond the
/// 64-bit range of block_dimension().
inline double log_block_dimension(int d, int k) {
  double s = 0.0;
  for (int i = 1; i <= d - 1; ++i) s += std::log(static_cast<double>(k + i) / i);
  return s;
}

/// Smallest K >= 1 whose tail sum_{k>K} p_k (1 + log_base dim_k) is certified
/// below cfg.truncation_eps.
///
/// The ratio t_{k+1}/t_k of the tail terms is decreasing in k, so once it
/// drops below sqrt(z) at some index j the remainder past j is majorized by
/// the geometric series t_j sqrt(z) / (1 - sqrt(z)).
inline int truncation_horizon(const UnruhConfig& cfg) {
  cfg.validate();
  if (cfg.z == 0.0) return 1;
  const int d = cfg.d;
  const double z = cfg.z;
  const double ln_base = std::log(cfg.base());
  const double root = std::sqrt(z);
  const auto term = [&](int k) {
    return unruh_weight(d, z, k) * (1.0 + log_block_dimension(d, k) / ln_base);
  };

  // t[k] for k = 1..j*, where j* is the first index with t_{j+1}/t_j <= sqrt(z).
  std::vector<double> t{0.0, term(1)};
  int j_star = 0;
  for (int k = 1;; ++k) {
    if (k > cfg.hard_cap) {
      throw NonConvergence("truncation_horizon: geometric regime not reached before cap " +
                           std::to_string(cfg.hard_cap));
    }
    t.push_back(term(k + 1));
    const double next = t[static_cast<std::size_t>(k + 1)];
    const double cur = t[static_cast<std::size_t>(k)];
    if (cur > 0.0 && next <= root * cur) {
      j_star = k;
      break;
    }
    if (cur == 0.0) {  // underflow: the remaining tail is below double range
      j_star = k;
      break;
    }
  }

  const double majorant_factor = root / (1.0 - root);
  // B(K) = sum_{k=K+1}^{j} t_k + t_j * majorant_factor, j = max(K+1, j*).
  // Sum t over (K, j*] by suffix accumulation.
  std::vector<double> suffix(static_cast<std::size_t>(j_star) + 2, 0.0);
  for (int k = j_star; k >= 1; --k) {
    suffix[static_cast<std::size_t>(k)] = suffix[static_cast<std::size_t>(k) + 1] + t[static_cast<std::size_t>(k)];
  }
  for (int K = 1; K < j_star; ++K) {
    const double bound = suffix[static_cast<std::size_t>(K) + 1] +
                         t[static_cast<std::size_t>(j_star)] * majorant_factor;
    if (bound <= cfg.truncation_eps) return K;
  }
  // Past j*, the bound is t_{K+1} (1 + majorant_factor) <= t_{j*} r^{K+1-j*}(...).
  double tk1 = t[static_cast<std::size_t>(j_star) + 1];
  for (int K = std::max(1, j_star);; ++K) {
    if (K > cfg.hard_cap) {
      throw NonConvergence("truncation_horizon: K exceeds hard cap " +
                           std::to_string(cfg.hard_cap));
    }
    if (tk1 * (1.0 + majorant_factor) <= cfg.truncation_eps) return K;
    tk1 = term(K + 2);
  }
}

/// Truncated Unruh weights p_1..p_K.
inline std::vector<double> unruh_weights(const UnruhConfig& cfg, int K) {
  std::vector<double> w(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) w[static_cast<std::size_t>(k - 1)] = unruh_weight(cfg.d, cfg.z, k);
  return w;
}

}  // namespace unruh
