#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "unruh/error.hpp"
#include "unruh/spectra.hpp"

namespace unruh {

/// Entropy in units of log_base (dits when base = d).
struct EntropyValue {
  double value = 0.0;
  double base = 2.0;
};

inline constexpr double kProbabilityFloor = 1e-15;
inline constexpr double kMassTolerance = 1e-9;

namespace detail {

inline void require_base(double base) {
  require(std::isfinite(base) && base > 1.0, "entropy: log base must be > 1");
}

/// -p ln p with probabilities under kProbabilityFloor treated as zero.
inline double neg_plogp(double p) {
  return p < kProbabilityFloor ? 0.0 : -p * std::log(p);
}

}  // namespace detail

inline EntropyValue shannon_entropy(const Spectrum& s, double base) {
  detail::require_base(base);
  const double mass = s.mass();
  if (std::abs(mass - 1.0) > kMassTolerance) {
    throw InvalidArgument("shannon_entropy: spectrum mass " + std::to_string(mass) +
                          " deviates from 1");
  }
  double h = 0.0;
  for (const Atom& a : s.atoms()) h += static_cast<double>(a.multiplicity) * detail::neg_plogp(a.probability);
  return {h / std::log(base), base};
}

/// Entropy of a block-orthogonal direct sum sum_k p_k rho_k:
/// sum_k (-p_k log p_k + p_k H(rho_k)). Weights may sum to less than one
/// (truncated tail).
inline EntropyValue mixture_entropy(std::span<const double> weights,
                                    std::span<const EntropyValue> components, double base) {
  detail::require_base(base);
  detail::require(weights.size() == components.size(),
                  "mixture_entropy: weights and components differ in length");
  const double ln_base = std::log(base);
  double h = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    detail::require(weights[i] >= 0.0, "mixture_entropy: weights must be >= 0");
    total += weights[i];
    detail::require(total <= 1.0 + 1e-12, "mixture_entropy: weights sum above 1");
    detail::require(components[i].base == base, "mixture_entropy: mixed log bases");
    h += detail::neg_plogp(weights[i]) / ln_base + weights[i] * components[i].value;
  }
  return {h, base};
}

/// H(A|X) = -sum_i mu_i log mu_i for the cyclic ensemble.
inline EntropyValue ensemble_conditional_entropy_A(const EnsembleParams& mu, double base) {
  detail::require_base(base);
  double h = 0.0;
  for (double m : mu.weights()) h += detail::neg_plogp(m);
  return {h / std::log(base), base};
}

}  // namespace unruh
