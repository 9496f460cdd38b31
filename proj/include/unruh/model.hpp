#pragma once

// Per-block entropies of the cloner / Unruh outputs for a cyclic ensemble,
// and their p_k-weighted aggregation.
//
// Two evaluation routes share the same definitions:
//  * enumeration over the compositions B(k), valid for any real ensemble;
//  * lattice counting, valid when mu = c / n with integer c. Then n * alpha(b)
//    is the integer c.b and the spectrum only depends on how many
//    compositions hit each value, which a generating-function recursion
//    tabulates for all k at once.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unruh/combinat.hpp"
#include "unruh/entropy.hpp"
#include "unruh/error.hpp"
#include "unruh/spectra.hpp"

namespace unruh {

/// Entropies of the k-th block (one 1 -> k cloner), in units of the model's
/// log base.
struct BlockEntropies {
  int k = 1;
  double h_B = 0.0;             // log C(k+d-1, d-1)
  double h_B_given_X = 0.0;     // H(alpha(b)/M_k)
  double h_E_given_X = 0.0;     // H(gamma(b)/M_k)
  double h_B_given_XY = 0.0;    // H(cloner_spectrum), output entropy of a pure input
};

/// Entropies entering every region, for either a single cloner or the
/// truncated Unruh direct sum.
struct EntropyTriple {
  double h_B = 0.0;
  double h_B_given_X = 0.0;
  double h_E_given_X = 0.0;
  double h_A_given_X = 0.0;
  double base = 2.0;
};

/// A channel as a list of cloner blocks with weights: one block of weight 1
/// for a cloner, blocks 1..K with weights p_k(z) for the Unruh channel.
class ChannelModel {
 public:
  static ChannelModel cloner(int d, int k, double base = 0.0) {
    detail::require(d >= 2, "cloner: d must be >= 2");
    detail::require(k >= 1, "cloner: k must be >= 1");
    ChannelModel m;
    m.d_ = d;
    m.base_ = base > 0.0 ? base : static_cast<double>(d);
    detail::require(m.base_ > 1.0, "cloner: log base must be > 1");
    m.k_ = k;
    m.blocks_ = {k};
    m.weights_ = {1.0};
    return m;
  }

  static ChannelModel unruh(const UnruhConfig& cfg) {
    cfg.validate();
    ChannelModel m;
    m.d_ = cfg.d;
    m.base_ = cfg.base();
    m.z_ = cfg.z;
    m.eps_ = cfg.truncation_eps;
    const int K = truncation_horizon(cfg);
    m.weights_ = unruh_weights(cfg, K);
    for (int k = 1; k <= K; ++k) m.blocks_.push_back(k);
    return m;
  }

  int d() const noexcept { return d_; }
  double base() const noexcept { return base_; }
  bool is_unruh() const noexcept { return z_.has_value(); }
  std::optional<int> k() const noexcept { return k_; }
  std::optional<double> z() const noexcept { return z_; }
  double truncation_eps() const noexcept { return eps_; }
  /// Largest block index (K for the Unruh channel, k for a cloner).
  int horizon() const noexcept { return blocks_.back(); }
  std::span<const int> blocks() const noexcept { return blocks_; }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  ChannelModel() = default;

  int d_ = 2;
  double base_ = 2.0;
  std::optional<int> k_;
  std::optional<double> z_;
  double eps_ = 0.0;
  std::vector<int> blocks_;
  std::vector<double> weights_;
};

/// Aggregated entropies of a model for one ensemble.
struct ModelEntropies {
  /// Entropies of the direct-sum output, mixing terms -p_k log p_k included.
  EntropyTriple raw;
  /// sum_k p_k H_k with the mixing terms dropped; they cancel in every
  /// region bound.
  EntropyTriple weighted;
  double raw_h_B_given_XY = 0.0;
  double weighted_h_B_given_XY = 0.0;
  /// Per-block values; filled only when requested.
  std::vector<BlockEntropies> blocks;
};

namespace detail {

inline double pure_output_entropy_nats(int d, int k) {
  const double m = static_cast<double>(block_normalizer(d, k));
  double h = 0.0;
  for (int b = 1; b <= k; ++b) {
    h += static_cast<double>(eigen_multiplicity(d, k, b)) * neg_plogp(b / m);
  }
  return h;
}

inline ModelEntropies aggregate(const ChannelModel& model, std::vector<BlockEntropies> blocks,
                                double h_A, bool keep_blocks) {
  const double base = model.base();
  const auto weights = model.weights();
  const auto mix = [&](double BlockEntropies::*field) {
    std::vector<EntropyValue> parts;
    parts.reserve(blocks.size());
    for (const BlockEntropies& b : blocks) parts.push_back({b.*field, base});
    const double raw = mixture_entropy(weights, parts, base).value;
    double weighted = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) weighted += weights[i] * blocks[i].*field;
    return std::pair{raw, weighted};
  };
  const auto [raw_b, w_b] = mix(&BlockEntropies::h_B);
  const auto [raw_bx, w_bx] = mix(&BlockEntropies::h_B_given_X);
  const auto [raw_ex, w_ex] = mix(&BlockEntropies::h_E_given_X);
  const auto [raw_bxy, w_bxy] = mix(&BlockEntropies::h_B_given_XY);

  ModelEntropies out;
  out.raw = {raw_b, raw_bx, raw_ex, h_A, base};
  out.weighted = {w_b, w_bx, w_ex, h_A, base};
  out.raw_h_B_given_XY = raw_bxy;
  out.weighted_h_B_given_XY = w_bxy;
  if (keep_blocks) out.blocks = std::move(blocks);
  return out;
}

}  // namespace detail

/// Block entropies by direct enumeration of B(k) and B(k-1).
inline BlockEntropies block_entropies(int d, int k, const EnsembleParams& mu, double base) {
  detail::require(k >= 1, "block_entropies: k must be >= 1");
  detail::require_ensemble_dim(d, mu);
  detail::require_base(base);
  const double ln_base = std::log(base);
  const double m = static_cast<double>(block_normalizer(d, k));
  const auto w = mu.weights();
  double hb = 0.0;
  for_each_composition(d, k, [&](std::span<const int> b) {
    hb += detail::neg_plogp(detail::dot(w, b) / m);
  });
  double he = 0.0;
  for_each_composition(d, k - 1, [&](std::span<const int> b) {
    he += detail::neg_plogp((1.0 + detail::dot(w, b)) / m);
  });
  BlockEntropies out;
  out.k = k;
  out.h_B = log_block_dimension(d, k) / ln_base;
  out.h_B_given_X = hb / ln_base;
  out.h_E_given_X = he / ln_base;
  out.h_B_given_XY = detail::pure_output_entropy_nats(d, k) / ln_base;
  return out;
}

/// Evaluates a model at an arbitrary ensemble by enumeration.
inline ModelEntropies evaluate(const ChannelModel& model, const EnsembleParams& mu,
                               bool keep_blocks = false) {
  detail::require_ensemble_dim(model.d(), mu);
  std::vector<BlockEntropies> blocks;
  blocks.reserve(model.blocks().size());
  for (int k : model.blocks()) blocks.push_back(block_entropies(model.d(), k, mu, model.base()));
  const double h_A = ensemble_conditional_entropy_A(mu, model.base()).value;
  return detail::aggregate(model, std::move(blocks), h_A, keep_blocks);
}

/// Lattice-counting evaluator for ensembles mu = c / n.
///
/// count[k][v] = #{b in B(k) : c.b = v} obeys, factor by factor,
/// count_i[k][v] = count_{i-1}[k][v] + count_i[k-1][v - c_i],
/// i.e. multiplication by 1 / (1 - x y^{c_i}).
class LatticeEvaluator {
 public:
  LatticeEvaluator(const ChannelModel& model, int n)
      : model_(model), n_(n), K_(model.horizon()) {
    detail::require(n >= 1, "LatticeEvaluator: resolution must be >= 1");
    const std::size_t vmax = static_cast<std::size_t>(n) * static_cast<std::size_t>(K_ + 1);
    v_log_v_.assign(vmax + 1, 0.0);
    for (std::size_t v = 2; v <= vmax; ++v) {
      v_log_v_[v] = static_cast<double>(v) * std::log(static_cast<double>(v));
    }
    offsets_.resize(static_cast<std::size_t>(K_) + 2);
    offsets_[0] = 0;
    for (int k = 0; k <= K_; ++k) {
      offsets_[static_cast<std::size_t>(k) + 1] = offsets_[static_cast<std::size_t>(k)] + row_length(k);
    }
    ln_base_ = std::log(model.base());
    for (int k : model.blocks()) {
      BlockEntropies b;
      b.k = k;
      b.h_B = log_block_dimension(model.d(), k) / ln_base_;
      b.h_B_given_XY = detail::pure_output_entropy_nats(model.d(), k) / ln_base_;
      fixed_.push_back(b);
    }
  }

  int resolution() const noexcept { return n_; }

  ModelEntropies evaluate(std::span<const int> counts, bool keep_blocks = false) const {
    const int d = model_.d();
    detail::require(static_cast<int>(counts.size()) == d, "LatticeEvaluator: wrong dimension");
    int total = 0;
    for (int c : counts) {
      detail::require(c >= 0, "LatticeEvaluator: negative lattice count");
      total += c;
    }
    detail::require(total == n_, "LatticeEvaluator: lattice counts must sum to n");

    std::vector<double> table(offsets_.back(), 0.0);
    table[0] = 1.0;
    for (int c : counts) {
      for (int k = 1; k <= K_; ++k) {
        double* row = table.data() + offsets_[static_cast<std::size_t>(k)];
        const double* prev = table.data() + offsets_[static_cast<std::size_t>(k) - 1];
        const std::size_t prev_len = row_length(k - 1);
        // row[v] += prev[v - c] for v - c in [0, prev_len)
        for (std::size_t u = 0; u < prev_len; ++u) row[u + static_cast<std::size_t>(c)] += prev[u];
      }
    }

    std::vector<BlockEntropies> blocks = fixed_;
    const double n = static_cast<double>(n_);
    for (BlockEntropies& b : blocks) {
      const double nm = n * static_cast<double>(block_normalizer(d, b.k));
      const double ln_nm = std::log(nm);
      b.h_B_given_X = row_entropy(table, b.k, 0, nm, ln_nm) / ln_base_;
      b.h_E_given_X = row_entropy(table, b.k - 1, static_cast<std::size_t>(n_), nm, ln_nm) / ln_base_;
    }
    EnsembleParams mu = EnsembleParams::from_lattice(counts, n_);
    const double h_A = ensemble_conditional_entropy_A(mu, model_.base()).value;
    return detail::aggregate(model_, std::move(blocks), h_A, keep_blocks);
  }

 private:
  std::size_t row_length(int k) const {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(k) + 1;
  }

  /// Entropy (nats) of the atoms (shift + v) / nm weighted by count[k][v].
  double row_entropy(const std::vector<double>& table, int k, std::size_t shift, double nm,
                     double ln_nm) const {
    const double* row = table.data() + offsets_[static_cast<std::size_t>(k)];
    const std::size_t len = row_length(k);
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t v = 0; v < len; ++v) {
      const double c = row[v];
      if (c == 0.0) continue;
      const std::size_t x = v + shift;
      s1 += c * static_cast<double>(x);
      s2 += c * v_log_v_[x];
    }
    return (s1 * ln_nm - s2) / nm;
  }

  ChannelModel model_;
  int n_;
  int K_;
  double ln_base_ = 1.0;
  std::vector<double> v_log_v_;
  std::vector<std::size_t> offsets_;
  std::vector<BlockEntropies> fixed_;
};

}  // namespace unruh
