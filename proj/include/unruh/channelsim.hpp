#pragma once

// Matrix-level oracle. Builds the cloner isometry from its coefficient
// formula, the Unruh block from its defining Fock-space sum, the explicit
// rank-one Kraus operators of the 1 -> 2 complementary channel and the Choi
// matrix of the complementary channel, independently of the closed forms in
// spectra.hpp.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "unruh/combinat.hpp"
#include "unruh/error.hpp"
#include "unruh/spectra.hpp"

namespace unruh {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kMatrixTolerance = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix (checked to 1e-10).
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix m) : m_(std::move(m)) {
    detail::require(m_.rows() == m_.cols() && m_.rows() > 0, "DensityMatrix: must be square");
    detail::require((m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= kMatrixTolerance,
                    "DensityMatrix: not Hermitian");
    detail::require(std::abs(m_.trace() - Complex(1.0)) <= kMatrixTolerance,
                    "DensityMatrix: trace != 1");
    detail::require(eigenvalues().minCoeff() >= -kMatrixTolerance, "DensityMatrix: not PSD");
  }

  static DensityMatrix pure(const CVector& psi) {
    detail::require(std::abs(psi.norm() - 1.0) <= kMatrixTolerance, "DensityMatrix: state not normalized");
    return DensityMatrix(psi * psi.adjoint());
  }

  /// Symmetrizes and renormalizes an almost-valid matrix before checking.
  static DensityMatrix restored(const CMatrix& m) {
    CMatrix h = 0.5 * (m + m.adjoint());
    h /= h.trace().real();
    return DensityMatrix(std::move(h));
  }

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const CMatrix& matrix() const noexcept { return m_; }

  /// Eigenvalues in ascending order.
  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

 private:
  CMatrix m_;
};

/// Isometry V : C^in -> C^{dim_B} (x) C^{dim_E}, row index b * dim_E + e.
class Isometry {
 public:
  Isometry(CMatrix v, Eigen::Index dim_b, Eigen::Index dim_e)
      : v_(std::move(v)), dim_b_(dim_b), dim_e_(dim_e) {
    detail::require(v_.rows() == dim_b_ * dim_e_, "Isometry: row count != dim_B * dim_E");
    const CMatrix gram = v_.adjoint() * v_;
    const CMatrix id = CMatrix::Identity(v_.cols(), v_.cols());
    detail::require((gram - id).cwiseAbs().maxCoeff() <= kMatrixTolerance, "Isometry: V^dag V != I");
  }

  const CMatrix& matrix() const noexcept { return v_; }
  Eigen::Index in_dim() const noexcept { return v_.cols(); }
  Eigen::Index out_dim() const noexcept { return v_.rows(); }
  Eigen::Index dim_b() const noexcept { return dim_b_; }
  Eigen::Index dim_e() const noexcept { return dim_e_; }

  /// Column i reshaped to a dim_B x dim_E matrix.
  CMatrix column_block(Eigen::Index i) const {
    CMatrix a(dim_b_, dim_e_);
    for (Eigen::Index b = 0; b < dim_b_; ++b) {
      for (Eigen::Index e = 0; e < dim_e_; ++e) a(b, e) = v_(b * dim_e_ + e, i);
    }
    return a;
  }

 private:
  CMatrix v_;
  Eigen::Index dim_b_;
  Eigen::Index dim_e_;
};

struct KrausSet {
  std::vector<CMatrix> operators;
};

enum class Keep { B, E };

namespace detail {

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

inline void require_matrix_size(Count n, Count cap, const std::string& what) {
  if (n > cap) {
    throw SizeCapExceeded(what + ": dimension " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  }
}

}  // namespace detail

/// alpha_{n,j} of the N -> M universal cloner, N = |n|, M = N + |j|:
/// sqrt((M-N)! (N+d-1)! / (M+d-1)!) * sqrt(prod_i (n_i+j_i)! / (n_i! j_i!)).
inline double cloner_coefficient(const OccupationVector& n, const OccupationVector& j) {
  detail::require(n.dim() == j.dim(), "cloner_coefficient: dimension mismatch");
  const int d = static_cast<int>(n.dim());
  const int N = n.weight();
  const int M = N + j.weight();
  double log_c = detail::log_factorial(M - N) + detail::log_factorial(N + d - 1) -
                 detail::log_factorial(M + d - 1);
  double prod = 1.0;
  for (std::size_t i = 0; i < n.dim(); ++i) prod *= static_cast<double>(binomial(static_cast<Count>(n[i] + j[i]), static_cast<Count>(n[i])));
  return std::sqrt(std::exp(log_c) * prod);
}

/// Isometric extension of the 1 -> k universal cloner on the single-excitation
/// sector: |e_m> -> sum_{j in N(k-1)} alpha_{e_m, j} |e_m + j>_B |j>_E.
inline Isometry cloner_isometry(int d, int k, Count cap = 1u << 14) {
  detail::require(d >= 2, "cloner_isometry: d must be >= 2");
  detail::require(k >= 1, "cloner_isometry: k must be >= 1");
  const Count db = block_dimension(d, k);
  const Count de = block_dimension(d, k - 1);
  detail::require_matrix_size(db * de, cap, "cloner_isometry");
  const CompositionBasis basis_b(d, k);
  const CompositionBasis basis_e(d, k - 1);
  const CompositionBasis inputs(d, 1);
  CMatrix v = CMatrix::Zero(static_cast<Eigen::Index>(db * de), d);
  for (std::size_t m = 0; m < inputs.size(); ++m) {
    const OccupationVector& n = inputs[m];
    for (std::size_t e = 0; e < basis_e.size(); ++e) {
      const OccupationVector& j = basis_e[e];
      std::vector<int> sum(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) sum[static_cast<std::size_t>(i)] = n[static_cast<std::size_t>(i)] + j[static_cast<std::size_t>(i)];
      const std::size_t b = basis_b.index_of(OccupationVector(std::move(sum)));
      v(static_cast<Eigen::Index>(b * de + e), static_cast<Eigen::Index>(m)) = cloner_coefficient(n, j);
    }
  }
  return Isometry(std::move(v), static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(de));
}

/// V rho V^dag with the other factor traced out.
inline DensityMatrix apply_channel(const Isometry& v, const DensityMatrix& rho, Keep keep) {
  detail::require(rho.dim() == v.in_dim(), "apply_channel: input dimension mismatch");
  const Eigen::Index n = v.in_dim();
  std::vector<CMatrix> blocks;
  blocks.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) blocks.push_back(v.column_block(i));
  const Eigen::Index out = keep == Keep::B ? v.dim_b() : v.dim_e();
  CMatrix acc = CMatrix::Zero(out, out);
  const CMatrix& r = rho.matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (r(i, j) == Complex(0.0)) continue;
      const auto& ai = blocks[static_cast<std::size_t>(i)];
      const auto& aj = blocks[static_cast<std::size_t>(j)];
      if (keep == Keep::B) {
        acc += r(i, j) * (ai * aj.adjoint());
      } else {
        acc += r(i, j) * (ai.transpose() * aj.conjugate());
      }
    }
  }
  return DensityMatrix::restored(acc);
}

/// k-th Unruh block built from its defining sum
/// (1/M) sum_{n in N(k-1)} |v_n><v_n|, v_n = sum_i beta_i sqrt(1+n_i) |n + e_i>.
inline DensityMatrix unruh_block_output(int d, int k, const CVector& beta) {
  detail::require(d >= 2 && k >= 1, "unruh_block_output: need d >= 2, k >= 1");
  detail::require(beta.size() == d, "unruh_block_output: beta must have d entries");
  detail::require(std::abs(beta.norm() - 1.0) <= kMatrixTolerance, "unruh_block_output: beta not normalized");
  const CompositionBasis out_basis(d, k);
  const auto dim = static_cast<Eigen::Index>(out_basis.size());
  CMatrix sigma = CMatrix::Zero(dim, dim);
  for (const OccupationVector& n : compositions(d, k - 1)) {
    CVector v = CVector::Zero(dim);
    for (int i = 0; i < d; ++i) {
      const auto idx = static_cast<Eigen::Index>(out_basis.index_of(n.raised(static_cast<std::size_t>(i))));
      v(idx) += beta(i) * std::sqrt(1.0 + n[static_cast<std::size_t>(i)]);
    }
    sigma += v * v.adjoint();
  }
  sigma /= static_cast<double>(block_normalizer(d, k));
  return DensityMatrix(std::move(sigma));
}

/// Rank-one Kraus operators of the complementary channel of the 1 -> 2
/// cloner: (d+1)^{-1/2} |j><j| for each j, and
/// (4^{d-1}(d+1))^{-1/2} |psi(n)><psi(n)| sigma_z(n) for n_1 = 0,
/// n_{j>=2} in {0,1,2,3}, with psi(n) = sum_j i^{n_j} |j> left unnormalized.
inline KrausSet complementary_kraus_1to2(int d, int cap = 8) {
  detail::require(d >= 2, "complementary_kraus_1to2: d must be >= 2");
  if (d > cap) {
    throw SizeCapExceeded("complementary_kraus_1to2: d = " + std::to_string(d) + " exceeds cap " +
                          std::to_string(cap));
  }
  const std::array<Complex, 4> i_pow{Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
  KrausSet out;
  const double diag_scale = 1.0 / std::sqrt(d + 1.0);
  for (int j = 0; j < d; ++j) {
    CMatrix e = CMatrix::Zero(d, d);
    e(j, j) = diag_scale;
    out.operators.push_back(std::move(e));
  }
  const std::size_t count = std::size_t{1} << (2 * (d - 1));
  const double phase_scale = 1.0 / std::sqrt(static_cast<double>(count) * (d + 1.0));
  std::vector<int> n(static_cast<std::size_t>(d), 0);
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t c = code;
    for (int j = 1; j < d; ++j) {
      n[static_cast<std::size_t>(j)] = static_cast<int>(c & 3u);
      c >>= 2;
    }
    CVector psi(d);
    CMatrix sz = CMatrix::Zero(d, d);
    for (int j = 0; j < d; ++j) {
      psi(j) = i_pow[static_cast<std::size_t>(n[static_cast<std::size_t>(j)])];
      sz(j, j) = (n[static_cast<std::size_t>(j)] % 2 == 0) ? 1.0 : -1.0;
    }
    out.operators.push_back(phase_scale * (psi * psi.adjoint()) * sz);
  }
  return out;
}

/// Normalized complex Gaussian vector (unitarily invariant pure state).
/// Box-Muller on raw mt19937_64 output so the stream is the same everywhere.
inline CVector random_pure_state(int d, std::mt19937_64& rng) {
  const auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  CVector v(d);
  for (int i = 0; i < d; ++i) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * M_PI * uniform();
    v(i) = Complex(r * std::cos(t), r * std::sin(t));
  }
  return v / v.norm();
}

struct KrausReport {
  double completeness_deviation = 0.0;
  double action_deviation = 0.0;
  double max_second_singular_value = 0.0;
  std::size_t operator_count = 0;
  std::uint64_t seed = 0;
  int samples = 0;
};

/// Checks sum E^dag E = I and sum E rho E^dag = S_2(rho) over random pure
/// inputs, with S_2 computed from the cloner isometry (E kept). The E factor
/// of the 1 -> 2 cloner is the single-excitation basis, which coincides with
/// the qudit basis in composition order.
inline KrausReport verify_kraus(const KrausSet& kraus, int d, int n_samples, std::uint64_t seed = 0) {
  detail::require(!kraus.operators.empty(), "verify_kraus: empty Kraus set");
  KrausReport rep;
  rep.operator_count = kraus.operators.size();
  rep.seed = seed;
  rep.samples = n_samples;
  CMatrix completeness = CMatrix::Zero(d, d);
  for (const CMatrix& e : kraus.operators) {
    detail::require(e.rows() == d && e.cols() == d, "verify_kraus: operator shape mismatch");
    completeness += e.adjoint() * e;
    Eigen::JacobiSVD<CMatrix> svd(e);
    const auto& sv = svd.singularValues();
    if (sv.size() > 1) rep.max_second_singular_value = std::max(rep.max_second_singular_value, sv(1));
  }
  rep.completeness_deviation = (completeness - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();

  const Isometry v = cloner_isometry(d, 2);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    const DensityMatrix rho = DensityMatrix::pure(random_pure_state(d, rng));
    CMatrix out = CMatrix::Zero(d, d);
    for (const CMatrix& e : kraus.operators) out += e * rho.matrix() * e.adjoint();
    const DensityMatrix reference = apply_channel(v, rho, Keep::E);
    rep.action_deviation = std::max(rep.action_deviation, (out - reference.matrix()).cwiseAbs().maxCoeff());
  }
  return rep;
}

struct PptReport {
  double min_partial_transpose_eigenvalue = 0.0;
  Eigen::Index choi_dim = 0;
};

/// Choi matrix (1/d) sum_ij |i><j| (x) S_k(|i><j|) of the complementary
/// channel of the 1 -> k cloner.
inline CMatrix complementary_choi(int d, int k) {
  const Isometry v = cloner_isometry(d, k);
  const Eigen::Index de = v.dim_e();
  CMatrix choi = CMatrix::Zero(d * de, d * de);
  std::vector<CMatrix> blocks;
  for (Eigen::Index i = 0; i < d; ++i) blocks.push_back(v.column_block(i));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      // S_k(|i><j|) = A_i^T conj(A_j)
      choi.block(i * de, j * de, de, de) =
          blocks[static_cast<std::size_t>(i)].transpose() * blocks[static_cast<std::size_t>(j)].conjugate() / static_cast<double>(d);
    }
  }
  return choi;
}

/// Minimum eigenvalue of the partial transpose (over the input reference) of
/// the complementary Choi matrix. Nonnegative for entanglement-breaking
/// complements.
inline PptReport choi_ppt_check(int d, int k, Count cap = 2000) {
  detail::require(d >= 2 && k >= 1, "choi_ppt_check: need d >= 2, k >= 1");
  const Count dim = static_cast<Count>(d) * block_dimension(d, k - 1);
  detail::require_matrix_size(dim, cap, "choi_ppt_check");
  const CMatrix choi = complementary_choi(d, k);
  const Eigen::Index de = static_cast<Eigen::Index>(block_dimension(d, k - 1));
  CMatrix pt(choi.rows(), choi.cols());
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) pt.block(i * de, j * de, de, de) = choi.block(j * de, i * de, de, de);
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(pt, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), pt.rows()};
}

/// Largest |sorted eigenvalue - sorted expected| after zero-padding the
/// expected spectrum to the matrix dimension.
inline double spectrum_deviation(const DensityMatrix& rho, const Spectrum& expected) {
  const Eigen::VectorXd eig = rho.eigenvalues();
  const auto ref = expected.expanded(static_cast<std::size_t>(eig.size()));
  detail::require(ref.size() == static_cast<std::size_t>(eig.size()),
                  "spectrum_deviation: expected spectrum has more atoms than the matrix dimension");
  double dev = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) dev = std::max(dev, std::abs(eig(i) - ref[static_cast<std::size_t>(i)]));
  return dev;
}

struct EquivalenceReport {
  double spectral_deviation = 0.0;  // block eigenvalues vs closed-form cloner spectrum
  double matrix_deviation = 0.0;    // block matrix vs cloner isometry output
  std::uint64_t seed = 0;
  int samples = 0;
};

/// Block / cloner equivalence over seeded random pure inputs.
inline EquivalenceReport verify_cloner_equivalence(int d, int k, int n_samples, std::uint64_t seed = 0) {
  EquivalenceReport rep;
  rep.seed = seed;
  rep.samples = n_samples;
  const Spectrum expected = cloner_spectrum(d, k);
  const Isometry v = cloner_isometry(d, k);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    const CVector beta = random_pure_state(d, rng);
    const DensityMatrix block = unruh_block_output(d, k, beta);
    rep.spectral_deviation = std::max(rep.spectral_deviation, spectrum_deviation(block, expected));
    const DensityMatrix cloned = apply_channel(v, DensityMatrix::pure(beta), Keep::B);
    rep.matrix_deviation = std::max(rep.matrix_deviation, (block.matrix() - cloned.matrix()).cwiseAbs().maxCoeff());
  }
  return rep;
}

}  // namespace unruh
