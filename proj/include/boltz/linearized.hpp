#pragma once

#include <functional>
#include <string>
#include <vector>

#include "boltz/kernel.hpp"
#include "boltz/measures.hpp"

namespace boltz {

/// Burnett-type basis: L_k^{(l + N/2 - 1)}(|v-u|^2 / 2T) |v-u|^l Y_lm, with
/// 2k + l <= degree and l <= l_max, weighted by M.
struct GalerkinBasis {
  int degree = 12;
  int l_max = 4;
  int n_hermite = 0;  ///< per-axis nodes for the centre-of-mass velocity; 0 = exact for the degree
  int n_radial = 0;   ///< nodes for the relative speed; 0 = exact for the degree
  int n_polar = 0;    ///< nodes for the scattering angle; 0 = exact for the degree
};

/// Gram and operator blocks of one harmonic sector, averaged over the
/// 2l+1 (in general: dim H_l) copies, which all share the same spectrum.
struct SectorMatrices {
  int l = 0;
  int multiplicity = 1;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd op;
  Eigen::VectorXd eigenvalues;  ///< generalized, ascending
};

std::vector<SectorMatrices> assemble_sectors(const MaxwellianParams& p, const KernelSpec& spec,
                                             const GalerkinBasis& basis);

struct LmQuadrature {
  int n_hermite = 10;
  SphereResolution sphere{8, 16};
};

using PerturbationFn = std::function<double(const Vec&)>;

/// (L phi)(v) = integral B(v - v*, sigma) M(v*) (phi' + phi*' - phi - phi*) dsigma dv*
/// at every column of `points`, where phi = h / M is the representative.
std::vector<double> lm_apply(const PerturbationFn& phi, const Eigen::MatrixXd& points, const MaxwellianParams& p,
                             const KernelSpec& spec, const LmQuadrature& quad = {});

/// integral M phi (L psi) dv by tensor Gauss-Hermite in v.
double lm_bilinear(const PerturbationFn& phi, const PerturbationFn& psi, const MaxwellianParams& p,
                   const KernelSpec& spec, const LmQuadrature& quad = {});

struct SectorGap {
  int l = 0;
  int basis_size = 0;
  double lambda_hat = 0.0;  ///< smallest nonzero |eigenvalue| in the sector
  int kernel_dim = 0;       ///< zero eigenvalues in the sector, without multiplicity
};

struct GapResult {
  double lambda_hat = 0.0;
  int kernel_dim = 0;                   ///< with harmonic multiplicity
  std::vector<double> kernel_residuals; ///< |eigenvalue| of every kernel mode
  std::vector<SectorGap> sectors;
  double symmetry_error = 0.0;          ///< max relative asymmetry of the operator blocks
};

/// Throws KernelDimensionMismatch unless exactly N + 2 eigenvalues (with
/// multiplicity) satisfy |lambda| < 1e-6.
GapResult spectral_gap(const MaxwellianParams& p, const KernelSpec& spec, const GalerkinBasis& basis = {});

struct ScalingCheck {
  double gap1 = 0.0;
  double gap2 = 0.0;
  double ratio = 0.0;
  double expected = 0.0;
  bool pass = false;
};

/// Compares gap(p2)/gap(p1) with rho2 T2^{gamma/2} / (rho1 T1^{gamma/2}).
ScalingCheck gap_scaling_check(const MaxwellianParams& p1, const MaxwellianParams& p2, const KernelSpec& spec,
                               const GalerkinBasis& basis = {}, double tol = 0.04);

struct GapRow {
  std::string basis;
  std::string sector;
  double lambda_hat = 0.0;
  int kernel_dim = 0;
};

void write_gap_csv(const std::vector<GapRow>& rows, const std::string& path, const std::string& header_comment = "");

/// Rows for every sector plus an "all" row.
std::vector<GapRow> gap_rows(const GapResult& r, const GalerkinBasis& basis);

}  // namespace boltz
