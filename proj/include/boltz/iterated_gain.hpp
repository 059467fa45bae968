#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boltz/collision.hpp"
#include "boltz/grid_density.hpp"
#include "boltz/kernel.hpp"
#include "boltz/measures.hpp"

namespace boltz {

/// Quadrature on S^{N-2}(n) for the omega integral inside K_B.
struct KbResolution {
  int n_t = 6;       ///< polar nodes (only used for N >= 4)
  int n_omega = 32;  ///< nodes on circles
};

class KbQuadrature {
 public:
  KbQuadrature(int dim, KbResolution res);
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const quad::SphereRule& rule() const { return rule_; }

 private:
  int dim_;
  quad::SphereRule rule_;
};

/// Geometry of one omega node.
struct GainGeometry {
  Vec n;
  double t = 0.0;
  Vec omega;
  Vec sigma;
  Vec w_prime;
  Vec sigma_prime;
};

/// Geometry at the unit vector omega orthogonal to n. Returns nullopt on
/// the degenerate branch |v-v_*||w-w_*| = 0.
std::optional<GainGeometry> gain_geometry(const Vec& v, const Vec& v_star, const Vec& w, const Vec& w_star,
                                          const Vec& omega);

/// K_B(v, v_*, w, w_*) >= 0.
double kb(const Vec& v, const Vec& v_star, const Vec& w, const Vec& w_star, const KernelSpec& spec,
          const KbQuadrature& q);

struct RepresentationResult {
  double lhs = 0.0;       ///< nested weak form
  double rhs = 0.0;       ///< Monte Carlo estimate of the triple kernel integral
  double sigma_mc = 0.0;  ///< batch-means standard error
  double z_score = 0.0;
  double l1_bound = 0.0;  ///< A0^2 ||f||_gamma ||g||_{2 gamma} ||h||_{2 gamma}
};

struct RepresentationOptions {
  std::size_t mc_samples = 1000000;
  std::uint64_t seed = 1;
  SphereResolution outer{16, 32};
  SphereResolution inner{12, 24};
  KbResolution kb{6, 32};
  int batches = 16;
};

/// Compares int psi Q^+(f, Q^+(g, h)) computed through two nested sphere
/// quadratures against the Monte Carlo integral of psi(v) K_B f g h.
RepresentationResult representation_check(const ParticleMeasure& f, const ParticleMeasure& g,
                                          const ParticleMeasure& h, const TestFunction& psi,
                                          const KernelSpec& spec, const RepresentationOptions& opt);

struct LpProbeResult {
  std::vector<double> radii;
  std::vector<double> norms;  ///< (int K_B^p dv)^{1/p}
  double slope = 0.0;
  double predicted = 0.0;  ///< 2 gamma - N/q
};

struct LpResolution {
  int n_dir_t = 12;
  int n_dir_phi = 24;
  int n_radial = 24;
  KbResolution kb{6, 32};
};

/// Throws InadmissibleExponent outside the two admissible windows.
void check_admissible_exponent(int dim, double gamma, double p);

/// L^p norm of v -> K_B(v, v_*, w, w_*) for w - w_* = radius * w_dir and
/// (w + w_*)/2 = v_* + radius * offset, with the log-log slope over radii.
LpProbeResult lp_scaling_probe(const Vec& v_star, const Vec& w_dir, double p, const KernelSpec& spec,
                               const std::vector<double>& radii, const LpResolution& res,
                               const Vec& offset = Vec());

/// (int K_B^p dv)^{1/p} for a single configuration.
double kb_lp_norm(const Vec& v_star, const Vec& w, const Vec& w_star, double p, const KernelSpec& spec,
                  const LpResolution& res);

struct TwwResolution {
  int n_band = 12;   ///< polar nodes across the admissible band
  int n_phi = 24;    ///< azimuthal nodes
  int n_radial = 32;
  KbResolution kb{4, 16};
};

/// T_{w,w_*}(f)(v) = int K_B(v, v_*, w, w_*) f(v_*) dv_* at every node of
/// the target grid; f is interpolated multilinearly and vanishes outside
/// its grid.
GridDensity t_ww_apply(const GridDensity& f, const Vec& w, const Vec& w_star,
                       std::shared_ptr<const GridGeometry> v_grid, const KernelSpec& spec,
                       const TwwResolution& res = {});

struct IterationConstants {
  int n_gamma = 1;
  std::vector<double> p_n;      ///< n = 1..N_gamma, regime gamma < N-2 only
  std::vector<double> theta_n;  ///< n = 1..N_gamma
  double gamma_1 = 1.0;
  double gamma_star = 0.0;
  std::optional<double> alpha_1;
  std::optional<double> alpha_2;
};

IterationConstants iteration_constants(const KernelSpec& spec);
IterationConstants iteration_constants(int dim, double gamma);

/// Rows `probe,gamma,p,radius_or_case,value`.
struct ProbeRow {
  std::string probe;
  double gamma;
  double p;
  std::string radius_or_case;
  double value;
};
void write_probe_csv(const std::vector<ProbeRow>& rows, const std::string& path,
                     const std::string& header_comment = "");

}  // namespace boltz
