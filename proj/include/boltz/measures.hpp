#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boltz/grid_density.hpp"
#include "boltz/vec.hpp"

namespace boltz {

/// Finite positive combination of Dirac masses, sum_i w_i delta_{v_i}.
struct ParticleMeasure {
  Eigen::MatrixXd v;  ///< dim x count
  Eigen::VectorXd w;  ///< count

  ParticleMeasure() = default;
  ParticleMeasure(Eigen::MatrixXd velocities, Eigen::VectorXd weights);
  ParticleMeasure(int dim, std::size_t count);

  [[nodiscard]] int dim() const { return static_cast<int>(v.rows()); }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(v.cols()); }
  [[nodiscard]] Vec atom(std::size_t i) const { return v.col(static_cast<Eigen::Index>(i)); }
  [[nodiscard]] double weight(std::size_t i) const { return w[static_cast<Eigen::Index>(i)]; }
  [[nodiscard]] double mass() const { return w.sum(); }

  void push(double weight, const Vec& velocity);
};

struct MaxwellianParams {
  double rho = 1.0;
  Vec u = Vec::Zero(3);
  double T = 1.0;

  static MaxwellianParams standard(int dim) { return {1.0, Vec::Zero(dim), 1.0}; }
  [[nodiscard]] int dim() const { return static_cast<int>(u.size()); }
};

struct NormalizationConstants {
  double c_fwd = 0.0;   ///< bound for the forward map on ||.||_2
  double c_inv = 0.0;   ///< bound for the inverse map on ||.||_2
  double c_time = 0.0;  ///< time scale rho T^{gamma/2}
};

/// Finite sum of Maxwellians; each component's rho is its weight.
struct MaxwellianMixture {
  std::vector<MaxwellianParams> components;

  [[nodiscard]] int dim() const { return components.front().dim(); }
  [[nodiscard]] MaxwellianParams triple() const;
  /// Same mixture pushed through the normalization map onto (1, 0, 1).
  [[nodiscard]] MaxwellianMixture normalized() const;
  [[nodiscard]] double density(const Vec& v) const;
  [[nodiscard]] ParticleMeasure sample(std::size_t count, std::uint64_t seed) const;
  [[nodiscard]] GridDensity grid(std::shared_ptr<const GridGeometry> geom) const;
};

/// sum_i w_i <v_i>^s.
double moment_norm(const ParticleMeasure& F, double s);

/// Mass, mean velocity and temperature. T = 0 is returned for a single atom.
MaxwellianParams conserved_triple(const ParticleMeasure& F);

NormalizationConstants normalization_constants(const MaxwellianParams& p, double gamma);

/// v -> (v - u)/sqrt(T), w -> w/rho.
ParticleMeasure apply_normalization(const ParticleMeasure& F, const MaxwellianParams& p);
/// v -> sqrt(T) v + u, w -> rho w.
ParticleMeasure apply_inverse_normalization(const ParticleMeasure& F, const MaxwellianParams& p);
/// Normalizes with the measure's own conserved triple.
ParticleMeasure normalize(const ParticleMeasure& F);

double maxwellian_density(const MaxwellianParams& p, const Vec& v);
ParticleMeasure maxwellian_sample(const MaxwellianParams& p, std::size_t count, std::uint64_t seed);
GridDensity maxwellian_grid(const MaxwellianParams& p, std::shared_ptr<const GridGeometry> geom);

/// Psi_{F0}(r) = r + r^{1/3} + sum over |v_i| > r^{-1/3} of w_i |v_i|^2.
double psi_f0(const ParticleMeasure& F0, double r);
/// Same modulus for a grid density (tail integral by the midpoint rule).
double psi_f0(const GridDensity& F0, double r);

enum class DistanceScheme { Exact, Binned };

/// Histogram layout for the binned scheme: cubic bins of width h covering
/// [-R, R]^N, plus one overflow cell for everything outside.
struct BinSpec {
  double h = 1.5;
  double R = 4.5;
};

/// ||F - G||_s. Exact: atoms are matched by identical velocity, unmatched
/// atoms contribute fully. Binned: L1 distance between histograms, each bin
/// weighted by <center>^s.
double measure_distance(const ParticleMeasure& F, const ParticleMeasure& G, double s,
                        DistanceScheme scheme, const BinSpec& bins = {});

/// ||F - M||_s for atomic F against the Maxwellian with parameters p.
/// Exact returns the mutually singular value ||F||_s + ||M||_s.
double measure_distance(const ParticleMeasure& F, const MaxwellianParams& p, double s,
                        DistanceScheme scheme, const BinSpec& bins = {});

/// Maxwellian moment integral of <v>^s, computed by radial quadrature.
double maxwellian_moment_norm(const MaxwellianParams& p, double s);

/// Histogram masses in the layout of BinSpec; the last entry is overflow.
std::vector<double> histogram(const ParticleMeasure& F, const BinSpec& bins);
std::vector<double> maxwellian_histogram(const MaxwellianParams& p, const BinSpec& bins);

void write_measure_csv(const ParticleMeasure& F, const std::string& path,
                       const std::string& header_comment = "");
ParticleMeasure read_measure_csv(const std::string& path);

}  // namespace boltz
