#pragma once

#include <memory>
#include <string>
#include <vector>

#include "boltz/vec.hpp"

namespace boltz {

/// Uniform Cartesian velocity grid on [-R, R]^N with n nodes per axis.
struct GridGeometry {
  int dim = 3;
  int n = 21;
  double R = 6.0;
  double h = 0.6;
  std::size_t count = 0;
  Eigen::MatrixXd nodes;  ///< dim x count, last axis fastest
  std::vector<std::size_t> strides;

  static std::shared_ptr<const GridGeometry> make(int dim, int n, double R);

  [[nodiscard]] double cell_volume() const { return std::pow(h, dim); }
  [[nodiscard]] Vec node(std::size_t i) const { return nodes.col(static_cast<Eigen::Index>(i)); }
  [[nodiscard]] bool same_as(const GridGeometry& o) const { return dim == o.dim && n == o.n && R == o.R; }
};

/// Nonnegative density sampled at the grid nodes. Integrals use the
/// midpoint rule with weight h^N per node.
class GridDensity {
 public:
  GridDensity() = default;
  explicit GridDensity(std::shared_ptr<const GridGeometry> geom);
  GridDensity(std::shared_ptr<const GridGeometry> geom, std::vector<double> values);

  template <typename F>
  static GridDensity from_function(std::shared_ptr<const GridGeometry> geom, F&& f) {
    GridDensity out(geom);
    for (std::size_t i = 0; i < geom->count; ++i) out.values_[i] = f(geom->node(i));
    return out;
  }

  [[nodiscard]] const GridGeometry& geometry() const { return *geom_; }
  [[nodiscard]] const std::shared_ptr<const GridGeometry>& geometry_ptr() const { return geom_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  [[nodiscard]] double mass() const;
  [[nodiscard]] Vec momentum() const;
  [[nodiscard]] double energy() const;  ///< integral of |v|^2 f
  /// Integral of <v>^s |f|.
  [[nodiscard]] double l1_norm(double s = 0.0) const;
  [[nodiscard]] double max_value() const;
  [[nodiscard]] double min_value() const;

  /// Sets entries below zero to zero and returns the removed mass.
  double clip_negative();

  GridDensity& operator+=(const GridDensity& o);
  GridDensity& operator-=(const GridDensity& o);
  GridDensity& operator*=(double c);
  friend GridDensity operator+(GridDensity a, const GridDensity& b) { return a += b; }
  friend GridDensity operator-(GridDensity a, const GridDensity& b) { return a -= b; }
  friend GridDensity operator*(double c, GridDensity a) { return a *= c; }

  /// Pointwise product with another field on the same grid.
  [[nodiscard]] GridDensity times(const std::vector<double>& factor) const;

 private:
  std::shared_ptr<const GridGeometry> geom_;
  std::vector<double> values_;
};

/// Weighted L1 distance: integral of <v>^s |f - g|.
double grid_distance(const GridDensity& f, const GridDensity& g, double s = 0.0);

/// Flat binary snapshot: int32 N, int32 n, float64 R, float64 h, uint64 count,
/// then count float64 values. A JSON sidecar `<path>.json` carries the same
/// header fields plus mass, momentum and energy.
void write_snapshot(const GridDensity& f, const std::string& path, double time = 0.0);
GridDensity read_snapshot(const std::string& path);

}  // namespace boltz
