#include "boltz/grid_density.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>

#include "boltz/errors.hpp"
#include "json.hpp"

namespace boltz {

std::shared_ptr<const GridGeometry> GridGeometry::make(int dim, int n, double R) {
  if (dim < 1 || dim > kMaxDim) throw ConfigInvalid("grid dimension out of range");
  if (n < 2) throw ConfigInvalid("grid needs at least two nodes per axis");
  if (!(R > 0.0)) throw ConfigInvalid("grid radius must be positive");
  auto g = std::make_shared<GridGeometry>();
  g->dim = dim;
  g->n = n;
  g->R = R;
  g->h = 2.0 * R / (n - 1);
  g->count = 1;
  for (int d = 0; d < dim; ++d) g->count *= static_cast<std::size_t>(n);
  g->strides.assign(dim, 1);
  for (int d = dim - 2; d >= 0; --d) g->strides[d] = g->strides[d + 1] * static_cast<std::size_t>(n);
  g->nodes.resize(dim, static_cast<Eigen::Index>(g->count));
  for (std::size_t i = 0; i < g->count; ++i) {
    std::size_t rem = i;
    for (int d = 0; d < dim; ++d) {
      const std::size_t k = rem / g->strides[d];
      rem -= k * g->strides[d];
      g->nodes(d, static_cast<Eigen::Index>(i)) = -R + g->h * static_cast<double>(k);
    }
  }
  return g;
}

GridDensity::GridDensity(std::shared_ptr<const GridGeometry> geom)
    : geom_(std::move(geom)), values_(geom_->count, 0.0) {}

GridDensity::GridDensity(std::shared_ptr<const GridGeometry> geom, std::vector<double> values)
    : geom_(std::move(geom)), values_(std::move(values)) {
  if (values_.size() != geom_->count) throw ConfigInvalid("grid value count mismatch");
}

double GridDensity::mass() const {
  double acc = 0.0;
  for (double x : values_) acc += x;
  return acc * geom_->cell_volume();
}

Vec GridDensity::momentum() const {
  Vec acc = Vec::Zero(geom_->dim);
  for (std::size_t i = 0; i < values_.size(); ++i)
    acc += values_[i] * geom_->nodes.col(static_cast<Eigen::Index>(i));
  return acc * geom_->cell_volume();
}

double GridDensity::energy() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    acc += values_[i] * geom_->nodes.col(static_cast<Eigen::Index>(i)).squaredNorm();
  return acc * geom_->cell_volume();
}

double GridDensity::l1_norm(double s) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double r2 = 1.0 + geom_->nodes.col(static_cast<Eigen::Index>(i)).squaredNorm();
    acc += std::abs(values_[i]) * (s == 0.0 ? 1.0 : std::pow(r2, 0.5 * s));
  }
  return acc * geom_->cell_volume();
}

double GridDensity::max_value() const { return *std::max_element(values_.begin(), values_.end()); }
double GridDensity::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

double GridDensity::clip_negative() {
  double removed = 0.0;
  for (double& x : values_)
    if (x < 0.0) {
      removed -= x;
      x = 0.0;
    }
  return removed * geom_->cell_volume();
}

GridDensity& GridDensity::operator+=(const GridDensity& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridDensity& GridDensity::operator-=(const GridDensity& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridDensity& GridDensity::operator*=(double c) {
  for (double& x : values_) x *= c;
  return *this;
}

GridDensity GridDensity::times(const std::vector<double>& factor) const {
  GridDensity out(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] *= factor[i];
  return out;
}

double grid_distance(const GridDensity& f, const GridDensity& g, double s) {
  return (f - g).l1_norm(s);
}

void write_snapshot(const GridDensity& f, const std::string& path, double time) {
  const auto& g = f.geometry();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigInvalid("cannot open " + path);
  const auto dim = static_cast<std::int32_t>(g.dim);
  const auto n = static_cast<std::int32_t>(g.n);
  const auto count = static_cast<std::uint64_t>(g.count);
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&g.R), sizeof g.R);
  out.write(reinterpret_cast<const char*>(&g.h), sizeof g.h);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(count * sizeof(double)));

  const Vec p = f.momentum();
  nlohmann::json side = {{"N", g.dim},        {"n", g.n},
                         {"R", g.R},          {"h", g.h},
                         {"count", g.count},  {"time", time},
                         {"mass", f.mass()},  {"momentum", std::vector<double>(p.data(), p.data() + p.size())},
                         {"energy", f.energy()}, {"layout", "row-major, last axis fastest"}};
  std::ofstream js(path + ".json");
  js << side.dump(2) << '\n';
}

GridDensity read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("cannot open " + path);
  std::int32_t dim = 0;
  std::int32_t n = 0;
  double R = 0.0;
  double h = 0.0;
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&R), sizeof R);
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  auto geom = GridGeometry::make(dim, n, R);
  if (count != geom->count) throw ConfigInvalid("snapshot node count mismatch in " + path);
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw ConfigInvalid("truncated snapshot " + path);
  return {geom, std::move(values)};
}

}  // namespace boltz
