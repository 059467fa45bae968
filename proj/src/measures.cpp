#include "boltz/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "boltz/errors.hpp"
#include "boltz/quadrature.hpp"

namespace boltz {

ParticleMeasure::ParticleMeasure(Eigen::MatrixXd velocities, Eigen::VectorXd weights)
    : v(std::move(velocities)), w(std::move(weights)) {
  if (v.cols() != w.size()) throw ConfigInvalid("atom and weight counts differ");
}

ParticleMeasure::ParticleMeasure(int dim, std::size_t count)
    : v(Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(count))),
      w(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count))) {}

void ParticleMeasure::push(double weight, const Vec& velocity) {
  if (v.rows() == 0) v.resize(velocity.size(), 0);
  const auto n = v.cols();
  v.conservativeResize(Eigen::NoChange, n + 1);
  w.conservativeResize(n + 1);
  v.col(n) = velocity;
  w[n] = weight;
}

double moment_norm(const ParticleMeasure& F, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double r2 = 1.0 + F.v.col(static_cast<Eigen::Index>(i)).squaredNorm();
    acc += std::abs(F.weight(i)) * (s == 0.0 ? 1.0 : std::pow(r2, 0.5 * s));
  }
  return acc;
}

MaxwellianParams conserved_triple(const ParticleMeasure& F) {
  const double rho = F.mass();
  if (!(rho > 0.0)) throw ZeroMass("measure has no mass");
  MaxwellianParams p;
  p.rho = rho;
  p.u = (F.v * F.w) / rho;
  double acc = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i)
    acc += F.weight(i) * (F.atom(i) - p.u).squaredNorm();
  p.T = acc / (F.dim() * rho);
  return p;
}

NormalizationConstants normalization_constants(const MaxwellianParams& p, double gamma) {
  const double u = p.u.norm();
  const double sT = std::sqrt(p.T);
  NormalizationConstants c;
  c.c_fwd = std::max(1.0 + (u * u + u) / p.T, (1.0 + u) / p.T) / p.rho;
  c.c_inv = p.rho * std::max(1.0 + u * u + sT * u, p.T + sT * u);
  c.c_time = p.rho * std::pow(p.T, 0.5 * gamma);
  return c;
}

namespace {

void require_temperature(const MaxwellianParams& p) {
  if (!(p.rho > 0.0)) throw ZeroMass("normalization needs positive mass");
  if (!(p.T > 0.0)) throw DiracTemperature("normalization needs positive temperature");
}

}  // namespace

ParticleMeasure apply_normalization(const ParticleMeasure& F, const MaxwellianParams& p) {
  require_temperature(p);
  ParticleMeasure out = F;
  const double s = 1.0 / std::sqrt(p.T);
  out.v = (F.v.colwise() - Eigen::VectorXd(p.u)) * s;
  out.w = F.w / p.rho;
  return out;
}

ParticleMeasure apply_inverse_normalization(const ParticleMeasure& F, const MaxwellianParams& p) {
  require_temperature(p);
  ParticleMeasure out = F;
  out.v = (F.v * std::sqrt(p.T)).colwise() + Eigen::VectorXd(p.u);
  out.w = F.w * p.rho;
  return out;
}

ParticleMeasure normalize(const ParticleMeasure& F) { return apply_normalization(F, conserved_triple(F)); }

double maxwellian_density(const MaxwellianParams& p, const Vec& v) {
  const int dim = p.dim();
  return p.rho * std::pow(2.0 * std::numbers::pi * p.T, -0.5 * dim) *
         std::exp(-(v - p.u).squaredNorm() / (2.0 * p.T));
}

ParticleMeasure maxwellian_sample(const MaxwellianParams& p, std::size_t count, std::uint64_t seed) {
  const int dim = p.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ParticleMeasure out(dim, count);
  const double s = std::sqrt(p.T);
  for (std::size_t i = 0; i < count; ++i)
    for (int d = 0; d < dim; ++d)
      out.v(d, static_cast<Eigen::Index>(i)) = p.u[d] + s * normal(rng);
  out.w.setConstant(p.rho / static_cast<double>(count));
  return out;
}

GridDensity maxwellian_grid(const MaxwellianParams& p, std::shared_ptr<const GridGeometry> geom) {
  return GridDensity::from_function(std::move(geom), [&](const Vec& v) { return maxwellian_density(p, v); });
}

double psi_f0(const ParticleMeasure& F0, double r) {
  if (r <= 0.0) return 0.0;
  const double cut2 = std::pow(r, -2.0 / 3.0);
  double tail = 0.0;
  for (std::size_t i = 0; i < F0.size(); ++i) {
    const double v2 = F0.v.col(static_cast<Eigen::Index>(i)).squaredNorm();
    if (v2 > cut2) tail += F0.weight(i) * v2;
  }
  return r + std::cbrt(r) + tail;
}

double psi_f0(const GridDensity& F0, double r) {
  if (r <= 0.0) return 0.0;
  const double cut2 = std::pow(r, -2.0 / 3.0);
  const auto& g = F0.geometry();
  double tail = 0.0;
  for (std::size_t i = 0; i < g.count; ++i) {
    const double v2 = g.nodes.col(static_cast<Eigen::Index>(i)).squaredNorm();
    if (v2 > cut2) tail += std::abs(F0[i]) * v2;
  }
  return r + std::cbrt(r) + tail * g.cell_volume();
}

namespace {

struct BinLayout {
  int dim;
  int per_axis;
  std::size_t cells;
};

BinLayout layout(int dim, const BinSpec& bins) {
  if (!(bins.h > 0.0) || !(bins.R > 0.0)) throw UnsupportedScheme("bin width and radius must be positive");
  const int per_axis = std::max(1, static_cast<int>(std::lround(2.0 * bins.R / bins.h)));
  std::size_t cells = 1;
  for (int d = 0; d < dim; ++d) cells *= static_cast<std::size_t>(per_axis);
  return {dim, per_axis, cells};
}

// <center>^s for every bin plus the overflow cell (taken at radius R).
std::vector<double> bin_weights(const BinLayout& L, const BinSpec& bins, double s) {
  std::vector<double> wts(L.cells + 1, 1.0);
  if (s == 0.0) return wts;
  const double width = 2.0 * bins.R / L.per_axis;
  for (std::size_t c = 0; c < L.cells; ++c) {
    std::size_t rem = c;
    double r2 = 0.0;
    for (int d = 0; d < L.dim; ++d) {
      const auto k = rem % static_cast<std::size_t>(L.per_axis);
      rem /= static_cast<std::size_t>(L.per_axis);
      const double x = -bins.R + width * (static_cast<double>(k) + 0.5);
      r2 += x * x;
    }
    wts[c] = std::pow(1.0 + r2, 0.5 * s);
  }
  wts[L.cells] = std::pow(1.0 + bins.R * bins.R, 0.5 * s);
  return wts;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

std::vector<double> histogram(const ParticleMeasure& F, const BinSpec& bins) {
  const BinLayout L = layout(F.dim(), bins);
  const double width = 2.0 * bins.R / L.per_axis;
  std::vector<double> hist(L.cells + 1, 0.0);
  for (std::size_t i = 0; i < F.size(); ++i) {
    std::size_t cell = 0;
    std::size_t stride = 1;
    bool inside = true;
    for (int d = 0; d < L.dim; ++d) {
      const double x = F.v(d, static_cast<Eigen::Index>(i));
      const double pos = (x + bins.R) / width;
      if (!(pos >= 0.0 && pos < L.per_axis)) {
        inside = false;
        break;
      }
      cell += static_cast<std::size_t>(pos) * stride;
      stride *= static_cast<std::size_t>(L.per_axis);
    }
    hist[inside ? cell : L.cells] += F.weight(i);
  }
  return hist;
}

std::vector<double> maxwellian_histogram(const MaxwellianParams& p, const BinSpec& bins) {
  const BinLayout L = layout(p.dim(), bins);
  const double width = 2.0 * bins.R / L.per_axis;
  const double sT = std::sqrt(p.T);
  std::vector<std::vector<double>> axis(L.dim, std::vector<double>(L.per_axis));
  for (int d = 0; d < L.dim; ++d)
    for (int k = 0; k < L.per_axis; ++k) {
      const double lo = -bins.R + width * k;
      axis[d][k] = std_normal_cdf((lo + width - p.u[d]) / sT) - std_normal_cdf((lo - p.u[d]) / sT);
    }
  std::vector<double> hist(L.cells + 1, 0.0);
  double inside = 0.0;
  for (std::size_t c = 0; c < L.cells; ++c) {
    std::size_t rem = c;
    double prob = 1.0;
    for (int d = 0; d < L.dim; ++d) {
      prob *= axis[d][rem % static_cast<std::size_t>(L.per_axis)];
      rem /= static_cast<std::size_t>(L.per_axis);
    }
    hist[c] = p.rho * prob;
    inside += prob;
  }
  hist[L.cells] = p.rho * std::max(0.0, 1.0 - inside);
  return hist;
}

double measure_distance(const ParticleMeasure& F, const ParticleMeasure& G, double s,
                        DistanceScheme scheme, const BinSpec& bins) {
  if (F.dim() != G.dim()) throw UnsupportedScheme("dimension mismatch");
  if (scheme == DistanceScheme::Binned) {
    const BinLayout L = layout(F.dim(), bins);
    const auto hf = histogram(F, bins);
    const auto hg = histogram(G, bins);
    const auto wts = bin_weights(L, bins, s);
    double acc = 0.0;
    for (std::size_t c = 0; c < hf.size(); ++c) acc += wts[c] * std::abs(hf[c] - hg[c]);
    return acc;
  }
  auto key = [](const ParticleMeasure& M, std::size_t i) {
    const auto col = M.v.col(static_cast<Eigen::Index>(i));
    return std::vector<double>(col.data(), col.data() + col.size());
  };
  std::map<std::vector<double>, double> diff;
  for (std::size_t i = 0; i < F.size(); ++i) diff[key(F, i)] += F.weight(i);
  for (std::size_t i = 0; i < G.size(); ++i) diff[key(G, i)] -= G.weight(i);
  double acc = 0.0;
  for (const auto& [v, w] : diff) {
    double r2 = 1.0;
    for (double x : v) r2 += x * x;
    acc += std::abs(w) * (s == 0.0 ? 1.0 : std::pow(r2, 0.5 * s));
  }
  return acc;
}

double maxwellian_moment_norm(const MaxwellianParams& p, double s) {
  const int dim = p.dim();
  if (s == 0.0) return p.rho;
  if (s == 2.0) return p.rho * (1.0 + dim * p.T + p.u.squaredNorm());
  if (p.u.norm() == 0.0) {
    // radial law of |v|: r^{N-1} e^{-r^2/(2T)} normalized
    const double norm = quad::sphere_area(dim - 1) * std::pow(2.0 * std::numbers::pi * p.T, -0.5 * dim);
    const double hi = std::sqrt(p.T) * (12.0 + std::sqrt(std::max(0.0, s)));
    return p.rho * norm *
           quad::adaptive(
               [&](double r) {
                 return std::pow(r, dim - 1) * std::exp(-r * r / (2.0 * p.T)) * std::pow(1.0 + r * r, 0.5 * s);
               },
               0.0, hi, 1e-12);
  }
  if (dim > 4) throw UnsupportedScheme("shifted Maxwellian moments need dim <= 4");
  const quad::Rule1D gh = quad::gauss_hermite(40);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  std::vector<std::size_t> idx(dim, 0);
  double acc = 0.0;
  while (true) {
    double w = 1.0;
    double r2 = 1.0;
    for (int d = 0; d < dim; ++d) {
      w *= gh.weights[idx[d]] * norm;
      const double x = p.u[d] + std::sqrt(p.T) * gh.nodes[idx[d]];
      r2 += x * x;
    }
    acc += w * std::pow(r2, 0.5 * s);
    int d = 0;
    while (d < dim && ++idx[d] == gh.size()) idx[d++] = 0;
    if (d == dim) break;
  }
  return p.rho * acc;
}

double measure_distance(const ParticleMeasure& F, const MaxwellianParams& p, double s,
                        DistanceScheme scheme, const BinSpec& bins) {
  if (F.dim() != p.dim()) throw UnsupportedScheme("dimension mismatch");
  if (scheme == DistanceScheme::Exact) return moment_norm(F, s) + maxwellian_moment_norm(p, s);
  const BinLayout L = layout(F.dim(), bins);
  const auto hf = histogram(F, bins);
  const auto hm = maxwellian_histogram(p, bins);
  const auto wts = bin_weights(L, bins, s);
  double acc = 0.0;
  for (std::size_t c = 0; c < hf.size(); ++c) acc += wts[c] * std::abs(hf[c] - hm[c]);
  return acc;
}

void write_measure_csv(const ParticleMeasure& F, const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot open " + path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "weight";
  for (int d = 0; d < F.dim(); ++d) out << ",v" << d + 1;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < F.size(); ++i) {
    out << F.weight(i);
    for (int d = 0; d < F.dim(); ++d) out << ',' << F.v(d, static_cast<Eigen::Index>(i));
    out << '\n';
  }
}

ParticleMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open " + path);
  std::string line;
  int dim = -1;
  std::vector<double> weights;
  std::vector<double> coords;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (dim < 0) {
      if (line.rfind("weight", 0) != 0) throw ConfigInvalid(path + ": missing 'weight,v1,...' header");
      dim = static_cast<int>(std::count(line.begin(), line.end(), ','));
      if (dim < 1) throw ConfigInvalid(path + ": no velocity columns");
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != dim + 1) throw ConfigInvalid(path + ": ragged row '" + line + "'");
    if (!(row[0] > 0.0)) throw ConfigInvalid(path + ": atom weights must be positive");
    weights.push_back(row[0]);
    coords.insert(coords.end(), row.begin() + 1, row.end());
  }
  if (dim < 0 || weights.empty()) throw ConfigInvalid(path + ": no atoms");
  ParticleMeasure F(dim, weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    F.w[static_cast<Eigen::Index>(i)] = weights[i];
    for (int d = 0; d < dim; ++d) F.v(d, static_cast<Eigen::Index>(i)) = coords[i * dim + d];
  }
  return F;
}

}  // namespace boltz

namespace boltz {

MaxwellianParams MaxwellianMixture::triple() const {
  if (components.empty()) throw ZeroMass("empty mixture");
  const int dim = this->dim();
  double rho = 0.0, e = 0.0;
  Vec mom = Vec::Zero(dim);
  for (const auto& c : components) {
    rho += c.rho;
    mom += c.rho * c.u;
    e += c.rho * (c.u.squaredNorm() + dim * c.T);
  }
  if (!(rho > 0.0)) throw ZeroMass("mixture has no mass");
  MaxwellianParams p{rho, mom / rho, 0.0};
  p.T = (e / rho - p.u.squaredNorm()) / dim;
  return p;
}

MaxwellianMixture MaxwellianMixture::normalized() const {
  const MaxwellianParams p = triple();
  if (!(p.T > 0.0)) throw DiracTemperature("mixture has zero temperature");
  const double s = std::sqrt(p.T);
  MaxwellianMixture out;
  for (const auto& c : components) out.components.push_back({c.rho / p.rho, (c.u - p.u) / s, c.T / p.T});
  return out;
}

double MaxwellianMixture::density(const Vec& v) const {
  double sum = 0.0;
  for (const auto& c : components) sum += maxwellian_density(c, v);
  return sum;
}

ParticleMeasure MaxwellianMixture::sample(std::size_t count, std::uint64_t seed) const {
  const int dim = this->dim();
  const double rho = triple().rho;
  std::vector<double> w;
  for (const auto& c : components) w.push_back(c.rho);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  ParticleMeasure out(dim, count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& c = components[pick(rng)];
    const double s = std::sqrt(c.T);
    for (int d = 0; d < dim; ++d) out.v(d, static_cast<Eigen::Index>(i)) = c.u[d] + s * normal(rng);
  }
  out.w.setConstant(rho / static_cast<double>(count));
  return out;
}

GridDensity MaxwellianMixture::grid(std::shared_ptr<const GridGeometry> geom) const {
  return GridDensity::from_function(std::move(geom), [&](const Vec& v) { return density(v); });
}

}  // namespace boltz
