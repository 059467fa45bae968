#include "boltz/dsmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "boltz/errors.hpp"
#include "boltz/quadrature.hpp"

namespace boltz {

Ensemble Ensemble::from_measure(ParticleMeasure F, KernelSpec kernel, std::uint64_t seed) {
  if (F.size() < 2) throw ConfigInvalid("an ensemble needs at least two particles");
  const double w0 = F.weight(0);
  for (std::size_t i = 1; i < F.size(); ++i)
    if (std::abs(F.weight(i) - w0) > 1e-12 * std::abs(w0)) throw ConfigInvalid("ensemble weights must be equal");
  if (kernel.dim != F.dim()) throw ConfigInvalid("kernel and particle dimensions differ");
  Ensemble e;
  e.particles = std::move(F);
  e.rng.seed(seed);
  e.kernel = std::move(kernel);
  return e;
}

double automatic_majorant(const Ensemble& e) {
  const Eigen::VectorXd mean = e.particles.v.rowwise().mean();
  const double r = (e.particles.v.colwise() - mean).colwise().norm().maxCoeff();
  return std::pow(2.0 * r, e.kernel.gamma) * (1.0 + 1e-12);
}

StepStats step(Ensemble& e, const DsmcConfig& config) {
  const KernelSpec& k = e.kernel;
  const int dim = k.dim;
  const std::size_t m = e.size();
  StepStats st;
  st.majorant = config.majorant > 0.0 ? config.majorant : automatic_majorant(e);
  // pair collision probability dt rho ((m-1)/m) |v - v*|^gamma A0, realized as
  // P_c (|v - v*|^gamma / majorant)(b / b_sup) with sigma uniform
  const double sphere = quad::sphere_area(dim - 1);
  const double rho = e.mass();
  const double rate = rho * (static_cast<double>(m - 1) / static_cast<double>(m)) * sphere * k.b_sup * st.majorant;
  st.substeps = std::max(1, static_cast<int>(std::ceil(config.dt * rate / 0.9)));
  const double h = config.dt / st.substeps;
  const double pc = h * rate;
  const bool isotropic = k.b.form() == AngularForm::Constant;

  std::vector<std::size_t> perm(m);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec sigma(dim);
  for (int s = 0; s < st.substeps; ++s) {
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    std::binomial_distribution<std::size_t> bin(m / 2, std::min(1.0, pc));
    const std::size_t K = bin(e.rng);
    // partial Fisher-Yates: first 2K entries form K disjoint uniform pairs
    for (std::size_t i = 0; i < 2 * K; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(perm[i], perm[pick(e.rng)]);
    }
    st.candidates += K;
    for (std::size_t c = 0; c < K; ++c) {
      const auto a = static_cast<Eigen::Index>(perm[2 * c]);
      const auto b = static_cast<Eigen::Index>(perm[2 * c + 1]);
      const Vec va = e.particles.v.col(a), vb = e.particles.v.col(b);
      const double rel = (va - vb).norm();
      const double g = std::pow(rel, k.gamma);
      if (g > st.majorant) throw MajorantViolated("pair speed exceeds the majorant");
      if (!(unif(e.rng) * st.majorant < g)) continue;
      for (int d = 0; d < dim; ++d) sigma[d] = normal(e.rng);
      sigma /= sigma.norm();
      if (!isotropic && !(unif(e.rng) * k.b_sup < k.b((va - vb).dot(sigma) / rel))) continue;
      const auto [vp, vsp] = post_collision(va, vb, sigma);
      e.particles.v.col(a) = vp;
      e.particles.v.col(b) = vsp;
      ++st.accepted;
    }
  }
  e.time += config.dt;
  return st;
}

StepStats advance(Ensemble& e, DsmcConfig& config) {
  const Ensemble saved = e;
  try {
    return step(e, config);
  } catch (const MajorantViolated&) {
    e = saved;
    config.majorant = automatic_majorant(e);
    return step(e, config);
  }
}

ParticleMeasure mehler_sample(const ParticleMeasure& F, double n, std::size_t count, std::uint64_t seed) {
  if (!(n > 0.0)) throw ConfigInvalid("Mehler parameter must be positive");
  const MaxwellianParams p = conserved_triple(F);
  if (!(p.T > 0.0)) throw DiracTemperature("Mehler transform needs T > 0");
  const int dim = F.dim();
  std::mt19937_64 rng(seed);
  std::vector<double> w(F.w.data(), F.w.data() + F.w.size());
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  const double a = std::exp(-n), c = std::sqrt(-std::expm1(-2.0 * n)), sT = std::sqrt(p.T);
  ParticleMeasure out(dim, count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = static_cast<Eigen::Index>(pick(rng));
    for (int d = 0; d < dim; ++d)
      out.v(d, static_cast<Eigen::Index>(i)) = a * sT * normal(rng) + p.u[d] + c * (F.v(d, j) - p.u[d]);
  }
  out.w.setConstant(p.rho / static_cast<double>(count));
  return out;
}

namespace {

double triple_drift(const MaxwellianParams& a, const MaxwellianParams& b) {
  const double scale = std::sqrt(b.T);
  return std::max({std::abs(a.rho - b.rho) / b.rho, (a.u - b.u).norm() / scale, std::abs(a.T - b.T) / b.T});
}

DsmcRecord record(const Ensemble& e, const MaxwellianParams& eq, const BinSpec& bins, double alpha) {
  DsmcRecord r;
  r.t = e.time;
  const auto& F = e.particles;
  r.dist_binned = measure_distance(F, eq, 0.0, DistanceScheme::Binned, bins);
  r.momentum = F.v * F.w;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double b = 1.0 + F.v.col(static_cast<Eigen::Index>(i)).squaredNorm();
    const double w = F.weight(i);
    double p = w;
    const double sb = std::sqrt(b);
    for (int k = 0; k < 7; ++k) {
      r.norms[k] += p;
      p *= sb;
    }
    r.exp_moment += w * std::exp(alpha * std::pow(b, 0.5 * e.kernel.gamma));
  }
  return r;
}

}  // namespace

DsmcTrajectory relax_experiment(const ParticleMeasure& F0, const KernelSpec& kernel, DsmcConfig config,
                                const RelaxOptions& opts) {
  ParticleMeasure start = opts.normalize ? normalize(F0) : F0;
  DsmcTrajectory tr;
  tr.triple = conserved_triple(start);
  const double mass = start.mass();
  const double energy_norm = moment_norm(start, 2.0);
  Ensemble e = Ensemble::from_measure(std::move(start), kernel, config.seed);

  // sampling noise of the binned distance at this particle count
  const auto eq_sample = maxwellian_sample(tr.triple, e.size(), config.seed ^ 0x9e3779b97f4a7c15ULL);
  tr.noise_floor = measure_distance(eq_sample, tr.triple, 0.0, DistanceScheme::Binned, config.bins);

  auto alpha = [&](double t) { return exponential_moment_alpha(t, mass, energy_norm, kernel.a2, kernel.gamma, opts.s0); };
  tr.rows.push_back(record(e, tr.triple, config.bins, alpha(0.0)));
  const auto steps = static_cast<std::size_t>(std::ceil(config.t_end / config.dt - 1e-9));
  for (std::size_t s = 1; s <= steps; ++s) {
    tr.collisions += advance(e, config).accepted;
    e.time = config.dt * static_cast<double>(s);
    if (s % static_cast<std::size_t>(std::max(1, config.record_every)) == 0 || s == steps) {
      tr.rows.push_back(record(e, tr.triple, config.bins, alpha(e.time)));
      tr.max_triple_drift = std::max(tr.max_triple_drift, triple_drift(conserved_triple(e.particles), tr.triple));
    }
  }

  // fit from fit_t_min until the distance first drops to the noise floor
  tr.window.t_min = opts.fit_t_min;
  tr.window.floor = opts.floor_factor * tr.noise_floor;
  tr.window.t_max = tr.rows.back().t;
  for (const auto& r : tr.rows)
    if (r.t >= opts.fit_t_min && r.dist_binned <= tr.window.floor) {
      tr.window.t_max = r.t;
      break;
    }
  std::vector<double> t, d;
  for (const auto& r : tr.rows) {
    t.push_back(r.t);
    d.push_back(r.dist_binned);
  }
  try {
    tr.fit = exp_fit(t, d, tr.window);
  } catch (const EmptyWindow&) {
    tr.fit.reset();
  }
  return tr;
}

Trajectory as_trajectory(const DsmcTrajectory& tr) {
  Trajectory out;
  out.moments.assign(7, {});
  for (const auto& r : tr.rows) {
    out.t.push_back(r.t);
    out.distance.push_back(r.dist_binned);
    for (int k = 0; k < 7; ++k) out.moments[k].push_back(r.norms[k]);
    out.exp_moment.push_back(r.exp_moment);
  }
  return out;
}

void write_trajectory_csv(const DsmcTrajectory& tr, const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot open " + path);
  if (!header_comment.empty()) out << header_comment << '\n';
  const int dim = tr.rows.empty() ? 3 : static_cast<int>(tr.rows.front().momentum.size());
  out << "t,dist_binned,m0";
  static const char* axes = "xyz";
  for (int d = 0; d < dim; ++d) out << ",m1" << (dim <= 3 ? std::string(1, axes[d]) : "_" + std::to_string(d + 1));
  out << ",m2,m3,m4,m5,m6\n";
  out.precision(12);
  for (const auto& r : tr.rows) {
    out << r.t << ',' << r.dist_binned << ',' << r.norms[0];
    for (int d = 0; d < dim; ++d) out << ',' << r.momentum[d];
    for (int k = 2; k < 7; ++k) out << ',' << r.norms[k];
    out << '\n';
  }
}

ParticleMeasure heavy_tail_sample(int dim, double nu, std::size_t count, std::uint64_t seed) {
  if (!(nu > 2.0)) throw ConfigInvalid("heavy-tail start needs nu > 2 for finite energy");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi(nu);
  ParticleMeasure out(dim, count);
  for (std::size_t i = 0; i < count; ++i) {
    const double scale = std::sqrt(nu / chi(rng));
    for (int d = 0; d < dim; ++d) out.v(d, static_cast<Eigen::Index>(i)) = scale * normal(rng);
  }
  out.w.setConstant(1.0 / static_cast<double>(count));
  return out;
}

}  // namespace boltz
