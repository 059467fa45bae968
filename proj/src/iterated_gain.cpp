#include "boltz/iterated_gain.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "boltz/errors.hpp"
#include "boltz/parallel.hpp"

namespace boltz {

KbQuadrature::KbQuadrature(int dim, KbResolution res)
    : dim_(dim), rule_(quad::make_sphere_rule(dim - 1, res.n_t, res.n_omega)) {
  if (dim < 3) throw InvalidKernel("the iterated gain kernel needs N >= 3");
}

std::optional<GainGeometry> gain_geometry(const Vec& v, const Vec& v_star, const Vec& w, const Vec& w_star,
                                          const Vec& omega) {
  const double r = (v - v_star).norm();
  const double d = (w - w_star).norm();
  if (r * d == 0.0) return std::nullopt;
  GainGeometry g;
  g.n = (v - v_star) / r;
  g.t = g.n.dot(2.0 * v - (w + w_star)) / d;
  g.omega = omega;
  g.sigma = sigma_n(g.n, g.t, omega);
  g.w_prime = 0.5 * (w + w_star) + 0.5 * d * g.sigma;
  const Vec sp = 2.0 * v - v_star - g.w_prime;
  g.sigma_prime = sp / sp.norm();
  return g;
}

namespace {

// K_B with n, t and frame already known.
double kb_core(const Vec& v, const Vec& v_star, const Vec& w, const Vec& w_star, double r, double d,
               const Vec& n, double t, const Frame& frame, const KernelSpec& spec, const KbQuadrature& q) {
  const int dim = spec.dim;
  const double z = zeta(t, dim);
  if (z == 0.0) return 0.0;
  const Vec center = 0.5 * (w + w_star);
  const Vec what = (w - w_star) / d;
  const double st = std::sqrt(std::max(0.0, 1.0 - t * t));
  const double expo = dim - 2 - spec.gamma;
  const auto& rule = q.rule();
  const auto perp = frame.rightCols(dim - 1);
  Vec sigma(dim), wp(dim), a(dim), sp(dim);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    sigma.noalias() = t * n + st * (perp * rule.points.col(static_cast<Eigen::Index>(k)));
    wp.noalias() = center + (0.5 * d) * sigma;
    a.noalias() = wp - v_star;
    const double A = a.norm();
    sp.noalias() = 2.0 * v - v_star - wp;
    const double spn = sp.norm();
    const double b1 = spec.b(what.dot(sigma));
    const double b2 = spec.b(a.dot(sp) / (A * spn));
    acc += rule.weights[k] * b1 * b2 * (expo == 0.0 ? 1.0 : std::pow(A, -expo));
  }
  return std::ldexp(1.0, dim) / (std::pow(d, 1.0 - spec.gamma) * r) * z * acc;
}

}  // namespace

double kb(const Vec& v, const Vec& v_star, const Vec& w, const Vec& w_star, const KernelSpec& spec,
          const KbQuadrature& q) {
  const double r = (v - v_star).norm();
  const double d = (w - w_star).norm();
  if (r * d == 0.0) return 0.0;
  const Vec n = (v - v_star) / r;
  const double t = n.dot(2.0 * v - (w + w_star)) / d;
  if (!(t > -1.0 && t < 1.0)) return 0.0;
  return kb_core(v, v_star, w, w_star, r, d, n, t, frame_from(n), spec, q);
}

namespace {

// L_B[psi](x, y) with the angular weights b(t_k) w_k precomputed.
template <typename Psi>
double lb_weighted(const Psi& psi, const Vec& x, const Vec& y, double gamma, const SphereQuadrature& sphere,
                   const std::vector<double>& bw) {
  const Vec g = x - y;
  const double speed = g.norm();
  if (speed == 0.0) return 0.0;
  const Frame frame = frame_from(g / speed);
  const Vec mid = 0.5 * (x + y);
  Vec xp(x.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < sphere.size(); ++k) {
    if (bw[k] == 0.0) continue;
    xp.noalias() = mid + (0.5 * speed) * (frame * sphere.local(k));
    acc += bw[k] * psi(xp);
  }
  return std::pow(speed, gamma) * acc;
}

std::vector<double> angular_weights(const KernelSpec& spec, const SphereQuadrature& sphere) {
  std::vector<double> out(sphere.size());
  for (std::size_t i = 0; i < sphere.size(); ++i) out[i] = sphere.weight(i) * spec.b(sphere.t(i));
  return out;
}

void require_moments(const ParticleMeasure& m, const char* name) {
  if (m.size() == 0) throw MomentHypothesisViolated(std::string(name) + " is empty");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m.weight(i) >= 0.0) || !std::isfinite(m.weight(i)) || !m.atom(i).allFinite())
      throw MomentHypothesisViolated(std::string(name) + " has a non-finite or negative atom");
  }
}

}  // namespace

RepresentationResult representation_check(const ParticleMeasure& f, const ParticleMeasure& g,
                                          const ParticleMeasure& h, const TestFunction& psi,
                                          const KernelSpec& spec, const RepresentationOptions& opt) {
  require_moments(f, "f");
  require_moments(g, "g");
  require_moments(h, "h");
  const int dim = spec.dim;
  if (f.dim() != dim || g.dim() != dim || h.dim() != dim) throw MomentHypothesisViolated("dimension mismatch");
  const std::size_t nf = f.size(), ng = g.size(), nh = h.size();
  const std::size_t triples = nf * ng * nh;

  RepresentationResult res;
  res.l1_bound = spec.a0 * spec.a0 * moment_norm(f, spec.gamma) * moment_norm(g, 2.0 * spec.gamma) *
                 moment_norm(h, 2.0 * spec.gamma);

  // nested weak form
  const SphereQuadrature outer(dim, opt.outer), inner(dim, opt.inner);
  const auto bw_out = angular_weights(spec, outer), bw_in = angular_weights(spec, inner);
  std::vector<double> lhs_part(triples, 0.0);
  parallel_for(triples, [&](std::size_t idx) {
    const std::size_t a = idx / (ng * nh), b = (idx / nh) % ng, c = idx % nh;
    const double wt = f.weight(a) * g.weight(b) * h.weight(c);
    if (wt == 0.0) return;
    const Vec vs = f.atom(a);
    auto inner_fn = [&](const Vec& x) { return lb_weighted(psi, x, vs, spec.gamma, inner, bw_in); };
    lhs_part[idx] = wt * lb_weighted(inner_fn, g.atom(b), h.atom(c), spec.gamma, outer, bw_out);
  });
  for (double x : lhs_part) res.lhs += x;

  // Monte Carlo: every triple is a stratum, directions come in antithetic pairs
  const int batches = std::max(2, opt.batches);
  const std::size_t per_triple =
      std::max<std::size_t>(2 * static_cast<std::size_t>(batches), opt.mc_samples / std::max<std::size_t>(1, triples));
  const std::size_t pairs_per_batch = std::max<std::size_t>(1, per_triple / (2 * static_cast<std::size_t>(batches)));
  const KbQuadrature kq(dim, opt.kb);
  const double area = quad::sphere_area(dim - 1);
  std::vector<double> batch_sum(static_cast<std::size_t>(batches), 0.0);
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(batches), std::vector<double>(triples, 0.0));
  parallel_for(static_cast<std::size_t>(batches) * triples, [&](std::size_t job) {
    const std::size_t batch = job / triples, idx = job % triples;
    const std::size_t a = idx / (ng * nh), b = (idx / nh) % ng, c = idx % nh;
    const double wt = f.weight(a) * g.weight(b) * h.weight(c);
    if (wt == 0.0) return;
    const Vec vs = f.atom(a), w = g.atom(b), ws = h.atom(c);
    const double d = (w - ws).norm();
    if (d == 0.0) return;
    const Vec rel = 0.5 * (w + ws) - vs;
    std::seed_seq seq{opt.seed, static_cast<std::uint64_t>(batch), static_cast<std::uint64_t>(idx)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud;
    Vec n(dim);
    double acc = 0.0;
    for (std::size_t s = 0; s < pairs_per_batch; ++s) {
      for (int k = 0; k < dim; ++k) n[k] = nd(rng);
      n.normalize();
      const double u = ud(rng);
      for (int sign : {1, -1}) {
        const Vec m = sign * n;
        const double proj = m.dot(rel);
        const double lo = std::max(0.0, proj - 0.5 * d), hi = proj + 0.5 * d;
        if (hi <= lo) continue;
        const double len = hi - lo;
        const double r = lo + (sign == 1 ? u : 1.0 - u) * len;
        if (r <= 0.0) continue;
        const Vec v = vs + r * m;
        const double k = kb(v, vs, w, ws, spec, kq);
        if (k == 0.0) continue;
        acc += area * len * std::pow(r, dim - 1) * k * psi(v);
      }
    }
    partial[batch][idx] = wt * acc / (2.0 * static_cast<double>(pairs_per_batch));
  });
  for (int bt = 0; bt < batches; ++bt)
    for (double x : partial[static_cast<std::size_t>(bt)]) batch_sum[static_cast<std::size_t>(bt)] += x;
  double mean = 0.0;
  for (double x : batch_sum) mean += x;
  mean /= batches;
  double var = 0.0;
  for (double x : batch_sum) var += (x - mean) * (x - mean);
  var /= (batches - 1);
  res.rhs = mean;
  res.sigma_mc = std::sqrt(var / batches);
  const double diff = std::abs(res.lhs - res.rhs);
  res.z_score = res.sigma_mc > 0.0 ? diff / res.sigma_mc : (diff == 0.0 ? 0.0 : INFINITY);
  return res;
}

void check_admissible_exponent(int dim, double gamma, double p) {
  if (dim < 3) throw InadmissibleExponent("the L^p estimates need N >= 3");
  if (gamma < dim - 2) {
    const double lo = (dim - 1.0) / (dim - 1.0 - gamma), hi = dim / (dim - 1.0 - gamma);
    if (!(p >= lo - 1e-14 && p < hi))
      throw InadmissibleExponent("p = " + std::to_string(p) + " outside [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + ")");
  } else if (!(p >= 1.0 && p < dim)) {
    throw InadmissibleExponent("p = " + std::to_string(p) + " outside [1, N)");
  }
}

double kb_lp_norm(const Vec& v_star, const Vec& w, const Vec& w_star, double p, const KernelSpec& spec,
                  const LpResolution& res) {
  const int dim = spec.dim;
  const double d = (w - w_star).norm();
  if (d == 0.0) throw CoincidentPair("w and w_* coincide");
  const Vec rel = 0.5 * (w + w_star) - v_star;
  const KbQuadrature kq(dim, res.kb);
  const quad::SphereRule dirs = quad::make_sphere_rule(dim, res.n_dir_t, res.n_dir_phi);
  const Frame axes = frame_from((w - w_star) / d);
  const double beta = dim - 1.0 - p;
  const quad::Rule1D singular = quad::gauss_jacobi(res.n_radial, 0.0, beta);
  const quad::Rule1D regular = quad::gauss_legendre(res.n_radial);
  std::vector<double> part(dirs.size(), 0.0);
  parallel_for(dirs.size(), [&](std::size_t k) {
    const Vec m = axes * dirs.points.col(static_cast<Eigen::Index>(k));
    const double proj = m.dot(rel);
    const double lo = proj - 0.5 * d, hi = proj + 0.5 * d;
    if (hi <= 0.0) return;
    const Frame frame = frame_from(m);
    auto value = [&](double r) {
      const Vec v = v_star + r * m;
      const double t = m.dot(2.0 * v - (w + w_star)) / d;
      if (!(t > -1.0 && t < 1.0)) return 0.0;
      return kb_core(v, v_star, w, w_star, r, d, m, t, frame, spec, kq);
    };
    double acc = 0.0;
    if (lo <= 0.0) {
      const double half = 0.5 * hi;
      for (std::size_t i = 0; i < singular.size(); ++i) {
        const double r = half * (1.0 + singular.nodes[i]);
        acc += singular.weights[i] * std::pow(value(r) * r, p);
      }
      acc *= std::pow(half, beta + 1.0);
    } else {
      const double half = 0.5 * (hi - lo);
      for (std::size_t i = 0; i < regular.size(); ++i) {
        const double r = lo + half * (1.0 + regular.nodes[i]);
        acc += regular.weights[i] * std::pow(value(r), p) * std::pow(r, dim - 1);
      }
      acc *= half;
    }
    part[k] = dirs.weights[k] * acc;
  });
  double total = 0.0;
  for (double x : part) total += x;
  return std::pow(total, 1.0 / p);
}

LpProbeResult lp_scaling_probe(const Vec& v_star, const Vec& w_dir, double p, const KernelSpec& spec,
                               const std::vector<double>& radii, const LpResolution& res, const Vec& offset) {
  check_admissible_exponent(spec.dim, spec.gamma, p);
  if (radii.size() < 2) throw ConfigInvalid("the scaling probe needs at least two radii");
  const Vec dir = w_dir.normalized();
  const Vec off = offset.size() == 0 ? Vec::Zero(spec.dim) : offset;
  LpProbeResult out;
  for (double radius : radii) {
    if (!(radius > 0.0)) throw CoincidentPair("probe radius must be positive");
    const Vec w = v_star + radius * (off + 0.5 * dir);
    const Vec ws = v_star + radius * (off - 0.5 * dir);
    out.radii.push_back(radius);
    out.norms.push_back(kb_lp_norm(v_star, w, ws, p, spec, res));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double x = std::log(out.radii[i]), y = std::log(out.norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double q_inv = 1.0 - 1.0 / p;
  out.predicted = 2.0 * spec.gamma - spec.dim * q_inv;
  return out;
}

namespace {

double interpolate(const GridDensity& f, const Vec& x) {
  const auto& g = f.geometry();
  std::size_t base = 0;
  double frac[kMaxDim];
  for (int d = 0; d < g.dim; ++d) {
    const double pos = (x[d] + g.R) / g.h;
    if (!(pos >= 0.0 && pos <= g.n - 1)) return 0.0;
    auto i = static_cast<std::size_t>(pos);
    if (i >= static_cast<std::size_t>(g.n - 1)) i = static_cast<std::size_t>(g.n - 2);
    frac[d] = pos - static_cast<double>(i);
    base += i * g.strides[d];
  }
  double acc = 0.0;
  for (unsigned corner = 0; corner < (1u << g.dim); ++corner) {
    double wgt = 1.0;
    std::size_t off = base;
    for (int d = 0; d < g.dim; ++d) {
      if (corner & (1u << d)) {
        wgt *= frac[d];
        off += g.strides[d];
      } else {
        wgt *= 1.0 - frac[d];
      }
    }
    if (wgt != 0.0) acc += wgt * f[off];
  }
  return acc;
}

}  // namespace

GridDensity t_ww_apply(const GridDensity& f, const Vec& w, const Vec& w_star,
                       std::shared_ptr<const GridGeometry> v_grid, const KernelSpec& spec,
                       const TwwResolution& res) {
  const double d = (w - w_star).norm();
  if (d == 0.0) throw CoincidentPair("w and w_* coincide");
  const int dim = spec.dim;
  const KbQuadrature kq(dim, res.kb);
  const quad::Rule1D band = quad::gauss_legendre(res.n_band);
  const quad::SphereRule sub = quad::make_sphere_rule(dim - 1, res.n_band, res.n_phi);
  const quad::Rule1D radial = quad::gauss_legendre(res.n_radial);
  const auto& fg = f.geometry();
  const double reach = fg.R * std::sqrt(static_cast<double>(fg.dim));
  GridDensity out(v_grid);
  if (f.max_value() == 0.0 && f.min_value() == 0.0) return out;
  parallel_for(v_grid->count, [&](std::size_t node) {
    const Vec v = v_grid->node(node);
    const Vec a = (2.0 * v - (w + w_star)) / d;
    const double alen = a.norm();
    const double tau_max = alen > 1.0 ? 1.0 / alen : 1.0;
    const Frame axes = frame_from(alen > 0.0 ? Vec(a / alen) : unit_axis(dim, 0));
    const double rho_max = v.norm() + reach;
    double acc = 0.0;
    for (std::size_t i = 0; i < band.size(); ++i) {
      const double tau = tau_max * band.nodes[i];
      const double polar_w = tau_max * band.weights[i] * zeta(tau, dim);
      if (polar_w == 0.0) continue;
      const double st = std::sqrt(1.0 - tau * tau);
      for (std::size_t j = 0; j < sub.size(); ++j) {
        Vec m = tau * axes.col(0) + st * (axes.rightCols(dim - 1) * sub.points.col(static_cast<Eigen::Index>(j)));
        m.normalize();
        const double t = m.dot(a);
        if (!(t > -1.0 && t < 1.0)) continue;
        const Frame frame = frame_from(m);
        double line = 0.0;
        for (std::size_t k = 0; k < radial.size(); ++k) {
          const double rho = 0.5 * rho_max * (1.0 + radial.nodes[k]);
          const Vec vs = v - rho * m;
          const double fv = interpolate(f, vs);
          if (fv == 0.0) continue;
          line += radial.weights[k] * std::pow(rho, dim - 1) * fv *
                  kb_core(v, vs, w, w_star, rho, d, m, t, frame, spec, kq);
        }
        acc += polar_w * sub.weights[j] * 0.5 * rho_max * line;
      }
    }
    out[node] = acc;
  });
  return out;
}

IterationConstants iteration_constants(int dim, double gamma) {
  if (dim < 3) throw InvalidKernel("iteration constants need N >= 3");
  if (!(gamma > 0.0 && gamma <= 2.0)) throw InvalidKernel("gamma must lie in (0, 2]");
  IterationConstants c;
  const bool low = gamma < dim - 2;
  c.n_gamma = low ? static_cast<int>(std::floor((dim - 1.0) / gamma + 1e-12)) : 1;
  c.gamma_1 = std::max(gamma, 1.0);
  c.gamma_star = std::max(gamma - 1.0, 0.0);
  for (int n = 1; n <= c.n_gamma; ++n) {
    c.theta_n.push_back(std::max(0.0, 1.0 - (dim - 2.0) / n) / dim);
    if (low) {
      const double den = dim - 1.0 - n * gamma;
      c.p_n.push_back(den > 1e-12 ? (dim - 1.0) / den : INFINITY);
    }
  }
  if (low) {
    const double lead = (dim - 1.0) / (gamma * c.n_gamma);
    c.alpha_1 = lead * (dim - 1.0 - gamma) / dim;
    c.alpha_2 = lead * std::max(1.0 - gamma, 0.0) / dim;
  }
  return c;
}

IterationConstants iteration_constants(const KernelSpec& spec) { return iteration_constants(spec.dim, spec.gamma); }

void write_probe_csv(const std::vector<ProbeRow>& rows, const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot open " + path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "probe,gamma,p,radius_or_case,value\n";
  out.precision(12);
  for (const auto& r : rows) out << r.probe << ',' << r.gamma << ',' << r.p << ',' << r.radius_or_case << ',' << r.value << '\n';
}

}  // namespace boltz
