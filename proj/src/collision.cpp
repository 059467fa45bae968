#include "boltz/collision.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "boltz/errors.hpp"

namespace boltz {

TestFunction test_function(const std::string& tag) {
  if (tag == "one") return [](const Vec&) { return 1.0; };
  if (tag == "energy") return [](const Vec& v) { return v.squaredNorm(); };
  if (tag.rfind("coord:", 0) == 0) {
    const int k = std::stoi(tag.substr(6));
    return [k](const Vec& v) { return v[k]; };
  }
  if (tag.rfind("bracket:", 0) == 0) {
    const double s = std::stod(tag.substr(8));
    return [s](const Vec& v) { return std::pow(1.0 + v.squaredNorm(), 0.5 * s); };
  }
  throw ConfigInvalid("unknown test function '" + tag + "'");
}

namespace {

// b evaluated at the polar nodes of the sphere rule.
std::vector<double> angular_table(const KernelSpec& spec, const SphereQuadrature& sphere) {
  std::vector<double> out(sphere.size());
  for (std::size_t i = 0; i < sphere.size(); ++i) out[i] = sphere.weight(i) * spec.b(sphere.t(i));
  return out;
}

template <typename Psi>
double lb_psi_impl(const Psi& psi, const Vec& v, const Vec& v_star, double gamma, const SphereQuadrature& sphere,
                   const std::vector<double>& bw) {
  const Vec g = v - v_star;
  const double speed = g.norm();
  if (speed == 0.0) return 0.0;
  const Vec n = g / speed;
  const Vec mid = 0.5 * (v + v_star);
  const Frame frame = frame_from(n);
  Vec vp(v.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < sphere.size(); ++k) {
    if (bw[k] == 0.0) continue;
    vp.noalias() = mid + (0.5 * speed) * (frame * sphere.local(k));
    acc += bw[k] * psi(vp);
  }
  return std::pow(speed, gamma) * acc;
}

}  // namespace

double lb_psi(const TestFunction& psi, const Vec& v, const Vec& v_star, const KernelSpec& spec,
              const SphereQuadrature& sphere) {
  return lb_psi_impl(psi, v, v_star, spec.gamma, sphere, angular_table(spec, sphere));
}

double weak_qplus(const ParticleMeasure& F, const ParticleMeasure& G, const TestFunction& psi,
                  const WeakFormRequest& req) {
  const SphereQuadrature sphere(F.dim(), req.resolution);
  const auto bw = angular_table(req.kernel, sphere);
  double acc = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const Vec vi = F.atom(i);
    for (std::size_t j = 0; j < G.size(); ++j)
      acc += F.weight(i) * G.weight(j) * lb_psi_impl(psi, vi, G.atom(j), req.kernel.gamma, sphere, bw);
  }
  return acc;
}

double weak_qminus(const ParticleMeasure& F, const ParticleMeasure& G, const TestFunction& psi,
                   const KernelSpec& spec) {
  double acc = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const Vec vi = F.atom(i);
    double inner = 0.0;
    for (std::size_t j = 0; j < G.size(); ++j)
      inner += G.weight(j) * std::pow((vi - G.atom(j)).norm(), spec.gamma);
    acc += F.weight(i) * inner * psi(vi);
  }
  return spec.a0 * acc;
}

BoundCheck qbound_check(const ParticleMeasure& F, const ParticleMeasure& G, double s, const WeakFormRequest& req,
                        double tol) {
  const auto weight = test_function("bracket:" + std::to_string(s));
  const double g = req.kernel.gamma;
  BoundCheck out;
  out.lhs_plus = weak_qplus(F, G, weight, req);
  out.lhs_minus = weak_qminus(F, G, weight, req.kernel);
  out.rhs = std::pow(2.0, 0.5 * (s + g)) * req.kernel.a0 *
            (moment_norm(F, s + g) * moment_norm(G, 0.0) + moment_norm(F, 0.0) * moment_norm(G, s + g));
  out.pass = std::max(out.lhs_plus, out.lhs_minus) <= out.rhs * (1.0 + tol);
  return out;
}

BoundCheck qdifference_bound_check(const ParticleMeasure& F, const ParticleMeasure& G, double s,
                                   const WeakFormRequest& req, double tol) {
  const int dim = F.dim();
  std::map<std::vector<double>, std::pair<double, double>> merged;
  auto key = [](const ParticleMeasure& M, std::size_t i) {
    const auto col = M.v.col(static_cast<Eigen::Index>(i));
    return std::vector<double>(col.data(), col.data() + col.size());
  };
  for (std::size_t i = 0; i < F.size(); ++i) merged[key(F, i)].first += F.weight(i);
  for (std::size_t i = 0; i < G.size(); ++i) merged[key(G, i)].second += G.weight(i);
  const std::size_t m = merged.size();
  Eigen::MatrixXd V(dim, static_cast<Eigen::Index>(m));
  std::vector<double> wf(m), wg(m);
  std::size_t idx = 0;
  for (const auto& [v, w] : merged) {
    for (int d = 0; d < dim; ++d) V(d, static_cast<Eigen::Index>(idx)) = v[d];
    wf[idx] = w.first;
    wg[idx] = w.second;
    ++idx;
  }

  const KernelSpec& spec = req.kernel;
  const auto weight = test_function("bracket:" + std::to_string(s));
  const SphereQuadrature sphere(dim, req.resolution);
  const auto bw = angular_table(spec, sphere);
  BoundCheck out;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec vi = V.col(static_cast<Eigen::Index>(i));
    double loss = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const Vec vj = V.col(static_cast<Eigen::Index>(j));
      const double c = wf[i] * wf[j] - wg[i] * wg[j];
      if (c == 0.0) continue;
      loss += c * std::pow((vi - vj).norm(), spec.gamma);
      if (j >= i) {
        const double pair = lb_psi_impl(weight, vi, vj, spec.gamma, sphere, bw);
        out.lhs_plus += (j == i ? 1.0 : 2.0) * std::abs(c) * pair;
      }
    }
    out.lhs_minus += spec.a0 * std::abs(loss) * weight(vi);
  }

  ParticleMeasure sum(dim, m), diff(dim, m);
  sum.v = V;
  diff.v = V;
  for (std::size_t i = 0; i < m; ++i) {
    sum.w[static_cast<Eigen::Index>(i)] = wf[i] + wg[i];
    diff.w[static_cast<Eigen::Index>(i)] = wf[i] - wg[i];
  }
  const double g = spec.gamma;
  out.rhs = std::pow(2.0, 0.5 * (s + g)) * spec.a0 *
            (moment_norm(sum, s + g) * moment_norm(diff, 0.0) + moment_norm(sum, 0.0) * moment_norm(diff, s + g));
  out.pass = std::max(out.lhs_plus, out.lhs_minus) <= out.rhs * (1.0 + tol);
  return out;
}

double q_equilibrium_residual(const GridDensity& f, const TestFunction& psi, const WeakFormRequest& req) {
  const auto& geo = f.geometry();
  const KernelSpec& spec = req.kernel;
  const SphereQuadrature sphere(geo.dim, req.resolution);
  const auto bw = angular_table(spec, sphere);
  const double fmax = f.max_value();
  const double cutoff = 1e-17 * fmax * fmax;
  std::vector<std::size_t> active;
  std::vector<double> psi_node(geo.count);
  for (std::size_t i = 0; i < geo.count; ++i) {
    psi_node[i] = psi(geo.node(i));
    if (f[i] > 0.0) active.push_back(i);
  }
  double gain = 0.0;
  double loss = 0.0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const std::size_t i = active[a];
    const Vec vi = geo.node(i);
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      const std::size_t j = active[b];
      const double prod = f[i] * f[j];
      if (prod < cutoff) continue;
      const Vec vj = geo.node(j);
      gain += 2.0 * prod * lb_psi_impl(psi, vi, vj, spec.gamma, sphere, bw);
      loss += prod * spec.a0 * std::pow((vi - vj).norm(), spec.gamma) * (psi_node[i] + psi_node[j]);
    }
  }
  const double vol = geo.cell_volume();
  return std::abs(gain - loss) * vol * vol;
}

}  // namespace boltz
