#include "boltz/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "boltz/errors.hpp"

namespace boltz {

AngularFunction::AngularFunction(AngularForm form, std::vector<double> params)
    : form_(form), params_(std::move(params)) {
  if (params_.empty()) throw InvalidKernel("angular function needs at least one parameter");
  if (form_ == AngularForm::Tabulated && params_.size() < 2)
    throw InvalidKernel("tabulated angular function needs at least two nodes");
  for (double p : params_)
    if (!std::isfinite(p)) throw InvalidKernel("non-finite angular parameter");
}

double AngularFunction::operator()(double t) const {
  t = std::clamp(t, -1.0, 1.0);
  switch (form_) {
    case AngularForm::Constant:
      return params_[0];
    case AngularForm::Polynomial: {
      double acc = 0.0;
      for (auto it = params_.rbegin(); it != params_.rend(); ++it) acc = acc * t + *it;
      return acc;
    }
    case AngularForm::Tabulated: {
      const auto cells = static_cast<double>(params_.size() - 1);
      const double x = (t + 1.0) * 0.5 * cells;
      const auto i = std::min(static_cast<std::size_t>(x), params_.size() - 2);
      const double frac = x - static_cast<double>(i);
      return params_[i] * (1.0 - frac) + params_[i + 1] * frac;
    }
  }
  return 0.0;
}

AngularFunction AngularFunction::scaled(double factor) const {
  std::vector<double> p = params_;
  for (double& x : p) x *= factor;
  return {form_, std::move(p)};
}

std::string to_string(AngularForm form) {
  switch (form) {
    case AngularForm::Constant: return "constant";
    case AngularForm::Polynomial: return "polynomial";
    case AngularForm::Tabulated: return "tabulated";
  }
  return "constant";
}

AngularForm angular_form_from_string(const std::string& name) {
  if (name == "constant") return AngularForm::Constant;
  if (name == "polynomial") return AngularForm::Polynomial;
  if (name == "tabulated") return AngularForm::Tabulated;
  throw InvalidKernel("unknown angular form '" + name + "'");
}

namespace {

// |S^{N-2}| int_0^pi b(cos th) sin^k th dth. Tabulated b is split at its kinks.
double angular_moment(const KernelSpec& spec, int power) {
  std::vector<double> breaks{0.0, std::numbers::pi};
  if (spec.b.form() == AngularForm::Tabulated) {
    const auto cells = spec.b.params().size() - 1;
    for (std::size_t i = 1; i < cells; ++i)
      breaks.push_back(std::acos(-1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(cells)));
    std::sort(breaks.begin(), breaks.end());
  }
  auto integrand = [&](double th) { return spec.b(std::cos(th)) * std::pow(std::sin(th), power); };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    acc += quad::adaptive(integrand, breaks[i], breaks[i + 1], 1e-13);
  return quad::sphere_area(spec.dim - 2) * acc;
}

constexpr int kSamples = 2001;

}  // namespace

double compute_a0(const KernelSpec& spec) {
  const double a0 = angular_moment(spec, spec.dim - 2);
  if (!(a0 > 0.0)) throw NonPositiveA0("A0 = " + std::to_string(a0));
  return a0;
}

double compute_a2(const KernelSpec& spec) { return angular_moment(spec, spec.dim); }

KernelSpec make_kernel(int dim, double gamma, AngularFunction b) {
  if (dim < 2 || dim > kMaxDim) throw InvalidKernel("dimension out of range: " + std::to_string(dim));
  if (!(gamma > 0.0 && gamma <= 2.0)) throw InvalidKernel("gamma must lie in (0, 2]");
  KernelSpec spec;
  spec.dim = dim;
  spec.gamma = gamma;
  spec.b = std::move(b);
  spec.b_sup = -INFINITY;
  spec.b_inf = INFINITY;
  for (int i = 0; i < kSamples; ++i) {
    const double t = -1.0 + 2.0 * i / (kSamples - 1);
    const double bt = spec.b(t);
    const double mirror = spec.b(-t);
    if (std::abs(bt - mirror) > 1e-12 * std::max(1.0, std::abs(bt)))
      throw InvalidKernel("angular function is not even");
    spec.b_sup = std::max(spec.b_sup, bt);
    spec.b_inf = std::min(spec.b_inf, bt);
  }
  if (spec.b_inf < 0.0) throw InvalidKernel("angular function takes negative values");
  spec.a0 = compute_a0(spec);
  spec.a2 = compute_a2(spec);
  return spec;
}

KernelSpec hard_spheres(int dim, double gamma) {
  return make_kernel(dim, gamma, AngularFunction::constant(1.0 / quad::sphere_area(dim - 1)));
}

KernelSpec normalize_b(const KernelSpec& spec) {
  const double a0 = compute_a0(spec);
  KernelSpec out = spec;
  out.b = spec.b.scaled(1.0 / a0);
  out.a0 = compute_a0(out);
  out.a2 = spec.a2 / a0;
  out.b_sup = spec.b_sup / a0;
  out.b_inf = spec.b_inf / a0;
  return out;
}

nlohmann::json kernel_to_json(const KernelSpec& spec) {
  return {{"N", spec.dim},
          {"gamma", spec.gamma},
          {"b", {{"form", to_string(spec.b.form())}, {"params", spec.b.params()}}}};
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidKernel("kernel must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "N" && key != "gamma" && key != "b") throw InvalidKernel("unknown kernel key '" + key + "'");
  try {
    const auto& b = j.at("b");
    for (const auto& [key, _] : b.items())
      if (key != "form" && key != "params") throw InvalidKernel("unknown key 'b." + key + "'");
    std::vector<double> params;
    if (b.at("params").is_number())
      params.push_back(b.at("params").get<double>());
    else
      params = b.at("params").get<std::vector<double>>();
    return make_kernel(j.at("N").get<int>(), j.at("gamma").get<double>(),
                       AngularFunction(angular_form_from_string(b.at("form").get<std::string>()),
                                       std::move(params)));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidKernel(e.what());
  }
}

std::pair<Vec, Vec> post_collision(const Vec& v, const Vec& v_star, const Vec& sigma) {
  const Vec mid = 0.5 * (v + v_star);
  const double half = 0.5 * (v - v_star).norm();
  return {mid + half * sigma, mid - half * sigma};
}

double zeta(double t, int dim) {
  if (!(t > -1.0 && t < 1.0)) return 0.0;
  if (dim == 3) return 1.0;
  return std::pow(1.0 - t * t, 0.5 * (dim - 3));
}

Vec sigma_n(const Vec& n, double t, const Vec& omega) {
  if (t >= 1.0) return n;
  if (t <= -1.0) return -n;
  return t * n + std::sqrt(1.0 - t * t) * omega;
}

Frame frame_from(const Vec& n) {
  const auto dim = n.size();
  Frame frame(dim, dim);
  frame.col(0) = n;
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 1; i < dim; ++i)
    if (std::abs(n[i]) > std::abs(n[pivot])) pivot = i;
  Eigen::Index col = 1;
  for (Eigen::Index axis = 0; axis < dim; ++axis) {
    if (axis == pivot) continue;
    Vec e = Vec::Zero(dim);
    e[axis] = 1.0;
    for (Eigen::Index k = 0; k < col; ++k) e -= frame.col(k).dot(e) * frame.col(k);
    for (Eigen::Index k = 0; k < col; ++k) e -= frame.col(k).dot(e) * frame.col(k);
    frame.col(col++) = e.normalized();
  }
  return frame;
}

SphereQuadrature::SphereQuadrature(int dim, SphereResolution res)
    : dim_(dim), rule_(quad::make_sphere_rule(dim, res.n_t, res.n_omega)) {}

double sphere_integrate(const std::function<double(const Vec&)>& psi, const Vec& n, int dim,
                        SphereResolution res) {
  return SphereQuadrature(dim, res).integrate(n, psi);
}

double sphere_integrate(const std::function<double(const Vec&)>& psi, const Vec& n, const KernelSpec& spec,
                        SphereResolution res) {
  return sphere_integrate(psi, n, spec.dim, res);
}

}  // namespace boltz
