#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "boltz/quadrature.hpp"
#include "boltz/vec.hpp"

namespace boltz {

enum class AngularForm { Constant, Polynomial, Tabulated };

/// Angular part b(t), t = cos(theta), restricted to closed-form families so
/// that the cutoff integrals can be certified.
///
///  - Constant:   params = {c}
///  - Polynomial: params = {c0, c1, ...}, b(t) = sum c_k t^k
///  - Tabulated:  params = values at uniformly spaced nodes on [-1, 1],
///                linear interpolation between nodes
class AngularFunction {
 public:
  AngularFunction() = default;
  AngularFunction(AngularForm form, std::vector<double> params);

  static AngularFunction constant(double c) { return {AngularForm::Constant, {c}}; }

  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] AngularFunction scaled(double factor) const;

  [[nodiscard]] AngularForm form() const { return form_; }
  [[nodiscard]] const std::vector<double>& params() const { return params_; }

 private:
  AngularForm form_ = AngularForm::Constant;
  std::vector<double> params_{0.0};
};

std::string to_string(AngularForm form);
AngularForm angular_form_from_string(const std::string& name);

/// B(z, sigma) = |z|^gamma b(z/|z| . sigma) together with its derived constants.
struct KernelSpec {
  int dim = 3;
  double gamma = 1.0;
  AngularFunction b;
  double a0 = 0.0;     ///< Grad constant |S^{N-2}| int b(cos) sin^{N-2}
  double a2 = 0.0;     ///< |S^{N-2}| int b(cos) sin^N
  double b_sup = 0.0;  ///< sup b over sampled t
  double b_inf = 0.0;  ///< inf b over sampled t

  [[nodiscard]] double angular(double t) const { return b(t); }
  /// |z|^gamma b(n . sigma) for given relative speed and cosine.
  [[nodiscard]] double collision_kernel(double speed, double cos_angle) const {
    return std::pow(speed, gamma) * b(cos_angle);
  }
};

/// Validates the inputs and fills in the derived constants.
KernelSpec make_kernel(int dim, double gamma, AngularFunction b);

/// Hard spheres in dimension `dim` normalized to A0 = 1.
KernelSpec hard_spheres(int dim = 3, double gamma = 1.0);

double compute_a0(const KernelSpec& spec);
double compute_a2(const KernelSpec& spec);

/// Returns the kernel with b replaced by b / A0.
KernelSpec normalize_b(const KernelSpec& spec);

nlohmann::json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);

/// v' and v_*' for a collision with unit direction sigma.
std::pair<Vec, Vec> post_collision(const Vec& v, const Vec& v_star, const Vec& sigma);

/// (1 - t^2)^{(N-3)/2} on (-1, 1), zero outside.
double zeta(double t, int dim);

/// sigma_n(t, omega) with the clamping to -n / n outside (-1, 1).
Vec sigma_n(const Vec& n, double t, const Vec& omega);

/// Orthonormal frame whose first column is n. The remaining columns are
/// obtained by Gram-Schmidt over the canonical axes, skipping the axis of the
/// largest |n_i| (ties resolved towards the lower index).
Frame frame_from(const Vec& n);

/// Sphere quadrature layout in the change-of-variables parametrization:
/// Gauss-Jacobi nodes in t carrying zeta(t) and a product rule on S^{N-2}.
struct SphereResolution {
  int n_t = 16;
  int n_omega = 32;
};

/// Cached rule on S^{N-1} in coordinates relative to an axis n.
class SphereQuadrature {
 public:
  SphereQuadrature(int dim, SphereResolution res);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return rule_.size(); }
  [[nodiscard]] double t(std::size_t i) const { return rule_.points(0, static_cast<Eigen::Index>(i)); }
  [[nodiscard]] double weight(std::size_t i) const { return rule_.weights[i]; }
  /// Local coordinates of node i; column 0 of a frame maps onto coordinate 0.
  [[nodiscard]] auto local(std::size_t i) const { return rule_.points.col(static_cast<Eigen::Index>(i)); }

  /// int_{S^{N-1}} psi(sigma) dsigma with axis n.
  template <typename F>
  double integrate(const Vec& n, F&& psi) const {
    const Frame frame = frame_from(n);
    double acc = 0.0;
    Vec sigma(dim_);
    for (std::size_t i = 0; i < size(); ++i) {
      sigma.noalias() = frame * local(i);
      acc += weight(i) * psi(sigma);
    }
    return acc;
  }

 private:
  int dim_;
  quad::SphereRule rule_;
};

/// One-shot version of SphereQuadrature::integrate.
double sphere_integrate(const std::function<double(const Vec&)>& psi, const Vec& n, int dim,
                        SphereResolution res);
double sphere_integrate(const std::function<double(const Vec&)>& psi, const Vec& n, const KernelSpec& spec,
                        SphereResolution res);

}  // namespace boltz
