#pragma once

#include <functional>
#include <string>

#include "boltz/grid_density.hpp"
#include "boltz/kernel.hpp"
#include "boltz/measures.hpp"

namespace boltz {

using TestFunction = std::function<double(const Vec&)>;

/// Named test functions: "one", "coord:k" (0-based), "energy" (|v|^2),
/// "bracket:s" (<v>^s).
TestFunction test_function(const std::string& tag);

struct WeakFormRequest {
  KernelSpec kernel;
  SphereResolution resolution{8, 16};
};

/// L_B[psi](v, v_*) = |v - v_*|^gamma int b(n.sigma) psi(v') dsigma.
double lb_psi(const TestFunction& psi, const Vec& v, const Vec& v_star, const KernelSpec& spec,
              const SphereQuadrature& sphere);

/// int psi dQ^+(F, G) = sum_ij w_i w_j L_B[psi](v_i, v_j).
double weak_qplus(const ParticleMeasure& F, const ParticleMeasure& G, const TestFunction& psi,
                  const WeakFormRequest& req);
/// int psi dQ^-(F, G) = A0 sum_ij w_i w_j |v_i - v_j|^gamma psi(v_i).
double weak_qminus(const ParticleMeasure& F, const ParticleMeasure& G, const TestFunction& psi,
                   const KernelSpec& spec);

struct BoundCheck {
  double lhs_plus = 0.0;
  double lhs_minus = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// ||Q^{+-}(F, G)||_s against 2^{(s+gamma)/2} A0 (||F||_{s+gamma}||G||_0 + ||F||_0||G||_{s+gamma}).
BoundCheck qbound_check(const ParticleMeasure& F, const ParticleMeasure& G, double s,
                        const WeakFormRequest& req, double tol = 1e-9);

/// ||Q^{+-}(F, F) - Q^{+-}(G, G)||_s against
/// 2^{(s+gamma)/2} A0 (||F+G||_{s+gamma}||F-G||_0 + ||F+G||_0||F-G||_{s+gamma}).
/// Atoms are matched by velocity; the gain side is bounded pair by pair,
/// which is exact when distinct pairs have distinct collision spheres.
BoundCheck qdifference_bound_check(const ParticleMeasure& F, const ParticleMeasure& G, double s,
                                   const WeakFormRequest& req, double tol = 1e-9);

/// |int psi d(Q^+ - Q^-)(f, f)| for a grid density, midpoint rule in both
/// velocities and sphere quadrature for the gain term.
double q_equilibrium_residual(const GridDensity& f, const TestFunction& psi, const WeakFormRequest& req);

}  // namespace boltz
