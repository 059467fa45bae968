#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace boltz::quad {

/// Nodes and weights of a one-dimensional rule.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// Golub-Welsch: Gauss rule from the monic three-term recurrence
/// p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}, with total mass mu0.
Rule1D from_recurrence(const std::vector<double>& alpha, const std::vector<double>& beta,
                       double mu0);

/// Weight 1 on [-1, 1].
Rule1D gauss_legendre(int n);

/// Weight (1-x)^a (1+x)^b on [-1, 1], a, b > -1.
Rule1D gauss_jacobi(int n, double a, double b);

/// Weight exp(-x^2/2) on the real line.
Rule1D gauss_hermite(int n);

/// Weight r^power exp(-scale r^2) on [0, inf). Recurrence obtained by the
/// discretized Stieltjes procedure.
Rule1D gauss_half_range(int n, double power, double scale);

/// Affine map of a rule on [-1, 1] to [lo, hi].
Rule1D mapped(const Rule1D& rule, double lo, double hi);

/// Adaptive Gauss-Kronrod on [lo, hi]; throws if the error estimate exceeds
/// rel_tol times the magnitude of the result.
double adaptive(const std::function<double(double)>& f, double lo, double hi,
                double rel_tol = 1e-12);

/// Surface measure of the unit sphere S^d embedded in R^{d+1}.
double sphere_area(int d);

/// Product rule on the unit sphere S^{dim-1} in R^dim, in local coordinates.
/// Coordinate 0 is the polar axis: points are t e_0 + sqrt(1-t^2) omega with
/// omega drawn recursively from the rule on S^{dim-2}. S^1 uses uniform
/// angles and S^0 is the two-point set {-1, +1}.
struct SphereRule {
  int dim = 0;
  Eigen::MatrixXd points;  ///< dim x count, unit columns
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// n_t Gauss-Jacobi nodes per polar level, n_phi uniform nodes on circles.
SphereRule make_sphere_rule(int dim, int n_t, int n_phi);

}  // namespace boltz::quad
