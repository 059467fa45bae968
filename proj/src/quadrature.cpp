#include "boltz/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace boltz::quad {

Rule1D from_recurrence(const std::vector<double>& alpha, const std::vector<double>& beta,
                       double mu0) {
  const int n = static_cast<int>(alpha.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    jac(k, k) = alpha[k];
    if (k + 1 < n) {
      const double off = std::sqrt(beta[k + 1]);
      jac(k, k + 1) = off;
      jac(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = eig.eigenvalues()[k];
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

Rule1D gauss_jacobi(int n, double a, double b) {
  if (n < 1 || a <= -1.0 || b <= -1.0) {
    throw std::invalid_argument("gauss_jacobi: need n >= 1 and a, b > -1");
  }
  std::vector<double> alpha(n), beta(n, 0.0);
  const double ab = a + b;
  alpha[0] = (b - a) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    alpha[k] = (b * b - a * a) / (s * (s + 2.0));
    if (k == 1) {
      beta[k] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      beta[k] = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
  return from_recurrence(alpha, beta, mu0);
}

Rule1D gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

Rule1D gauss_hermite(int n) {
  std::vector<double> alpha(n, 0.0), beta(n, 0.0);
  for (int k = 1; k < n; ++k) beta[k] = k;
  return from_recurrence(alpha, beta, std::sqrt(2.0 * std::numbers::pi));
}

Rule1D gauss_half_range(int n, double power, double scale) {
  if (n < 1 || power <= -1.0 || scale <= 0.0) {
    throw std::invalid_argument("gauss_half_range: need n >= 1, power > -1, scale > 0");
  }
  // Discretize the weight on [0, L] with panels of Gauss-Legendre points. The
  // first panel uses Gauss-Jacobi to absorb the r^power factor at the origin.
  const double cutoff = std::sqrt((2.0 * n + power + 80.0) / scale);
  const int panels = 64;
  const int per_panel = 48;
  const double width = cutoff / panels;
  std::vector<double> xs, ws;
  xs.reserve(panels * per_panel);
  ws.reserve(panels * per_panel);
  {
    // int_0^width r^power g(r) dr with r = width (1+x)/2.
    const Rule1D gj = gauss_jacobi(per_panel, 0.0, power);
    const double jac = std::pow(width / 2.0, power + 1.0);
    for (std::size_t i = 0; i < gj.size(); ++i) {
      const double r = width * (1.0 + gj.nodes[i]) / 2.0;
      xs.push_back(r);
      ws.push_back(gj.weights[i] * jac * std::exp(-scale * r * r));
    }
  }
  const Rule1D gl = gauss_legendre(per_panel);
  for (int p = 1; p < panels; ++p) {
    const double lo = p * width;
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double r = lo + width * (1.0 + gl.nodes[i]) / 2.0;
      xs.push_back(r);
      ws.push_back(gl.weights[i] * width / 2.0 * std::pow(r, power) * std::exp(-scale * r * r));
    }
  }
  // Stieltjes procedure on the discrete measure.
  const std::size_t m = xs.size();
  std::vector<double> p_prev(m, 0.0), p_cur(m, 1.0), p_next(m);
  std::vector<double> alpha(n), beta(n, 0.0);
  double norm_prev = 1.0;
  double norm_cur = 0.0;
  for (std::size_t i = 0; i < m; ++i) norm_cur += ws[i];
  const double mu0 = norm_cur;
  for (int k = 0; k < n; ++k) {
    double num = 0.0;
    for (std::size_t i = 0; i < m; ++i) num += ws[i] * xs[i] * p_cur[i] * p_cur[i];
    alpha[k] = num / norm_cur;
    if (k > 0) beta[k] = norm_cur / norm_prev;
    if (k + 1 == n) break;
    double norm_next = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      p_next[i] = (xs[i] - alpha[k]) * p_cur[i] - (k > 0 ? beta[k] * p_prev[i] : 0.0);
      norm_next += ws[i] * p_next[i] * p_next[i];
    }
    // Rescale to keep magnitudes tame; the ratio norm_cur/norm_prev is what matters.
    const double s = 1.0 / std::sqrt(norm_next);
    for (std::size_t i = 0; i < m; ++i) {
      p_prev[i] = p_cur[i] * s;
      p_next[i] *= s;
    }
    p_cur.swap(p_next);
    norm_prev = norm_cur * s * s;
    norm_cur = 1.0;
  }
  return from_recurrence(alpha, beta, mu0);
}

Rule1D mapped(const Rule1D& rule, double lo, double hi) {
  Rule1D out;
  out.nodes.resize(rule.size());
  out.weights.resize(rule.size());
  const double half = 0.5 * (hi - lo);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    out.nodes[i] = lo + half * (1.0 + rule.nodes[i]);
    out.weights[i] = half * rule.weights[i];
  }
  return out;
}

double adaptive(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  double err = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, 20, rel_tol, &err, &l1);
  if (err > 10.0 * rel_tol * l1 && err > 1e-300) {
    throw std::runtime_error("adaptive quadrature failed to converge");
  }
  return value;
}

double sphere_area(int d) {
  const double k = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, k) / std::tgamma(k);
}

SphereRule make_sphere_rule(int dim, int n_t, int n_phi) {
  SphereRule rule;
  rule.dim = dim;
  if (dim == 1) {
    rule.points.resize(1, 2);
    rule.points << -1.0, 1.0;
    rule.weights = {1.0, 1.0};
    return rule;
  }
  if (dim == 2) {
    rule.points.resize(2, n_phi);
    rule.weights.assign(n_phi, 2.0 * std::numbers::pi / n_phi);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_phi;
      rule.points(0, j) = std::cos(phi);
      rule.points(1, j) = std::sin(phi);
    }
    return rule;
  }
  const SphereRule sub = make_sphere_rule(dim - 1, n_t, n_phi);
  const double expo = 0.5 * (dim - 3);
  const Rule1D polar = gauss_jacobi(n_t, expo, expo);
  const auto count = static_cast<Eigen::Index>(polar.size() * sub.size());
  rule.points.resize(dim, count);
  rule.weights.resize(count);
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < polar.size(); ++i) {
    const double t = polar.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (std::size_t j = 0; j < sub.size(); ++j, ++col) {
      rule.points(0, col) = t;
      rule.points.col(col).tail(dim - 1) = s * sub.points.col(static_cast<Eigen::Index>(j));
      rule.weights[col] = polar.weights[i] * sub.weights[j];
    }
  }
  return rule;
}

}  // namespace boltz::quad
