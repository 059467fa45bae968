#include "boltz/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "boltz/errors.hpp"
#include "boltz/parallel.hpp"
#include "boltz/quadrature.hpp"

namespace boltz {

namespace {

double binomial(double n, double k) { return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)); }

int harmonic_dim(int dim, int l) {
  if (dim == 2) return l == 0 ? 1 : 2;
  const double a = binomial(l + dim - 1, dim - 1);
  const double b = l >= 2 ? binomial(l + dim - 3, dim - 1) : 0.0;
  return static_cast<int>(std::lround(a - b));
}

/// Zonal harmonic normalized to 1 at t = 1, for l = 0..l_max.
void zonal(int dim, int l_max, double t, double* out) {
  out[0] = 1.0;
  if (l_max == 0) return;
  if (dim == 2) {
    out[1] = t;
    for (int l = 2; l <= l_max; ++l) out[l] = 2.0 * t * out[l - 1] - out[l - 2];
    return;
  }
  const double a = 0.5 * (dim - 2);
  double cm2 = 1.0, cm1 = 2.0 * a * t;
  out[1] = cm1 / (2.0 * a);
  for (int l = 2; l <= l_max; ++l) {
    const double c = (2.0 * t * (l + a - 1.0) * cm1 - (l + 2.0 * a - 2.0) * cm2) / l;
    out[l] = c / binomial(l + 2.0 * a - 1.0, l);
    cm2 = cm1;
    cm1 = c;
  }
}

/// Generalized Laguerre L_k^{(alpha)}(x), k = 0..kmax.
void laguerre(int kmax, double alpha, double x, double* out) {
  out[0] = 1.0;
  if (kmax == 0) return;
  out[1] = 1.0 + alpha - x;
  for (int k = 1; k < kmax; ++k) out[k + 1] = ((2.0 * k + 1.0 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1.0);
}

struct SectorLayout {
  int l;
  int count;   ///< radial functions
  int offset;  ///< first index in the stacked radial table
};

}  // namespace

std::vector<SectorMatrices> assemble_sectors(const MaxwellianParams& p, const KernelSpec& spec,
                                             const GalerkinBasis& basis) {
  const int N = spec.dim;
  if (p.dim() != N) throw ConfigInvalid("Maxwellian and kernel dimensions differ");
  if (N < 2) throw ConfigInvalid("linearized operator needs N >= 2");
  const int D = basis.degree;
  const int l_max = std::min(basis.l_max, D);
  std::vector<SectorLayout> sectors;
  int total = 0;
  for (int l = 0; l <= l_max; ++l) {
    const int count = (D - l) / 2 + 1;
    sectors.push_back({l, count, total});
    total += count;
  }
  // polynomial degree of the integrand in each variable is at most 2D (+ angular factor of b)
  const int exact = D + 1;
  const int nh = basis.n_hermite > 0 ? basis.n_hermite : exact;
  const int nr = basis.n_radial > 0 ? basis.n_radial : exact + 1;
  int b_deg = 0;
  if (spec.b.form() == AngularForm::Polynomial) b_deg = static_cast<int>(spec.b.params().size()) - 1;
  const int nt = basis.n_polar > 0 ? basis.n_polar : exact + (b_deg + 1) / 2 + (spec.b.form() == AngularForm::Tabulated ? 24 : 0);

  const double T = p.T, sT = std::sqrt(T);
  const quad::Rule1D gh = quad::gauss_hermite(nh);  // weight exp(-x^2/2)
  const quad::Rule1D rr = quad::gauss_half_range(nr, N - 1 + spec.gamma, 1.0 / (4.0 * T));
  const double jac = 0.5 * (N - 3);
  const quad::Rule1D tt = N == 2 ? quad::gauss_jacobi(nt, -0.5, -0.5) : quad::gauss_jacobi(nt, jac, jac);
  // exp(-|V|^2/T): V = x sqrt(T/2)
  const double vscale = std::sqrt(T / 2.0);
  const double pref = -0.25 * p.rho * p.rho * std::pow(2.0 * std::numbers::pi * T, -N) * quad::sphere_area(N - 2) *
                      std::pow(vscale, N);

  std::size_t nV = 1;
  for (int d = 0; d < N; ++d) nV *= gh.size();
  const auto chunks = static_cast<std::size_t>(std::max(1, workers()));
  std::vector<std::vector<Eigen::MatrixXd>> acc(chunks);

  parallel_chunks(nV, chunks, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    auto& A = acc[c];
    for (const auto& s : sectors) A.push_back(Eigen::MatrixXd::Zero(s.count, s.count));
    std::vector<double> radial(4 * static_cast<std::size_t>(total));
    std::vector<double> lag(static_cast<std::size_t>(D / 2 + 2));
    std::vector<double> z(static_cast<std::size_t>(l_max + 1));
    std::vector<double> tmp(4 * static_cast<std::size_t>(D + 2));
    Vec V(N), x[4];
    for (auto& xi : x) xi.resize(N);
    double norm[4];
    for (std::size_t iv = lo; iv < hi; ++iv) {
      std::size_t rem = iv;
      double wV = 1.0;
      for (int d = 0; d < N; ++d) {
        const std::size_t k = rem % gh.size();
        rem /= gh.size();
        V[d] = vscale * gh.nodes[k];
        wV *= gh.weights[k];
      }
      for (std::size_t ir = 0; ir < rr.size(); ++ir) {
        const double r = rr.nodes[ir];
        for (std::size_t it = 0; it < tt.size(); ++it) {
          const double t = tt.nodes[it];
          const double w = pref * wV * rr.weights[ir] * tt.weights[it] * spec.b(t);
          if (w == 0.0) continue;
          const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
          // v' , v*', v, v* relative to the bulk velocity
          x[0] = V;
          x[0][0] += 0.5 * r * t;
          x[0][1 % N] += N > 1 ? 0.5 * r * s : 0.0;
          x[1] = 2.0 * V - x[0];
          x[2] = V;
          x[2][0] += 0.5 * r;
          x[3] = V;
          x[3][0] -= 0.5 * r;
          for (int a = 0; a < 4; ++a) norm[a] = x[a].norm();
          // radial tables R_{k,l}(|x|) |x|^l / T^{l/2}
          for (int a = 0; a < 4; ++a) {
            const double q = norm[a] * norm[a] / (2.0 * T);
            double pw = 1.0;
            for (const auto& sec : sectors) {
              laguerre(sec.count - 1, sec.l + 0.5 * N - 1.0, q, lag.data());
              for (int k = 0; k < sec.count; ++k)
                radial[static_cast<std::size_t>(a * total + sec.offset + k)] = lag[static_cast<std::size_t>(k)] * pw;
              pw *= norm[a] / sT;
            }
          }
          static constexpr double sign[4] = {1.0, 1.0, -1.0, -1.0};
          double C[4][4][8];
          for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b) {
              const double den = norm[a] * norm[b];
              const double cosab = den > 0.0 ? std::clamp(x[a].dot(x[b]) / den, -1.0, 1.0) : 1.0;
              zonal(N, l_max, cosab, z.data());
              for (int l = 0; l <= l_max; ++l) C[a][b][l] = C[b][a][l] = sign[a] * sign[b] * z[static_cast<std::size_t>(l)];
            }
          for (std::size_t si = 0; si < sectors.size(); ++si) {
            const auto& sec = sectors[si];
            const int l = sec.l;
            // tmp[b][k] = sum_a C[a][b] R_a[k]
            for (int b = 0; b < 4; ++b)
              for (int k = 0; k < sec.count; ++k) {
                double v = 0.0;
                for (int a = 0; a < 4; ++a) v += C[a][b][l] * radial[static_cast<std::size_t>(a * total + sec.offset + k)];
                tmp[static_cast<std::size_t>(b * sec.count + k)] = v;
              }
            auto& M = A[si];
            for (int k = 0; k < sec.count; ++k)
              for (int k2 = 0; k2 < sec.count; ++k2) {
                double v = 0.0;
                for (int b = 0; b < 4; ++b)
                  v += tmp[static_cast<std::size_t>(b * sec.count + k)] * radial[static_cast<std::size_t>(b * total + sec.offset + k2)];
                M(k, k2) += w * v;
              }
          }
        }
      }
    }
  });

  std::vector<SectorMatrices> out;
  const quad::Rule1D gr = quad::gauss_half_range(D + 4, N - 1, 1.0 / (2.0 * T));
  const double mnorm = p.rho * std::pow(2.0 * std::numbers::pi * T, -0.5 * N);
  std::vector<double> lag(static_cast<std::size_t>(D / 2 + 2));
  for (std::size_t si = 0; si < sectors.size(); ++si) {
    const auto& sec = sectors[si];
    SectorMatrices m;
    m.l = sec.l;
    m.multiplicity = harmonic_dim(N, sec.l);
    m.op = Eigen::MatrixXd::Zero(sec.count, sec.count);
    for (std::size_t c = 0; c < chunks; ++c)
      if (!acc[c].empty()) m.op += acc[c][si];
    m.gram = Eigen::MatrixXd::Zero(sec.count, sec.count);
    for (std::size_t i = 0; i < gr.size(); ++i) {
      const double r = gr.nodes[i];
      laguerre(sec.count - 1, sec.l + 0.5 * N - 1.0, r * r / (2.0 * T), lag.data());
      const double pw = std::pow(r / sT, sec.l);
      for (int k = 0; k < sec.count; ++k)
        for (int k2 = 0; k2 < sec.count; ++k2)
          m.gram(k, k2) += mnorm * gr.weights[i] * lag[static_cast<std::size_t>(k)] * lag[static_cast<std::size_t>(k2)] * pw * pw;
    }
    out.push_back(std::move(m));
  }
  return out;
}

GapResult spectral_gap(const MaxwellianParams& p, const KernelSpec& spec, const GalerkinBasis& basis) {
  auto sectors = assemble_sectors(p, spec, basis);
  GapResult res;
  res.lambda_hat = INFINITY;
  for (auto& s : sectors) {
    const double scale = s.op.cwiseAbs().maxCoeff();
    res.symmetry_error = std::max(res.symmetry_error, (s.op - s.op.transpose()).cwiseAbs().maxCoeff() / scale);
    const Eigen::MatrixXd sym = 0.5 * (s.op + s.op.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, s.gram);
    s.eigenvalues = es.eigenvalues();
    SectorGap g;
    g.l = s.l;
    g.basis_size = static_cast<int>(s.gram.rows());
    g.lambda_hat = INFINITY;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
      const double lam = s.eigenvalues[i];
      if (std::abs(lam) < 1e-6) {
        ++g.kernel_dim;
        for (int m = 0; m < s.multiplicity; ++m) res.kernel_residuals.push_back(std::abs(lam));
      } else if (lam < 0.0) {
        g.lambda_hat = std::min(g.lambda_hat, -lam);
      }
    }
    res.kernel_dim += g.kernel_dim * s.multiplicity;
    res.lambda_hat = std::min(res.lambda_hat, g.lambda_hat);
    res.sectors.push_back(g);
  }
  if (res.kernel_dim != spec.dim + 2)
    throw KernelDimensionMismatch("found " + std::to_string(res.kernel_dim) + " near-zero eigenvalues, expected " +
                                  std::to_string(spec.dim + 2));
  return res;
}

ScalingCheck gap_scaling_check(const MaxwellianParams& p1, const MaxwellianParams& p2, const KernelSpec& spec,
                               const GalerkinBasis& basis, double tol) {
  ScalingCheck c;
  c.gap1 = spectral_gap(p1, spec, basis).lambda_hat;
  c.gap2 = spectral_gap(p2, spec, basis).lambda_hat;
  c.ratio = c.gap2 / c.gap1;
  c.expected = (p2.rho * std::pow(p2.T, 0.5 * spec.gamma)) / (p1.rho * std::pow(p1.T, 0.5 * spec.gamma));
  c.pass = std::abs(c.ratio / c.expected - 1.0) <= tol;
  return c;
}

std::vector<double> lm_apply(const PerturbationFn& phi, const Eigen::MatrixXd& points, const MaxwellianParams& p,
                             const KernelSpec& spec, const LmQuadrature& q) {
  const int N = spec.dim;
  const quad::Rule1D gh = quad::gauss_hermite(q.n_hermite);
  const SphereQuadrature sphere(N, q.sphere);
  const double sT = std::sqrt(p.T);
  std::size_t nV = 1;
  for (int d = 0; d < N; ++d) nV *= gh.size();
  const double mnorm = p.rho * std::pow(2.0 * std::numbers::pi, -0.5 * N);
  std::vector<double> out(static_cast<std::size_t>(points.cols()), 0.0);
  parallel_for(out.size(), [&](std::size_t i) {
    const Vec v = points.col(static_cast<Eigen::Index>(i));
    const double fv = phi(v);
    Vec vs(N);
    double acc = 0.0;
    for (std::size_t iv = 0; iv < nV; ++iv) {
      std::size_t rem = iv;
      double w = mnorm;
      for (int d = 0; d < N; ++d) {
        const std::size_t k = rem % gh.size();
        rem /= gh.size();
        vs[d] = p.u[d] + sT * gh.nodes[k];
        w *= gh.weights[k];
      }
      const Vec z = v - vs;
      const double zn = z.norm();
      if (zn == 0.0) continue;
      const double base = fv + phi(vs);
      const Vec n = z / zn;
      const double s = sphere.integrate(n, [&](const Vec& sigma) {
        const auto [vp, vsp] = post_collision(v, vs, sigma);
        return spec.b(n.dot(sigma)) * (phi(vp) + phi(vsp) - base);
      });
      acc += w * std::pow(zn, spec.gamma) * s;
    }
    out[i] = acc;
  });
  return out;
}

double lm_bilinear(const PerturbationFn& phi, const PerturbationFn& psi, const MaxwellianParams& p,
                   const KernelSpec& spec, const LmQuadrature& q) {
  const int N = spec.dim;
  const quad::Rule1D gh = quad::gauss_hermite(q.n_hermite);
  std::size_t nV = 1;
  for (int d = 0; d < N; ++d) nV *= gh.size();
  Eigen::MatrixXd pts(N, static_cast<Eigen::Index>(nV));
  std::vector<double> w(nV);
  const double mnorm = p.rho * std::pow(2.0 * std::numbers::pi, -0.5 * N);
  for (std::size_t iv = 0; iv < nV; ++iv) {
    std::size_t rem = iv;
    w[iv] = mnorm;
    for (int d = 0; d < N; ++d) {
      const std::size_t k = rem % gh.size();
      rem /= gh.size();
      pts(d, static_cast<Eigen::Index>(iv)) = p.u[d] + std::sqrt(p.T) * gh.nodes[k];
      w[iv] *= gh.weights[k];
    }
  }
  const auto Lpsi = lm_apply(psi, pts, p, spec, q);
  double acc = 0.0;
  for (std::size_t iv = 0; iv < nV; ++iv) acc += w[iv] * phi(pts.col(static_cast<Eigen::Index>(iv))) * Lpsi[iv];
  return acc;
}

std::vector<GapRow> gap_rows(const GapResult& r, const GalerkinBasis& basis) {
  const std::string tag = "D" + std::to_string(basis.degree) + "L" + std::to_string(basis.l_max);
  std::vector<GapRow> rows;
  for (const auto& s : r.sectors) rows.push_back({tag, "l=" + std::to_string(s.l), s.lambda_hat, s.kernel_dim});
  rows.push_back({tag, "all", r.lambda_hat, r.kernel_dim});
  return rows;
}

void write_gap_csv(const std::vector<GapRow>& rows, const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot open " + path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "basis,sector,lambda_hat,kernel_dim\n";
  out.precision(12);
  for (const auto& r : rows) out << r.basis << ',' << r.sector << ',' << r.lambda_hat << ',' << r.kernel_dim << '\n';
}

}  // namespace boltz
