#include "boltz/dvm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "boltz/analysis.hpp"
#include "boltz/errors.hpp"
#include "boltz/parallel.hpp"
#include "boltz/quadrature.hpp"

namespace boltz {

namespace {

using Index = std::array<int, kMaxDim>;

struct Box {
  Index lo{};
  Index hi{};
};

/// Calls row(first_flat_index, length) for every contiguous last-axis row of the box.
template <typename Row>
void for_rows(const GridGeometry& g, const Box& b, Row&& row) {
  const int N = g.dim;
  for (int d = 0; d < N; ++d)
    if (b.hi[d] <= b.lo[d]) return;
  Index idx = b.lo;
  const auto len = static_cast<std::size_t>(b.hi[N - 1] - b.lo[N - 1]);
  while (true) {
    std::size_t base = 0;
    for (int d = 0; d < N; ++d) base += static_cast<std::size_t>(idx[d]) * g.strides[d];
    row(base, len);
    int d = N - 2;
    for (; d >= 0; --d) {
      if (++idx[d] < b.hi[d]) break;
      idx[d] = b.lo[d];
    }
    if (d < 0) break;
  }
}

/// Nodes j with j and j + delta both on the grid.
Box pair_box(const GridGeometry& g, const std::vector<int>& delta) {
  Box b;
  for (int d = 0; d < g.dim; ++d) {
    b.lo[d] = std::max(0, -delta[d]);
    b.hi[d] = std::min(g.n, g.n - delta[d]);
  }
  return b;
}

std::ptrdiff_t flat_offset(const GridGeometry& g, const int* o) {
  std::ptrdiff_t s = 0;
  for (int d = 0; d < g.dim; ++d) s += static_cast<std::ptrdiff_t>(o[d]) * static_cast<std::ptrdiff_t>(g.strides[d]);
  return s;
}

struct StencilEntry {
  Index o{};
  std::ptrdiff_t flat = 0;
  double w = 0.0;
};

}  // namespace

GridCollision::GridCollision(std::shared_ptr<const GridGeometry> geom, KernelSpec spec, DvmResolution res)
    : geom_(std::move(geom)), spec_(std::move(spec)), res_(res) {
  if (geom_->dim != spec_.dim) throw ConfigInvalid("grid and kernel dimensions differ");
  const auto rule = quad::make_sphere_rule(spec_.dim, res_.sphere.n_t, res_.sphere.n_omega);
  sigma_ = rule.points;
  sigma_w_ = rule.weights;
  const int N = geom_->dim, n = geom_->n;
  std::vector<int> delta(N, -(n - 1));
  while (true) {
    int first = 0;
    for (int d = 0; d < N; ++d)
      if (delta[d] != 0) {
        first = delta[d];
        break;
      }
    if (first > 0) offsets_.push_back(delta);
    int d = N - 1;
    for (; d >= 0; --d) {
      if (++delta[d] <= n - 1) break;
      delta[d] = -(n - 1);
    }
    if (d < 0) break;
  }
}

GridDensity GridCollision::qplus(const GridDensity& f, const GridDensity& g) const {
  const GridGeometry& G = *geom_;
  const int N = G.dim, n = G.n;
  const double vol = G.cell_volume();
  const auto nchunks = static_cast<std::size_t>(std::max(1, workers()));
  std::vector<std::vector<double>> buffers(nchunks);
  std::vector<double> expected(nchunks, 0.0);
  const std::int64_t span = 4 * n + 1;
  const int last = N - 1;
  // a post-collision node lies within (n - 1) sqrt(N) / 2 of the pair centre
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(std::ceil(0.5 * (n - 1) * std::sqrt(double(N)))) + 2;
  const std::ptrdiff_t padded_n = n + 2 * pad;
  std::vector<std::ptrdiff_t> pstride(N, 1);
  for (int d = last - 1; d >= 0; --d) pstride[d] = (d == last - 1 ? padded_n : pstride[d + 1] * n);
  std::size_t padded_count = static_cast<std::size_t>(padded_n);
  for (int d = 0; d < last; ++d) padded_count *= static_cast<std::size_t>(n);

  parallel_chunks(offsets_.size(), nchunks, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    auto& Q = buffers[c];
    Q.assign(padded_count, 0.0);
    std::vector<double> P(G.count, 0.0);
    std::vector<std::pair<std::int64_t, double>> raw;
    std::vector<StencilEntry> stencil;
    Vec dv(N), nhat(N), p(N);
    for (std::size_t q = lo; q < hi; ++q) {
      const auto& delta = offsets_[q];
      const Box box = pair_box(G, delta);
      const std::ptrdiff_t dflat = flat_offset(G, delta.data());
      double sumP = 0.0;
      bool any = false;
      for_rows(G, box, [&](std::size_t base, std::size_t len) {
        for (std::size_t j = base; j < base + len; ++j) {
          const auto k = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(j) + dflat);
          P[j] = f[k] * g[j] + f[j] * g[k];
          sumP += P[j];
          any = any || P[j] != 0.0;
        }
      });
      if (!any) continue;

      for (int d = 0; d < N; ++d) dv[d] = delta[d];
      const double dn = dv.norm();
      nhat = dv / dn;
      double wsum = 0.0;
      const auto K = static_cast<Eigen::Index>(sigma_w_.size());
      std::vector<double> wk(static_cast<std::size_t>(K));
      for (Eigen::Index k = 0; k < K; ++k) {
        wk[k] = sigma_w_[k] * spec_.b(nhat.dot(sigma_.col(k)));
        wsum += wk[k];
      }
      if (!(wsum > 0.0)) continue;
      const double coef = vol * std::pow(dn * G.h, spec_.gamma) * spec_.a0 / wsum;

      raw.clear();
      for (Eigen::Index k = 0; k < K; ++k) {
        if (wk[k] == 0.0) continue;
        p = 0.5 * dv + 0.5 * dn * sigma_.col(k);
        Index base{};
        std::array<double, kMaxDim> frac{};
        for (int d = 0; d < N; ++d) {
          const double fl = std::floor(p[d]);
          base[d] = static_cast<int>(fl);
          frac[d] = p[d] - fl;
        }
        for (unsigned corner = 0; corner < (1u << N); ++corner) {
          double w = coef * wk[k];
          std::int64_t key = 0;
          for (int d = 0; d < N; ++d) {
            const bool up = (corner >> d) & 1u;
            w *= up ? frac[d] : 1.0 - frac[d];
            key = key * span + (base[d] + (up ? 1 : 0) + 2 * n);
          }
          if (w != 0.0) raw.emplace_back(key, w);
        }
      }
      std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      stencil.clear();
      for (const auto& [key, w] : raw) {
        if (!stencil.empty() && stencil.back().flat == key) {
          stencil.back().w += w;
          continue;
        }
        StencilEntry e;
        e.flat = key;
        e.w = w;
        stencil.push_back(e);
      }
      for (auto& e : stencil) {
        std::int64_t key = e.flat;
        for (int d = N - 1; d >= 0; --d) {
          e.o[d] = static_cast<int>(key % span) - 2 * n;
          key /= span;
        }
        e.flat = flat_offset(G, e.o.data());
      }

      // entries sharing the leading-axis offsets form one group; the last
      // axis of the accumulator is padded, so only leading axes clip
      double wtot = 0.0;
      for (const auto& e : stencil) wtot += e.w;
      expected[c] += wtot * sumP * vol;
      const std::size_t len = static_cast<std::size_t>(box.hi[last] - box.lo[last]);
      for (std::size_t g0 = 0; g0 < stencil.size();) {
        std::size_t g1 = g0 + 1;
        while (g1 < stencil.size() && std::equal(stencil[g1].o.begin(), stencil[g1].o.begin() + last, stencil[g0].o.begin()))
          ++g1;
        const Index& o = stencil[g0].o;
        Box rb;
        bool empty = false;
        for (int d = 0; d < last; ++d) {
          rb.lo[d] = std::max(box.lo[d], -o[d]);
          rb.hi[d] = std::min(box.hi[d], n - o[d]);
          empty = empty || rb.hi[d] <= rb.lo[d];
        }
        if (!empty) {
          Index idx = rb.lo;
          while (true) {
            std::size_t sb = static_cast<std::size_t>(box.lo[last]);
            std::ptrdiff_t db = pad + box.lo[last];
            for (int d = 0; d < last; ++d) {
              sb += static_cast<std::size_t>(idx[d]) * G.strides[d];
              db += static_cast<std::ptrdiff_t>(idx[d] + o[d]) * pstride[d];
            }
            const double* __restrict src = P.data() + sb;
            for (std::size_t k = g0; k < g1; ++k) {
              double* __restrict dst = Q.data() + (db + stencil[k].o[last]);
              const double w = stencil[k].w;
              for (std::size_t j = 0; j < len; ++j) dst[j] += w * src[j];
            }
            int d = last - 1;
            for (; d >= 0; --d) {
              if (++idx[d] < rb.hi[d]) break;
              idx[d] = rb.lo[d];
            }
            if (d < 0) break;
          }
        }
        g0 = g1;
      }
    }
  });

  GridDensity out(geom_);
  auto& v = out.values();
  double total = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) {
    if (buffers[c].empty()) continue;
    for (std::size_t i = 0; i < G.count; ++i) {
      const auto row = static_cast<std::ptrdiff_t>(i / static_cast<std::size_t>(n));
      v[i] += buffers[c][static_cast<std::size_t>(row * padded_n + pad + static_cast<std::ptrdiff_t>(i % n))];
    }
    total += expected[c];
  }
  const double lost = std::abs(total - out.mass());
  last_overflow_ = lost;
  if (lost > res_.overflow_tol * std::abs(total))
    throw DomainOverflow("gain mass fraction " + std::to_string(lost / std::abs(total)) + " left the grid");
  return out;
}

std::vector<double> GridCollision::loss_rate(const GridDensity& g) const {
  const GridGeometry& G = *geom_;
  const int N = G.dim;
  std::vector<double> L(G.count, 0.0);
  const double vol = G.cell_volume();
  for (const auto& delta : offsets_) {
    double dn2 = 0.0;
    for (int d = 0; d < N; ++d) dn2 += static_cast<double>(delta[d]) * delta[d];
    const double c = spec_.a0 * vol * std::pow(std::sqrt(dn2) * G.h, spec_.gamma);
    const std::ptrdiff_t dflat = flat_offset(G, delta.data());
    for_rows(G, pair_box(G, delta), [&](std::size_t base, std::size_t len) {
      for (std::size_t j = base; j < base + len; ++j) {
        const auto k = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(j) + dflat);
        L[k] += c * g[j];
        L[j] += c * g[k];
      }
    });
  }
  return L;
}

GridDensity GridCollision::qminus(const GridDensity& f, const GridDensity& g) const {
  return f.times(loss_rate(g));
}

QFields q_on_grid(const GridDensity& f, const GridDensity& g, const KernelSpec& spec, const DvmResolution& res) {
  const GridCollision op(f.geometry_ptr(), spec, res);
  QFields out;
  out.q_plus = op.qplus(f, g);
  out.overflow_mass = op.last_overflow();
  out.q_minus = op.qminus(f, g);
  return out;
}

namespace {

/// Columns 1, v_1..v_N, |v|^2 at every node.
Eigen::MatrixXd invariant_basis(const GridGeometry& G) {
  const int N = G.dim;
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(G.count), N + 2);
  for (std::size_t i = 0; i < G.count; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    phi(r, 0) = 1.0;
    for (int d = 0; d < N; ++d) phi(r, d + 1) = G.nodes(d, r);
    phi(r, N + 1) = G.nodes.col(r).squaredNorm();
  }
  return phi;
}

/// Solves for lambda so that the moments of A + dt q y0 exp(phi lambda) equal target.
Eigen::VectorXd conservative_lambda(const Eigen::MatrixXd& phi, const Eigen::VectorXd& A, const Eigen::VectorXd& src,
                                    const Eigen::VectorXd& target, double vol) {
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(phi.cols());
  const double scale = target.cwiseAbs().maxCoeff();
  for (int it = 0; it < 40; ++it) {
    const Eigen::VectorXd e = (phi * lambda).array().exp();
    const Eigen::VectorXd s = src.cwiseProduct(e);
    const Eigen::VectorXd G = vol * (phi.transpose() * (A + s)) - target;
    if (G.cwiseAbs().maxCoeff() <= 1e-15 * scale) break;
    const Eigen::MatrixXd J = vol * phi.transpose() * s.asDiagonal() * phi;
    const Eigen::VectorXd step = J.ldlt().solve(G);
    if (!step.allFinite()) break;
    lambda -= step;
  }
  return lambda;
}

Eigen::Map<const Eigen::VectorXd> as_vec(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

DvmTrajectory evolve(const GridDensity& f0, const GridCollision& op, const EvolveOptions& opts) {
  if (!(opts.dt > 0.0)) throw ConfigInvalid("dt must be positive");
  if (!(f0.mass() > 0.0)) throw ZeroMass("initial density has no mass");
  if (f0.min_value() < 0.0) throw ConfigInvalid("initial density must be nonnegative");
  const GridGeometry& G = op.geometry();
  const auto steps = static_cast<std::size_t>(std::ceil(opts.t_end / opts.dt - 1e-9));
  const double vol = G.cell_volume();
  const Eigen::MatrixXd phi = invariant_basis(G);
  const auto count = static_cast<Eigen::Index>(G.count);

  DvmTrajectory tr;
  tr.dt = opts.dt;
  tr.t.push_back(0.0);
  tr.f.push_back(f0);
  for (std::size_t k = 0; k < steps; ++k) {
    const GridDensity& f = tr.f.back();
    std::vector<double> L = op.loss_rate(f);
    GridDensity q = op.qplus(f, f);
    tr.overflow_mass += op.last_overflow();
    std::vector<double> X(G.count), Y(G.count);
    for (std::size_t i = 0; i < G.count; ++i) {
      X[i] = std::exp(-opts.dt * L[i]);
      Y[i] = std::exp(-0.5 * opts.dt * L[i]);
    }
    if (opts.conservative) {
      const Eigen::VectorXd fv = as_vec(f.values());
      const Eigen::VectorXd A = fv.cwiseProduct(as_vec(X));
      const Eigen::VectorXd src = opts.dt * as_vec(q.values()).cwiseProduct(as_vec(Y));
      const Eigen::VectorXd target = vol * (phi.transpose() * fv);
      const Eigen::VectorXd lambda = conservative_lambda(phi, A, src, target, vol);
      const Eigen::VectorXd corr = (phi * lambda).array().exp();
      for (Eigen::Index i = 0; i < count; ++i) Y[static_cast<std::size_t>(i)] *= corr[i];
    }
    GridDensity next(op.geometry_ptr());
    for (std::size_t i = 0; i < G.count; ++i) next[i] = f[i] * X[i] + opts.dt * q[i] * Y[i];
    tr.clip_mass += next.clip_negative();
    tr.gain.push_back(std::move(q));
    tr.loss.push_back(std::move(L));
    tr.X.push_back(std::move(X));
    tr.Y.push_back(std::move(Y));
    tr.t.push_back(opts.dt * static_cast<double>(k + 1));
    tr.f.push_back(std::move(next));
  }
  tr.loss.push_back(op.loss_rate(tr.f.back()));
  return tr;
}

FrequencyBound collision_frequency_bound(const DvmTrajectory& traj, double t0, const KernelSpec& spec) {
  FrequencyBound out;
  out.a_value = collision_frequency_floor(spec.dim, spec.gamma, spec.a2, t0);
  out.min_ratio = INFINITY;
  for (std::size_t k = 0; k < traj.f.size() && k < traj.loss.size(); ++k) {
    if (traj.t[k] < t0 - 1e-9) continue;
    const auto& G = traj.f[k].geometry();
    for (std::size_t i = 0; i < G.count; ++i) {
      const double v2 = G.nodes.col(static_cast<Eigen::Index>(i)).squaredNorm();
      const double ratio = traj.loss[k][i] / spec.a0 / std::pow(1.0 + v2, 0.5 * spec.gamma);
      out.min_ratio = std::min(out.min_ratio, ratio);
    }
  }
  out.pass = out.min_ratio >= out.a_value;
  return out;
}

namespace {

/// Discrete Duhamel integral consistent with the stepper:
/// D_0 = 0, D_{m+1} = D_m X_{k0+m} + dt src_m Y_{k0+m}.
std::vector<GridDensity> duhamel(const DvmTrajectory& tr, std::size_t k0, const std::vector<GridDensity>& src) {
  const auto& geom = tr.f[k0].geometry_ptr();
  std::vector<GridDensity> D;
  D.emplace_back(geom);
  for (std::size_t m = 0; m < src.size(); ++m) {
    const auto& X = tr.X[k0 + m];
    const auto& Y = tr.Y[k0 + m];
    GridDensity next(geom);
    for (std::size_t i = 0; i < geom->count; ++i) next[i] = D.back()[i] * X[i] + tr.dt * src[m][i] * Y[i];
    D.push_back(std::move(next));
  }
  return D;
}

bool is_zero(const GridDensity& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double x) { return x == 0.0; });
}

/// src_m = Q+(a_m, b_m) for m < J.
std::vector<GridDensity> gain_series(const GridCollision& op, const std::vector<GridDensity>& a,
                                     const std::vector<GridDensity>& b, std::size_t J) {
  std::vector<GridDensity> out;
  for (std::size_t m = 0; m < J; ++m)
    out.push_back(is_zero(a[m]) || is_zero(b[m]) ? GridDensity(op.geometry_ptr()) : op.qplus(a[m], b[m]));
  return out;
}

}  // namespace

DecompositionState decompose(const DvmTrajectory& traj, double t0, int n_max, const GridCollision& checked) {
  // the run itself already passed the overflow check; tail-weighted
  // sub-fields are allowed to spill without aborting the split
  const GridCollision op(checked.geometry_ptr(), checked.kernel(), {checked.resolution().sphere, 1.0});
  if (n_max < 0) throw ConfigInvalid("n_max must be nonnegative");
  if (traj.f.size() < 2 || traj.X.size() + 1 != traj.f.size() || traj.gain.size() + 1 != traj.f.size())
    throw InsufficientTemporalResolution("trajectory does not carry per-step factors");
  const double kf = t0 / traj.dt;
  const auto k0 = static_cast<std::size_t>(std::llround(kf));
  if (std::abs(kf - static_cast<double>(k0)) > 1e-9 * std::max(1.0, kf))
    throw InsufficientTemporalResolution("t0 is not a recorded time");
  if (k0 + 1 >= traj.f.size()) throw InsufficientTemporalResolution("fewer than two recorded times after t0");
  const std::size_t J = traj.f.size() - 1 - k0;
  const auto& geom = op.geometry_ptr();

  DecompositionState st;
  st.t0 = t0;
  st.k0 = k0;
  st.n_max = n_max;
  std::vector<GridDensity> f(traj.f.begin() + static_cast<std::ptrdiff_t>(k0), traj.f.end());
  for (std::size_t m = 0; m <= J; ++m) st.t.push_back(traj.t[k0 + m]);

  std::vector<double> logE(geom->count, 0.0);
  std::vector<GridDensity> fE;
  GridDensity E = f[0];
  for (std::size_t m = 0; m <= J; ++m) {
    st.log_E.push_back(logE);
    fE.push_back(E);
    if (m == J) break;
    for (std::size_t i = 0; i < geom->count; ++i) {
      logE[i] += traj.dt * traj.loss[k0 + m][i];
      E[i] *= traj.X[k0 + m][i];
    }
  }

  st.f_n.push_back(f);
  st.h_n.push_back(std::vector<GridDensity>(J + 1, GridDensity(geom)));
  if (n_max == 0) return st;

  std::vector<GridDensity> gain(traj.gain.begin() + static_cast<std::ptrdiff_t>(k0), traj.gain.end());
  std::vector<GridDensity> h1 = duhamel(traj, k0, gain_series(op, f, fE, J));
  for (std::size_t m = 0; m <= J; ++m) h1[m] += fE[m];
  const std::vector<GridDensity> inner = duhamel(traj, k0, gain);
  st.f_n.push_back(duhamel(traj, k0, gain_series(op, f, inner, J)));
  st.h_n.push_back(h1);

  for (int n = 2; n <= n_max; ++n) {
    const auto& fp = st.f_n.back();
    const auto& hp = st.h_n.back();
    const auto Dff = duhamel(traj, k0, gain_series(op, fp, fp, J));
    std::vector<GridDensity> fn = duhamel(traj, k0, gain_series(op, fp, Dff, J));

    std::vector<GridDensity> f_plus_fp;
    for (std::size_t m = 0; m <= J; ++m) f_plus_fp.push_back(f[m] + fp[m]);
    const auto Dfh = duhamel(traj, k0, gain_series(op, f_plus_fp, hp, J));
    auto src = gain_series(op, f, Dfh, J);
    const auto src2 = gain_series(op, hp, Dff, J);
    for (std::size_t m = 0; m < J; ++m) src[m] += src2[m];
    std::vector<GridDensity> hn = duhamel(traj, k0, src);
    for (std::size_t m = 0; m <= J; ++m) hn[m] += h1[m];
    st.f_n.push_back(std::move(fn));
    st.h_n.push_back(std::move(hn));
  }
  return st;
}

DecompositionSummary decomposition_report(const DecompositionState& st, const DvmTrajectory& traj,
                                          const KernelSpec& spec, double identity_tol) {
  DecompositionSummary s;
  s.a = collision_frequency_floor(spec.dim, spec.gamma, spec.a2, st.t0);
  const auto& f = st.f_n[0];
  const std::size_t J = st.t.size() - 1;
  auto triple_bar = [&](double order) {
    double sup = 0.0;
    for (const auto& x : f) sup = std::max(sup, x.l1_norm(order));
    return sup;
  };
  s.pass = true;
  s.min_node_value = INFINITY;
  for (int n = 1; n <= st.n_max; ++n) {
    const double norm = triple_bar(2.0 + (2.0 * n - 1.0) * spec.gamma);
    double sup_val = 0.0, lip = 0.0;
    for (std::size_t m = 0; m <= J; ++m) {
      const auto& fn = st.f_n[n][m];
      const auto& hn = st.h_n[n][m];
      DecompositionRow r;
      r.t = st.t[m];
      r.n = n;
      r.l1_f = fn.l1_norm(2.0);
      r.l1_h = hn.l1_norm(2.0);
      r.identity_residual = (f[m] - fn - hn).l1_norm(0.0) / f[m].l1_norm(0.0);
      const double dt = r.t - st.t0;
      r.envelope_rhs = std::pow(norm, 2.0 * n) * std::pow(1.0 + dt, 2.0 * n - 1.0) * std::exp(-s.a * dt);
      r.min_value = std::min(fn.min_value(), hn.min_value());
      r.pass = r.identity_residual <= identity_tol && r.min_value >= 0.0 && r.l1_h <= r.envelope_rhs;
      s.pass = s.pass && r.pass;
      s.max_identity_residual = std::max(s.max_identity_residual, r.identity_residual);
      s.min_node_value = std::min(s.min_node_value, r.min_value);
      sup_val = std::max(sup_val, fn.max_value());
      if (m > 0) lip = std::max(lip, (fn - st.f_n[n][m - 1]).l1_norm(0.0) / traj.dt);
      s.rows.push_back(r);
    }
    s.sup_value.push_back(sup_val);
    s.lipschitz.push_back(lip);
  }
  for (std::size_t m1 = 0; m1 <= J; ++m1)
    for (std::size_t m = m1 + 1; m <= J; ++m) {
      const double floor = s.a * (st.t[m] - st.t[m1]);
      for (std::size_t i = 0; i < st.log_E[m].size(); ++i)
        if (st.log_E[m][i] - st.log_E[m1][i] < floor * (1.0 - 1e-12)) s.damping_ordering = false;
    }
  s.pass = s.pass && s.damping_ordering;
  return s;
}

void write_decomposition_csv(const DecompositionSummary& s, const std::string& path,
                             const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot open " + path);
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "t,n,l1_f,l1_h,identity_residual,envelope_rhs,pass\n";
  out.precision(12);
  for (const auto& r : s.rows)
    out << r.t << ',' << r.n << ',' << r.l1_f << ',' << r.l1_h << ',' << r.identity_residual << ','
        << r.envelope_rhs << ',' << (r.pass ? 1 : 0) << '\n';
}

}  // namespace boltz
