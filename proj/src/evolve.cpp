#include "dsii/evolve.hpp"

#include <cmath>

#include "dsii/errors.hpp"

namespace dsii {

namespace {

const cplx kI{0.0, 1.0};

// phi-weights of the exponential order-4 scheme for one diagonal symbol
// z = dt*L. Closed forms, with the series fallback near z = 0 where the
// cubic denominators lose accuracy.
struct PhiWeights {
  cplx E, E2, Q, f1, f2, f3;
};

PhiWeights phi_weights(cplx L, double h) {
  const cplx z = h * L;
  PhiWeights w;
  w.E = std::exp(z);
  w.E2 = std::exp(z / 2.0);
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z, z3 = z2 * z;
    w.Q = h * (0.5 + z / 8.0 + z2 / 48.0 + z3 / 384.0);
    w.f1 = h * (1.0 / 6.0 + z / 6.0 + 3.0 * z2 / 40.0 + z3 / 45.0);
    w.f2 = h * (1.0 / 6.0 + z / 12.0 + z2 / 40.0 + z3 / 180.0);
    w.f3 = h * (1.0 / 6.0 - z2 / 120.0 - z3 / 360.0);
  } else {
    const cplx z3 = z * z * z;
    w.Q = h * (w.E2 - 1.0) / z;
    w.f1 = h * (-4.0 - z + w.E * (4.0 - 3.0 * z + z * z)) / z3;
    w.f2 = h * (2.0 + z + w.E * (-2.0 + z)) / z3;
    w.f3 = h * (-4.0 - 3.0 * z - z * z + w.E * (4.0 - z)) / z3;
  }
  return w;
}

std::vector<cplx> linear_symbol(const TorusGrid& g, const ModelParams& p) {
  std::vector<cplx> L(static_cast<size_t>(g.nx) * g.ny);
  for (int iy = 0; iy < g.ny; ++iy) {
    const double ky = g.ky(iy);
    for (int ix = 0; ix < g.nx; ++ix) {
      const double kx = g.kx(ix);
      const double d = kx * kx - ky * ky;
      const double n2 = kx * kx + ky * ky;
      L[static_cast<size_t>(iy) * g.nx + ix] = kI * d - p.epsilon * (n2 + p.alpha_damp);
    }
  }
  return L;
}

// Nonlinear slot in Fourier space: N(q) = -2i[invLapUps|q|^2 + <|q|^2> - w^2]q + eps*beta.
std::vector<cplx> nonlinear_hat(const TorusGrid& g, const ModelParams& p,
                                const std::vector<cplx>& qhat) {
  TorusField q = to_physical(g, qhat);
  TorusField a2(g);
  for (size_t i = 0; i < q.v.size(); ++i) a2.v[i] = std::norm(q.v[i]);
  const double mean_a2 = mean(a2).real();
  TorusField pot = apply_operator(a2, Op::InvLaplacianUpsilon);
  TorusField n(g);
  const double w2 = p.omega * p.omega;
  for (size_t i = 0; i < q.v.size(); ++i)
    n.v[i] = -2.0 * kI * (pot.v[i].real() + mean_a2 - w2) * q.v[i] +
             p.epsilon * p.beta_drive;
  return to_fourier(n);
}

double norm_of_hat(const std::vector<cplx>& qhat) {
  double s = 0.0;
  for (const cplx& z : qhat) s += std::norm(z);
  return std::sqrt(s);
}

}  // namespace

EvolutionResult integrate(const TorusField& q0, const ModelParams& p,
                          const EvolutionConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_final >= 0.0) || cfg.snapshot_stride < 1)
    throw ConstraintViolation("invalid evolution config");
  const TorusGrid& g = q0.grid;
  const size_t n = q0.v.size();
  const int steps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));

  const std::vector<cplx> L = linear_symbol(g, p);
  std::vector<PhiWeights> w(n);
  for (size_t i = 0; i < n; ++i) w[i] = phi_weights(L[i], cfg.dt);

  std::vector<cplx> v = to_fourier(q0);
  const double limit = 1e6 * std::max(norm_of_hat(v), 1e-300);

  EvolutionResult out;
  auto snapshot = [&](double t, const std::vector<cplx>& hat) {
    TorusField f = to_physical(g, hat);
    f.even_x = q0.even_x;
    f.even_y = q0.even_y;
    out.times.push_back(t);
    out.snapshots.push_back(std::move(f));
  };
  snapshot(0.0, v);

  std::vector<cplx> a(n), b(n), c(n), Nv(n), Na(n), Nb(n), Nc(n), half(n);
  for (int step = 0; step < steps; ++step) {
    if (cfg.scheme == Scheme::ExponentialRk4) {
      Nv = nonlinear_hat(g, p, v);
      for (size_t i = 0; i < n; ++i) {
        half[i] = w[i].E2 * v[i];
        a[i] = half[i] + w[i].Q * Nv[i];
      }
      Na = nonlinear_hat(g, p, a);
      for (size_t i = 0; i < n; ++i) b[i] = half[i] + w[i].Q * Na[i];
      Nb = nonlinear_hat(g, p, b);
      for (size_t i = 0; i < n; ++i) c[i] = w[i].E2 * a[i] + w[i].Q * (2.0 * Nb[i] - Nv[i]);
      Nc = nonlinear_hat(g, p, c);
      for (size_t i = 0; i < n; ++i)
        v[i] = w[i].E * v[i] + w[i].f1 * Nv[i] + 2.0 * w[i].f2 * (Na[i] + Nb[i]) +
               w[i].f3 * Nc[i];
    } else {
      // Strang: exact linear half step, exact frozen-potential nonlinear step
      // (phase rotation plus the affine beta response), exact half step.
      for (size_t i = 0; i < n; ++i) v[i] *= w[i].E2;
      TorusField q = to_physical(g, v);
      TorusField a2(g);
      for (size_t i = 0; i < n; ++i) a2.v[i] = std::norm(q.v[i]);
      const double mean_a2 = mean(a2).real();
      TorusField pot = apply_operator(a2, Op::InvLaplacianUpsilon);
      const double w2 = p.omega * p.omega;
      for (size_t i = 0; i < n; ++i) {
        const double mu = -2.0 * (pot.v[i].real() + mean_a2 - w2);  // q' = i mu q + eps beta
        const cplx rot = std::exp(kI * (mu * cfg.dt));
        if (std::abs(mu) > 1e-14) {
          const cplx qp = p.epsilon * p.beta_drive / (-kI * mu);
          q.v[i] = rot * (q.v[i] - qp) + qp;
        } else {
          q.v[i] = rot * q.v[i] + p.epsilon * p.beta_drive * cfg.dt;
        }
      }
      v = to_fourier(q);
      for (size_t i = 0; i < n; ++i) v[i] *= w[i].E2;
    }

    const double t = (step + 1) * cfg.dt;
    const double nrm = norm_of_hat(v);
    if (!std::isfinite(nrm) || nrm > limit) {
      out.blew_up = true;
      out.blowup_time = t;
      break;
    }
    if ((step + 1) % cfg.snapshot_stride == 0 || step + 1 == steps) snapshot(t, v);
  }
  return out;
}

GrowthFit measure_growth(const ModelParams& p, int k1, int k2, double amplitude,
                         const TorusGrid& g, double gamma, const EvolutionConfig& cfg) {
  if (k1 < 0 || k2 < 0 || k1 + k2 == 0 || k1 >= g.nx / 2 || k2 >= g.ny / 2)
    throw ConstraintViolation("mode outside the resolvable lattice");
  if (!(amplitude > 0.0) || amplitude > 1e-6)
    throw ConstraintViolation("amplitude must be in (0, 1e-6] for the linear regime");

  const double xi1 = k1 * g.kappa1, xi2 = k2 * g.kappa2;
  const double d = xi1 * xi1 - xi2 * xi2;
  const double n2 = xi1 * xi1 + xi2 * xi2;
  // Exact eigendirection of the growing branch: c = 1 - i mu0/d, degenerating
  // to the neutral direction c = i when the oscillatory factor vanishes.
  cplx c{0.0, 1.0};
  if (d != 0.0) {
    const double rad = 4.0 * p.omega * p.omega - n2;
    const double mu0 = rad >= 0.0 ? std::abs(d) / std::sqrt(n2) * std::sqrt(rad) : 0.0;
    c = cplx(1.0, -mu0 / d);
  }

  TorusField q0(g);
  const cplx phase = std::exp(kI * gamma);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double cxy = std::cos(xi1 * g.x(ix)) * std::cos(xi2 * g.y(iy));
      q0.at(ix, iy) = phase * (p.omega + amplitude * c * cxy);
    }
  q0.even_x = q0.even_y = true;

  EvolutionResult run = integrate(q0, p, cfg);
  if (run.blew_up) throw NonlinearContamination("blow-up during growth measurement");

  std::vector<double> ts, logs;
  for (size_t i = 0; i < run.snapshots.size(); ++i) {
    const std::vector<cplx> hat = to_fourier(run.snapshots[i]);
    const double A =
        std::abs(hat[static_cast<size_t>(k2) * g.nx + k1]) / (g.nx * g.ny);
    if (run.times[i] < 0.25 * cfg.t_final || A <= 0.0) continue;
    ts.push_back(run.times[i]);
    logs.push_back(std::log(A));
  }
  if (ts.size() < 4) throw NumericalError("too few snapshots for a growth fit");

  double st = 0, sl = 0, stt = 0, stl = 0;
  const auto m = static_cast<double>(ts.size());
  for (size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sl += logs[i];
    stt += ts[i] * ts[i];
    stl += ts[i] * logs[i];
  }
  const double denom = m * stt - st * st;
  GrowthFit fit;
  fit.exponent = (m * stl - st * sl) / denom;
  const double intercept = (sl - fit.exponent * st) / m;
  for (size_t i = 0; i < ts.size(); ++i)
    fit.fit_residual =
        std::max(fit.fit_residual, std::abs(logs[i] - (intercept + fit.exponent * ts[i])));
  fit.final_amplitude = std::exp(logs.back());
  if (fit.final_amplitude > 1e-3)
    throw NonlinearContamination("mode amplitude left the linear regime");
  if (fit.fit_residual > 0.05)
    throw NonlinearContamination("log-amplitude fit residual " +
                                 std::to_string(fit.fit_residual));
  return fit;
}

}  // namespace dsii
