#include "dsii/darboux.hpp"

#include <cmath>
#include <numbers>

#include "dsii/errors.hpp"

namespace dsii {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

double wrap_pi(double a) {
  double r = std::remainder(a, kPi);
  return r;
}

// True when the Backlund angle sits at +-pi/2 from the base angle (mod pi),
// the choice that makes the transformed solution even along that axis.
bool even_branch(double backlund, double base) {
  return std::abs(std::abs(wrap_pi(backlund - base)) - kPi / 2.0) < 1e-9;
}

double vartheta2_of(cplx alpha_lax, double kappa2, double xi10, double eta) {
  return std::arg((kI * alpha_lax * (kappa2 / 2.0) + kI * xi10) / eta);
}

// First-transform coefficients and the x-line trigonometry shared with the
// eigenfunction assembly. xt = kappa1 x/2 + theta/2, zt = xt - pi/2 - vt1.
struct FirstCtx {
  std::vector<double> a;
  std::vector<cplx> bt;
  std::vector<double> cos_xt, sin_xt, cos_zt, sin_zt;
};

FirstCtx first_ctx(const DarbouxParams& p, double t, const TorusGrid& g, double dx) {
  const double tau = tau_of(p, t);
  const double em = std::exp(-std::abs(tau));
  const double sech = 2.0 * em / (1.0 + em * em);
  const double tanh = (tau >= 0.0 ? 1.0 : -1.0) * (1.0 - em * em) / (1.0 + em * em);

  FirstCtx c;
  c.a.resize(g.nx);
  c.bt.resize(g.nx);
  c.cos_xt.resize(g.nx);
  c.sin_xt.resize(g.nx);
  c.cos_zt.resize(g.nx);
  c.sin_zt.resize(g.nx);
  const double floor_den = 1.0 - std::abs(std::sin(p.vartheta1)) - 1e-9;
  for (int ix = 0; ix < g.nx; ++ix) {
    const double xt = p.kappa1 * (g.x(ix) + dx) / 2.0 + p.vartheta_b / 2.0;
    const double zt = xt - kPi / 2.0 - p.vartheta1;
    c.cos_xt[ix] = std::cos(xt);
    c.sin_xt[ix] = std::sin(xt);
    c.cos_zt[ix] = std::cos(zt);
    c.sin_zt[ix] = std::sin(zt);
    const double cp = std::cos(xt + zt), sp = std::sin(xt + zt);
    const double cm = std::cos(xt - zt), sm = std::sin(xt - zt);
    const double den = 1.0 + sech * cp * cm;
    if (den < floor_den)
      throw NumericalError("first-transform denominator fell below 1 - sin(vartheta1)");
    c.a[ix] = -p.lambda0 * sech * sp * sm / den;
    c.bt[ix] = (p.lambda0 / p.eta) * (cplx(cm, 0.0) - kI * (tanh * sm) + sech * cp) / den;
  }
  return c;
}

// Iterated coefficients from the closed forms, in the representation scaled
// by e^{-|tau_hat|}: cosh/sinh enter as C = (1+e^{-2|th|})/2 and
// S = sgn (1-e^{-2|th|})/2, the lone unscaled term picks up e^{-|th|}.
// The common scale cancels in aI = -Sa/Sd and btI = -Sb/(eta Sd).
struct SPartsCtx {
  TorusField aI;
  TorusField btI;
  TorusField sd_scaled;   // real positive; raw Sd = e^{|tau_hat|} * this
};

SPartsCtx s_parts(const DarbouxParams& p, double t, const TorusGrid& g, const FirstCtx& fc,
                  double dy) {
  const double th = tau_hat_of(p, t);
  const double emh = std::exp(-std::abs(th));
  const double C = (1.0 + emh * emh) / 2.0;
  const double S = (th >= 0.0 ? 1.0 : -1.0) * (1.0 - emh * emh) / 2.0;

  const cplx al = p.alpha_lax;
  const double k2 = p.kappa2, eta = p.eta;
  const double c2 = std::cos(p.vartheta2), s2 = std::sin(p.vartheta2);

  SPartsCtx out{TorusField(g), TorusField(g), TorusField(g)};
  double sd_min = 1e300, sd_max = 0.0;
  for (int iy = 0; iy < g.ny; ++iy) {
    const double yh = p.kappa2 * (g.y(iy) + dy) / 2.0 + p.vartheta_hat_b / 2.0;
    const double zh = yh - p.vartheta2;
    const double cyz = std::cos(yh + zh), syz = std::sin(yh + zh);
    for (int ix = 0; ix < g.nx; ++ix) {
      const double a = fc.a[ix];
      const cplx bt = fc.bt[ix];
      const double absbt2 = std::norm(bt);
      const double B = 0.25 * k2 * k2 - a * a - eta * eta * absbt2;
      const cplx bt_sum = bt + std::conj(bt);    // 2 Re bt
      const cplx bt_dif = bt - std::conj(bt);    // 2i Im bt
      const cplx Sa = 0.5 * al * k2 *
                      (C * (-al * k2 * a + kI * a * eta * bt_sum * c2) +
                       emh * (B * cyz * s2) + S * (a * eta * bt_dif * s2));
      const cplx Sd = C * (a * a + 0.25 * k2 * k2 + eta * eta * absbt2 +
                           0.5 * kI * al * k2 * eta * bt_sum * c2) +
                      emh * (B * syz * s2) + S * (0.5 * al * k2 * eta * bt_dif * s2);
      const cplx Sb = 0.5 * al * k2 *
                      (C * (-al * k2 * eta * bt +
                            kI * (-a * a + 0.25 * k2 * k2 + eta * eta * bt * bt) * c2) +
                       S * ((a * a - 0.25 * k2 * k2 + eta * eta * bt * bt) * s2));
      out.aI.at(ix, iy) = -Sa / Sd;
      out.btI.at(ix, iy) = -Sb / (eta * Sd);
      out.sd_scaled.at(ix, iy) = Sd;
      const double m = std::abs(Sd);
      sd_min = std::min(sd_min, m);
      sd_max = std::max(sd_max, m);
    }
  }
  if (sd_min < 1e-14 * sd_max)
    throw DegenerateDenominator("|W1|^2 + |W2|^2 vanished on the grid");
  return out;
}

// The four exponential W components in the e^{-|tau_hat|/2}-scaled
// representation: raw W = e^{|tau_hat|/2} * stored value.
struct WCtx {
  TorusField W1p, W1m, W2p, W2m, W1, W2;
  double log_scale = 0.0;  // |tau_hat|/2
};

WCtx w_fields(const DarbouxParams& p, double t, const TorusGrid& g, const FirstCtx& fc,
              double dy) {
  const double th = tau_hat_of(p, t);
  const double emh = std::exp(-std::abs(th));
  const double up_mag = th >= 0.0 ? 1.0 : emh;  // e^{(th-|th|)/2} with e^{-|th|}=emh^1
  const double um_mag = th >= 0.0 ? emh : 1.0;

  const cplx al = p.alpha_lax;
  const cplx iak = kI * al * (p.kappa2 / 2.0);
  const cplx em_a = std::exp(-kI * p.vartheta2);
  const cplx ep_a = std::exp(+kI * p.vartheta2);
  const double eta = p.eta;

  WCtx w{TorusField(g), TorusField(g), TorusField(g),
         TorusField(g), TorusField(g), TorusField(g),
         std::abs(th) / 2.0};
  for (int iy = 0; iy < g.ny; ++iy) {
    const double yh = p.kappa2 * (g.y(iy) + dy) / 2.0 + p.vartheta_hat_b / 2.0;
    const cplx up = up_mag * std::exp(kI * yh);
    const cplx um = um_mag * std::exp(-kI * yh);
    for (int ix = 0; ix < g.nx; ++ix) {
      const double a = fc.a[ix];
      const cplx bt = fc.bt[ix];
      const cplx br1p = iak + a + eta * bt * em_a;
      const cplx br1m = -iak + a - eta * bt * ep_a;
      const cplx br2p = em_a * (iak - a + eta * std::conj(bt) * ep_a);
      const cplx br2m = -ep_a * (-iak - a - eta * std::conj(bt) * em_a);
      w.W1p.at(ix, iy) = br1p * up;
      w.W1m.at(ix, iy) = br1m * um;
      w.W2p.at(ix, iy) = br2p * up;
      w.W2m.at(ix, iy) = br2m * um;
      w.W1.at(ix, iy) = (w.W1p.at(ix, iy) + w.W1m.at(ix, iy)) / 2.0;
      w.W2.at(ix, iy) = (w.W2p.at(ix, iy) + w.W2m.at(ix, iy)) / 2.0;
    }
  }
  return w;
}

}  // namespace

DarbouxParams derive_params(double omega, double kappa1, double kappa2, double rho,
                            double rho_hat, double gamma, int sign_x, int sign_y,
                            bool alpha_plus_i, double eta_override) {
  if (!(omega > 0.0) || !(kappa1 > 0.0) || !(kappa2 > 0.0))
    throw ConstraintViolation("omega, kappa1, kappa2 must be positive");
  if (sign_x * sign_x != 1 || sign_y * sign_y != 1)
    throw ConstraintViolation("sign_x, sign_y must be +-1");
  DarbouxParams p;
  p.omega = omega;
  p.eta = eta_override > 0.0 ? eta_override : omega;
  p.kappa1 = kappa1;
  p.kappa2 = kappa2;
  p.gamma = gamma;
  p.alpha_lax = alpha_plus_i ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
  const double l2 = p.eta * p.eta - kappa1 * kappa1 / 4.0;
  const double x2 = p.eta * p.eta - kappa2 * kappa2 / 4.0;
  if (l2 <= 0.0) throw BranchUndefined("eta^2 <= kappa1^2/4: lambda0 branch undefined");
  if (x2 <= 0.0) throw BranchUndefined("eta^2 <= kappa2^2/4: xi10 branch undefined");
  p.lambda0 = std::sqrt(l2);
  p.xi10 = std::sqrt(x2);
  p.vartheta1 = std::atan2(p.lambda0, kappa1 / 2.0);
  p.vartheta2 = vartheta2_of(p.alpha_lax, kappa2, p.xi10, p.eta);
  p.vartheta_b = p.vartheta1 + sign_x * kPi / 2.0;
  p.vartheta_hat_b = p.vartheta2 + sign_y * kPi / 2.0;
  p.rho = rho;
  p.rho_hat = rho_hat;
  p.delta_rho = rho_hat + (kappa2 * p.xi10 / (kappa1 * p.lambda0)) * rho;
  p.sign_x = sign_x;
  p.sign_y = sign_y;
  p.r2 = cplx(p.eta * p.eta - omega * omega, 0.0);
  p.r1 = -p.r2;
  return p;
}

DarbouxParams congruent_params(const DarbouxParams& p) {
  DarbouxParams q = p;
  q.alpha_lax = -p.alpha_lax;
  q.r1 = -p.r2;
  q.r2 = -p.r1;
  q.vartheta_hat_b = p.vartheta_hat_b + kPi - 2.0 * p.vartheta2;
  q.rho_hat = -p.rho_hat;
  q.vartheta2 = vartheta2_of(q.alpha_lax, q.kappa2, q.xi10, q.eta);
  q.delta_rho = q.rho_hat + (q.kappa2 * q.xi10 / (q.kappa1 * q.lambda0)) * q.rho;
  return q;
}

DarbouxParams bloch_flip_params(const DarbouxParams& p) {
  DarbouxParams q = p;
  q.xi10 = -p.xi10;
  q.vartheta_hat_b = p.vartheta_hat_b + kPi - 2.0 * p.vartheta2;
  q.rho_hat = -p.rho_hat;
  q.vartheta2 = vartheta2_of(q.alpha_lax, q.kappa2, q.xi10, q.eta);
  q.delta_rho = q.rho_hat + (q.kappa2 * q.xi10 / (q.kappa1 * q.lambda0)) * q.rho;
  return q;
}

cplx plane_wave(const DarbouxParams& p, double t) {
  return p.eta * std::exp(-2.0 * kI * (p.eta * p.eta - p.omega * p.omega) * t + kI * p.gamma);
}

double tau_of(const DarbouxParams& p, double t) {
  return 2.0 * p.kappa1 * p.lambda0 * t - p.rho;
}

double tau_hat_of(const DarbouxParams& p, double t) {
  const cplx v = 2.0 * kI * p.alpha_lax * p.kappa2 * p.xi10 * t + p.rho_hat;
  if (std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v.real())))
    throw NumericalError("tau_hat acquired an imaginary part; alpha_lax must be -+i");
  return v.real();
}

FirstTransform first_darboux(const DarbouxParams& p, double t, const TorusGrid& g, double dx) {
  FirstCtx c = first_ctx(p, t, g, dx);
  FirstTransform out;
  out.a_val = std::move(c.a);
  out.b_tilde = std::move(c.bt);
  out.b_val.resize(out.b_tilde.size());
  const cplx qc = plane_wave(p, t);
  for (size_t i = 0; i < out.b_val.size(); ++i) out.b_val[i] = -qc * out.b_tilde[i];
  return out;
}

DarbouxSample iterate_darboux(const DarbouxParams& p, double t, const TorusGrid& g) {
  FirstCtx fc = first_ctx(p, t, g, 0.0);
  SPartsCtx sp = s_parts(p, t, g, fc, 0.0);
  WCtx w = w_fields(p, t, g, fc, 0.0);

  DarbouxSample s;
  s.t = t;
  const cplx qc = plane_wave(p, t);
  s.a_val = fc.a;
  s.b_val.resize(fc.bt.size());
  for (size_t i = 0; i < fc.bt.size(); ++i) s.b_val[i] = -qc * fc.bt[i];
  s.aI_val = sp.aI;
  s.bI_val = TorusField(g);
  s.Q_field = TorusField(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx btI = sp.btI.at(ix, iy);
      s.bI_val.at(ix, iy) = -qc * btI;
      s.Q_field.at(ix, iy) = qc * (1.0 + 2.0 * fc.bt[ix] + 2.0 * btI);
    }
  s.Q_field.even_x = even_branch(p.vartheta_b, p.vartheta1);
  s.Q_field.even_y = even_branch(p.vartheta_hat_b, p.vartheta2);

  // Raw W components; the scaled representation only matters deep in the
  // tails, where the sample accessors are not used.
  const double scale = std::exp(w.log_scale);
  s.W1p = w.W1p;
  s.W1m = w.W1m;
  s.W2p = w.W2p;
  s.W2m = w.W2m;
  s.W1 = w.W1;
  s.W2 = w.W2;
  for (TorusField* f : {&s.W1p, &s.W1m, &s.W2p, &s.W2m, &s.W1, &s.W2})
    for (auto& z : f->v) z *= scale;
  return s;
}

TorusField homoclinic_Q(const DarbouxParams& p, double t, const TorusGrid& g, double dx,
                        double dy) {
  FirstCtx fc = first_ctx(p, t, g, dx);
  SPartsCtx sp = s_parts(p, t, g, fc, dy);
  const cplx qc = plane_wave(p, t);
  TorusField Q(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      Q.at(ix, iy) = qc * (1.0 + 2.0 * fc.bt[ix] + 2.0 * sp.btI.at(ix, iy));
  if (dx == 0.0 && dy == 0.0) {
    Q.even_x = even_branch(p.vartheta_b, p.vartheta1);
    Q.even_y = even_branch(p.vartheta_hat_b, p.vartheta2);
  }
  return Q;
}

PotentialPair transform_potentials(const DarbouxParams& p, double t, const TorusGrid& g) {
  FirstCtx fc = first_ctx(p, t, g, 0.0);
  SPartsCtx sp = s_parts(p, t, g, fc, 0.0);
  TorusField a_tot(g), d_tot(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx at = fc.a[ix] + sp.aI.at(ix, iy);
      a_tot.at(ix, iy) = at;
      d_tot.at(ix, iy) = -std::conj(at);
    }
  TorusField ax = apply_operator(a_tot, Op::Dx);
  TorusField ay = apply_operator(a_tot, Op::Dy);
  TorusField dx_ = apply_operator(d_tot, Op::Dx);
  TorusField dy_ = apply_operator(d_tot, Op::Dy);
  PotentialPair out{TorusField(g), TorusField(g)};
  for (size_t i = 0; i < a_tot.v.size(); ++i) {
    out.R1.v[i] = p.r1 + 2.0 * (p.alpha_lax * ay.v[i] + ax.v[i]);
    out.R2.v[i] = p.r2 - 2.0 * (p.alpha_lax * dy_.v[i] - dx_.v[i]);
  }
  return out;
}

std::pair<TorusField, TorusField> with_bloch(const SpinorField& s, double dx) {
  TorusField c1 = s.c1, c2 = s.c2;
  const TorusGrid& g = s.c1.grid;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx ph = std::exp(kI * (s.bloch_kx * (g.x(ix) + dx)));
      c1.at(ix, iy) *= ph;
      c2.at(ix, iy) *= ph;
    }
  return {std::move(c1), std::move(c2)};
}

SpinorField psi_plus(const DarbouxParams& p, double t, const TorusGrid& g, double dx,
                     double dy) {
  FirstCtx fc = first_ctx(p, t, g, dx);
  SPartsCtx sp = s_parts(p, t, g, fc, dy);
  const double tau = tau_of(p, t);
  const double em = std::exp(-std::abs(tau));
  // cosh(tau/2), sinh(tau/2) scaled by e^{-|tau|/2}; the quotient against
  // |v|^2 leaves one decaying factor, applied at the end.
  const double C2 = (1.0 + em) / 2.0;
  const double S2 = (tau >= 0.0 ? 1.0 : -1.0) * (1.0 - em) / 2.0;
  const double decay = std::exp(-std::abs(tau) / 2.0);

  const cplx qc = plane_wave(p, t);
  const cplx pref =
      std::exp(kI * p.r2 * t) * std::exp(-kI * (p.gamma / 2.0)) / p.eta * decay;

  SpinorField out{TorusField(g), TorusField(g), 0.0};
  for (int ix = 0; ix < g.nx; ++ix) {
    const cplx v1 = C2 * fc.cos_xt[ix] - kI * (S2 * fc.sin_xt[ix]);
    const cplx v2 = C2 * fc.cos_zt[ix] - kI * (S2 * fc.sin_zt[ix]);
    const double Dv = std::norm(v1) + std::norm(v2);
    const cplx v1b = std::conj(v1), v2b = std::conj(v2);
    for (int iy = 0; iy < g.ny; ++iy) {
      const cplx aI = sp.aI.at(ix, iy);
      const cplx btI = sp.btI.at(ix, iy);
      const cplx c1 = -qc * ((p.lambda0 - aI) * v2b + p.eta * btI * v1b);
      const cplx c2 =
          p.eta * (-p.eta * std::conj(btI) * v2b - (p.lambda0 + std::conj(aI)) * v1b);
      out.c1.at(ix, iy) = pref * c1 / Dv;
      out.c2.at(ix, iy) = pref * c2 / Dv;
    }
  }
  return out;
}

SpinorField phi_plus(const DarbouxParams& p, double t, const TorusGrid& g, double dx,
                     double dy) {
  FirstCtx fc = first_ctx(p, t, g, dx);
  SPartsCtx sp = s_parts(p, t, g, fc, dy);
  WCtx w = w_fields(p, t, g, fc, dy);
  // Raw numerators scale as e^{3 log_scale}, the raw denominator as
  // e^{2 log_scale}; one growing factor remains against the scaled Sd.
  const double residual_scale = std::exp(w.log_scale);

  const cplx qc = plane_wave(p, t);
  const cplx pref =
      std::exp(kI * p.r2 * t) * std::exp(-kI * (p.gamma / 2.0)) / p.eta * residual_scale;

  SpinorField out{TorusField(g), TorusField(g), p.xi10};
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx W1p = w.W1p.at(ix, iy), W1m = w.W1m.at(ix, iy);
      const cplx W2p = w.W2p.at(ix, iy), W2m = w.W2m.at(ix, iy);
      const cplx W1 = w.W1.at(ix, iy), W2 = w.W2.at(ix, iy);
      const cplx S1 = 2.0 * std::conj(W1) * (W1p * W1m) + std::conj(W2p) * (W1p * W2m) +
                      std::conj(W2m) * (W1m * W2p);
      const cplx S2 = 2.0 * std::conj(W2) * (W2p * W2m) + std::conj(W1p) * (W2p * W1m) +
                      std::conj(W1m) * (W2m * W1p);
      const cplx Sd = sp.sd_scaled.at(ix, iy);
      out.c1.at(ix, iy) = pref * (-qc * S1) / Sd;
      out.c2.at(ix, iy) = pref * (p.eta * S2) / Sd;
    }
  return out;
}

namespace {

// d/dx of the full field e^{i bloch x} f: spectral derivative of the periodic
// part plus the analytic Bloch term.
TorusField bloch_dx(const TorusField& f, double bloch_kx) {
  TorusField out = apply_operator(f, Op::Dx);
  if (bloch_kx != 0.0) {
    const cplx ib(0.0, bloch_kx);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += ib * f.v[i];
  }
  return out;
}

}  // namespace

double lax_residual(const SpinorField& f, const TorusField& q_pot, cplx alpha_lax, cplx lambda,
                    bool congruent_pair) {
  const TorusField dx1 = bloch_dx(f.c1, f.bloch_kx);
  const TorusField dx2 = bloch_dx(f.c2, f.bloch_kx);
  const TorusField dy1 = apply_operator(f.c1, Op::Dy);
  const TorusField dy2 = apply_operator(f.c2, Op::Dy);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < f.c1.v.size(); ++i) {
    const cplx f1 = f.c1.v[i], f2 = f.c2.v[i];
    const cplx q = q_pot.v[i];
    cplx r1, r2;
    if (!congruent_pair) {
      r1 = alpha_lax * dy1.v[i] - dx1.v[i] + q * f2 - lambda * f1;
      r2 = std::conj(q) * f1 + alpha_lax * dy2.v[i] + dx2.v[i] - lambda * f2;
    } else {
      r1 = -(alpha_lax * dy1.v[i] + dx1.v[i]) + q * f2 - lambda * f1;
      r2 = std::conj(q) * f1 - (alpha_lax * dy2.v[i] - dx2.v[i]) - lambda * f2;
    }
    num += std::norm(r1) + std::norm(r2);
    den += std::norm(f1) + std::norm(f2);
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

LaxResiduals lax_residuals(const DarbouxParams& p, double t, int nx, int ny) {
  LaxResiduals out;
  const DarbouxParams ph = congruent_params(p);
  const DarbouxParams pt = bloch_flip_params(p);
  const cplx lam0(p.lambda0, 0.0);
  {
    const TorusGrid g{nx, ny, p.kappa1 / 2.0, p.kappa2 / 2.0};
    const TorusField q = homoclinic_Q(p, t, g);
    out.psi = lax_residual(psi_plus(p, t, g), q, p.alpha_lax, lam0, false);
    out.psi_hat = lax_residual(psi_plus(ph, t, g), q, p.alpha_lax, lam0, true);
  }
  {
    const TorusGrid g{nx, ny, p.kappa1, p.kappa2 / 2.0};
    const TorusField q = homoclinic_Q(p, t, g);
    out.phi_tilde = lax_residual(phi_plus(pt, t, g), q, p.alpha_lax, cplx{}, false);
    out.phi_hat = lax_residual(phi_plus(ph, t, g), q, p.alpha_lax, cplx{}, true);
  }
  return out;
}

}  // namespace dsii
