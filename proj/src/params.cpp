#include "dsii/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsii/errors.hpp"

namespace dsii {

namespace {

void require_finite_positive(double v, const char* name, bool allow_zero = false) {
  if (!std::isfinite(v)) throw ConstraintViolation(std::string(name) + " must be finite");
  if (allow_zero ? v < 0.0 : v <= 0.0)
    throw ConstraintViolation(std::string(name) + (allow_zero ? " must be >= 0" : " must be > 0"));
}

// Unstable-mode count of the unperturbed linearization: |xi| < 2 omega with
// xi1^2 != xi2^2. The admissible window makes this exactly {(1,0), (0,1)}.
int count_unstable_eps0(double omega, double kappa1, double kappa2) {
  int count = 0;
  const double r2 = 4.0 * omega * omega;
  const int kmax1 = static_cast<int>(std::ceil(2.0 * omega / kappa1)) + 1;
  const int kmax2 = static_cast<int>(std::ceil(2.0 * omega / kappa2)) + 1;
  for (int k1 = 0; k1 <= kmax1; ++k1)
    for (int k2 = 0; k2 <= kmax2; ++k2) {
      if (k1 + k2 == 0) continue;
      const double x1 = k1 * kappa1, x2 = k2 * kappa2;
      const double n2 = x1 * x1 + x2 * x2;
      if (n2 < r2 && x1 * x1 != x2 * x2) ++count;
    }
  return count;
}

}  // namespace

std::optional<ConstraintBranch> constraint_branch(double omega, double kappa1, double kappa2) {
  const double w2 = 4.0 * omega * omega;
  const double k1sq = kappa1 * kappa1, k2sq = kappa2 * kappa2;
  if (kappa2 < kappa1 && kappa1 < 2.0 * kappa2 && k1sq < w2 &&
      w2 < std::min(k1sq + k2sq, 4.0 * k2sq))
    return ConstraintBranch::Cstr1;
  if (kappa1 < kappa2 && kappa2 < 2.0 * kappa1 && k2sq < w2 &&
      w2 < std::min(k1sq + k2sq, 4.0 * k1sq))
    return ConstraintBranch::Cstr2;
  return std::nullopt;
}

ModelParams validate_params(double omega, double alpha_damp, double beta_drive, double epsilon,
                            double kappa1, double kappa2, bool require_saddle) {
  require_finite_positive(omega, "omega");
  require_finite_positive(alpha_damp, "alpha_damp");
  require_finite_positive(beta_drive, "beta_drive");
  require_finite_positive(epsilon, "epsilon", /*allow_zero=*/true);
  require_finite_positive(kappa1, "kappa1");
  require_finite_positive(kappa2, "kappa2");

  const auto branch_opt = constraint_branch(omega, kappa1, kappa2);
  if (!branch_opt)
    throw ConstraintViolation("wavenumber window rejected: need kappa2<kappa1<2 kappa2 with "
                              "kappa1^2<4 omega^2<min(kappa1^2+kappa2^2, 4 kappa2^2), or the "
                              "same with kappa1 and kappa2 exchanged");
  const ConstraintBranch branch = *branch_opt;

  if (require_saddle && !(alpha_damp * omega < beta_drive))
    throw NoSaddle("alpha_damp*omega >= beta_drive: no saddle on the resonance circle");

  ModelParams p;
  p.omega = omega;
  p.alpha_damp = alpha_damp;
  p.beta_drive = beta_drive;
  p.epsilon = epsilon;
  p.kappa1 = kappa1;
  p.kappa2 = kappa2;
  p.branch = branch;
  p.unstable_mode_count = count_unstable_eps0(omega, kappa1, kappa2);
  if (p.unstable_mode_count != 2)
    throw NumericalError("constraint window admitted " +
                         std::to_string(p.unstable_mode_count) + " unstable modes, expected 2");
  return p;
}

SaddleState saddle_state(const ModelParams& p) {
  const double disc = p.beta_drive * p.beta_drive -
                      p.alpha_damp * p.alpha_damp * p.omega * p.omega;
  if (disc <= 0.0 || p.alpha_damp * p.omega >= p.beta_drive)
    throw NoSaddle("saddle requires alpha_damp*omega < beta_drive");

  SaddleState s;
  s.I_val = p.omega * p.omega - p.epsilon / (2.0 * p.omega) * std::sqrt(disc);
  if (s.I_val <= 0.0) throw NoSaddle("epsilon too large: truncated amplitude nonpositive");
  const double c = p.alpha_damp * std::sqrt(s.I_val) / p.beta_drive;
  if (c <= 0.0 || c >= 1.0) throw NoSaddle("phase angle left (0, pi/2)");
  s.theta_val = std::acos(c);

  const double sI = std::sqrt(s.I_val);
  const double bs = p.beta_drive * std::sin(s.theta_val);
  const double rad = 4.0 * sI * bs - p.epsilon * (bs / sI) * (bs / sI);
  if (rad < 0.0) throw NoSaddle("eigenvalue radical negative at this epsilon");
  const double root = std::sqrt(p.epsilon) * std::sqrt(rad);
  s.mu_pair = {root - p.epsilon * p.alpha_damp, -root - p.epsilon * p.alpha_damp};
  return s;
}

RefinedSaddle refine_saddle(const ModelParams& p) {
  const SaddleState s0 = saddle_state(p);
  const double w2 = p.omega * p.omega, eps = p.epsilon;
  const double a = p.alpha_damp, b = p.beta_drive;

  // Uniform fixed point of q_t = -2i(|q|^2 - w^2) q + eps (beta - alpha q),
  // Newton in (u, v) = (Re q, Im q).
  double u = std::sqrt(s0.I_val) * std::cos(s0.theta_val);
  double v = std::sqrt(s0.I_val) * std::sin(s0.theta_val);
  RefinedSaddle r;
  for (int it = 0; it < 50; ++it) {
    const double g = u * u + v * v - w2;
    const double fu = 2.0 * g * v + eps * (b - a * u);
    const double fv = -2.0 * g * u - eps * a * v;
    r.residual = std::hypot(fu, fv);
    r.iterations = it;
    if (r.residual < 1e-14 * b) break;
    const double j11 = 4.0 * u * v - eps * a;
    const double j12 = 2.0 * g + 4.0 * v * v;
    const double j21 = -2.0 * g - 4.0 * u * u;
    const double j22 = -4.0 * u * v - eps * a;
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0) throw NumericalError("singular Jacobian in saddle refinement");
    u -= (fu * j22 - fv * j12) / det;
    v -= (fv * j11 - fu * j21) / det;
  }
  r.I_val = u * u + v * v;
  r.theta_val = std::atan2(v, u);
  return r;
}

std::vector<SpectrumEntry> linear_spectrum(const ModelParams& p, int kmax) {
  if (kmax < 1) throw ConstraintViolation("kmax must be >= 1");
  std::vector<SpectrumEntry> out;
  out.reserve(static_cast<size_t>(kmax + 1) * (kmax + 1) - 1);
  const double w2 = 4.0 * p.omega * p.omega;
  for (int k1 = 0; k1 <= kmax; ++k1)
    for (int k2 = 0; k2 <= kmax; ++k2) {
      if (k1 + k2 == 0) continue;
      SpectrumEntry e;
      e.k1 = k1;
      e.k2 = k2;
      e.xi1 = k1 * p.kappa1;
      e.xi2 = k2 * p.kappa2;
      const double n2 = e.xi1 * e.xi1 + e.xi2 * e.xi2;
      const double damp = -p.epsilon * (p.alpha_damp + n2);
      const double rad = w2 - n2;
      if (rad >= 0.0) {
        const double osc = std::abs(e.xi1 * e.xi1 - e.xi2 * e.xi2) / std::sqrt(n2) *
                           std::sqrt(rad);
        e.mu_plus = damp + osc;
        e.mu_minus = damp - osc;
      } else {
        e.mu_plus = e.mu_minus = damp;
      }
      e.unstable = e.mu_plus > 0.0;
      out.push_back(e);
    }
  return out;
}

cplx dispersion_rate(double xi1, double xi2, double eta) {
  const double n2 = xi1 * xi1 + xi2 * xi2;
  if (n2 == 0.0) return 0.0;
  return std::abs(xi1 * xi1 - xi2 * xi2) / std::sqrt(n2) *
         std::sqrt(cplx(4.0 * eta * eta - n2, 0.0));
}

CoordinateDecomposition decompose_coordinates(const TorusField& q, double omega) {
  const cplx m = mean(q);
  if (std::abs(m) < 1e-300) throw ZeroMean("field has zero spatial mean; phase undefined");
  CoordinateDecomposition d;
  d.theta_mean = std::arg(m);
  const cplx rot = std::exp(cplx(0.0, -d.theta_mean));
  TorusField f(q.grid);
  for (size_t i = 0; i < q.v.size(); ++i) f.v[i] = q.v[i] * rot;
  const cplx rho = mean(f);  // real up to round-off by construction
  for (auto& z : f.v) z -= rho;
  f.even_x = q.even_x;
  f.even_y = q.even_y;
  d.f_field = std::move(f);

  double acc = 0.0, comp = 0.0;
  for (const auto& z : q.v) {
    const double t = std::norm(z) - comp;
    const double s = acc + t;
    comp = (s - acc) - t;
    acc = s;
  }
  d.J_val = acc / static_cast<double>(q.v.size()) - omega * omega;
  return d;
}

TorusField reconstruct_coordinates(const CoordinateDecomposition& d, double omega,
                                   const TorusGrid& g) {
  if (!(d.f_field.grid == g)) throw ConstraintViolation("grid mismatch in reconstruction");
  double f2 = 0.0;
  for (const auto& z : d.f_field.v) f2 += std::norm(z);
  f2 /= static_cast<double>(d.f_field.v.size());
  const double rho2 = d.J_val + omega * omega - f2;
  if (rho2 < 0.0) throw ConstraintViolation("inconsistent decomposition: rho^2 < 0");
  const double rho = std::sqrt(rho2);
  const cplx rot = std::exp(cplx(0.0, d.theta_mean));
  TorusField q(g);
  for (size_t i = 0; i < q.v.size(); ++i) q.v[i] = (rho + d.f_field.v[i]) * rot;
  q.even_x = d.f_field.even_x;
  q.even_y = d.f_field.even_y;
  return q;
}

}  // namespace dsii
