#pragma once

#include <vector>

#include "dsii/grid.hpp"

namespace dsii {

// Parameter tuple of the iterated transformation. Built by derive_params; the
// replacement maps below produce the companion tuples used for the adjoint
// eigenfunctions without touching the base orbit.
struct DarbouxParams {
  double omega = 0.0;
  double eta = 0.0;       // plane-wave amplitude, = omega on the resonance circle
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma = 0.0;     // plane-wave phase
  cplx alpha_lax{0.0, -1.0};
  double lambda0 = 0.0;   // sqrt(eta^2 - kappa1^2/4) > 0
  double xi10 = 0.0;      // sqrt(eta^2 - kappa2^2/4), sign flips under bloch_flip_params
  double vartheta1 = 0.0;       // eta e^{i vt1} = kappa1/2 + i lambda0
  double vartheta2 = 0.0;       // eta e^{i vt2} = i alpha_lax kappa2/2 + i xi10
  double vartheta_b = 0.0;      // Backlund angle vt1 + sign_x*pi/2 (evenness in x)
  double vartheta_hat_b = 0.0;  // Backlund angle vt2 + sign_y*pi/2 (evenness in y)
  double rho = 0.0;
  double rho_hat = 0.0;
  double delta_rho = 0.0;  // rho_hat + (kappa2 xi10 / (kappa1 lambda0)) rho
  int sign_x = +1;
  int sign_y = +1;
  cplx r1{0.0, 0.0};  // -(eta^2 - omega^2)
  cplx r2{0.0, 0.0};  // +(eta^2 - omega^2)
};

// eta defaults to omega (eta_override = 0 keeps the default); alpha_plus_i
// selects the +i unit, exposed for completeness but untested downstream.
DarbouxParams derive_params(double omega, double kappa1, double kappa2, double rho,
                            double rho_hat, double gamma, int sign_x = +1, int sign_y = +1,
                            bool alpha_plus_i = false, double eta_override = 0.0);

// alpha_lax -> -alpha_lax, r1 -> -r2, r2 -> -r1, theta_hat shifted, rho_hat negated.
DarbouxParams congruent_params(const DarbouxParams& p);
// xi10 -> -xi10 with the same theta_hat shift and rho_hat negation.
DarbouxParams bloch_flip_params(const DarbouxParams& p);

cplx plane_wave(const DarbouxParams& p, double t);
double tau_of(const DarbouxParams& p, double t);       // 2 kappa1 lambda0 t - rho
double tau_hat_of(const DarbouxParams& p, double t);   // real for alpha_lax = -+i

// First-transform coefficients along the x line (shifted by dx). a is real and
// odd in x, b = -q_c b_tilde is even; the shared denominator stays >= 1 - sin vt1.
struct FirstTransform {
  std::vector<double> a_val;
  std::vector<cplx> b_val;
  std::vector<cplx> b_tilde;
};
FirstTransform first_darboux(const DarbouxParams& p, double t, const TorusGrid& g,
                             double dx = 0.0);

// Everything the iterated step produces at one time: coefficients, the orbit
// value Q = q_c - 2b - 2b^{(I)}, and the intermediate W components.
struct DarbouxSample {
  double t = 0.0;
  std::vector<double> a_val;
  std::vector<cplx> b_val;
  TorusField aI_val;
  TorusField bI_val;
  TorusField Q_field;
  TorusField W1p, W1m, W2p, W2m, W1, W2;
};
DarbouxSample iterate_darboux(const DarbouxParams& p, double t, const TorusGrid& g);

// Orbit value only (no intermediates); dx, dy shift the evaluation nodes.
TorusField homoclinic_Q(const DarbouxParams& p, double t, const TorusGrid& g,
                        double dx = 0.0, double dy = 0.0);

// Transformed potentials R1 = r1 + 2 D+ a_tot, R2 = r2 - 2 D- d_tot with
// a_tot = a + a^{(I)}, d_tot = -conj(a_tot), D+- = alpha_lax d/dy +- d/dx.
struct PotentialPair {
  TorusField R1;
  TorusField R2;
};
PotentialPair transform_potentials(const DarbouxParams& p, double t, const TorusGrid& g);

// Two-component eigenfunction sampled on the grid. Stored values are the
// periodic parts; the full field carries an extra factor e^{i bloch_kx x}.
struct SpinorField {
  TorusField c1;
  TorusField c2;
  double bloch_kx = 0.0;
};

// Materialize full values (Bloch factor applied) at nodes shifted by dx.
std::pair<TorusField, TorusField> with_bloch(const SpinorField& s, double dx = 0.0);

// Normalized eigenfunction of the transformed spatial pair at lambda0
// (the i lambda0 kappa1 sqrt(c0+ c0-) e^{i gamma/2} constant divided out).
SpinorField psi_plus(const DarbouxParams& p, double t, const TorusGrid& g,
                     double dx = 0.0, double dy = 0.0);

// Normalized eigenfunction at lambda = 0 built from the W components (the
// (1/4) i alpha_lax kappa2 eta sqrt(c+0 c-0) e^{i gamma/2} constant divided
// out); bloch_kx = xi10 of the tuple.
SpinorField phi_plus(const DarbouxParams& p, double t, const TorusGrid& g,
                     double dx = 0.0, double dy = 0.0);

// Relative L2 residual of the transformed spatial pair at lambda applied to a
// spinor whose periodic parts live on the grid of f (derivatives spectral, the
// Bloch factor differentiated analytically). Rows for the plain pair:
//   (alpha d/dy - d/dx) f1 + Q f2 - lambda f1
//   conj(Q) f1 + (alpha d/dy + d/dx) f2 - lambda f2
// and for the conjugate (congruent) pair the sign-swapped pattern. alpha_lax
// and the potential always come from the base tuple.
double lax_residual(const SpinorField& f, const TorusField& q_pot, cplx alpha_lax, cplx lambda,
                    bool congruent_pair);

// The four residuals at once, on period-doubled grids sized nx x ny: Psi+ and
// the congruent PsiHat+ at lambda0 (both x- and y-period doubled), PhiTilde+
// and PhiHat+ at lambda = 0 (y-period doubled, x handled through bloch_kx).
struct LaxResiduals {
  double psi = 0.0;
  double psi_hat = 0.0;
  double phi_tilde = 0.0;
  double phi_hat = 0.0;
};
LaxResiduals lax_residuals(const DarbouxParams& p, double t, int nx, int ny);

}  // namespace dsii
