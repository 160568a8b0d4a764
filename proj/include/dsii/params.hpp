#pragma once

#include <array>
#include <optional>
#include <vector>

#include "dsii/grid.hpp"

namespace dsii {

enum class ConstraintBranch { Cstr1, Cstr2 };

// External parameters of the perturbed equation. Constructed only through
// validate_params, which certifies the two-unstable-mode window.
struct ModelParams {
  double omega = 0.0;
  double alpha_damp = 0.0;
  double beta_drive = 0.0;
  double epsilon = 0.0;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  ConstraintBranch branch = ConstraintBranch::Cstr1;
  int unstable_mode_count = 0;  // counted at epsilon = 0, where the window statement lives
};

struct SaddleState {
  double I_val = 0.0;
  double theta_val = 0.0;             // in (0, pi/2)
  std::array<double, 2> mu_pair{};    // mu_pair[0] > 0 > mu_pair[1] for small eps > 0
};

// Newton-refined fixed point of the spatially uniform reduced flow, used to
// bound the truncation error of the closed-form saddle empirically.
struct RefinedSaddle {
  double I_val = 0.0;
  double theta_val = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct SpectrumEntry {
  int k1 = 0;
  int k2 = 0;
  double xi1 = 0.0;  // k1 * kappa1
  double xi2 = 0.0;  // k2 * kappa2
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  bool unstable = false;
};

struct CoordinateDecomposition {
  double J_val = 0.0;
  double theta_mean = 0.0;
  TorusField f_field;
};

// Which wavenumber window (if either) the triple satisfies; nullopt when the
// two-unstable-mode condition fails.
std::optional<ConstraintBranch> constraint_branch(double omega, double kappa1, double kappa2);

// Validates the wavenumber window for exactly two unstable modes; checks the
// saddle-existence condition alpha*omega < beta only when require_saddle is set.
ModelParams validate_params(double omega, double alpha_damp, double beta_drive, double epsilon,
                            double kappa1, double kappa2, bool require_saddle = true);

// Closed-form saddle of the reduced plane, truncated at the displayed order in
// epsilon.
SaddleState saddle_state(const ModelParams& p);

// Newton iteration on the uniform fixed-point equations starting from the
// closed form; |I - I_closed| bounds the dropped higher-order terms.
RefinedSaddle refine_saddle(const ModelParams& p);

// Growth rates over the lattice 0 <= k_j <= kmax, k1 + k2 > 0. When the
// radicand 4 w^2 - |xi|^2 is negative both entries carry the shared real part.
std::vector<SpectrumEntry> linear_spectrum(const ModelParams& p, int kmax = 32);

// Unperturbed dispersion rate about the plane wave of amplitude eta: real for
// |xi| < 2 eta (growth), purely imaginary beyond (oscillation).
cplx dispersion_rate(double xi1, double xi2, double eta);

// q = (rho + f) e^{i theta} with <f> = 0, rho = |<q>|; J = <|q|^2> - omega^2.
CoordinateDecomposition decompose_coordinates(const TorusField& q, double omega);
TorusField reconstruct_coordinates(const CoordinateDecomposition& d, double omega,
                                   const TorusGrid& g);

}  // namespace dsii
