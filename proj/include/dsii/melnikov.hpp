#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dsii/darboux.hpp"
#include "dsii/grid.hpp"
#include "dsii/params.hpp"

namespace dsii {

// The four decaying eigenfunctions entering the Melnikov rows. Quadratic
// products pairing a plain member with its hat partner are fully periodic
// (the Bloch exponents cancel between Phi_tilde_plus and Phi_hat_plus).
struct EigenfunctionSet {
  double t = 0.0;
  SpinorField Psi_plus;        // base tuple
  SpinorField Psi_hat_plus;    // congruent tuple
  SpinorField Phi_tilde_plus;  // Bloch-flipped tuple, bloch_kx = -xi10
  SpinorField Phi_hat_plus;    // congruent tuple,     bloch_kx = +xi10
};

EigenfunctionSet build_eigenfunctions(const DarbouxParams& p, double t, const TorusGrid& g);

struct QuadratureOptions {
  int nx = 64;
  int ny = 64;
  double panel_width = 0.5;  // composite Gauss-Legendre panels, width in tau
  double tail = 1e-12;       // T_cut solves e^{-rate T} = tail
  bool check_convergence = true;
  int threads = -1;  // -1: DSII_THREADS env (0 or unset = hardware), else fixed count
};

// M[j][l]: rows j = 1,2; columns l = generators {Lap Q, -Q, beta cos, beta sin}.
// M_j(gamma; alpha, beta) = M[j][0] + alpha M[j][1] + beta cos(gamma) M[j][2]
//                         + beta sin(gamma) M[j][3].
struct MelnikovComponents {
  std::array<std::array<double, 4>, 2> M{};
  double T_cut = 0.0;
  double tau_max = 0.0;
  double panel_width = 0.0;
  int panels = 0;
  int gl_order = 8;
  int nx = 0, ny = 0;
  // largest relative drift of the two gamma-independent columns between the
  // gamma = 0 and gamma = pi/2 runs
  double gamma_independence_defect = 0.0;
  // largest change under panel halving relative to the largest component
  // (0 when the check is off)
  double convergence_defect = 0.0;
};

MelnikovComponents melnikov_components(const DarbouxParams& p,
                                       const QuadratureOptions& opts = {});

// Single-quadrature evaluation of M_j at the tuple's own gamma with the full
// generator f = Lap Q - alpha Q + beta; cross-checks the decomposition.
std::array<double, 2> melnikov_direct(const DarbouxParams& p, double alpha, double beta,
                                      const QuadratureOptions& opts = {});

double reassemble_row(const MelnikovComponents& mc, int row, double alpha, double beta,
                      double gamma);

// Largest integrand magnitude over the grid at time t (decay-rate probes).
double melnikov_integrand_linf(const DarbouxParams& p, double t, const TorusGrid& g);

struct ParameterSolution {
  double alpha_star = 0.0;
  double beta_star = 0.0;
  double chi = 0.0;
  bool admissible = false;
  std::string flags;  // "ok" or semicolon-separated failed conditions
};

// Zero conditions M_1 = M_2 = 0 solved for (alpha, beta) at fixed gamma.
ParameterSolution solve_alpha_beta(const MelnikovComponents& mc, double gamma,
                                   const DarbouxParams& p);

// Constrained variant that eliminates gamma through the asymptotic-phase
// relation; returns chi, alpha = 1/chi, and the constrained beta.
ParameterSolution appendix_chi(const MelnikovComponents& mc, const DarbouxParams& p);

struct ScanCell {
  double omega = 0.0;
  double delta_rho = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  bool admissible = false;
  std::string flags;
};

struct ScanRequest {
  std::vector<double> omegas;
  std::vector<double> delta_rhos;
  std::vector<double> gammas;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  int sign_x = +1;
  int sign_y = +1;
  QuadratureOptions quad;
};

// Tabulates (alpha, beta, admissible) over the lattice; per-cell failures are
// recorded in flags, the scan itself never throws for cell-level conditions.
std::vector<ScanCell> domain_scan(const ScanRequest& req);

}  // namespace dsii
