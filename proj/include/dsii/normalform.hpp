#pragma once

#include <array>
#include <map>
#include <vector>

#include "dsii/grid.hpp"
#include "dsii/params.hpp"

namespace dsii {

// Integer lattice mode: physical wavevector (k[0]*kappa1, k[1]*kappa2).
using Lattice = std::array<int, 2>;

// a(k) = (k1^2 kap1^2 - k2^2 kap2^2) / (k1^2 kap1^2 + k2^2 kap2^2). Zero on the
// symmetric-norm diagonal is well-defined; only k = 0 is excluded.
double lattice_asym(Lattice k, double kappa1, double kappa2);

// B(k) = 2 omega^2 a(k), the mean-coupling coefficient of the linearization.
double lattice_B(Lattice k, double kappa1, double kappa2, double omega);

struct NormalFormEntry {
  Lattice k{};
  Lattice ell{};
  cplx K1{};
  cplx K2_kl{};
  cplx K2_lk{};
  cplx K3{};
  double residual = 0.0;       // max defect of the eight real equations under back-substitution
  double cond = 0.0;           // condition number of the real system actually solved
  bool near_singular = false;  // cond > 1e10: numerically unreliable, reported unregularized
  double sigma = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double sigma3 = 0.0;
  double sigma4 = 0.0;
  double B_k = 0.0;
  double B_ell = 0.0;
  double B_klsum = 0.0;
};

// Solves the four coupled coefficient equations for one ordered pair as a real 8x8
// system in (Re, Im) of K1, K2_kl, K2_lk, K3 (the equations couple the unknowns to
// their conjugates, so no complex 4x4 exists). Requires k, ell, k + ell nonzero.
// For k == ell the 8x8 is structurally rank-deficient (the two K2 slots coincide and
// two equation rows repeat); the merged 6x6 system is solved instead. cond and the
// rank test refer to the system actually solved; residual always to all eight rows.
// Throws SingularSystem, reporting the null-space dimension, when cond > 1e14.
NormalFormEntry assemble_and_solve(Lattice k, Lattice ell, const ModelParams& p);

// Power-law fit of max_j |K_j| along one ray of pairs: k = m*k_dir,
// ell = ell_base + m*ell_dir for m = 1..kmax. exponent is the slope of
// log max_j |K_j| against log |k| (singular or near-singular points skipped).
struct RayFit {
  Lattice k_dir{};
  Lattice ell_dir{};
  Lattice ell_base{};
  double exponent = 0.0;
  double fit_residual = 0.0;  // rms deviation of the log-log fit
  int points = 0;
};

struct PairRecord {
  Lattice k{};
  Lattice ell{};
  double cond = 0.0;
  double residual = 0.0;   // NaN when singular
  double max_coeff = 0.0;  // max_j |K_j|, NaN when singular
  bool singular = false;
  bool near_singular = false;
  int null_dim = 0;  // singular values below cond threshold; nonzero only when singular
};

struct LatticeScan {
  int kmax = 0;
  std::vector<PairRecord> records;  // deterministic order: k outer, ell inner, row-major
  std::vector<std::array<Lattice, 2>> singular_pairs;
  std::vector<std::array<Lattice, 2>> near_singular_pairs;
  double max_residual = 0.0;  // over well-conditioned pairs only
  double max_cond = 0.0;      // over non-singular pairs
  std::vector<RayFit> decay_fits;
};

// Solves every ordered pair with |k|_inf, |ell|_inf <= kmax and k, ell, k + ell
// nonzero. Per-pair failures are recorded in the report, never thrown. The decay
// exponents answer only empirically; no closed-form ground truth exists. kmax >= 4.
LatticeScan lattice_scan(const ModelParams& p, int kmax, int threads = -1);

// Mean-free field given by its Fourier coefficients on the integer lattice.
using SpectralField = std::map<Lattice, cplx>;

using EntryKey = std::array<Lattice, 2>;
using EntryTable = std::map<EntryKey, NormalFormEntry>;

// Solves exactly the pairs a bilinear-form evaluation on f touches: all ordered pairs
// from the conjugation-closed support of f with k + ell != 0.
EntryTable solve_entries_for(const SpectralField& f, const ModelParams& p);

// Modes of a grid sample above rel_cutoff of the peak coefficient magnitude.
SpectralField spectral_modes(const TorusField& f, double rel_cutoff = 1e-12);

// Relative max-norm defect of i L K(f,f) - i K(Lf,f) - i K(f,Lf) against the quadratic
// source 2 omega [invLapUps |f|^2 + f invLapUps(f + conj f) - mean], all evaluated
// spectrally on the support of f. K is the bilinear form built from the solved
// coefficients; L is the linearization symbol including the B(k) conjugate coupling.
// Throws MissingEntry if f touches a pair absent from the table, ZeroMean if f has a
// mean component.
double homological_verify(const EntryTable& table, const SpectralField& f, const ModelParams& p);

// Grid-sample variant: extracts modes via spectral_modes, requires the grid to carry
// the same kappa1, kappa2 as p.
double homological_verify(const EntryTable& table, const TorusField& f_sample, const ModelParams& p);

}  // namespace dsii
