#include "dsii/melnikov.hpp"

#include <cmath>
#include <numbers>

#include "dsii/errors.hpp"
#include "dsii/parallel.hpp"

namespace dsii {

namespace {

constexpr double kPi = std::numbers::pi;

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975362317, -0.7966664774136267395, -0.5255324099163289858,
    -0.1834346424956498049, 0.1834346424956498049,  0.5255324099163289858,
    0.7966664774136267395,  0.9602898564975362317};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903762592, 0.2223810344533744705, 0.3137066458778872873,
    0.3626837833783619830, 0.3626837833783619830, 0.3137066458778872873,
    0.2223810344533744705, 0.1012285362903762592};

double slow_decay_rate(const DarbouxParams& p) {
  return 2.0 * std::min(p.kappa1 * p.lambda0, p.kappa2 * std::abs(p.xi10));
}

struct RunTuples {
  DarbouxParams base;       // gamma-adjusted
  DarbouxParams congruent;  // hat partners
  DarbouxParams flipped;    // Phi_tilde source
};

RunTuples tuples_at_gamma(const DarbouxParams& p, double gamma) {
  DarbouxParams base = p;
  base.gamma = gamma;
  return {base, congruent_params(base), bloch_flip_params(base)};
}

// One quadrature node: the 2x3 generator integrals' integrand sums, already
// weighted by the node weight and the cell area.
std::array<double, 6> node_contribution(const RunTuples& rt, double t, const TorusGrid& g,
                                        double weight) {
  SpinorField psi = psi_plus(rt.base, t, g);
  SpinorField psih = psi_plus(rt.congruent, t, g);
  SpinorField phit = phi_plus(rt.flipped, t, g);
  SpinorField phih = phi_plus(rt.congruent, t, g);
  if (std::abs(phit.bloch_kx + phih.bloch_kx) > 1e-12 * rt.base.kappa1)
    throw NumericalError("Bloch exponents of the Phi pair failed to cancel");

  TorusField Q = homoclinic_Q(rt.base, t, g);
  TorusField LQ = apply_operator(Q, Op::Laplacian);

  const double dA = g.cell_area();
  std::array<double, 6> acc{};
  for (size_t i = 0; i < Q.v.size(); ++i) {
    const cplx P2r1 = psi.c2.v[i] * psih.c2.v[i];
    const cplx P1r1 = psi.c1.v[i] * psih.c1.v[i];
    const cplx P2r2 = phit.c2.v[i] * phih.c2.v[i];
    const cplx P1r2 = phit.c1.v[i] * phih.c1.v[i];
    const cplx fs[3] = {LQ.v[i], -Q.v[i], cplx(1.0, 0.0)};
    for (int gi = 0; gi < 3; ++gi) {
      acc[gi] += (P2r1 * fs[gi] + P1r1 * std::conj(fs[gi])).real();
      acc[3 + gi] += (P2r2 * fs[gi] + P1r2 * std::conj(fs[gi])).real();
    }
  }
  for (double& v : acc) v *= weight * dA;
  return acc;
}

struct RunResult {
  std::array<double, 6> totals{};  // [row*3 + generator]
};

// Composite GL quadrature in tau over [-tau_max, tau_max]; tasks evaluated in
// parallel, reduced sequentially in task order (deterministic).
RunResult quadrature_run(const RunTuples& rt, double tau_max, double panel_width,
                         const TorusGrid& g, int threads) {
  const DarbouxParams& P0 = rt.base;
  const double rate_x = 2.0 * P0.kappa1 * P0.lambda0;
  const int npan = static_cast<int>(std::ceil(2.0 * tau_max / panel_width));
  const double edge0 = -tau_max, edge_step = 2.0 * tau_max / npan;

  struct Task {
    double t;
    double weight;
  };
  std::vector<Task> tasks;
  tasks.reserve(static_cast<size_t>(npan) * kGlNodes.size());
  for (int pnl = 0; pnl < npan; ++pnl) {
    const double a = edge0 + pnl * edge_step;
    const double b = edge0 + (pnl + 1) * edge_step;
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (size_t n = 0; n < kGlNodes.size(); ++n) {
      const double tau = mid + hw * kGlNodes[n];
      tasks.push_back({(tau + P0.rho) / rate_x, kGlWeights[n] * hw / rate_x});
    }
  }

  std::vector<std::array<double, 6>> partial(tasks.size());
  parallel_for(tasks.size(), threads,
               [&](size_t i) { partial[i] = node_contribution(rt, tasks[i].t, g, tasks[i].weight); });

  RunResult out;
  std::array<double, 6> comp{};
  for (const auto& part : partial)
    for (int k = 0; k < 6; ++k) {
      const double y = part[k] - comp[k];
      const double t = out.totals[k] + y;
      comp[k] = (t - out.totals[k]) - y;
      out.totals[k] = t;
    }
  return out;
}

std::array<std::array<double, 4>, 2> components_once(const DarbouxParams& p,
                                                     const QuadratureOptions& opts,
                                                     double tau_max, const TorusGrid& g,
                                                     int threads, double* gamma_defect) {
  std::array<std::array<double, 4>, 2> M{};
  std::array<std::array<double, 3>, 2> run0{};
  double defect = 0.0;
  for (int run = 0; run < 2; ++run) {
    const double gamma = run == 0 ? 0.0 : kPi / 2.0;
    RunTuples rt = tuples_at_gamma(p, gamma);
    RunResult r = quadrature_run(rt, tau_max, opts.panel_width, g, threads);
    for (int row = 0; row < 2; ++row) {
      if (run == 0) {
        M[row][0] = r.totals[row * 3 + 0];
        M[row][1] = r.totals[row * 3 + 1];
        M[row][2] = r.totals[row * 3 + 2];
        run0[row] = {r.totals[row * 3 + 0], r.totals[row * 3 + 1], r.totals[row * 3 + 2]};
      } else {
        M[row][3] = r.totals[row * 3 + 2];
        for (int c = 0; c < 2; ++c) {
          const double ref = std::max(std::abs(run0[row][c]), 1e-12);
          defect = std::max(defect, std::abs(r.totals[row * 3 + c] - run0[row][c]) / ref);
        }
      }
    }
  }
  if (gamma_defect) *gamma_defect = defect;
  return M;
}

std::string join_flags(const std::vector<std::string>& parts) {
  if (parts.empty()) return "ok";
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ';';
    out += parts[i];
  }
  return out;
}

ParameterSolution finish_solution(double alpha, double beta, double chi,
                                  const DarbouxParams& p) {
  ParameterSolution sol;
  sol.alpha_star = alpha;
  sol.beta_star = beta;
  sol.chi = chi;
  std::vector<std::string> bad;
  if (!(alpha > 0.0)) bad.push_back("alpha<=0");
  if (!(beta > 0.0)) bad.push_back("beta<=0");
  if (!(alpha * p.omega < beta)) bad.push_back("saddle");
  if (!constraint_branch(p.omega, p.kappa1, p.kappa2)) bad.push_back("window");
  sol.admissible = bad.empty();
  sol.flags = join_flags(bad);
  return sol;
}

}  // namespace

EigenfunctionSet build_eigenfunctions(const DarbouxParams& p, double t, const TorusGrid& g) {
  RunTuples rt = tuples_at_gamma(p, p.gamma);
  EigenfunctionSet set;
  set.t = t;
  set.Psi_plus = psi_plus(rt.base, t, g);
  set.Psi_hat_plus = psi_plus(rt.congruent, t, g);
  set.Phi_tilde_plus = phi_plus(rt.flipped, t, g);
  set.Phi_hat_plus = phi_plus(rt.congruent, t, g);
  return set;
}

MelnikovComponents melnikov_components(const DarbouxParams& p, const QuadratureOptions& opts) {
  if (opts.nx < 8 || opts.ny < 8) throw ConstraintViolation("quadrature grid too small");
  if (!(opts.panel_width > 0.0) || !(opts.tail > 0.0) || opts.tail >= 1.0)
    throw ConstraintViolation("invalid quadrature options");
  const int threads = resolve_threads(opts.threads);
  const TorusGrid g{opts.nx, opts.ny, p.kappa1, p.kappa2};

  MelnikovComponents mc;
  mc.T_cut = -std::log(opts.tail) / slow_decay_rate(p);
  mc.tau_max = 2.0 * p.kappa1 * p.lambda0 * mc.T_cut;
  mc.panel_width = opts.panel_width;
  mc.panels = static_cast<int>(std::ceil(2.0 * mc.tau_max / opts.panel_width));
  mc.nx = opts.nx;
  mc.ny = opts.ny;
  mc.M = components_once(p, opts, mc.tau_max, g, threads, &mc.gamma_independence_defect);

  if (opts.check_convergence) {
    QuadratureOptions half = opts;
    half.panel_width = opts.panel_width / 2.0;
    auto M2 = components_once(p, half, mc.tau_max, g, threads, nullptr);
    // normalize by the largest component: the entries enter the threshold
    // solve jointly, so an accidentally small entry must not dominate
    double scale = 1e-12;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 4; ++c) scale = std::max(scale, std::abs(M2[r][c]));
    double defect = 0.0;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 4; ++c)
        defect = std::max(defect, std::abs(mc.M[r][c] - M2[r][c]) / scale);
    mc.convergence_defect = defect;
    if (defect > 1e-6)
      throw QuadratureNotConverged("component drift " + std::to_string(defect) +
                                   " under time-sample doubling");
  }
  return mc;
}

std::array<double, 2> melnikov_direct(const DarbouxParams& p, double alpha, double beta,
                                      const QuadratureOptions& opts) {
  const int threads = resolve_threads(opts.threads);
  const TorusGrid g{opts.nx, opts.ny, p.kappa1, p.kappa2};
  const double T_cut = -std::log(opts.tail) / slow_decay_rate(p);
  const double tau_max = 2.0 * p.kappa1 * p.lambda0 * T_cut;
  RunTuples rt = tuples_at_gamma(p, p.gamma);
  RunResult r = quadrature_run(rt, tau_max, opts.panel_width, g, threads);
  // f = Lap Q - alpha Q + beta combines the generator columns linearly.
  return {r.totals[0] + alpha * r.totals[1] + beta * r.totals[2],
          r.totals[3] + alpha * r.totals[4] + beta * r.totals[5]};
}

double reassemble_row(const MelnikovComponents& mc, int row, double alpha, double beta,
                      double gamma) {
  const auto& m = mc.M[row];
  return m[0] + alpha * m[1] + beta * std::cos(gamma) * m[2] + beta * std::sin(gamma) * m[3];
}

double melnikov_integrand_linf(const DarbouxParams& p, double t, const TorusGrid& g) {
  EigenfunctionSet set = build_eigenfunctions(p, t, g);
  double m = 0.0;
  for (size_t i = 0; i < set.Psi_plus.c1.v.size(); ++i) {
    const double row1 = std::abs(set.Psi_plus.c2.v[i] * set.Psi_hat_plus.c2.v[i]) +
                        std::abs(set.Psi_plus.c1.v[i] * set.Psi_hat_plus.c1.v[i]);
    const double row2 = std::abs(set.Phi_tilde_plus.c2.v[i] * set.Phi_hat_plus.c2.v[i]) +
                        std::abs(set.Phi_tilde_plus.c1.v[i] * set.Phi_hat_plus.c1.v[i]);
    m = std::max(m, std::max(row1, row2));
  }
  return m;
}

ParameterSolution solve_alpha_beta(const MelnikovComponents& mc, double gamma,
                                   const DarbouxParams& p) {
  const auto& M = mc.M;
  const double c = std::cos(gamma), s = std::sin(gamma);
  const double g1 = c * M[0][2] + s * M[0][3];
  const double g2 = c * M[1][2] + s * M[1][3];
  double scale = 0.0;
  for (const auto& row : M)
    for (double v : row) scale = std::max(scale, std::abs(v));
  const double den = M[1][1] * g1 - M[0][1] * g2;
  if (std::abs(den) < 1e-12 * scale * scale)
    throw SingularDenominator("beta-generator columns are rank deficient at this gamma");
  const double alpha = (M[0][0] * g2 - M[1][0] * g1) / den;
  const double beta = (M[0][0] * M[1][1] - M[1][0] * M[0][1]) / (M[0][1] * g2 - M[1][1] * g1);
  ParameterSolution sol = finish_solution(alpha, beta, 0.0, p);
  sol.chi = std::nan("");
  return sol;
}

ParameterSolution appendix_chi(const MelnikovComponents& mc, const DarbouxParams& p) {
  const auto& M = mc.M;
  const double dg = -4.0 * (p.vartheta1 - p.vartheta2);
  const double sin_half = std::sin(dg / 2.0);
  double scale = 0.0;
  for (const auto& row : M)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (std::abs(sin_half) < 1e-12)
    throw SingularDenominator("sin(delta_gamma/2) vanishes");
  const double fac = p.omega * dg / (2.0 * sin_half);
  const double num = M[0][1] * M[1][3] - M[1][1] * M[0][3] -
                     fac * (M[0][2] * M[1][3] - M[1][2] * M[0][3]);
  const double den = M[1][0] * M[0][3] - M[0][0] * M[1][3];
  if (std::abs(den) < 1e-12 * scale * scale)
    throw SingularDenominator("chi denominator vanishes");
  const double chi = num / den;
  if (chi == 0.0) throw SingularDenominator("chi = 0: constrained alpha undefined");
  const double alpha = 1.0 / chi;
  const double b2 =
      (alpha * fac) * (alpha * fac) +
      (1.0 / (M[0][3] * M[0][3])) *
          std::pow(M[0][0] + alpha * (M[0][1] - M[0][2] * fac), 2);
  return finish_solution(alpha, std::sqrt(b2), chi, p);
}

std::vector<ScanCell> domain_scan(const ScanRequest& req) {
  if (req.omegas.empty() || req.delta_rhos.empty() || req.gammas.empty())
    throw ConstraintViolation("scan lattice must be nonempty in all three directions");
  std::vector<ScanCell> cells;
  cells.reserve(req.omegas.size() * req.delta_rhos.size() * req.gammas.size());
  for (double omega : req.omegas)
    for (double drho : req.delta_rhos) {
      std::optional<MelnikovComponents> mc;
      std::optional<DarbouxParams> p;
      std::string derive_flag;
      try {
        p = derive_params(omega, req.kappa1, req.kappa2, /*rho=*/0.0, /*rho_hat=*/drho,
                          /*gamma=*/0.0, req.sign_x, req.sign_y);
        mc = melnikov_components(*p, req.quad);
      } catch (const Error& e) {
        derive_flag = e.what();
      }
      for (double gamma : req.gammas) {
        ScanCell cell;
        cell.omega = omega;
        cell.delta_rho = drho;
        cell.gamma = gamma;
        if (!mc) {
          cell.flags = derive_flag;
          cells.push_back(std::move(cell));
          continue;
        }
        try {
          ParameterSolution sol = solve_alpha_beta(*mc, gamma, *p);
          cell.alpha = sol.alpha_star;
          cell.beta = sol.beta_star;
          cell.admissible = sol.admissible;
          cell.flags = sol.flags;
        } catch (const Error& e) {
          cell.flags = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }
  return cells;
}

}  // namespace dsii
