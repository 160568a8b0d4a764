#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "dsii/config.hpp"
#include "dsii/darboux.hpp"
#include "dsii/errors.hpp"
#include "dsii/evolve.hpp"
#include "dsii/grid.hpp"
#include "dsii/melnikov.hpp"
#include "dsii/normalform.hpp"
#include "dsii/params.hpp"

namespace {

using namespace dsii;

constexpr const char* kVersion = "1.0.0";

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  return dir;
}

bool parses_as_number(const std::string& s) {
  double v = 0.0;
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), last, v);
  return ec == std::errc{} && ptr == last;
}

JsonValue inputs_json(const RunConfig& cfg) {
  JsonValue out = JsonValue::object();
  for (const auto& [key, value] : config_items(cfg)) {
    if (parses_as_number(value)) {
      out.set(key, JsonValue::num(std::strtod(value.c_str(), nullptr)));
    } else {
      out.set(key, JsonValue::str(value));
    }
  }
  return out;
}

JsonValue manifest_head(const char* command, const RunConfig& cfg) {
  JsonValue m = JsonValue::object();
  m.set("command", JsonValue::str(command));
  m.set("version", JsonValue::str(kVersion));
  m.set("inputs", inputs_json(cfg));
  return m;
}

void write_out(const std::filesystem::path& dir, const std::string& name,
               const std::string& text) {
  write_text_atomic((dir / name).string(), text);
  std::cout << "wrote " << (dir / name).string() << "\n";
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(count));
  if (count == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

QuadratureOptions quad_of(const RunConfig& cfg) {
  QuadratureOptions q;
  q.nx = cfg.nx;
  q.ny = cfg.ny;
  q.panel_width = cfg.panel_width;
  q.tail = cfg.tail;
  return q;
}

JsonValue lattice_json(Lattice k) {
  JsonValue a = JsonValue::array();
  a.push(JsonValue::integer(k[0]));
  a.push(JsonValue::integer(k[1]));
  return a;
}

// ---- subcommands ----

void cmd_spectrum(const RunConfig& cfg) {
  const ModelParams p = validate_params(cfg.omega, cfg.alpha, cfg.beta, cfg.epsilon, cfg.kappa1,
                                        cfg.kappa2, /*require_saddle=*/false);
  const std::vector<SpectrumEntry> rows = linear_spectrum(p, cfg.spectrum_kmax);
  int unstable = 0;
  for (const SpectrumEntry& r : rows) unstable += r.unstable ? 1 : 0;
  const auto dir = ensure_out_dir(cfg);
  if (cfg.format == OutputFormat::Csv) {
    write_out(dir, "spectrum.csv", spectrum_csv(rows));
  } else {
    JsonValue arr = JsonValue::array();
    for (const SpectrumEntry& r : rows) {
      JsonValue o = JsonValue::object();
      o.set("k1", JsonValue::integer(r.k1));
      o.set("k2", JsonValue::integer(r.k2));
      o.set("xi1", JsonValue::num(r.xi1));
      o.set("xi2", JsonValue::num(r.xi2));
      o.set("mu_plus", JsonValue::num(r.mu_plus));
      o.set("mu_minus", JsonValue::num(r.mu_minus));
      o.set("unstable", JsonValue::boolean(r.unstable));
      arr.push(std::move(o));
    }
    JsonValue doc = JsonValue::object();
    doc.set("rows", std::move(arr));
    write_out(dir, "spectrum.json", doc.dump());
  }
  JsonValue m = manifest_head("spectrum", cfg);
  JsonValue res = JsonValue::object();
  res.set("rows", JsonValue::integer(static_cast<long long>(rows.size())));
  res.set("unstable_modes", JsonValue::integer(unstable));
  res.set("branch",
          JsonValue::str(p.branch == ConstraintBranch::Cstr1 ? "window1" : "window2"));
  m.set("results", std::move(res));
  write_out(dir, "spectrum_manifest.json", m.dump());
  std::cout << "spectrum: " << rows.size() << " modes, " << unstable << " unstable\n";
}

void cmd_orbit(const RunConfig& cfg) {
  const DarbouxParams P = orbit_of(cfg);
  const TorusGrid g{cfg.nx, cfg.ny, cfg.kappa1, cfg.kappa2};
  const TorusField Q = homoclinic_Q(P, cfg.orbit_t, g);
  const double h = 1e-4;
  const TorusField Qp = homoclinic_Q(P, cfg.orbit_t + h, g);
  const TorusField Qm = homoclinic_Q(P, cfg.orbit_t - h, g);
  const TorusField rhs = dsii_rhs(Q, cfg.omega, 0.0, 0.0, 0.0);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < Q.v.size(); ++i) {
    const cplx dq = (Qp.v[i] - Qm.v[i]) / (2.0 * h) - rhs.v[i];
    num += std::norm(dq);
    den += std::norm(Q.v[i]);
  }
  const double residual = std::sqrt(num / std::max(den, 1e-300));
  const auto dir = ensure_out_dir(cfg);
  if (cfg.format == OutputFormat::Csv) {
    write_out(dir, "orbit.csv", field_csv(Q));
  } else {
    JsonValue doc = JsonValue::object();
    doc.set("nx", JsonValue::integer(g.nx));
    doc.set("ny", JsonValue::integer(g.ny));
    doc.set("kappa1", JsonValue::num(g.kappa1));
    doc.set("kappa2", JsonValue::num(g.kappa2));
    doc.set("t", JsonValue::num(cfg.orbit_t));
    JsonValue re = JsonValue::array(), im = JsonValue::array();
    for (const cplx& v : Q.v) {
      re.push(JsonValue::num(v.real()));
      im.push(JsonValue::num(v.imag()));
    }
    doc.set("re", std::move(re));
    doc.set("im", std::move(im));
    write_out(dir, "orbit.json", doc.dump());
  }
  JsonValue m = manifest_head("orbit", cfg);
  JsonValue res = JsonValue::object();
  res.set("pde_residual_rel", JsonValue::num(residual));
  res.set("parity_defect_x", JsonValue::num(parity_defect_x(Q)));
  res.set("parity_defect_y", JsonValue::num(parity_defect_y(Q)));
  res.set("max_abs", JsonValue::num(max_abs(Q)));
  res.set("lambda0", JsonValue::num(P.lambda0));
  res.set("xi10", JsonValue::num(P.xi10));
  res.set("vartheta1", JsonValue::num(P.vartheta1));
  res.set("vartheta2", JsonValue::num(P.vartheta2));
  res.set("delta_rho", JsonValue::num(P.delta_rho));
  m.set("results", std::move(res));
  write_out(dir, "orbit_manifest.json", m.dump());
  std::cout << "orbit at t = " << format_float(cfg.orbit_t)
            << ": pde residual (rel L2) = " << format_float(residual) << "\n";
}

JsonValue components_json(const MelnikovComponents& mc) {
  JsonValue doc = JsonValue::object();
  JsonValue rows = JsonValue::array();
  for (int j = 0; j < 2; ++j) {
    JsonValue row = JsonValue::array();
    for (int l = 0; l < 4; ++l) row.push(JsonValue::num(mc.M[j][l]));
    rows.push(std::move(row));
  }
  doc.set("M", std::move(rows));
  doc.set("T_cut", JsonValue::num(mc.T_cut));
  doc.set("tau_max", JsonValue::num(mc.tau_max));
  doc.set("panel_width", JsonValue::num(mc.panel_width));
  doc.set("panels", JsonValue::integer(mc.panels));
  doc.set("gl_order", JsonValue::integer(mc.gl_order));
  doc.set("nx", JsonValue::integer(mc.nx));
  doc.set("ny", JsonValue::integer(mc.ny));
  doc.set("gamma_independence_defect", JsonValue::num(mc.gamma_independence_defect));
  doc.set("convergence_defect", JsonValue::num(mc.convergence_defect));
  return doc;
}

void cmd_melnikov(const RunConfig& cfg) {
  const DarbouxParams P = orbit_of(cfg);
  const MelnikovComponents mc = melnikov_components(P, quad_of(cfg));
  const auto dir = ensure_out_dir(cfg);
  write_out(dir, "melnikov.json", components_json(mc).dump());
  JsonValue m = manifest_head("melnikov", cfg);
  JsonValue tol = JsonValue::object();
  tol.set("convergence_rel", JsonValue::num(1e-6));
  m.set("tolerances", std::move(tol));
  m.set("results", components_json(mc));
  write_out(dir, "melnikov_manifest.json", m.dump());
  for (int j = 0; j < 2; ++j)
    std::printf("M%d: %+.10e %+.10e %+.10e %+.10e\n", j + 1, mc.M[j][0], mc.M[j][1], mc.M[j][2],
                mc.M[j][3]);
  std::cout << "gamma-independence defect " << format_float(mc.gamma_independence_defect)
            << ", convergence defect " << format_float(mc.convergence_defect) << "\n";
}

void cmd_solve_params(const RunConfig& cfg) {
  const DarbouxParams P = orbit_of(cfg);
  const MelnikovComponents mc = melnikov_components(P, quad_of(cfg));
  const ParameterSolution sol = solve_alpha_beta(mc, cfg.gamma, P);
  const ParameterSolution apx = appendix_chi(mc, P);
  const auto dir = ensure_out_dir(cfg);
  JsonValue doc = JsonValue::object();
  doc.set("alpha", JsonValue::num(sol.alpha_star));
  doc.set("beta", JsonValue::num(sol.beta_star));
  doc.set("admissible", JsonValue::boolean(sol.admissible));
  doc.set("flags", JsonValue::str(sol.flags));
  doc.set("chi", JsonValue::num(apx.chi));
  doc.set("constrained_alpha", JsonValue::num(apx.alpha_star));
  doc.set("constrained_beta", JsonValue::num(apx.beta_star));
  doc.set("constrained_flags", JsonValue::str(apx.flags));
  write_out(dir, "solve_params.json", doc.dump());
  JsonValue m = manifest_head("solve-params", cfg);
  m.set("results", std::move(doc));
  write_out(dir, "solve_params_manifest.json", m.dump());
  std::printf("alpha = %.6f\nbeta = %.6f\nchi = %.6f\n", sol.alpha_star, sol.beta_star, apx.chi);
  std::cout << "admissible: " << (sol.admissible ? "yes" : "no") << " (" << sol.flags << ")\n";
}

void cmd_scan_domain(const RunConfig& cfg) {
  ScanRequest req;
  req.omegas = linspace(cfg.omega_min, cfg.omega_max, cfg.omega_count);
  req.delta_rhos = linspace(cfg.drho_min, cfg.drho_max, cfg.drho_count);
  req.gammas = linspace(cfg.gamma_min, cfg.gamma_max, cfg.gamma_count);
  req.kappa1 = cfg.kappa1;
  req.kappa2 = cfg.kappa2;
  req.sign_x = cfg.sign_x;
  req.sign_y = cfg.sign_y;
  req.quad = quad_of(cfg);
  const std::vector<ScanCell> cells = domain_scan(req);
  int admissible = 0;
  for (const ScanCell& c : cells) admissible += c.admissible ? 1 : 0;
  const auto dir = ensure_out_dir(cfg);
  if (cfg.format == OutputFormat::Csv) {
    write_out(dir, "scan.csv", scan_csv(cells));
  } else {
    JsonValue arr = JsonValue::array();
    for (const ScanCell& c : cells) {
      JsonValue o = JsonValue::object();
      o.set("omega", JsonValue::num(c.omega));
      o.set("delta_rho", JsonValue::num(c.delta_rho));
      o.set("gamma", JsonValue::num(c.gamma));
      o.set("alpha", JsonValue::num(c.alpha));
      o.set("beta", JsonValue::num(c.beta));
      o.set("admissible", JsonValue::boolean(c.admissible));
      o.set("flags", JsonValue::str(c.flags));
      arr.push(std::move(o));
    }
    JsonValue doc = JsonValue::object();
    doc.set("cells", std::move(arr));
    write_out(dir, "scan.json", doc.dump());
  }
  JsonValue m = manifest_head("scan-domain", cfg);
  JsonValue res = JsonValue::object();
  res.set("cells", JsonValue::integer(static_cast<long long>(cells.size())));
  res.set("admissible", JsonValue::integer(admissible));
  m.set("results", std::move(res));
  write_out(dir, "scan_manifest.json", m.dump());
  std::cout << "scan: " << cells.size() << " cells, " << admissible << " admissible\n";
}

void cmd_simulate(const RunConfig& cfg) {
  const ModelParams p = validate_params(cfg.omega, cfg.alpha, cfg.beta, cfg.epsilon, cfg.kappa1,
                                        cfg.kappa2, /*require_saddle=*/false);
  const TorusGrid g{cfg.nx, cfg.ny, cfg.kappa1, cfg.kappa2};
  TorusField q0(g);
  if (cfg.sim_source == "orbit") {
    q0 = homoclinic_Q(orbit_of(cfg), cfg.sim_t0, g);
  } else {
    const cplx phase = std::exp(cplx(0.0, cfg.gamma));
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        q0.at(ix, iy) = phase * (cfg.omega + cfg.sim_amplitude *
                                                 std::cos(cfg.sim_k1 * g.kappa1 * g.x(ix)) *
                                                 std::cos(cfg.sim_k2 * g.kappa2 * g.y(iy)));
    q0.even_x = q0.even_y = true;
  }
  const EvolutionConfig ec{cfg.dt, cfg.scheme, cfg.t_final, cfg.snapshot_stride};
  const EvolutionResult res = integrate(q0, p, ec);
  const auto dir = ensure_out_dir(cfg);
  JsonValue m = manifest_head("simulate", cfg);
  JsonValue r = JsonValue::object();
  JsonValue times = JsonValue::array(), norms = JsonValue::array();
  for (size_t i = 0; i < res.snapshots.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
    write_out(dir, name, field_csv(res.snapshots[i]));
    times.push(JsonValue::num(res.times[i]));
    norms.push(JsonValue::num(norm_l2(res.snapshots[i])));
  }
  r.set("snapshots", JsonValue::integer(static_cast<long long>(res.snapshots.size())));
  r.set("times", std::move(times));
  r.set("l2_norms", std::move(norms));
  r.set("blew_up", JsonValue::boolean(res.blew_up));
  if (res.blew_up) r.set("blowup_time", JsonValue::num(res.blowup_time));
  m.set("results", std::move(r));
  write_out(dir, "simulate_manifest.json", m.dump());
  std::cout << "simulate: " << res.snapshots.size() << " snapshots over t_final = "
            << format_float(cfg.t_final) << (res.blew_up ? " (blow-up detected)" : "") << "\n";
}

void cmd_normalform(const RunConfig& cfg) {
  const ModelParams p = model_of(cfg);  // unvalidated: the system is defined for all kappa
  const LatticeScan scan = lattice_scan(p, cfg.kmax);
  const auto dir = ensure_out_dir(cfg);
  write_out(dir, "normalform.csv", normalform_csv(scan.records));
  JsonValue doc = JsonValue::object();
  doc.set("kmax", JsonValue::integer(scan.kmax));
  doc.set("pairs", JsonValue::integer(static_cast<long long>(scan.records.size())));
  JsonValue sing = JsonValue::array();
  for (const auto& pr : scan.singular_pairs) {
    JsonValue o = JsonValue::array();
    o.push(lattice_json(pr[0]));
    o.push(lattice_json(pr[1]));
    sing.push(std::move(o));
  }
  doc.set("singular_pairs", std::move(sing));
  JsonValue nearp = JsonValue::array();
  for (const auto& pr : scan.near_singular_pairs) {
    JsonValue o = JsonValue::array();
    o.push(lattice_json(pr[0]));
    o.push(lattice_json(pr[1]));
    nearp.push(std::move(o));
  }
  doc.set("near_singular_pairs", std::move(nearp));
  doc.set("max_residual_well_conditioned", JsonValue::num(scan.max_residual));
  doc.set("max_cond", JsonValue::num(scan.max_cond));
  JsonValue fits = JsonValue::array();
  for (const RayFit& f : scan.decay_fits) {
    JsonValue o = JsonValue::object();
    o.set("k_dir", lattice_json(f.k_dir));
    o.set("ell_dir", lattice_json(f.ell_dir));
    o.set("ell_base", lattice_json(f.ell_base));
    o.set("exponent", JsonValue::num(f.exponent));
    o.set("fit_rms", JsonValue::num(f.fit_residual));
    o.set("points", JsonValue::integer(f.points));
    fits.push(std::move(o));
  }
  doc.set("decay_fits", std::move(fits));
  doc.set("evidence",
          JsonValue::str("empirical: solvability and decay observed on the scanned lattice "
                         "only; no closed-form ground truth exists for the exponents"));
  write_out(dir, "normalform.json", doc.dump());
  JsonValue m = manifest_head("normalform", cfg);
  m.set("results", std::move(doc));
  write_out(dir, "normalform_manifest.json", m.dump());
  std::cout << "normalform: " << scan.records.size() << " pairs, "
            << scan.singular_pairs.size() << " singular, " << scan.near_singular_pairs.size()
            << " near-singular, max residual " << format_float(scan.max_residual) << "\n";
}

// ---- verify ----

struct Check {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

int cmd_verify(const RunConfig& cfg) {
  std::vector<Check> checks;
  auto add = [&checks](const std::string& name, double value, double tol) {
    checks.push_back({name, value, tol, value < tol});
  };

  // Model: closed-form saddle against the Newton-refined fixed point.
  {
    const ModelParams p = validate_params(cfg.omega, cfg.alpha, cfg.beta, cfg.epsilon,
                                          cfg.kappa1, cfg.kappa2);
    const SaddleState s = saddle_state(p);
    const RefinedSaddle r = refine_saddle(p);
    add("saddle-truncation", std::abs(r.I_val - s.I_val) / s.I_val, 1e-2);
    int bad = std::abs(p.unstable_mode_count - 2);
    const ModelParams p1 = validate_params(0.8, cfg.alpha, cfg.beta, cfg.epsilon,
                                           std::sqrt(2.0), 1.2, false);
    bad += std::abs(p1.unstable_mode_count - 2);
    add("two-unstable-modes", static_cast<double>(bad), 0.5);
    const ModelParams p0 = validate_params(cfg.omega, cfg.alpha, cfg.beta, 0.0, cfg.kappa1,
                                           cfg.kappa2, false);
    const std::vector<SpectrumEntry> rows = linear_spectrum(p0, 2);
    double growth = 0.0;
    for (const SpectrumEntry& r2 : rows)
      if (r2.k1 == 1 && r2.k2 == 0) growth = r2.mu_plus;
    const double lam0 = std::sqrt(cfg.omega * cfg.omega - cfg.kappa1 * cfg.kappa1 / 4.0);
    add("growth-rate-closed-form", std::abs(growth - 2.0 * cfg.kappa1 * lam0) /
                                       (2.0 * cfg.kappa1 * lam0), 1e-12);
  }

  const DarbouxParams P = orbit_of(cfg);

  // Orbit: PDE residual and the asymptotic phase shift.
  {
    const TorusGrid g{48, 48, cfg.kappa1, cfg.kappa2};
    const TorusField Q = homoclinic_Q(P, 0.0, g);
    const double h = 1e-4;
    const TorusField Qp = homoclinic_Q(P, h, g);
    const TorusField Qm = homoclinic_Q(P, -h, g);
    const TorusField rhs = dsii_rhs(Q, cfg.omega, 0.0, 0.0, 0.0);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < Q.v.size(); ++i) {
      num += std::norm((Qp.v[i] - Qm.v[i]) / (2.0 * h) - rhs.v[i]);
      den += std::norm(Q.v[i]);
    }
    add("orbit-pde-residual", std::sqrt(num / den), 1e-5);

    double shift = 0.0;
    for (int sgn : {+1, -1}) {
      const double t = (40.0 * sgn + P.rho) / (2.0 * P.kappa1 * P.lambda0);
      const TorusField Qa = homoclinic_Q(P, t, g);
      const cplx pred = plane_wave(P, t) * std::exp(cplx(0.0, std::numbers::pi)) *
                        std::exp(cplx(0.0, -2.0 * sgn * (P.vartheta1 - P.vartheta2)));
      for (const cplx& v : Qa.v) shift = std::max(shift, std::abs(v - pred) / cfg.omega);
    }
    add("phase-shift-iterated", shift, 1e-10);

    const LaxResiduals lr = lax_residuals(P, 0.0, 48, 48);
    add("lax-residual-psi", std::max(lr.psi, lr.psi_hat), 1e-8);
    add("lax-residual-phi", std::max(lr.phi_tilde, lr.phi_hat), 1e-8);
  }

  // Melnikov: gamma split consistency and reassembly against direct quadrature.
  {
    QuadratureOptions q;
    q.nx = 32;
    q.ny = 32;
    q.panel_width = 1.0;
    q.tail = 1e-10;
    q.check_convergence = false;
    const MelnikovComponents mc = melnikov_components(P, q);
    add("melnikov-gamma-independence", mc.gamma_independence_defect, 1e-8);
    const std::array<double, 2> direct = melnikov_direct(P, cfg.alpha, cfg.beta, q);
    double scale = 0.0;
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 4; ++l) scale = std::max(scale, std::abs(mc.M[j][l]));
    double diff = 0.0;
    for (int j = 0; j < 2; ++j)
      diff = std::max(diff, std::abs(reassemble_row(mc, j, cfg.alpha, cfg.beta, cfg.gamma) -
                                     direct[j]) / scale);
    add("melnikov-reassembly-vs-direct", diff, 1e-8);
  }

  // Normal form: back-substitution and the operator identity.
  {
    ModelParams p = model_of(cfg);
    const NormalFormEntry e = assemble_and_solve({1, 0}, {0, 1}, p);
    add("normalform-backsub", e.residual, 1e-12);
    const SpectralField f{{{1, 0}, 0.5}, {{-1, 0}, 0.5}, {{0, 1}, 0.5}, {{0, -1}, 0.5}};
    add("normalform-homological", homological_verify(solve_entries_for(f, p), f, p), 1e-10);
  }

  // Evolution: plane-wave fixed point at epsilon = 0 and parity preservation.
  {
    const ModelParams p0 = validate_params(cfg.omega, cfg.alpha, cfg.beta, 0.0, cfg.kappa1,
                                           cfg.kappa2, false);
    const TorusGrid g{32, 32, cfg.kappa1, cfg.kappa2};
    TorusField q0(g);
    for (cplx& v : q0.v) v = cfg.omega;
    q0.even_x = q0.even_y = true;
    const EvolutionResult r0 = integrate(q0, p0, {1e-3, Scheme::ExponentialRk4, 0.2, 1000});
    double err = 0.0;
    for (const cplx& v : r0.snapshots.back().v) err = std::max(err, std::abs(v - cfg.omega));
    add("evolve-plane-fixed-point", err / cfg.omega, 1e-12);

    const ModelParams p = validate_params(cfg.omega, cfg.alpha, cfg.beta, cfg.epsilon,
                                          cfg.kappa1, cfg.kappa2);
    const TorusField qh = homoclinic_Q(P, -0.5, g);
    const EvolutionResult r1 = integrate(qh, p, {1e-3, Scheme::ExponentialRk4, 0.2, 1000});
    const TorusField& last = r1.snapshots.back();
    add("evolve-parity", std::max(parity_defect_x(last), parity_defect_y(last)), 1e-10);
  }

  // Config: dump/parse round trip.
  {
    const RunConfig back = parse_config(dump_config(cfg));
    add("config-round-trip", dump_config(back) == dump_config(cfg) ? 0.0 : 1.0, 0.5);
  }

  bool all = true;
  for (const Check& c : checks) {
    all = all && c.pass;
    std::printf("%-32s %s  value=%.3e tol=%.0e\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                c.value, c.tol);
  }
  std::printf("verify: %zu checks, %s\n", checks.size(), all ? "all passed" : "FAILURES");

  const auto dir = ensure_out_dir(cfg);
  JsonValue m = manifest_head("verify", cfg);
  JsonValue arr = JsonValue::array();
  for (const Check& c : checks) {
    JsonValue o = JsonValue::object();
    o.set("name", JsonValue::str(c.name));
    o.set("value", JsonValue::num(c.value));
    o.set("tolerance", JsonValue::num(c.tol));
    o.set("pass", JsonValue::boolean(c.pass));
    arr.push(std::move(o));
  }
  JsonValue res = JsonValue::object();
  res.set("checks", std::move(arr));
  res.set("all_passed", JsonValue::boolean(all));
  m.set("results", std::move(res));
  write_out(dir, "verify_manifest.json", m.dump());
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsii-lab: homoclinic-orbit and forcing-threshold laboratory for a "
               "damped-driven Davey-Stewartson II system on the torus"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--format", format, "tabular output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--set", sets, "override a config key, KEY=VALUE (repeatable)");

  std::vector<std::pair<std::string, std::string>> flag_overrides;
  auto bind = [&flag_overrides](CLI::App* sub, const std::string& flag, const std::string& key,
                                const std::string& desc) {
    sub->add_option_function<std::string>(
        flag, [&flag_overrides, key](const std::string& v) { flag_overrides.emplace_back(key, v); },
        desc);
  };

  CLI::App* s_verify = app.add_subcommand("verify", "run the invariant and oracle suite");
  CLI::App* s_spectrum = app.add_subcommand("spectrum", "tabulate linearized growth rates");
  bind(s_spectrum, "--kmax", "spectrum_kmax", "mode bound");
  bind(s_spectrum, "--epsilon", "epsilon", "perturbation strength");
  bind(s_spectrum, "--omega", "omega", "plane-wave amplitude");
  CLI::App* s_orbit = app.add_subcommand("orbit", "sample the homoclinic orbit");
  bind(s_orbit, "--t", "orbit_t", "sample time");
  bind(s_orbit, "--nx", "nx", "x resolution");
  bind(s_orbit, "--ny", "ny", "y resolution");
  bind(s_orbit, "--gamma", "gamma", "plane-wave phase");
  CLI::App* s_melnikov = app.add_subcommand("melnikov", "compute the component matrix");
  CLI::App* s_solve = app.add_subcommand("solve-params", "solve the forcing thresholds");
  for (CLI::App* sub : {s_melnikov, s_solve}) {
    bind(sub, "--nx", "nx", "x resolution");
    bind(sub, "--ny", "ny", "y resolution");
    bind(sub, "--panel-width", "panel_width", "quadrature panel width in tau");
    bind(sub, "--tail", "tail", "decay cutoff for T_cut");
    bind(sub, "--omega", "omega", "plane-wave amplitude");
    bind(sub, "--rho-hat", "rho_hat", "orbit shift (delta rho at rho = 0)");
    bind(sub, "--gamma", "gamma", "plane-wave phase");
  }
  CLI::App* s_scan = app.add_subcommand("scan-domain", "tabulate thresholds over a lattice");
  bind(s_scan, "--omega-count", "omega_count", "omega samples");
  bind(s_scan, "--drho-count", "drho_count", "delta-rho samples");
  bind(s_scan, "--gamma-count", "gamma_count", "gamma samples");
  CLI::App* s_simulate = app.add_subcommand("simulate", "integrate the perturbed equation");
  bind(s_simulate, "--epsilon", "epsilon", "perturbation strength");
  bind(s_simulate, "--scheme", "scheme", "etdrk4 or strang");
  bind(s_simulate, "--dt", "dt", "time step");
  bind(s_simulate, "--t-final", "t_final", "integration length");
  bind(s_simulate, "--source", "sim_source", "orbit or plane");
  bind(s_simulate, "--t0", "sim_t0", "orbit start time");
  CLI::App* s_normalform = app.add_subcommand("normalform", "solve the homological systems");
  bind(s_normalform, "--kmax", "kmax", "lattice bound");
  bind(s_normalform, "--epsilon", "epsilon", "perturbation strength");

  for (CLI::App* sub : {s_verify, s_spectrum, s_orbit, s_melnikov, s_solve, s_scan, s_simulate,
                        s_normalform})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const std::string& s : sets) {
      const size_t eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
      apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, value] : flag_overrides) apply_override(cfg, key, value);
    if (!out_dir.empty()) apply_override(cfg, "out_dir", out_dir);
    if (!format.empty()) apply_override(cfg, "format", format);

    if (app.got_subcommand(s_verify)) return cmd_verify(cfg);
    if (app.got_subcommand(s_spectrum)) cmd_spectrum(cfg);
    if (app.got_subcommand(s_orbit)) cmd_orbit(cfg);
    if (app.got_subcommand(s_melnikov)) cmd_melnikov(cfg);
    if (app.got_subcommand(s_solve)) cmd_solve_params(cfg);
    if (app.got_subcommand(s_scan)) cmd_scan_domain(cfg);
    if (app.got_subcommand(s_simulate)) cmd_simulate(cfg);
    if (app.got_subcommand(s_normalform)) cmd_normalform(cfg);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
