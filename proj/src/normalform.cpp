#include "dsii/normalform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "dsii/errors.hpp"
#include "dsii/parallel.hpp"

namespace dsii {

namespace {

constexpr double kSingularCond = 1e14;
constexpr double kNearSingularCond = 1e10;

double sq(double v) { return v * v; }

double dsym_of(Lattice k, double kap1, double kap2) {
  return sq(k[0] * kap1) - sq(k[1] * kap2);
}

double norm2_of(Lattice k, double kap1, double kap2) {
  return sq(k[0] * kap1) + sq(k[1] * kap2);
}

bool is_zero(Lattice k) { return k[0] == 0 && k[1] == 0; }

Lattice neg(Lattice k) { return {-k[0], -k[1]}; }

Lattice add(Lattice a, Lattice b) { return {a[0] + b[0], a[1] + b[1]}; }

std::string pair_label(Lattice k, Lattice ell) {
  std::ostringstream os;
  os << "k=(" << k[0] << "," << k[1] << ") ell=(" << ell[0] << "," << ell[1] << ")";
  return os.str();
}

void check_model(const ModelParams& p) {
  if (!(p.kappa1 > 0.0) || !(p.kappa2 > 0.0) || !(p.omega > 0.0) || !(p.epsilon >= 0.0) ||
      !std::isfinite(p.alpha_damp))
    throw ConstraintViolation("normal-form system needs kappa1, kappa2, omega > 0, epsilon >= 0");
}

// Assembled scalar coefficients of the four equations for the pair (k, ell).
struct PairCoeffs {
  double sig, s1, s2, s3, s4, Bk, Bl, Bkl;
};

PairCoeffs pair_coeffs(Lattice k, Lattice l, const ModelParams& p) {
  const double c1 = p.kappa1 * p.kappa1, c2 = p.kappa2 * p.kappa2;
  PairCoeffs c{};
  c.Bk = lattice_B(k, p.kappa1, p.kappa2, p.omega);
  c.Bl = lattice_B(l, p.kappa1, p.kappa2, p.omega);
  c.Bkl = lattice_B(add(k, l), p.kappa1, p.kappa2, p.omega);
  c.sig = p.epsilon * (p.alpha_damp - 2.0 * (k[0] * l[0] * c1 + k[1] * l[1] * c2));
  c.s1 = 2.0 * (k[1] * l[1] * c2 - k[0] * l[0] * c1) + c.Bkl - c.Bk - c.Bl;
  c.s2 = 2.0 * ((k[1] + l[1]) * l[1] * c2 - (k[0] + l[0]) * l[0] * c1) + c.Bkl - c.Bk + c.Bl;
  c.s3 = 2.0 * ((k[1] + l[1]) * k[1] * c2 - (k[0] + l[0]) * k[0] * c1) + c.Bkl + c.Bk - c.Bl;
  c.s4 = 2.0 * ((k[1] * k[1] + k[1] * l[1] + l[1] * l[1]) * c2 -
                (k[0] * k[0] + k[0] * l[0] + l[0] * l[0]) * c1) +
         c.Bkl + c.Bk + c.Bl;
  return c;
}

// 2x2 real blocks of c*z and c*conj(z) acting on (Re z, Im z).
Eigen::Matrix2d block_lin(cplx c) {
  Eigen::Matrix2d b;
  b << c.real(), -c.imag(), c.imag(), c.real();
  return b;
}

Eigen::Matrix2d block_conj(cplx c) {
  Eigen::Matrix2d b;
  b << c.real(), c.imag(), c.imag(), -c.real();
  return b;
}

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;

// Realified system A X = rhs, X = [Re K1, Im K1, Re K2_kl, Im K2_kl, Re K2_lk,
// Im K2_lk, Re K3, Im K3]. Complex equation j occupies real rows 2j, 2j+1.
void assemble_system(const PairCoeffs& c, double omega, Mat8& A, Vec8& rhs) {
  A.setZero();
  rhs.setZero();
  auto put = [&A](int eq, int var, const Eigen::Matrix2d& b) {
    A.block<2, 2>(2 * eq, 2 * var) += b;
  };
  put(0, 0, block_lin(cplx(c.s1, c.sig)));
  put(0, 1, block_lin(cplx(c.Bl, 0.0)));
  put(0, 2, block_lin(cplx(c.Bk, 0.0)));
  put(0, 3, block_conj(cplx(c.Bkl, 0.0)));
  rhs(0) = (c.Bk + c.Bl) / (2.0 * omega);
  put(1, 0, block_lin(cplx(-c.Bl, 0.0)));
  put(1, 1, block_lin(cplx(c.s2, c.sig)));
  put(1, 2, block_conj(cplx(c.Bkl, 0.0)));
  put(1, 3, block_lin(cplx(c.Bk, 0.0)));
  rhs(2) = (c.Bkl + c.Bl) / (2.0 * omega);
  put(2, 0, block_lin(cplx(-c.Bk, 0.0)));
  put(2, 1, block_conj(cplx(c.Bkl, 0.0)));
  put(2, 2, block_lin(cplx(c.s3, c.sig)));
  put(2, 3, block_lin(cplx(c.Bl, 0.0)));
  rhs(4) = (c.Bkl + c.Bk) / (2.0 * omega);
  put(3, 0, block_conj(cplx(c.Bkl, 0.0)));
  put(3, 1, block_lin(cplx(-c.Bk, 0.0)));
  put(3, 2, block_lin(cplx(-c.Bl, 0.0)));
  put(3, 3, block_lin(cplx(c.s4, c.sig)));
  return;
}

struct SolveOut {
  Vec8 X = Vec8::Zero();
  double cond = 0.0;
  double residual = 0.0;
  int null_dim = 0;
};

template <int N>
void svd_solve(const Eigen::Matrix<double, N, N>& A, const Eigen::Matrix<double, N, 1>& rhs,
               Eigen::Matrix<double, N, 1>& X, SolveOut& out) {
  Eigen::JacobiSVD<Eigen::Matrix<double, N, N>> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s(0), smin = s(N - 1);
  out.cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i)
    if (!(s(i) > smax / kSingularCond)) ++out.null_dim;
  X = svd.solve(rhs);
}

SolveOut solve_realified(Lattice k, Lattice ell, const PairCoeffs& c, double omega) {
  Mat8 A;
  Vec8 rhs;
  assemble_system(c, omega, A, rhs);
  SolveOut out;
  if (k == ell) {
    // Merge the coinciding K2 slots and drop the duplicated equation rows.
    Eigen::Matrix<double, 8, 6> T = Eigen::Matrix<double, 8, 6>::Zero();
    T(0, 0) = T(1, 1) = 1.0;
    T(2, 2) = T(3, 3) = 1.0;
    T(4, 2) = T(5, 3) = 1.0;
    T(6, 4) = T(7, 5) = 1.0;
    const Eigen::Matrix<double, 8, 6> AT = A * T;
    Eigen::Matrix<double, 6, 6> A6;
    Eigen::Matrix<double, 6, 1> r6;
    constexpr int rows[6] = {0, 1, 2, 3, 6, 7};
    for (int i = 0; i < 6; ++i) {
      A6.row(i) = AT.row(rows[i]);
      r6(i) = rhs(rows[i]);
    }
    Eigen::Matrix<double, 6, 1> X6;
    svd_solve<6>(A6, r6, X6, out);
    out.X = T * X6;
  } else {
    svd_solve<8>(A, rhs, out.X, out);
  }
  out.residual = (A * out.X - rhs).cwiseAbs().maxCoeff();
  return out;
}

double max_coeff_of(const NormalFormEntry& e) {
  return std::max({std::abs(e.K1), std::abs(e.K2_kl), std::abs(e.K2_lk), std::abs(e.K3)});
}

RayFit fit_ray(const ModelParams& p, int kmax, Lattice k_dir, Lattice ell_dir, Lattice ell_base) {
  RayFit f;
  f.k_dir = k_dir;
  f.ell_dir = ell_dir;
  f.ell_base = ell_base;
  std::vector<double> lx, ly;
  for (int m = 1; m <= kmax; ++m) {
    const Lattice k{m * k_dir[0], m * k_dir[1]};
    const Lattice l{ell_base[0] + m * ell_dir[0], ell_base[1] + m * ell_dir[1]};
    if (is_zero(l) || is_zero(add(k, l))) continue;
    NormalFormEntry e;
    try {
      e = assemble_and_solve(k, l, p);
    } catch (const Error&) {
      continue;
    }
    if (e.near_singular) continue;
    const double mk = max_coeff_of(e);
    if (!(mk > 0.0)) continue;
    lx.push_back(std::log(std::hypot(k[0] * p.kappa1, k[1] * p.kappa2)));
    ly.push_back(std::log(mk));
  }
  f.points = static_cast<int>(lx.size());
  if (f.points < 2) return f;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double n = static_cast<double>(lx.size());
  const double denom = n * sxx - sx * sx;
  f.exponent = (n * sxy - sx * sy) / denom;
  const double icpt = (sy - f.exponent * sx) / n;
  double ss = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) ss += sq(ly[i] - icpt - f.exponent * lx[i]);
  f.fit_residual = std::sqrt(ss / n);
  return f;
}

std::vector<Lattice> closed_support(const SpectralField& f) {
  std::set<Lattice> s;
  for (const auto& [k, v] : f) {
    s.insert(k);
    s.insert(neg(k));
  }
  return {s.begin(), s.end()};
}

cplx coeff(const SpectralField& f, Lattice k) {
  const auto it = f.find(k);
  return it == f.end() ? cplx{} : it->second;
}

// Linearization symbol about the plane wave, acting mode-wise with the B(k)
// conjugate coupling.
SpectralField apply_linear(const SpectralField& f, const ModelParams& p) {
  SpectralField out;
  for (const Lattice& k : closed_support(f)) {
    const cplx fk = coeff(f, k);
    const cplx fmc = std::conj(coeff(f, neg(k)));
    const double d = dsym_of(k, p.kappa1, p.kappa2);
    const double n2 = norm2_of(k, p.kappa1, p.kappa2);
    const double Bk = lattice_B(k, p.kappa1, p.kappa2, p.omega);
    out[k] = (cplx(0.0, d) - p.epsilon * (p.alpha_damp + n2)) * fk - cplx(0.0, Bk) * (fk + fmc);
  }
  return out;
}

SpectralField bilinear_K(const EntryTable& table, const SpectralField& u, const SpectralField& v) {
  SpectralField out;
  for (const Lattice& ku : closed_support(u)) {
    for (const Lattice& kv : closed_support(v)) {
      const Lattice m = add(ku, kv);
      if (is_zero(m)) continue;
      const auto it = table.find(EntryKey{ku, kv});
      if (it == table.end())
        throw MissingEntry("no solved coefficients for " + pair_label(ku, kv));
      const NormalFormEntry& e = it->second;
      const cplx uk = coeff(u, ku), vk = coeff(v, kv);
      const cplx umc = std::conj(coeff(u, neg(ku)));
      const cplx vmc = std::conj(coeff(v, neg(kv)));
      out[m] += e.K1 * uk * vk + e.K2_kl * uk * vmc + e.K2_lk * umc * vk + e.K3 * umc * vmc;
    }
  }
  return out;
}

// 2 omega [invLapUps |f|^2 + f invLapUps(f + conj f) - mean] via the three
// Fourier-product expansions, mode by mode.
SpectralField quadratic_source(const SpectralField& f, const ModelParams& p) {
  SpectralField out;
  const std::vector<Lattice> keys = closed_support(f);
  for (const Lattice& k : keys) {
    for (const Lattice& l : keys) {
      const Lattice m = add(k, l);
      if (is_zero(m)) continue;
      const cplx fk = coeff(f, k), fl = coeff(f, l);
      const cplx fmkc = std::conj(coeff(f, neg(k)));
      const cplx fmlc = std::conj(coeff(f, neg(l)));
      const double am = lattice_asym(m, p.kappa1, p.kappa2);
      const double ak = lattice_asym(k, p.kappa1, p.kappa2);
      const double al = lattice_asym(l, p.kappa1, p.kappa2);
      cplx t = 0.5 * am * (fk * fmlc + fl * fmkc);
      t += 0.5 * (ak + al) * fk * fl;
      t += 0.5 * (al * fk * fmlc + ak * fl * fmkc);
      out[m] += 2.0 * p.omega * t;
    }
  }
  return out;
}

SpectralField drop_mean(const SpectralField& f) {
  SpectralField g = f;
  const auto it = g.find(Lattice{0, 0});
  if (it != g.end()) {
    if (std::abs(it->second) != 0.0) throw ZeroMean("sample field must be mean-free");
    g.erase(it);
  }
  return g;
}

}  // namespace

double lattice_asym(Lattice k, double kappa1, double kappa2) {
  if (is_zero(k)) throw ConstraintViolation("a(k) undefined at k = 0");
  return dsym_of(k, kappa1, kappa2) / norm2_of(k, kappa1, kappa2);
}

double lattice_B(Lattice k, double kappa1, double kappa2, double omega) {
  return 2.0 * omega * omega * lattice_asym(k, kappa1, kappa2);
}

NormalFormEntry assemble_and_solve(Lattice k, Lattice ell, const ModelParams& p) {
  check_model(p);
  if (is_zero(k) || is_zero(ell) || is_zero(add(k, ell)))
    throw ConstraintViolation("lattice pair needs k, ell, k+ell nonzero: " + pair_label(k, ell));
  const PairCoeffs c = pair_coeffs(k, ell, p);
  const SolveOut s = solve_realified(k, ell, c, p.omega);
  if (!(s.cond <= kSingularCond)) {
    std::ostringstream os;
    os << "homological system singular at " << pair_label(k, ell) << ": cond=" << s.cond
       << ", null-space dimension " << std::max(s.null_dim, 1);
    throw SingularSystem(os.str());
  }
  NormalFormEntry e;
  e.k = k;
  e.ell = ell;
  e.K1 = cplx(s.X(0), s.X(1));
  e.K2_kl = cplx(s.X(2), s.X(3));
  e.K2_lk = cplx(s.X(4), s.X(5));
  e.K3 = cplx(s.X(6), s.X(7));
  e.residual = s.residual;
  e.cond = s.cond;
  e.near_singular = s.cond > kNearSingularCond;
  e.sigma = c.sig;
  e.sigma1 = c.s1;
  e.sigma2 = c.s2;
  e.sigma3 = c.s3;
  e.sigma4 = c.s4;
  e.B_k = c.Bk;
  e.B_ell = c.Bl;
  e.B_klsum = c.Bkl;
  return e;
}

LatticeScan lattice_scan(const ModelParams& p, int kmax, int threads) {
  check_model(p);
  if (kmax < 4) throw ConstraintViolation("lattice_scan needs kmax >= 4");
  std::vector<Lattice> modes;
  modes.reserve(sq(2 * kmax + 1) - 1);
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = -kmax; b <= kmax; ++b)
      if (a != 0 || b != 0) modes.push_back({a, b});
  std::vector<EntryKey> pairs;
  pairs.reserve(modes.size() * modes.size());
  for (const Lattice& k : modes)
    for (const Lattice& l : modes)
      if (!is_zero(add(k, l))) pairs.push_back({k, l});

  LatticeScan scan;
  scan.kmax = kmax;
  scan.records.resize(pairs.size());
  parallel_for(pairs.size(), resolve_threads(threads), [&](std::size_t i) {
    const auto& [k, l] = pairs[i];
    PairRecord r;
    r.k = k;
    r.ell = l;
    const PairCoeffs c = pair_coeffs(k, l, p);
    const SolveOut s = solve_realified(k, l, c, p.omega);
    r.cond = s.cond;
    if (!(s.cond <= kSingularCond)) {
      r.singular = true;
      r.null_dim = std::max(s.null_dim, 1);
      r.residual = std::numeric_limits<double>::quiet_NaN();
      r.max_coeff = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.residual = s.residual;
      r.max_coeff = std::max({std::hypot(s.X(0), s.X(1)), std::hypot(s.X(2), s.X(3)),
                              std::hypot(s.X(4), s.X(5)), std::hypot(s.X(6), s.X(7))});
      r.near_singular = s.cond > kNearSingularCond;
    }
    scan.records[i] = r;
  });

  for (const PairRecord& r : scan.records) {
    if (r.singular) {
      scan.singular_pairs.push_back({r.k, r.ell});
      continue;
    }
    scan.max_cond = std::max(scan.max_cond, r.cond);
    if (r.near_singular)
      scan.near_singular_pairs.push_back({r.k, r.ell});
    else
      scan.max_residual = std::max(scan.max_residual, r.residual);
  }

  scan.decay_fits.push_back(fit_ray(p, kmax, {1, 0}, {0, 0}, {0, 1}));
  scan.decay_fits.push_back(fit_ray(p, kmax, {0, 1}, {0, 0}, {1, 0}));
  scan.decay_fits.push_back(fit_ray(p, kmax, {1, 1}, {0, 0}, {1, 0}));
  scan.decay_fits.push_back(fit_ray(p, kmax, {1, 0}, {0, 1}, {0, 0}));
  scan.decay_fits.push_back(fit_ray(p, kmax, {1, 1}, {1, -1}, {0, 0}));
  return scan;
}

EntryTable solve_entries_for(const SpectralField& f, const ModelParams& p) {
  const SpectralField g = drop_mean(f);
  EntryTable table;
  const std::vector<Lattice> keys = closed_support(g);
  for (const Lattice& a : keys)
    for (const Lattice& b : keys) {
      if (is_zero(add(a, b))) continue;
      table.emplace(EntryKey{a, b}, assemble_and_solve(a, b, p));
    }
  return table;
}

SpectralField spectral_modes(const TorusField& f, double rel_cutoff) {
  const std::vector<cplx> hat = to_fourier(f);
  const int nx = f.grid.nx, ny = f.grid.ny;
  const double norm = 1.0 / (static_cast<double>(nx) * ny);
  double peak = 0.0;
  for (const cplx& v : hat) peak = std::max(peak, std::abs(v));
  peak *= norm;
  SpectralField out;
  if (peak == 0.0) return out;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const cplx c = hat[static_cast<size_t>(iy) * nx + ix] * norm;
      if (std::abs(c) <= rel_cutoff * peak) continue;
      const Lattice k{TorusGrid::mode_index(ix, nx), TorusGrid::mode_index(iy, ny)};
      if (is_zero(k)) throw ZeroMean("sample field must be mean-free");
      out[k] = c;
    }
  return out;
}

double homological_verify(const EntryTable& table, const SpectralField& f, const ModelParams& p) {
  check_model(p);
  const SpectralField g = drop_mean(f);
  const SpectralField Kff = bilinear_K(table, g, g);
  const SpectralField Lf = apply_linear(g, p);
  const SpectralField KLf_f = bilinear_K(table, Lf, g);
  const SpectralField Kf_Lf = bilinear_K(table, g, Lf);
  const SpectralField LKff = apply_linear(Kff, p);
  const SpectralField rhs = quadratic_source(g, p);

  std::set<Lattice> all;
  for (const auto* s : {&LKff, &KLf_f, &Kf_Lf, &rhs})
    for (const auto& [k, v] : *s) all.insert(k);
  double scale = 0.0;
  for (const auto& [k, v] : rhs) scale = std::max(scale, std::abs(v));
  const cplx iu(0.0, 1.0);
  double defect = 0.0;
  for (const Lattice& m : all) {
    const cplx lhs = iu * coeff(LKff, m) - iu * coeff(KLf_f, m) - iu * coeff(Kf_Lf, m);
    defect = std::max(defect, std::abs(lhs - coeff(rhs, m)));
  }
  return defect / std::max(scale, 1e-300);
}

double homological_verify(const EntryTable& table, const TorusField& f_sample,
                          const ModelParams& p) {
  if (f_sample.grid.kappa1 != p.kappa1 || f_sample.grid.kappa2 != p.kappa2)
    throw ConstraintViolation("sample grid wavenumbers must match the model parameters");
  return homological_verify(table, spectral_modes(f_sample), p);
}

}  // namespace dsii
