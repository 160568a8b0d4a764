#include <doctest.h>

#include <cmath>
#include <complex>

#include "dsii/errors.hpp"
#include "dsii/grid.hpp"
#include "dsii/normalform.hpp"
#include "dsii/params.hpp"

using namespace dsii;

namespace {

const double kOmega = std::sqrt(2.0) / 2.0 + 0.11;
const double kKappa1 = 1.0;
const double kKappa2 = std::sqrt(2.0);

ModelParams model(double epsilon, double alpha) {
  ModelParams p;
  p.omega = kOmega;
  p.kappa1 = kKappa1;
  p.kappa2 = kKappa2;
  p.epsilon = epsilon;
  p.alpha_damp = alpha;
  return p;
}

double entry_distance(const NormalFormEntry& a, const NormalFormEntry& b) {
  double d = std::abs(a.K1 - b.K1);
  d = std::max(d, std::abs(a.K2_kl - b.K2_kl));
  d = std::max(d, std::abs(a.K2_lk - b.K2_lk));
  d = std::max(d, std::abs(a.K3 - b.K3));
  return d;
}

}  // namespace

TEST_CASE("coupling coefficients follow the closed forms") {
  CHECK(lattice_asym({1, 0}, kKappa1, kKappa2) == doctest::Approx(1.0));
  CHECK(lattice_asym({0, 1}, kKappa1, kKappa2) == doctest::Approx(-1.0));
  const double num = kKappa1 * kKappa1 - kKappa2 * kKappa2;
  const double den = kKappa1 * kKappa1 + kKappa2 * kKappa2;
  CHECK(lattice_asym({1, 1}, kKappa1, kKappa2) == doctest::Approx(num / den));
  CHECK(lattice_B({1, 1}, kKappa1, kKappa2, kOmega) ==
        doctest::Approx(2.0 * kOmega * kOmega * num / den));
  // symmetric-norm diagonal: kappa2^2 k2^2 = kappa1^2 k1^2 has measure zero on
  // the integer lattice for this kappa ratio, but the closed form is still 0
  // only at exact equality; spot-check antisymmetry instead
  CHECK(lattice_asym({2, 1}, kKappa1, kKappa2) ==
        doctest::Approx(-lattice_asym({1, 2}, kKappa2, kKappa1)));
}

TEST_CASE("resonant pair reproduces the frozen unperturbed solution") {
  const NormalFormEntry e = assemble_and_solve({1, 0}, {0, 1}, model(0.0, 0.0));
  // frozen from an independent dense-solver evaluation of the same system
  CHECK(e.K2_kl.real() == doctest::Approx(-2.4809977968931842).epsilon(1e-12));
  CHECK(std::abs(e.K2_kl.imag()) < 1e-13);
  CHECK(std::abs(e.K2_lk - e.K2_kl) < 1e-12);
  CHECK(std::abs(e.K1) < 1e-13);
  CHECK(std::abs(e.K3) < 1e-13);
  CHECK(e.cond == doctest::Approx(35.4303).epsilon(1e-3));
  CHECK(e.residual < 1e-13);
  CHECK(!e.near_singular);
  CHECK(e.B_k == doctest::Approx(2.0 * kOmega * kOmega));
  CHECK(e.B_ell == doctest::Approx(-2.0 * kOmega * kOmega));
}

TEST_CASE("swapping the pair mirrors the mixed coefficients") {
  const ModelParams p = model(0.01, 5.645);
  const NormalFormEntry a = assemble_and_solve({2, 1}, {1, 3}, p);
  const NormalFormEntry b = assemble_and_solve({1, 3}, {2, 1}, p);
  CHECK(std::abs(a.K1 - b.K1) < 1e-13);
  CHECK(std::abs(a.K3 - b.K3) < 1e-13);
  CHECK(std::abs(a.K2_kl - b.K2_lk) < 1e-13);
  CHECK(std::abs(a.K2_lk - b.K2_kl) < 1e-13);
  CHECK(a.residual < 1e-12);
  CHECK(b.residual < 1e-12);
}

TEST_CASE("diagonal pair collapses onto the merged reduced system") {
  const NormalFormEntry e = assemble_and_solve({1, 1}, {1, 1}, model(0.01, 5.645));
  CHECK(e.K2_kl == e.K2_lk);  // one merged unknown reported twice
  CHECK(e.residual < 1e-12);
  CHECK(e.cond < 100.0);
}

TEST_CASE("degenerate lattice arguments are rejected") {
  const ModelParams p = model(0.01, 5.645);
  CHECK_THROWS_AS(assemble_and_solve({0, 0}, {0, 1}, p), ConstraintViolation);
  CHECK_THROWS_AS(assemble_and_solve({1, 0}, {0, 0}, p), ConstraintViolation);
  CHECK_THROWS_AS(assemble_and_solve({1, 0}, {-1, 0}, p), ConstraintViolation);
}

TEST_CASE("entries respond linearly to small epsilon") {
  const NormalFormEntry e0 = assemble_and_solve({1, 0}, {0, 1}, model(0.0, 5.645));
  const double d3 = entry_distance(assemble_and_solve({1, 0}, {0, 1}, model(1e-3, 5.645)), e0);
  const double d4 = entry_distance(assemble_and_solve({1, 0}, {0, 1}, model(1e-4, 5.645)), e0);
  CHECK(d4 > 0.0);
  CHECK(d3 / d4 == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("lattice scan reports clean solves across the resolved window") {
  const LatticeScan scan = lattice_scan(model(0.01, 5.645), 4);
  CHECK(scan.kmax == 4);
  CHECK(scan.records.size() > 100);
  CHECK(scan.singular_pairs.empty());
  CHECK(scan.near_singular_pairs.empty());
  CHECK(scan.max_residual < 1e-12);
  CHECK(scan.max_cond > 1.0);
  REQUIRE(!scan.decay_fits.empty());
  for (const RayFit& f : scan.decay_fits) {
    CHECK(f.points >= 3);
    CHECK(f.exponent < 0.0);  // coefficients decay along every scanned ray
  }
}

TEST_CASE("scan is deterministic and thread-count independent") {
  const LatticeScan a = lattice_scan(model(0.01, 5.645), 4, 1);
  const LatticeScan b = lattice_scan(model(0.01, 5.645), 4, 4);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].k == b.records[i].k);
    CHECK(a.records[i].ell == b.records[i].ell);
    CHECK(a.records[i].max_coeff == b.records[i].max_coeff);  // bitwise
    CHECK(a.records[i].cond == b.records[i].cond);
  }
}

TEST_CASE("spectral extraction inverts a synthetic mode set") {
  const TorusGrid g{32, 32, kKappa1, kKappa2};
  TorusField f(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double x = g.x(ix), y = g.y(iy);
      f.at(ix, iy) = 0.5 * std::cos(kKappa1 * x) + cplx(0.0, 0.25) * std::cos(2.0 * kKappa2 * y);
    }
  const SpectralField modes = spectral_modes(f);
  REQUIRE(modes.size() == 4);
  CHECK(std::abs(modes.at({1, 0}) - 0.25) < 1e-13);
  CHECK(std::abs(modes.at({-1, 0}) - 0.25) < 1e-13);
  CHECK(std::abs(modes.at({0, 2}) - cplx(0.0, 0.125)) < 1e-13);
  CHECK(std::abs(modes.at({0, -2}) - cplx(0.0, 0.125)) < 1e-13);
}

TEST_CASE("solved tables cancel the quadratic source term") {
  for (double eps : {0.0, 0.01}) {
    const ModelParams p = model(eps, 5.645);

    const SpectralField single{{{1, 0}, cplx(0.35, 0.1)}, {{-1, 0}, cplx(0.35, -0.1)}};
    CHECK(homological_verify(solve_entries_for(single, p), single, p) < 1e-10);

    const SpectralField two{{{1, 0}, cplx(0.5, 0.0)},
                            {{-1, 0}, cplx(0.5, 0.0)},
                            {{0, 1}, cplx(0.0, 0.3)},
                            {{0, -1}, cplx(0.2, 0.0)}};
    CHECK(homological_verify(solve_entries_for(two, p), two, p) < 1e-10);
  }
}

TEST_CASE("grid-sampled verification requires matching wavenumbers") {
  const ModelParams p = model(0.01, 5.645);
  const TorusGrid g{32, 32, kKappa1, kKappa2};
  TorusField f(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      f.at(ix, iy) = 0.1 * std::cos(kKappa1 * g.x(ix)) * std::cos(kKappa2 * g.y(iy));
  const SpectralField modes = spectral_modes(f);
  CHECK(homological_verify(solve_entries_for(modes, p), f, p) < 1e-10);

  const TorusGrid bad{32, 32, kKappa1 * 1.5, kKappa2};
  TorusField fb(bad);
  for (cplx& v : fb.v) v = 0.0;
  fb.at(1, 0) = 1.0;
  CHECK_THROWS_AS(homological_verify(EntryTable{}, fb, p), ConstraintViolation);
}

TEST_CASE("missing table entries and mean components are reported") {
  const ModelParams p = model(0.01, 5.645);
  const SpectralField f{{{1, 0}, cplx(0.5, 0.0)}, {{-1, 0}, cplx(0.5, 0.0)}};
  CHECK_THROWS_AS(homological_verify(EntryTable{}, f, p), MissingEntry);

  const SpectralField with_mean{{{0, 0}, cplx(0.1, 0.0)},
                                {{1, 0}, cplx(0.5, 0.0)},
                                {{-1, 0}, cplx(0.5, 0.0)}};
  CHECK_THROWS_AS(homological_verify(solve_entries_for(f, p), with_mean, p), ZeroMean);
}
