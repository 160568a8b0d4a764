#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "dsii/grid.hpp"

using namespace dsii;

namespace {

const double kPi = 3.14159265358979323846;

TorusGrid ref_grid(int n = 32) { return {n, n, 1.0, std::sqrt(2.0)}; }

TorusField random_field(const TorusGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TorusField f(g);
  for (cplx& v : f.v) v = cplx(u(rng), u(rng));
  return f;
}

double max_diff(const TorusField& a, const TorusField& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace

TEST_CASE("grid geometry") {
  const TorusGrid g = ref_grid();
  CHECK(g.period_x() == doctest::Approx(2.0 * kPi));
  CHECK(g.period_y() == doctest::Approx(2.0 * kPi / std::sqrt(2.0)));
  CHECK(g.x(0) == 0.0);
  CHECK(g.x(1) == doctest::Approx(g.period_x() / g.nx));
  CHECK(TorusGrid::mode_index(0, 32) == 0);
  CHECK(TorusGrid::mode_index(1, 32) == 1);
  CHECK(TorusGrid::mode_index(31, 32) == -1);
  CHECK(TorusGrid::mode_index(16, 32) == -16);
  CHECK(g.kx(1) == doctest::Approx(g.kappa1));
  CHECK(g.ky(g.ny - 1) == doctest::Approx(-g.kappa2));
}

TEST_CASE("fourier round trip is exact to machine precision") {
  const TorusGrid g = ref_grid();
  const TorusField f = random_field(g, 7);
  const TorusField back = to_physical(g, to_fourier(f));
  CHECK(max_diff(f, back) < 1e-13);
}

TEST_CASE("forward transform indexes modes as exp(i(kx x + ky y))") {
  const TorusGrid g = ref_grid();
  TorusField f(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      f.at(ix, iy) = std::exp(cplx(0.0, g.kappa1 * g.x(ix) - 2.0 * g.kappa2 * g.y(iy)));
  // forward is the plain unnormalized sum: the lone mode lands at its bin with
  // weight nx*ny, and the normalized inverse returns it to amplitude one
  const std::vector<cplx> hat = to_fourier(f);
  const double n = static_cast<double>(g.nx) * g.ny;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx c = hat[static_cast<size_t>(iy) * g.nx + ix];
      const bool hit = (TorusGrid::mode_index(ix, g.nx) == 1 &&
                        TorusGrid::mode_index(iy, g.ny) == -2);
      CHECK(std::abs(c - (hit ? n : 0.0)) < 1e-9);
    }
}

TEST_CASE("derivative and symbol operators act on analytic fields") {
  const TorusGrid g = ref_grid();
  TorusField f(g), dx_ref(g), ups_ref(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const double x = g.x(ix), y = g.y(iy);
      f.at(ix, iy) = std::cos(g.kappa1 * x) * std::cos(g.kappa2 * y);
      dx_ref.at(ix, iy) = -g.kappa1 * std::sin(g.kappa1 * x) * std::cos(g.kappa2 * y);
      ups_ref.at(ix, iy) = (-g.kappa1 * g.kappa1 + g.kappa2 * g.kappa2) * f.at(ix, iy);
    }
  CHECK(max_diff(apply_operator(f, Op::Dx), dx_ref) < 1e-12);
  CHECK(max_diff(apply_operator(f, Op::Upsilon), ups_ref) < 1e-12);

  // every mode of cos*cos has |xi1| = kappa1, |xi2| = kappa2, so the nonlocal
  // symbol reduces to one ratio
  const double a = (g.kappa1 * g.kappa1 - g.kappa2 * g.kappa2) /
                   (g.kappa1 * g.kappa1 + g.kappa2 * g.kappa2);
  TorusField nl_ref(g);
  for (size_t i = 0; i < f.v.size(); ++i) nl_ref.v[i] = a * f.v[i];
  CHECK(max_diff(apply_operator(f, Op::InvLaplacianUpsilon), nl_ref) < 1e-12);
}

TEST_CASE("nonlocal symbol zeroes the mean") {
  const TorusGrid g = ref_grid();
  TorusField f = random_field(g, 11);
  const TorusField out = apply_operator(f, Op::InvLaplacianUpsilon);
  CHECK(std::abs(mean(out)) < 1e-13);
}

TEST_CASE("mean and norms") {
  const TorusGrid g = ref_grid();
  TorusField f(g);
  for (cplx& v : f.v) v = cplx(2.0, -1.0);
  CHECK(std::abs(mean(f) - cplx(2.0, -1.0)) < 1e-14);
  CHECK(norm_l2(f) == doctest::Approx(std::sqrt(5.0 * f.v.size())));
  f.at(3, 5) = cplx(10.0, 0.0);
  CHECK(max_abs(f) == doctest::Approx(10.0));
}

TEST_CASE("auxiliary potential solves Lap u = -4 d/dy |q|^2") {
  const TorusGrid g = ref_grid();
  TorusField q(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      q.at(ix, iy) = 0.8 + 0.2 * std::cos(g.kappa1 * g.x(ix)) * std::cos(g.kappa2 * g.y(iy)) +
                     cplx(0.0, 0.1) * std::cos(g.kappa2 * g.y(iy));
  const TorusField u = solve_u(q);
  for (const cplx& v : u.v) CHECK(std::abs(v.imag()) < 1e-12);
  CHECK(std::abs(mean(u)) < 1e-12);

  TorusField q2(g);
  for (size_t i = 0; i < q.v.size(); ++i) q2.v[i] = std::norm(q.v[i]);
  const TorusField lhs = apply_operator(u, Op::Laplacian);
  const TorusField rhs = apply_operator(q2, Op::Dy);
  double defect = 0.0;
  for (size_t i = 0; i < lhs.v.size(); ++i)
    defect = std::max(defect, std::abs(lhs.v[i] + 4.0 * rhs.v[i]));
  CHECK(defect < 1e-10);
}

TEST_CASE("rhs vanishes on the resonant plane wave and picks up the forcing") {
  const TorusGrid g = ref_grid();
  const double omega = 0.8171067811865475;
  TorusField q(g);
  for (cplx& v : q.v) v = omega;

  const TorusField r0 = dsii_rhs(q, omega, 0.0, 0.0, 0.0);
  CHECK(max_abs(r0) < 1e-13);

  const double eps = 0.01, alpha = 5.645, beta = 11.336;
  const TorusField r1 = dsii_rhs(q, omega, eps, alpha, beta);
  const cplx expected = eps * (beta - alpha * omega);
  double defect = 0.0;
  for (const cplx& v : r1.v) defect = std::max(defect, std::abs(v - expected));
  CHECK(defect < 1e-13);
}

TEST_CASE("parity defects detect broken symmetry") {
  const TorusGrid g = ref_grid();
  TorusField f(g);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      f.at(ix, iy) = std::cos(g.kappa1 * g.x(ix)) * std::cos(2.0 * g.kappa2 * g.y(iy));
  CHECK(parity_defect_x(f) < 1e-14);
  CHECK(parity_defect_y(f) < 1e-14);

  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) f.at(ix, iy) += 0.1 * std::sin(g.kappa1 * g.x(ix));
  CHECK(parity_defect_x(f) > 1e-3);
  CHECK(parity_defect_y(f) < 1e-14);
}
