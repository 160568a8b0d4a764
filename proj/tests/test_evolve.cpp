#include <doctest.h>

#include <cmath>

#include "dsii/darboux.hpp"
#include "dsii/errors.hpp"
#include "dsii/evolve.hpp"
#include "dsii/grid.hpp"
#include "dsii/params.hpp"

using namespace dsii;

namespace {

const double kPi = 3.14159265358979323846;
const double kOmega = std::sqrt(2.0) / 2.0 + 0.11;
const double kKappa1 = 1.0;
const double kKappa2 = std::sqrt(2.0);
const double kAlpha = 5.645;
const double kBeta = 11.336;

TorusGrid ref_grid() { return {32, 32, kKappa1, kKappa2}; }

double rel_l2_diff(const TorusField& a, const TorusField& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) {
    num += std::norm(a.v[i] - b.v[i]);
    den += std::norm(b.v[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("resonant plane wave is a fixed point of the unperturbed flow") {
  const ModelParams p0 =
      validate_params(kOmega, kAlpha, kBeta, 0.0, kKappa1, kKappa2, false);
  const TorusGrid g = ref_grid();
  TorusField q0(g);
  for (cplx& v : q0.v) v = kOmega;
  q0.even_x = q0.even_y = true;

  for (Scheme s : {Scheme::ExponentialRk4, Scheme::StrangSplit}) {
    const EvolutionResult r = integrate(q0, p0, {1e-3, s, 0.2, 1000});
    CHECK(!r.blew_up);
    double err = 0.0;
    for (const cplx& v : r.snapshots.back().v) err = std::max(err, std::abs(v - kOmega));
    CHECK(err / kOmega < 1e-12);
  }
}

TEST_CASE("snapshot bookkeeping covers start, stride, and final step") {
  const ModelParams p0 =
      validate_params(kOmega, kAlpha, kBeta, 0.0, kKappa1, kKappa2, false);
  const TorusGrid g = ref_grid();
  TorusField q0(g);
  for (cplx& v : q0.v) v = kOmega;

  const EvolutionResult r = integrate(q0, p0, {1e-3, Scheme::ExponentialRk4, 0.01, 4});
  // 10 steps, stride 4: t = 0, 0.004, 0.008, 0.010
  REQUIRE(r.times.size() == 4);
  CHECK(r.times.front() == doctest::Approx(0.0));
  CHECK(r.times[1] == doctest::Approx(0.004));
  CHECK(r.times.back() == doctest::Approx(0.01));
  CHECK(r.snapshots.size() == r.times.size());
}

TEST_CASE("integrator tracks the analytic orbit") {
  const DarbouxParams P = derive_params(kOmega, kKappa1, kKappa2, 0.0, 1.1, kPi / 2.0);
  const ModelParams p0 =
      validate_params(kOmega, kAlpha, kBeta, 0.0, kKappa1, kKappa2, false);
  const TorusGrid g = ref_grid();
  const TorusField start = homoclinic_Q(P, -1.0, g);
  const TorusField target = homoclinic_Q(P, -0.8, g);

  const EvolutionResult re = integrate(start, p0, {1e-3, Scheme::ExponentialRk4, 0.2, 1000});
  CHECK(rel_l2_diff(re.snapshots.back(), target) < 1e-5);

  const EvolutionResult rs = integrate(start, p0, {2e-4, Scheme::StrangSplit, 0.2, 1000});
  CHECK(rel_l2_diff(rs.snapshots.back(), target) < 1e-3);

  // scheme self-consistency under step halving
  const EvolutionResult re2 = integrate(start, p0, {5e-4, Scheme::ExponentialRk4, 0.2, 2000});
  CHECK(rel_l2_diff(re.snapshots.back(), re2.snapshots.back()) < 1e-7);
}

TEST_CASE("parity survives the perturbed evolution") {
  const DarbouxParams P = derive_params(kOmega, kKappa1, kKappa2, 0.0, 1.1, kPi / 2.0);
  const ModelParams p = validate_params(kOmega, kAlpha, kBeta, 0.01, kKappa1, kKappa2);
  const TorusField start = homoclinic_Q(P, -0.5, ref_grid());
  const EvolutionResult r = integrate(start, p, {1e-3, Scheme::ExponentialRk4, 0.2, 1000});
  CHECK(parity_defect_x(r.snapshots.back()) < 1e-10);
  CHECK(parity_defect_y(r.snapshots.back()) < 1e-10);
}

TEST_CASE("runaway relative growth is reported as blow-up, not an exception") {
  // the limit is relative to the initial norm: a tiny seed pumped toward the
  // O(1) attractor by the beta forcing must trip it
  const ModelParams p = validate_params(kOmega, kAlpha, kBeta, 0.01, kKappa1, kKappa2);
  TorusField q0(ref_grid());
  for (cplx& v : q0.v) v = 1e-8;
  const EvolutionResult r = integrate(q0, p, {1e-3, Scheme::ExponentialRk4, 0.5, 50});
  CHECK(r.blew_up);
  CHECK(r.blowup_time > 0.0);
  CHECK(r.blowup_time < 0.5);
  CHECK(r.times.size() == r.snapshots.size());
}

TEST_CASE("measured growth of the resonant mode matches the closed form") {
  const ModelParams p0 =
      validate_params(kOmega, kAlpha, kBeta, 0.0, kKappa1, kKappa2, false);
  const TorusGrid g = ref_grid();
  const GrowthFit fit = measure_growth(p0, 1, 0, 1e-7, g);
  const double lam0 = std::sqrt(kOmega * kOmega - kKappa1 * kKappa1 / 4.0);
  CHECK(fit.exponent == doctest::Approx(2.0 * kKappa1 * lam0).epsilon(0.01));

  CHECK_THROWS_AS(measure_growth(p0, 0, 0, 1e-7, g), ConstraintViolation);
  CHECK_THROWS_AS(measure_growth(p0, 1, 0, 1e-3, g), ConstraintViolation);
}
