#include "dsii/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "dsii/errors.hpp"

namespace dsii {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Plans are created once per (ny, nx, sign) with FFTW_UNALIGNED so they can
// execute on any buffer; creation is serialized, execution is reentrant.
class PlanCache {
 public:
  static fftw_plan get(int ny, int nx, int sign) {
    static PlanCache cache;
    std::lock_guard<std::mutex> lock(cache.mu_);
    auto key = std::tuple{ny, nx, sign};
    auto it = cache.plans_.find(key);
    if (it != cache.plans_.end()) return it->second;
    std::vector<cplx> probe(static_cast<size_t>(nx) * ny);
    auto* p = reinterpret_cast<fftw_complex*>(probe.data());
    fftw_plan plan = fftw_plan_dft_2d(ny, nx, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};
}  // namespace

double TorusGrid::period_x() const { return kTwoPi / kappa1; }
double TorusGrid::period_y() const { return kTwoPi / kappa2; }
double TorusGrid::x(int ix) const { return period_x() * ix / nx; }
double TorusGrid::y(int iy) const { return period_y() * iy / ny; }
double TorusGrid::cell_area() const { return (period_x() / nx) * (period_y() / ny); }

int TorusGrid::mode_index(int i, int n) { return (i <= n / 2 - (n % 2 == 0 ? 1 : 0)) ? i : i - n; }

double TorusGrid::kx(int ix) const { return kappa1 * mode_index(ix, nx); }
double TorusGrid::ky(int iy) const { return kappa2 * mode_index(iy, ny); }

std::vector<cplx> to_fourier(const TorusField& f) {
  std::vector<cplx> out(f.v);
  fftw_plan plan = PlanCache::get(f.grid.ny, f.grid.nx, FFTW_FORWARD);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(out.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

TorusField to_physical(const TorusGrid& g, const std::vector<cplx>& coeffs) {
  TorusField out(g);
  out.v = coeffs;
  fftw_plan plan = PlanCache::get(g.ny, g.nx, FFTW_BACKWARD);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(out.v.data()),
                   reinterpret_cast<fftw_complex*>(out.v.data()));
  double scale = 1.0 / (static_cast<double>(g.nx) * g.ny);
  for (auto& z : out.v) z *= scale;
  return out;
}

TorusField apply_operator(const TorusField& f, Op op) {
  const TorusGrid& g = f.grid;
  std::vector<cplx> c = to_fourier(f);
  for (int iy = 0; iy < g.ny; ++iy) {
    double ky = g.ky(iy);
    for (int ix = 0; ix < g.nx; ++ix) {
      double kx = g.kx(ix);
      cplx sym = 0.0;
      switch (op) {
        case Op::Upsilon:
          sym = -(kx * kx - ky * ky);
          break;
        case Op::Laplacian:
          sym = -(kx * kx + ky * ky);
          break;
        case Op::InvLaplacianUpsilon: {
          double n2 = kx * kx + ky * ky;
          sym = (n2 > 0.0) ? (kx * kx - ky * ky) / n2 : 0.0;
          break;
        }
        case Op::Dx:
          sym = cplx(0.0, kx);
          break;
        case Op::Dy:
          sym = cplx(0.0, ky);
          break;
      }
      c[static_cast<size_t>(iy) * g.nx + ix] *= sym;
    }
  }
  TorusField out = to_physical(g, c);
  // Dx/Dy flip the parity along their axis; the multiplier ops preserve it.
  out.even_x = f.even_x && op != Op::Dx;
  out.even_y = f.even_y && op != Op::Dy;
  return out;
}

cplx mean(const TorusField& f) {
  // Compensated accumulation keeps the result independent of traversal chunking.
  cplx s = 0.0, comp = 0.0;
  for (const cplx& z : f.v) {
    cplx y = z - comp;
    cplx t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s / static_cast<double>(f.v.size());
}

double norm_l2(const TorusField& f) {
  double s = 0.0, comp = 0.0;
  for (const cplx& z : f.v) {
    double y = std::norm(z) - comp;
    double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return std::sqrt(s);
}

double max_abs(const TorusField& f) {
  double m = 0.0;
  for (const cplx& z : f.v) m = std::max(m, std::abs(z));
  return m;
}

TorusField solve_u(const TorusField& q) {
  const TorusGrid& g = q.grid;
  TorusField a2(g);
  for (size_t i = 0; i < q.v.size(); ++i) a2.v[i] = std::norm(q.v[i]);
  std::vector<cplx> c = to_fourier(a2);
  for (int iy = 0; iy < g.ny; ++iy) {
    double ky = g.ky(iy);
    for (int ix = 0; ix < g.nx; ++ix) {
      double kx = g.kx(ix);
      double n2 = kx * kx + ky * ky;
      size_t i = static_cast<size_t>(iy) * g.nx + ix;
      // u_hat = -4 (i ky) |q|^2_hat / (-n2), mean mode zeroed
      c[i] = (n2 > 0.0) ? c[i] * (cplx(0.0, 4.0 * ky) / n2) : cplx(0.0);
    }
  }
  TorusField u = to_physical(g, c);
  for (auto& z : u.v) z = cplx(z.real(), 0.0);  // u is real by construction
  return u;
}

TorusField dsii_rhs(const TorusField& q, double omega, double eps, double alpha, double beta) {
  const TorusGrid& g = q.grid;
  TorusField a2(g);
  for (size_t i = 0; i < q.v.size(); ++i) a2.v[i] = std::norm(q.v[i]);
  double mean_a2 = mean(a2).real();
  TorusField pot = apply_operator(a2, Op::InvLaplacianUpsilon);
  TorusField ups = apply_operator(q, Op::Upsilon);
  TorusField out(g);
  if (eps != 0.0) {
    TorusField lap = apply_operator(q, Op::Laplacian);
    for (size_t i = 0; i < q.v.size(); ++i) {
      cplx bracket = ups.v[i] + 2.0 * (pot.v[i].real() + mean_a2 - omega * omega) * q.v[i];
      out.v[i] = cplx(0.0, -1.0) * bracket + eps * (lap.v[i] - alpha * q.v[i] + beta);
    }
  } else {
    for (size_t i = 0; i < q.v.size(); ++i) {
      cplx bracket = ups.v[i] + 2.0 * (pot.v[i].real() + mean_a2 - omega * omega) * q.v[i];
      out.v[i] = cplx(0.0, -1.0) * bracket;
    }
  }
  out.even_x = q.even_x;
  out.even_y = q.even_y;
  return out;
}

namespace {
double parity_defect(const TorusField& f, bool along_x) {
  const TorusGrid& g = f.grid;
  double num = 0.0, den = 0.0;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      int jx = along_x ? (g.nx - ix) % g.nx : ix;
      int jy = along_x ? iy : (g.ny - iy) % g.ny;
      num = std::max(num, std::abs(f.at(ix, iy) - f.at(jx, jy)));
      den = std::max(den, std::abs(f.at(ix, iy)));
    }
  }
  return den > 0.0 ? num / den : 0.0;
}
}  // namespace

double parity_defect_x(const TorusField& f) { return parity_defect(f, true); }
double parity_defect_y(const TorusField& f) { return parity_defect(f, false); }

}  // namespace dsii
