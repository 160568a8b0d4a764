#pragma once

#include <complex>
#include <vector>

namespace dsii {

using cplx = std::complex<double>;

// Periodic rectangle [0, 2pi/kappa1) x [0, 2pi/kappa2), uniform samples,
// node (0,0) at the origin. Row-major storage: index = iy*nx + ix.
struct TorusGrid {
  int nx = 64;
  int ny = 64;
  double kappa1 = 1.0;
  double kappa2 = 1.0;

  double period_x() const;
  double period_y() const;
  double x(int ix) const;
  double y(int iy) const;
  double cell_area() const;
  // Integer mode for an FFT bin (standard wrap-around ordering).
  static int mode_index(int i, int n);
  // Physical wavenumbers kappa*mode of an FFT bin.
  double kx(int ix) const;
  double ky(int iy) const;
  bool operator==(const TorusGrid&) const = default;
};

struct TorusField {
  TorusGrid grid;
  std::vector<cplx> v;
  bool even_x = false;
  bool even_y = false;

  TorusField() = default;
  explicit TorusField(TorusGrid g) : grid(g), v(static_cast<size_t>(g.nx) * g.ny) {}
  cplx& at(int ix, int iy) { return v[static_cast<size_t>(iy) * grid.nx + ix]; }
  const cplx& at(int ix, int iy) const { return v[static_cast<size_t>(iy) * grid.nx + ix]; }
  size_t size() const { return v.size(); }
};

// Fourier transforms (FFTW backed, plan cache internal, thread-safe).
// Forward fills coefficients of exp(i(kx*x + ky*y)); inverse is normalized.
std::vector<cplx> to_fourier(const TorusField& f);
TorusField to_physical(const TorusGrid& g, const std::vector<cplx>& coeffs);

enum class Op { Upsilon, Laplacian, InvLaplacianUpsilon, Dx, Dy };

// Fourier-multiplier application. InvLaplacianUpsilon multiplies mode xi by
// a(xi) = (xi1^2 - xi2^2)/(xi1^2 + xi2^2) and zeroes the mean mode.
TorusField apply_operator(const TorusField& f, Op op);

// <f> = (kappa1 kappa2 / 4 pi^2) * integral = plain average of samples.
cplx mean(const TorusField& f);

double norm_l2(const TorusField& f);         // sqrt(<|f|^2> * cell count) scale-free grid norm
double max_abs(const TorusField& f);

// Unique mean-zero real solution of Lap u = -4 d/dy |q|^2.
TorusField solve_u(const TorusField& q);

// q_t of the rewritten perturbed equation:
//   q_t = -i{ Ups q + 2[ invLapUps |q|^2 + <|q|^2> - omega^2 ] q } + eps(Lap q - alpha q + beta).
TorusField dsii_rhs(const TorusField& q, double omega, double eps, double alpha, double beta);

// Parity measured against the periodic reflection x -> -x (resp. y).
double parity_defect_x(const TorusField& f);
double parity_defect_y(const TorusField& f);

}  // namespace dsii
