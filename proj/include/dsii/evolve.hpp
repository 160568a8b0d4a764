#pragma once

#include <vector>

#include "dsii/grid.hpp"
#include "dsii/params.hpp"

namespace dsii {

enum class Scheme { ExponentialRk4, StrangSplit };

struct EvolutionConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::ExponentialRk4;
  double t_final = 1.0;
  int snapshot_stride = 100;  // steps between stored snapshots
};

// Snapshot series; blow-up is a reported outcome, not an exception. When
// blew_up is set the series ends at the last finite state.
struct EvolutionResult {
  std::vector<double> times;       // relative to the start of the run
  std::vector<TorusField> snapshots;
  bool blew_up = false;
  double blowup_time = 0.0;
};

// Evolves q_t = -i{Ups q + 2[invLapUps |q|^2 + <|q|^2> - w^2] q} + eps(Lap q - alpha q + beta)
// with the diagonal linear part -iUps + eps(Lap - alpha) integrated exactly and
// the nonlocal nonlinearity (plus the beta forcing) in the scheme's nonlinear slot.
EvolutionResult integrate(const TorusField& q0, const ModelParams& p,
                          const EvolutionConfig& cfg);

struct GrowthFit {
  double exponent = 0.0;
  double fit_residual = 0.0;     // max |log-amplitude - linear fit| over the window
  double final_amplitude = 0.0;
};

// Seeds omega e^{i gamma} with amplitude * (growing eigendirection of the mode),
// integrates, and fits the log amplitude of that Fourier mode.
GrowthFit measure_growth(const ModelParams& p, int k1, int k2, double amplitude,
                         const TorusGrid& g, double gamma = 0.0,
                         const EvolutionConfig& cfg = {2e-3, Scheme::ExponentialRk4, 2.0, 25});

}  // namespace dsii
