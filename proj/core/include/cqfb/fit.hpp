#pragma once

#include <string>

#include "cqfb/dsp.hpp"

namespace cqfb {

/// Best fit of A e^{-lambda t} cos(2 pi f t + phase) + offset, with t measured
/// from the first sample of the series.
struct DecayingCosineFit {
  double frequency = 0.0;   // Hz
  double decay_rate = 0.0;  // 1/s
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double residual_rms = 0.0;
  double r_squared = 0.0;
  bool converged = false;
  bool flagged = false;  // frequency not trustworthy
  std::string note;
};

/// Seeds the frequency from the PSD peak, scans a (frequency, decay) grid,
/// then refines with Nelder-Mead. The linear parameters are solved exactly
/// at every trial point.
DecayingCosineFit fit_decaying_cosine(const TimeSeries& series);

}  // namespace cqfb
