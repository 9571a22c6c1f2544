#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace cqfb {

/// Uniformly sampled real series; sample i sits at t0 + i*dt.
struct TimeSeries {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;

  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  std::size_t size() const { return values.size(); }
};

/// One-sided density (variance per Hz) on an increasing frequency grid.
struct Spectrum {
  std::vector<double> frequencies;  // Hz
  std::vector<double> density;
  double resolution = 0.0;  // Hz
};

/// Causal single-pole smoother y += a (x - y), a = 1 - exp(-dt/tau),
/// tau = 1/(2 pi cutoff). Unit DC gain, zero initial state.
class OnePoleLowPass {
 public:
  OnePoleLowPass(double cutoff_hz, double dt);
  double operator()(double x) {
    state_ += alpha_ * (x - state_);
    return state_;
  }
  double value() const { return state_; }
  void reset(double v = 0.0) { state_ = v; }

 private:
  double alpha_;
  double state_ = 0.0;
};

/// Throws DomainError if cutoff_hz is not in (0, Nyquist).
TimeSeries low_pass(const TimeSeries& series, double cutoff_hz);

/// Lock-in demodulation: low_pass(2 record(t) cos(omega_ref (t - delay))).
TimeSeries lock_in_extract(const TimeSeries& record, double omega_ref, double delay,
                           double cutoff_hz);

enum class Detrend { none, constant };

/// Welch estimate with a Hann window. segment_length = 0 uses the whole
/// series. Unit-variance white noise at sample period dt reads 2*dt in the
/// interior bins; DC and Nyquist bins are not doubled.
Spectrum psd(const TimeSeries& series, std::size_t segment_length = 0, double overlap = 0.5,
             Detrend detrend = Detrend::constant);

/// Number of segments psd() averages for the given layout.
std::size_t welch_segment_count(std::size_t n, std::size_t segment_length, double overlap);

/// In-band PSD mass above the median out-of-band density, divided by the
/// out-of-band mass. The spectrum is taken without detrending.
double estimate_snr(const TimeSeries& series, std::pair<double, double> band_hz,
                    std::size_t segment_length = 0);

struct PeakInfo {
  std::size_t index = 0;
  double frequency = 0.0;
  double height = 0.0;
  double fwhm = 0.0;  // Hz, linear interpolation at half height
};

/// Highest bin in [min_frequency, max_frequency], plus its full width at half maximum.
/// The width is measured on the full spectrum, not clipped to the search band.
PeakInfo find_peak(const Spectrum& s, double min_frequency = 0.0,
                   double max_frequency = std::numeric_limits<double>::infinity());

}  // namespace cqfb
