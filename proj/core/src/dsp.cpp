#include "cqfb/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>

#include "cqfb/errors.hpp"
#include "cqfb/units.hpp"

namespace cqfb {

namespace {

void check_cutoff(double cutoff_hz, double dt) {
  if (!(cutoff_hz > 0.0)) throw DomainError("low-pass cutoff must be positive");
  if (cutoff_hz >= 0.5 / dt) throw DomainError("low-pass cutoff must be below Nyquist");
}

// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  void execute() { fftw_execute(plan_); }
  double power(std::size_t k) const {
    return out_.get()[k][0] * out_.get()[k][0] + out_.get()[k][1] * out_.get()[k][1];
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_;
};

std::size_t segment_step(std::size_t seg, double overlap) {
  const auto hop = static_cast<std::size_t>(std::floor(static_cast<double>(seg) * (1.0 - overlap)));
  return std::max<std::size_t>(hop, 1);
}

}  // namespace

OnePoleLowPass::OnePoleLowPass(double cutoff_hz, double dt) {
  check_cutoff(cutoff_hz, dt);
  const double tau = 1.0 / (kTwoPi * cutoff_hz);
  alpha_ = -std::expm1(-dt / tau);
}

TimeSeries low_pass(const TimeSeries& series, double cutoff_hz) {
  OnePoleLowPass filter(cutoff_hz, series.dt);
  TimeSeries out{series.t0, series.dt, {}};
  out.values.reserve(series.size());
  for (double v : series.values) out.values.push_back(filter(v));
  return out;
}

TimeSeries lock_in_extract(const TimeSeries& record, double omega_ref, double delay,
                           double cutoff_hz) {
  if (delay < 0.0) throw DomainError("lock_in_extract: delay must be nonnegative");
  OnePoleLowPass filter(cutoff_hz, record.dt);
  TimeSeries out{record.t0, record.dt, {}};
  out.values.reserve(record.size());
  for (std::size_t i = 0; i < record.size(); ++i) {
    const double ref = std::cos(omega_ref * (record.time(i) - delay));
    out.values.push_back(filter(2.0 * record.values[i] * ref));
  }
  return out;
}

std::size_t welch_segment_count(std::size_t n, std::size_t segment_length, double overlap) {
  const std::size_t seg = segment_length == 0 ? n : segment_length;
  if (seg == 0 || seg > n) return 0;
  return (n - seg) / segment_step(seg, overlap) + 1;
}

Spectrum psd(const TimeSeries& series, std::size_t segment_length, double overlap,
             Detrend detrend) {
  const std::size_t n = series.size();
  const std::size_t seg = segment_length == 0 ? n : segment_length;
  if (!(overlap >= 0.0 && overlap < 1.0)) throw DomainError("psd: overlap must be in [0, 1)");
  if (seg < 2 || seg > n) throw DomainError("psd: series shorter than one segment");

  std::vector<double> window(seg);
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(seg));
  }
  const double window_power = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);
  const double fs = 1.0 / series.dt;

  const std::size_t bins = seg / 2 + 1;
  std::vector<double> acc(bins, 0.0);
  RealFft fft(seg);
  const std::size_t hop = segment_step(seg, overlap);
  std::size_t count = 0;
  for (std::size_t start = 0; start + seg <= n; start += hop, ++count) {
    const double* src = series.values.data() + start;
    double mean = 0.0;
    if (detrend == Detrend::constant) mean = std::accumulate(src, src + seg, 0.0) / static_cast<double>(seg);
    double* in = fft.input();
    for (std::size_t i = 0; i < seg; ++i) in[i] = (src[i] - mean) * window[i];
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k) acc[k] += fft.power(k);
  }

  Spectrum out;
  out.resolution = fs / static_cast<double>(seg);
  out.frequencies.resize(bins);
  out.density.resize(bins);
  const double scale = 1.0 / (fs * window_power * static_cast<double>(count));
  for (std::size_t k = 0; k < bins; ++k) {
    out.frequencies[k] = static_cast<double>(k) * out.resolution;
    const bool unpaired = k == 0 || (seg % 2 == 0 && k == bins - 1);
    out.density[k] = acc[k] * scale * (unpaired ? 1.0 : 2.0);
  }
  return out;
}

double estimate_snr(const TimeSeries& series, std::pair<double, double> band_hz,
                    std::size_t segment_length) {
  const auto spec = psd(series, segment_length, 0.5, Detrend::none);
  std::vector<double> in_band, out_band;
  for (std::size_t k = 0; k < spec.frequencies.size(); ++k) {
    const double f = spec.frequencies[k];
    (f >= band_hz.first && f <= band_hz.second ? in_band : out_band).push_back(spec.density[k]);
  }
  if (in_band.empty()) throw DomainError("estimate_snr: signal band contains no bins");
  if (out_band.empty()) throw DomainError("estimate_snr: signal band covers the whole spectrum");

  std::vector<double> sorted = out_band;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double floor = sorted[sorted.size() / 2];

  double signal = 0.0;
  for (double p : in_band) signal += p - floor;
  const double noise = std::accumulate(out_band.begin(), out_band.end(), 0.0);
  return noise > 0.0 ? signal / noise : 0.0;
}

PeakInfo find_peak(const Spectrum& s, double min_frequency, double max_frequency) {
  PeakInfo peak;
  bool found = false;
  for (std::size_t k = 0; k < s.density.size(); ++k) {
    if (s.frequencies[k] < min_frequency || s.frequencies[k] > max_frequency) continue;
    if (!found || s.density[k] > peak.height) {
      peak.index = k;
      peak.height = s.density[k];
      found = true;
    }
  }
  if (!found) throw DomainError("find_peak: no bins inside the search band");
  peak.frequency = s.frequencies[peak.index];

  const double half = 0.5 * peak.height;
  auto crossing = [&](std::size_t inner, std::size_t outer) {
    const double f0 = s.frequencies[inner], f1 = s.frequencies[outer];
    const double p0 = s.density[inner], p1 = s.density[outer];
    return f0 + (half - p0) * (f1 - f0) / (p1 - p0);
  };
  std::size_t lo = peak.index;
  while (lo > 0 && s.density[lo - 1] > half) --lo;
  std::size_t hi = peak.index;
  while (hi + 1 < s.density.size() && s.density[hi + 1] > half) ++hi;
  const double left = lo > 0 ? crossing(lo, lo - 1) : s.frequencies[0];
  const double right = hi + 1 < s.density.size() ? crossing(hi, hi + 1) : s.frequencies.back();
  peak.fwhm = right - left;
  return peak;
}

}  // namespace cqfb
