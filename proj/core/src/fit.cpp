#include "cqfb/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "cqfb/errors.hpp"
#include "cqfb/units.hpp"

namespace cqfb {

namespace {

struct LinearSolve {
  double sse = 0.0;
  Eigen::Vector3d coef = Eigen::Vector3d::Zero();
};

// Columns: e^{-l t} cos(w t), e^{-l t} sin(w t), 1.
LinearSolve solve_linear(const TimeSeries& s, double freq, double decay) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  const double w = kTwoPi * freq;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * s.dt;
    const double env = std::exp(-decay * t);
    a(i, 0) = env * std::cos(w * t);
    a(i, 1) = env * std::sin(w * t);
    a(i, 2) = 1.0;
    b(i) = s.values[static_cast<std::size_t>(i)];
  }
  LinearSolve out;
  out.coef = a.colPivHouseholderQr().solve(b);
  out.sse = (a * out.coef - b).squaredNorm();
  if (!std::isfinite(out.sse)) out.sse = std::numeric_limits<double>::infinity();
  return out;
}

using Point = std::array<double, 2>;

template <class F>
std::pair<Point, bool> nelder_mead(F&& f, Point start, Point step, int max_iter) {
  std::array<Point, 3> simplex{start, start, start};
  simplex[1][0] += step[0];
  simplex[2][1] += step[1];
  std::array<double, 3> val{f(simplex[0]), f(simplex[1]), f(simplex[2])};

  for (int iter = 0; iter < max_iter; ++iter) {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return val[a] < val[b]; });
    const int best = idx[0], mid = idx[1], worst = idx[2];

    const double spread = std::abs(val[worst] - val[best]);
    const double size = std::max({std::abs(simplex[mid][0] - simplex[best][0]), std::abs(simplex[mid][1] - simplex[best][1]),
                                  std::abs(simplex[worst][0] - simplex[best][0]),
                                  std::abs(simplex[worst][1] - simplex[best][1])});
    if (spread <= 1e-12 * (std::abs(val[best]) + 1e-300) || size <= 1e-9) {
      return {simplex[best], true};
    }

    Point centroid{(simplex[best][0] + simplex[mid][0]) / 2, (simplex[best][1] + simplex[mid][1]) / 2};
    auto along = [&](double c) {
      return Point{centroid[0] + c * (simplex[worst][0] - centroid[0]),
                   centroid[1] + c * (simplex[worst][1] - centroid[1])};
    };
    const Point refl = along(-1.0);
    const double fr = f(refl);
    if (fr < val[best]) {
      const Point exp = along(-2.0);
      const double fe = f(exp);
      if (fe < fr) {
        simplex[worst] = exp, val[worst] = fe;
      } else {
        simplex[worst] = refl, val[worst] = fr;
      }
      continue;
    }
    if (fr < val[mid]) {
      simplex[worst] = refl, val[worst] = fr;
      continue;
    }
    const Point con = fr < val[worst] ? along(-0.5) : along(0.5);
    const double fc = f(con);
    if (fc < std::min(fr, val[worst])) {
      simplex[worst] = con, val[worst] = fc;
      continue;
    }
    for (int k : {mid, worst}) {
      simplex[k] = {(simplex[k][0] + simplex[best][0]) / 2, (simplex[k][1] + simplex[best][1]) / 2};
      val[k] = f(simplex[k]);
    }
  }
  const auto best = std::min_element(val.begin(), val.end()) - val.begin();
  return {simplex[static_cast<std::size_t>(best)], false};
}

}  // namespace

DecayingCosineFit fit_decaying_cosine(const TimeSeries& series) {
  if (series.size() < 8) throw DomainError("fit_decaying_cosine: series too short");
  const double span = static_cast<double>(series.size()) * series.dt;

  const double mean =
      std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(series.size());
  double sst = 0.0;
  for (double v : series.values) sst += (v - mean) * (v - mean);
  const double scale = std::max(1.0, std::abs(mean));
  if (sst <= 1e-20 * scale * scale * static_cast<double>(series.size())) {
    DecayingCosineFit flat;
    flat.offset = mean;
    flat.r_squared = 0.0;
    flat.residual_rms = std::sqrt(sst / static_cast<double>(series.size()));
    flat.flagged = true;
    flat.note = "no oscillating component";
    return flat;
  }

  const auto spec = psd(series, 0, 0.0, Detrend::constant);
  const auto peak = find_peak(spec, 0.0);
  const double bin = spec.resolution;

  // Dimensionless coordinates: (f * span, decay * span).
  auto cost = [&](const Point& p) {
    if (p[0] < 0.0) return std::numeric_limits<double>::infinity();
    return solve_linear(series, p[0] / span, p[1] / span).sse;
  };

  Point best{peak.frequency * span, 1.0};
  double best_cost = std::numeric_limits<double>::infinity();
  const double f_seed = peak.frequency * span;
  for (int j = -8; j <= 8; ++j) {
    const double fs = f_seed + 0.25 * j;
    if (fs < 0.0) continue;
    for (double ls : {0.0, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0}) {
      const double c = cost({fs, ls});
      if (c < best_cost) best_cost = c, best = {fs, ls};
    }
  }

  auto [opt, converged] = nelder_mead(cost, best, {0.25, 0.5 + 0.1 * best[1]}, 2000);

  DecayingCosineFit fit;
  fit.frequency = opt[0] / span;
  fit.decay_rate = opt[1] / span;
  const auto lin = solve_linear(series, fit.frequency, fit.decay_rate);
  const double a = lin.coef(0), b = lin.coef(1);
  fit.amplitude = std::hypot(a, b);
  fit.phase = std::atan2(-b, a);
  fit.offset = lin.coef(2);
  fit.residual_rms = std::sqrt(lin.sse / static_cast<double>(series.size()));
  fit.converged = converged;

  fit.r_squared = sst > 0.0 ? 1.0 - lin.sse / sst : 0.0;

  if (!converged) {
    fit.flagged = true;
    fit.note = "refinement did not converge";
  } else if (fit.amplitude <= 1e-8 * scale) {
    fit.flagged = true;
    fit.note = "no oscillating component";
  } else if (fit.frequency < 0.5 * bin) {
    fit.flagged = true;
    fit.note = "frequency below one resolution bin";
  }
  return fit;
}

}  // namespace cqfb
