#include "isingspec/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace isingspec {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty series");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs, int ddof) {
  const auto n = static_cast<int64_t>(xs.size());
  if (n <= ddof) throw std::invalid_argument("too few samples for variance");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(n - ddof);
}

std::vector<std::pair<int64_t, int64_t>> block_ranges(int64_t n, int n_blocks) {
  if (n_blocks < 1 || n < n_blocks)
    throw std::invalid_argument("invalid block partition");
  std::vector<std::pair<int64_t, int64_t>> out;
  out.reserve(n_blocks);
  int64_t start = 0;
  for (int b = 0; b < n_blocks; ++b) {
    const int64_t stop = n * (b + 1) / n_blocks;
    out.emplace_back(start, stop);
    start = stop;
  }
  return out;
}

JackknifeResult jackknife_from_replicas(double full,
                                        std::span<const double> replicas) {
  const auto b = static_cast<double>(replicas.size());
  if (replicas.size() < 2)
    throw std::invalid_argument("jackknife needs >= 2 replicas");
  const double rbar = mean(replicas);
  double ss = 0.0;
  for (double r : replicas) ss += (r - rbar) * (r - rbar);
  JackknifeResult res;
  res.value = full;
  res.err = std::sqrt((b - 1.0) / b * ss);
  return res;
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys,
                 std::span<const double> sigmas) {
  const size_t n = xs.size();
  if (ys.size() != n) throw std::invalid_argument("fit_line: length mismatch");
  if (n < 2) throw std::invalid_argument("fit_line: need >= 2 points");
  const bool weighted = !sigmas.empty();
  if (weighted && sigmas.size() != n)
    throw std::invalid_argument("fit_line: sigma length mismatch");

  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (weighted) {
      if (!(sigmas[i] > 0.0))
        throw std::invalid_argument("fit_line: sigmas must be positive");
      w = 1.0 / (sigmas[i] * sigmas[i]);
    }
    sw += w;
    swx += w * xs[i];
    swy += w * ys[i];
    swxx += w * xs[i] * xs[i];
    swxy += w * xs[i] * ys[i];
  }
  const double delta = sw * swxx - swx * swx;
  if (!(std::abs(delta) > 0.0))
    throw std::invalid_argument("fit_line: degenerate abscissa");

  LineFit fit;
  fit.n = static_cast<int>(n);
  fit.slope = (sw * swxy - swx * swy) / delta;
  fit.intercept = (swxx * swy - swx * swxy) / delta;

  double chi2 = 0.0, ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
    if (weighted) chi2 += (r * r) / (sigmas[i] * sigmas[i]);
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  fit.chi2 = weighted ? chi2 : ss;

  double var_slope = sw / delta;
  double var_intercept = swxx / delta;
  if (!weighted && n > 2) {
    // scale by residual variance when no per-point errors are given
    const double s2 = ss / static_cast<double>(n - 2);
    var_slope *= s2;
    var_intercept *= s2;
  }
  fit.slope_err = std::sqrt(var_slope);
  fit.intercept_err = std::sqrt(var_intercept);
  return fit;
}

}  // namespace isingspec
