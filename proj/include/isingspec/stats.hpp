#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace isingspec {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs, int ddof = 1);

// Contiguous near-equal partition of [0,n) into n_blocks ranges.
std::vector<std::pair<int64_t, int64_t>> block_ranges(int64_t n, int n_blocks);

struct JackknifeResult {
  double value = 0.0;
  double err = 0.0;
};

// Delete-1 jackknife error from leave-one-block-out replicate estimates.
// `full` is the estimate on the complete sample.
JackknifeResult jackknife_from_replicas(double full,
                                        std::span<const double> replicas);

// Weighted least-squares straight line y = intercept + slope * x.
// If sigmas is empty the fit is unweighted and parameter errors are scaled
// by the residual rms; otherwise sigmas must be positive and chi2 is
// meaningful.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_err = 0.0;
  double slope_err = 0.0;
  double chi2 = 0.0;
  double rms_residual = 0.0;  // rms of (y - fit), unweighted
  int n = 0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys,
                 std::span<const double> sigmas = {});

}  // namespace isingspec
