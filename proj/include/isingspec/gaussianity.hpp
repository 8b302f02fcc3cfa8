#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "isingspec/observables.hpp"

namespace isingspec {

// Row-major view of a sample matrix: rows = measurements, cols = variables.
struct SamplesView {
  const double* data = nullptr;
  int64_t rows = 0;
  int cols = 1;

  double at(int64_t r, int c) const { return data[r * cols + c]; }
  static SamplesView of(std::span<const double> xs) {
    return {xs.data(), static_cast<int64_t>(xs.size()), 1};
  }
};

struct ComplexEstimate {
  std::complex<double> value;
  double err_re = 0.0;
  double err_im = 0.0;
};

// Sample mean of exp(i z . X) with jackknife errors over contiguous blocks.
// Requires >= 100 effective samples (integrated-autocorrelation estimate).
ComplexEstimate empirical_cf(const SamplesView& samples,
                             std::span<const double> z, int n_blocks = 50);

// The default evaluation grid: c * e_i for each coordinate plus the
// all-equal diagonal c * (1,...,1), c in {0.25, 0.5, 1, 2}.
std::vector<std::vector<double>> default_cf_grid(int n_vars);

struct CFPoint {
  std::vector<double> z;
  std::complex<double> empirical;
  double err_re = 0.0, err_im = 0.0;
  std::complex<double> gaussian_ref;  // exp(-z' Cov z / 2), mean-zero reference
  double abs_gap = 0.0;
};

struct CFReport {
  std::vector<CFPoint> points;
  double max_abs_gap = 0.0;
  std::vector<double> covariance;  // row-major n x n sample covariance
  int n_vars = 1;
};

CFReport cf_report(const SamplesView& samples,
                   const std::vector<std::vector<double>>& z_grid,
                   int n_blocks = 50);

// Newman's inequality for FKG systems: the gap between the joint and
// product characteristic functions of U_1..U_m is bounded by
// (1/2) sum_{l != n} |r_l r_n| Cov(U_l, U_n). Report-only; `violation`
// flags lhs > rhs + n_sigma * propagated error.
struct NewmanPoint {
  std::vector<double> r;
  double lhs = 0.0, lhs_err = 0.0;
  double rhs = 0.0, rhs_err = 0.0;
  double slack = 0.0;  // rhs - lhs
  bool violation = false;
};

struct NewmanBoundReport {
  std::vector<NewmanPoint> points;
  bool pass = true;
};

NewmanBoundReport newman_bound_check(const SamplesView& blocks_U,
                                     const std::vector<std::vector<double>>& r_grid,
                                     int n_blocks = 50, double n_sigma = 3.0);

struct CumulantDiagnostics {
  double mean = 0.0, mean_err = 0.0;
  double variance = 0.0, variance_err = 0.0;
  double skewness = 0.0, skewness_err = 0.0;
  double excess_kurtosis = 0.0, excess_kurtosis_err = 0.0;
  double ess = 0.0;
};

// Standard bias-adjusted moment estimators with jackknife errors.
// Requires >= 1000 effective samples (kurtosis error bars).
CumulantDiagnostics cumulant_diagnostics(std::span<const double> xs,
                                         int n_blocks = 50);

// Per-L summary of how Gaussian the line observables look: cumulants per
// (L, s) and the joint CF gap per L. Verdicts are trends, not booleans.
struct ConvergenceEntry {
  double L = 0.0;
  double s = 0.0;
  CumulantDiagnostics cumulants;
};

struct ConvergenceSweep {
  std::vector<ConvergenceEntry> entries;
  std::vector<double> L_values;
  std::vector<double> cf_max_gap;            // per L
  std::vector<double> max_abs_kurtosis;      // per L, max over s
  std::vector<double> max_abs_kurtosis_err;  // error at that maximum

  // |kurtosis| non-increasing in L within n_sigma combined errors
  bool kurtosis_trend_decreasing(double n_sigma = 2.0) const;
};

// All sets must share s_values; one set per L.
ConvergenceSweep gaussian_convergence_sweep(std::span<const LineSampleSet> sets,
                                            int n_blocks = 50);

}  // namespace isingspec
