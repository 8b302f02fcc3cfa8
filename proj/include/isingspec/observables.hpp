#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isingspec/exact.hpp"
#include "isingspec/lattice.hpp"

namespace isingspec {

// Nearest lattice index to the continuum coordinate s, ties toward -inf.
int64_t snap_to_lattice(double s, double a);

// A line window: the lattice column closest to time coordinate s, and the
// spatial sites within continuum distance L of the window center. For d=3
// the window is the square [-L,L]^2. Periodic boxes wrap; open boxes throw
// when the window leaves the box.
struct LineWindow {
  int64_t time_index = 0;
  double s_snapped = 0.0;
  int64_t half_sites = 0;              // floor(L/a) per spatial axis
  std::vector<int64_t> sites;          // linear site indices
};

LineWindow resolve_line_window(const GridGeometry& geom, double a, double s,
                               double L,
                               std::span<const int64_t> center = {});

// Renormalized line observable for d=2:
//   a^{7/8} * sum_window (sigma - one_point) / sqrt(2L).
double line_sum(const SpinField& field, const ModelParams& params, double s,
                double L, double one_point,
                std::span<const int64_t> center = {});

// Standardized window sum for general d: (sum sigma - window * one_point)
// divided by sqrt(var_sum), where var_sum is the variance of the window
// total (exact from an oracle, or estimated). Throws on var_sum <= 0.
double standardized_line_sum(const SpinField& field, const ModelParams& params,
                             double s, double L, double one_point,
                             double var_sum,
                             std::span<const int64_t> center = {});

// Monte Carlo samples of the line observables at fixed (L, a, centering).
struct LineSampleSet {
  double a = 1.0;
  double L = 0.0;
  std::vector<double> s_values;
  std::vector<double> s_snapped;
  enum class Centering { ExactMean, EstimatedMean } centering = Centering::EstimatedMean;
  double one_point = 0.0;            // per-site mean used for centering
  int64_t n_measurements = 0;
  std::vector<double> samples;       // row-major [measurement][s index]

  double at(int64_t meas, size_t s_idx) const {
    return samples[static_cast<size_t>(meas) * s_values.size() + s_idx];
  }
  std::vector<double> column(size_t s_idx) const;
};

// ---------------------------------------------------------------------------
// Covariance estimates

enum class CovarianceKind { LineSum, Ratio };

// Estimated covariance function on a grid of time separations.
// Ratio kind is normalized to value 1 at t = 0 exactly.
struct CovarianceEstimate {
  CovarianceKind kind = CovarianceKind::Ratio;
  std::vector<double> t_grid;   // continuum separations, starts at 0
  std::vector<double> values;
  std::vector<double> std_err;  // zero for exact inputs
  void validate() const;        // throws on violated invariants
  double value_at(double t) const;   // linear interpolation
  double err_at(double t) const;
};

// Ratio of truncated column sums from the strip oracle, reference site in
// the middle of the width. Throws on non-positive denominator.
CovarianceEstimate covariance_ratio(const StripMoments& strip, int ref_site = -1);

// Block statistics of full-column sums recorded during simulation:
// per block, the mean column sum and the mean over (measurement, x0) of
// S_{x0} S_{x0+t} for each separation. Jackknife over blocks propagates
// errors through the ratio.
struct ColumnCovBlockStats {
  std::vector<int64_t> t_indices;  // lattice separations, first must be 0
  double a = 1.0;
  std::vector<double> block_weight;
  std::vector<double> block_mean_colsum;
  std::vector<std::vector<double>> block_prod;  // [block][t]
};

CovarianceEstimate covariance_ratio(const ColumnCovBlockStats& stats);

// Line-sum covariance a^{3/4} sum_{|k|<=L} <sigma_(s,0); sigma_(t,k)>,
// the finite-spacing approximation of the integral of the field covariance
// over the window.
CovarianceEstimate line_covariance(const ExactMoments& m, double L,
                                   std::span<const int64_t> t_indices);
CovarianceEstimate line_covariance(const StripMoments& strip, double L);

struct LineCovBlockStats {
  std::vector<int64_t> t_indices;
  double a = 1.0;
  int64_t window_sites = 0;
  std::vector<double> block_weight;
  std::vector<double> block_mean_ref;           // mean spin at reference sites
  std::vector<double> block_mean_win;           // mean window sum
  std::vector<std::vector<double>> block_prod;  // [block][t]
};

CovarianceEstimate line_covariance(const LineCovBlockStats& stats);

// ---------------------------------------------------------------------------
// Two-point profiles and scaling fits

struct TwoPointProfile {
  std::vector<int64_t> separations;  // lattice units, along one axis
  double a = 1.0;
  bool truncated = false;
  std::vector<double> values;
  std::vector<double> std_err;
};

// Per-measurement block statistics -> profile with jackknife errors.
struct ProfileBlockStats {
  std::vector<int64_t> separations;
  double a = 1.0;
  std::vector<double> block_weight;
  std::vector<double> block_mag;                // mean spin
  std::vector<std::vector<double>> block_prod;  // [block][sep]
};

TwoPointProfile profile_from_blocks(const ProfileBlockStats& stats, bool truncate);
TwoPointProfile profile_from_strip(const StripMoments& strip, bool truncate);

// Power-law fit value = C * r^{-p} by weighted log-log least squares over
// separations in [n_min, n_max]. The residual diagnostic flags data that a
// power law does not describe (e.g. exponential decay).
struct PowerLawFit {
  double exponent = 0.0;       // p
  double exponent_err = 0.0;
  double amplitude = 0.0;      // C, in lattice units
  double amplitude_err = 0.0;
  double chi2_dof = 0.0;
  double rms_log_residual = 0.0;
  bool poor_fit = false;
  int n_points = 0;
};

PowerLawFit fit_power_law(const TwoPointProfile& profile, int64_t n_min,
                          int64_t n_max);

// Slope of log(K(0) - K(eps)) vs log eps; the short-time exponent of the
// covariance function. Reference value 3/4 is reported alongside.
struct IncrementScalingFit {
  double slope = 0.0;
  double slope_err = 0.0;
  double reference = 0.75;
  int n_points = 0;
};

IncrementScalingFit increment_scaling(const CovarianceEstimate& k,
                                      std::span<const double> eps_grid);

// Scan a covariance estimate for monotonicity violations beyond
// `n_sigma` combined standard errors (the exact curve is non-increasing
// in |t|).
struct MonotonicityReport {
  int64_t violations = 0;
  double worst_sigma = 0.0;  // largest violation in sigma units
  bool pass = false;
};
MonotonicityReport check_nonincreasing(const CovarianceEstimate& k,
                                       double n_sigma = 2.0);

}  // namespace isingspec
