#include "isingspec/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isingspec/stats.hpp"

namespace isingspec {

int64_t snap_to_lattice(double s, double a) {
  // nearest multiple of a; a half-way point goes to the smaller index
  return static_cast<int64_t>(std::ceil(s / a - 0.5));
}

LineWindow resolve_line_window(const GridGeometry& geom, double a, double s,
                               double L, std::span<const int64_t> center) {
  if (!(a > 0.0)) throw std::invalid_argument("lattice spacing must be > 0");
  if (!(L > 0.0)) throw std::invalid_argument("window half-width must be > 0");
  const int dim = geom.dim();
  const auto& ext = geom.extents();

  LineWindow win;
  win.time_index = snap_to_lattice(s, a);
  win.s_snapped = a * static_cast<double>(win.time_index);
  if (win.time_index < 0 || win.time_index >= ext[0])
    throw std::invalid_argument("time coordinate outside the box");
  win.half_sites = static_cast<int64_t>(std::floor(L / a));

  std::vector<int64_t> c(dim - 1);
  if (!center.empty()) {
    if (static_cast<int>(center.size()) != dim - 1)
      throw std::invalid_argument("window center has wrong dimension");
    for (int i = 0; i < dim - 1; ++i) c[i] = center[i];
  } else {
    for (int i = 0; i < dim - 1; ++i) c[i] = ext[i + 1] / 2;
  }

  const int64_t span = 2 * win.half_sites + 1;
  for (int ax = 1; ax < dim; ++ax) {
    if (span > ext[ax])
      throw std::invalid_argument("line window exceeds the box");
    if (geom.bc() != Boundary::Periodic) {
      const int64_t lo = c[ax - 1] - win.half_sites;
      const int64_t hi = c[ax - 1] + win.half_sites;
      if (lo < 0 || hi >= ext[ax])
        throw std::invalid_argument("line window exceeds the box");
    }
  }

  // enumerate window sites (1 or 2 spatial axes)
  std::vector<int64_t> coords(dim, 0);
  coords[0] = win.time_index;
  if (dim == 2) {
    win.sites.reserve(static_cast<size_t>(span));
    for (int64_t k = -win.half_sites; k <= win.half_sites; ++k) {
      coords[1] = ((c[0] + k) % ext[1] + ext[1]) % ext[1];
      win.sites.push_back(geom.linear_index(coords));
    }
  } else if (dim == 3) {
    win.sites.reserve(static_cast<size_t>(span * span));
    for (int64_t k1 = -win.half_sites; k1 <= win.half_sites; ++k1)
      for (int64_t k2 = -win.half_sites; k2 <= win.half_sites; ++k2) {
        coords[1] = ((c[0] + k1) % ext[1] + ext[1]) % ext[1];
        coords[2] = ((c[1] + k2) % ext[2] + ext[2]) % ext[2];
        win.sites.push_back(geom.linear_index(coords));
      }
  } else {
    throw std::invalid_argument("line windows support d = 2 or 3");
  }
  return win;
}

namespace {

double window_spin_sum(const SpinField& field, const LineWindow& win) {
  int64_t s = 0;
  for (int64_t x : win.sites) s += field.spin(x);
  return static_cast<double>(s);
}

}  // namespace

double line_sum(const SpinField& field, const ModelParams& params, double s,
                double L, double one_point, std::span<const int64_t> center) {
  if (params.d != 2)
    throw std::invalid_argument(
        "line_sum uses the d=2 normalization; use standardized_line_sum for d=3");
  const LineWindow win = resolve_line_window(field.geom, params.a, s, L, center);
  const double total = window_spin_sum(field, win);
  const double count = static_cast<double>(win.sites.size());
  return std::pow(params.a, 7.0 / 8.0) * (total - count * one_point) /
         std::sqrt(2.0 * L);
}

double standardized_line_sum(const SpinField& field, const ModelParams& params,
                             double s, double L, double one_point,
                             double var_sum, std::span<const int64_t> center) {
  if (!(var_sum > 0.0))
    throw std::invalid_argument("window-sum variance must be positive");
  const LineWindow win = resolve_line_window(field.geom, params.a, s, L, center);
  const double total = window_spin_sum(field, win);
  const double count = static_cast<double>(win.sites.size());
  return (total - count * one_point) / std::sqrt(var_sum);
}

std::vector<double> LineSampleSet::column(size_t s_idx) const {
  std::vector<double> out(static_cast<size_t>(n_measurements));
  for (int64_t i = 0; i < n_measurements; ++i) out[i] = at(i, s_idx);
  return out;
}

// ---------------------------------------------------------------------------

void CovarianceEstimate::validate() const {
  if (t_grid.empty() || t_grid.size() != values.size() ||
      t_grid.size() != std_err.size())
    throw std::invalid_argument("covariance estimate: inconsistent grid");
  if (t_grid.front() != 0.0)
    throw std::invalid_argument("covariance grid must start at t = 0");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("covariance grid must be strictly increasing");
  if (kind == CovarianceKind::Ratio && values.front() != 1.0)
    throw std::invalid_argument("ratio covariance must equal 1 at t = 0");
}

double CovarianceEstimate::value_at(double t) const {
  t = std::abs(t);
  if (t <= t_grid.front()) return values.front();
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (t <= t_grid[i]) {
      const double w = (t - t_grid[i - 1]) / (t_grid[i] - t_grid[i - 1]);
      return values[i - 1] + w * (values[i] - values[i - 1]);
    }
  return values.back();
}

double CovarianceEstimate::err_at(double t) const {
  t = std::abs(t);
  if (t <= t_grid.front()) return std_err.front();
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (t <= t_grid[i]) {
      const double w = (t - t_grid[i - 1]) / (t_grid[i] - t_grid[i - 1]);
      return std_err[i - 1] + w * (std_err[i] - std_err[i - 1]);
    }
  return std_err.back();
}

CovarianceEstimate covariance_ratio(const StripMoments& strip, int ref_site) {
  const int i0 = ref_site >= 0 ? ref_site : strip.width / 2;
  if (i0 < 0 || i0 >= strip.width)
    throw std::invalid_argument("reference site outside the strip width");

  auto column_sum = [&](int64_t t) {
    double sum = 0.0;
    for (int j = 0; j < strip.width; ++j) sum += strip.truncated(i0, t, j);
    return sum;
  };
  const double denom = column_sum(0);
  if (!(denom > 0.0))
    throw std::runtime_error("non-positive denominator in covariance ratio");

  CovarianceEstimate k;
  k.kind = CovarianceKind::Ratio;
  for (int64_t t = 0; t <= strip.t_cap; ++t) {
    k.t_grid.push_back(strip.params.a * static_cast<double>(t));
    k.values.push_back(t == 0 ? 1.0 : column_sum(t) / denom);
    k.std_err.push_back(0.0);
  }
  k.validate();
  return k;
}

namespace {

struct WeightedLeaveOut {
  // weighted means over blocks with one block left out (index -1 = none)
  static double mean(const std::vector<double>& w, const std::vector<double>& v,
                     int skip) {
    double sw = 0.0, sv = 0.0;
    for (size_t b = 0; b < w.size(); ++b) {
      if (static_cast<int>(b) == skip) continue;
      sw += w[b];
      sv += w[b] * v[b];
    }
    return sv / sw;
  }
};

}  // namespace

CovarianceEstimate covariance_ratio(const ColumnCovBlockStats& stats) {
  const size_t nb = stats.block_weight.size();
  if (nb < 2) throw std::invalid_argument("need >= 2 blocks for jackknife");
  if (stats.t_indices.empty() || stats.t_indices.front() != 0)
    throw std::invalid_argument("separation grid must start at 0");

  const size_t nt = stats.t_indices.size();
  std::vector<std::vector<double>> prod_t(nt, std::vector<double>(nb));
  for (size_t b = 0; b < nb; ++b)
    for (size_t t = 0; t < nt; ++t) prod_t[t][b] = stats.block_prod[b][t];

  auto ratios = [&](int skip) {
    const double mu =
        WeightedLeaveOut::mean(stats.block_weight, stats.block_mean_colsum, skip);
    const double c0 =
        WeightedLeaveOut::mean(stats.block_weight, prod_t[0], skip) - mu * mu;
    if (!(c0 > 0.0))
      throw std::runtime_error(
          "non-positive column-sum variance: insufficient statistics");
    std::vector<double> r(nt);
    r[0] = 1.0;
    for (size_t t = 1; t < nt; ++t) {
      const double ct =
          WeightedLeaveOut::mean(stats.block_weight, prod_t[t], skip) - mu * mu;
      r[t] = ct / c0;
    }
    return r;
  };

  const auto full = ratios(-1);
  std::vector<std::vector<double>> reps(nb);
  for (size_t b = 0; b < nb; ++b) reps[b] = ratios(static_cast<int>(b));

  CovarianceEstimate k;
  k.kind = CovarianceKind::Ratio;
  for (size_t t = 0; t < nt; ++t) {
    k.t_grid.push_back(stats.a * static_cast<double>(stats.t_indices[t]));
    k.values.push_back(full[t]);
    if (t == 0) {
      k.std_err.push_back(0.0);
    } else {
      std::vector<double> r(nb);
      for (size_t b = 0; b < nb; ++b) r[b] = reps[b][t];
      k.std_err.push_back(jackknife_from_replicas(full[t], r).err);
    }
  }
  k.validate();
  return k;
}

CovarianceEstimate line_covariance(const ExactMoments& m, double L,
                                   std::span<const int64_t> t_indices) {
  const auto& geom = m.geom;
  if (geom.dim() != 2)
    throw std::invalid_argument("line covariance oracle is two-dimensional");
  const auto& ext = geom.extents();
  const double a = m.params.a;
  const int64_t half = static_cast<int64_t>(std::floor(L / a));
  if (2 * half + 1 > ext[1])
    throw std::invalid_argument("line window exceeds the box");
  const int64_t y0 = ext[1] / 2;

  CovarianceEstimate k;
  k.kind = CovarianceKind::LineSum;
  const double norm = std::pow(a, 3.0 / 4.0);
  for (int64_t t : t_indices) {
    if (t < 0 || t >= ext[0])
      throw std::invalid_argument("separation outside the box");
    const int64_t x_ref = geom.linear_index({0, y0});
    double sum = 0.0;
    for (int64_t k2 = -half; k2 <= half; ++k2) {
      int64_t y = y0 + k2;
      if (geom.bc() == Boundary::Periodic) y = (y % ext[1] + ext[1]) % ext[1];
      else if (y < 0 || y >= ext[1])
        throw std::invalid_argument("line window exceeds the box");
      sum += m.truncated(x_ref, geom.linear_index({t, y}));
    }
    k.t_grid.push_back(a * static_cast<double>(t));
    k.values.push_back(norm * sum);
    k.std_err.push_back(0.0);
  }
  k.validate();
  return k;
}

CovarianceEstimate line_covariance(const StripMoments& strip, double L) {
  const double a = strip.params.a;
  const int64_t half = static_cast<int64_t>(std::floor(L / a));
  const int i0 = strip.width / 2;
  if (i0 - half < 0 || i0 + half >= strip.width)
    throw std::invalid_argument("line window exceeds the strip width");

  CovarianceEstimate k;
  k.kind = CovarianceKind::LineSum;
  const double norm = std::pow(a, 3.0 / 4.0);
  for (int64_t t = 0; t <= strip.t_cap; ++t) {
    double sum = 0.0;
    for (int64_t j = i0 - half; j <= i0 + half; ++j)
      sum += strip.truncated(i0, t, static_cast<int>(j));
    k.t_grid.push_back(a * static_cast<double>(t));
    k.values.push_back(norm * sum);
    k.std_err.push_back(0.0);
  }
  k.validate();
  return k;
}

CovarianceEstimate line_covariance(const LineCovBlockStats& stats) {
  const size_t nb = stats.block_weight.size();
  if (nb < 2) throw std::invalid_argument("need >= 2 blocks for jackknife");
  const size_t nt = stats.t_indices.size();
  const double norm = std::pow(stats.a, 3.0 / 4.0);

  std::vector<std::vector<double>> prod_t(nt, std::vector<double>(nb));
  for (size_t b = 0; b < nb; ++b)
    for (size_t t = 0; t < nt; ++t) prod_t[t][b] = stats.block_prod[b][t];

  auto estimate = [&](size_t t, int skip) {
    const double mr =
        WeightedLeaveOut::mean(stats.block_weight, stats.block_mean_ref, skip);
    const double mw =
        WeightedLeaveOut::mean(stats.block_weight, stats.block_mean_win, skip);
    const double p = WeightedLeaveOut::mean(stats.block_weight, prod_t[t], skip);
    return norm * (p - mr * mw);
  };

  CovarianceEstimate k;
  k.kind = CovarianceKind::LineSum;
  for (size_t t = 0; t < nt; ++t) {
    const double full = estimate(t, -1);
    std::vector<double> reps(nb);
    for (size_t b = 0; b < nb; ++b) reps[b] = estimate(t, static_cast<int>(b));
    k.t_grid.push_back(stats.a * static_cast<double>(stats.t_indices[t]));
    k.values.push_back(full);
    k.std_err.push_back(jackknife_from_replicas(full, reps).err);
  }
  k.validate();
  return k;
}

// ---------------------------------------------------------------------------

TwoPointProfile profile_from_blocks(const ProfileBlockStats& stats,
                                    bool truncate) {
  const size_t nb = stats.block_weight.size();
  if (nb < 2) throw std::invalid_argument("need >= 2 blocks for jackknife");
  const size_t ns = stats.separations.size();

  std::vector<std::vector<double>> prod_s(ns, std::vector<double>(nb));
  for (size_t b = 0; b < nb; ++b)
    for (size_t s = 0; s < ns; ++s) prod_s[s][b] = stats.block_prod[b][s];

  auto estimate = [&](size_t s, int skip) {
    const double p = WeightedLeaveOut::mean(stats.block_weight, prod_s[s], skip);
    if (!truncate) return p;
    const double m =
        WeightedLeaveOut::mean(stats.block_weight, stats.block_mag, skip);
    return p - m * m;
  };

  TwoPointProfile prof;
  prof.separations = stats.separations;
  prof.a = stats.a;
  prof.truncated = truncate;
  for (size_t s = 0; s < ns; ++s) {
    const double full = estimate(s, -1);
    std::vector<double> reps(nb);
    for (size_t b = 0; b < nb; ++b) reps[b] = estimate(s, static_cast<int>(b));
    prof.values.push_back(full);
    prof.std_err.push_back(jackknife_from_replicas(full, reps).err);
  }
  return prof;
}

TwoPointProfile profile_from_strip(const StripMoments& strip, bool truncate) {
  const int i0 = strip.width / 2;
  TwoPointProfile prof;
  prof.a = strip.params.a;
  prof.truncated = truncate;
  for (int64_t t = 0; t <= strip.t_cap; ++t) {
    prof.separations.push_back(t);
    prof.values.push_back(truncate ? strip.truncated(i0, t, i0)
                                   : strip.two(i0, t, i0));
    prof.std_err.push_back(0.0);
  }
  return prof;
}

PowerLawFit fit_power_law(const TwoPointProfile& profile, int64_t n_min,
                          int64_t n_max) {
  std::vector<double> xs, ys, sigmas;
  bool have_errors = false;
  for (size_t i = 0; i < profile.separations.size(); ++i) {
    const int64_t r = profile.separations[i];
    if (r < n_min || r > n_max || r <= 0) continue;
    const double v = profile.values[i];
    if (!(v > 0.0))
      throw std::runtime_error(
          "non-positive correlator value in the fit window");
    xs.push_back(std::log(static_cast<double>(r)));
    ys.push_back(std::log(v));
    const double se = profile.std_err[i];
    sigmas.push_back(se > 0.0 ? se / v : 0.0);
    if (se > 0.0) have_errors = true;
  }
  if (xs.size() < 3)
    throw std::invalid_argument("power-law fit window too small (< 3 points)");

  LineFit lf;
  if (have_errors) {
    for (auto& s : sigmas)
      if (!(s > 0.0)) s = *std::max_element(sigmas.begin(), sigmas.end());
    lf = fit_line(xs, ys, sigmas);
  } else {
    lf = fit_line(xs, ys);
  }

  PowerLawFit fit;
  fit.exponent = -lf.slope;
  fit.exponent_err = lf.slope_err;
  fit.amplitude = std::exp(lf.intercept);
  fit.amplitude_err = fit.amplitude * lf.intercept_err;
  fit.n_points = lf.n;
  fit.rms_log_residual = lf.rms_residual;
  fit.chi2_dof = lf.chi2 / std::max(1, lf.n - 2);
  fit.poor_fit = have_errors ? fit.chi2_dof > 4.0 : fit.rms_log_residual > 0.02;
  return fit;
}

IncrementScalingFit increment_scaling(const CovarianceEstimate& k,
                                      std::span<const double> eps_grid) {
  k.validate();
  if (eps_grid.size() < 2)
    throw std::invalid_argument("increment grid needs >= 2 points");
  double lo = eps_grid[0], hi = eps_grid[0];
  for (double e : eps_grid) {
    if (!(e > 0.0)) throw std::invalid_argument("increments must be positive");
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (hi / lo < 10.0)
    throw std::invalid_argument("increment grid must span at least one decade");

  const double k0 = k.values.front();
  const double e0 = k.std_err.front();
  std::vector<double> xs, ys, sigmas;
  bool have_errors = false;
  for (double eps : eps_grid) {
    const double diff = k0 - k.value_at(eps);
    const double err = std::sqrt(e0 * e0 + k.err_at(eps) * k.err_at(eps));
    if (!(diff > 0.0)) {
      if (err > 0.0 && diff > -2.0 * err)
        throw std::runtime_error(
            "covariance increment not resolved within errors at eps=" +
            std::to_string(eps));
      throw std::runtime_error("covariance is non-monotone at eps=" +
                               std::to_string(eps));
    }
    xs.push_back(std::log(eps));
    ys.push_back(std::log(diff));
    sigmas.push_back(err > 0.0 ? err / diff : 0.0);
    if (err > 0.0) have_errors = true;
  }

  LineFit lf;
  if (have_errors) {
    for (auto& s : sigmas)
      if (!(s > 0.0)) s = *std::max_element(sigmas.begin(), sigmas.end());
    lf = fit_line(xs, ys, sigmas);
  } else {
    lf = fit_line(xs, ys);
  }

  IncrementScalingFit fit;
  fit.slope = lf.slope;
  fit.slope_err = lf.slope_err;
  fit.n_points = lf.n;
  return fit;
}

MonotonicityReport check_nonincreasing(const CovarianceEstimate& k,
                                       double n_sigma) {
  MonotonicityReport rep;
  for (size_t i = 1; i < k.values.size(); ++i) {
    const double rise = k.values[i] - k.values[i - 1];
    const double err = std::sqrt(k.std_err[i] * k.std_err[i] +
                                 k.std_err[i - 1] * k.std_err[i - 1]);
    if (rise > 0.0) {
      const double sig = err > 0.0 ? rise / err : 1e300;
      if (sig > n_sigma) {
        ++rep.violations;
        rep.worst_sigma = std::max(rep.worst_sigma, sig);
      }
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

}  // namespace isingspec
