#include "isingspec/gaussianity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isingspec/samplers.hpp"
#include "isingspec/stats.hpp"

namespace isingspec {

namespace {

double min_column_ess(const SamplesView& s) {
  double ess = 1e300;
  std::vector<double> col(static_cast<size_t>(s.rows));
  for (int c = 0; c < s.cols; ++c) {
    for (int64_t r = 0; r < s.rows; ++r) col[r] = s.at(r, c);
    ess = std::min(ess, integrated_autocorrelation(col).ess);
  }
  return ess;
}

}  // namespace

ComplexEstimate empirical_cf(const SamplesView& samples,
                             std::span<const double> z, int n_blocks) {
  if (static_cast<int>(z.size()) != samples.cols)
    throw std::invalid_argument("z dimension does not match sample columns");
  if (samples.rows < 100 || min_column_ess(samples) < 100.0)
    throw std::invalid_argument("empirical cf needs >= 100 effective samples");

  n_blocks = static_cast<int>(std::min<int64_t>(n_blocks, samples.rows / 2));
  const auto ranges = block_ranges(samples.rows, n_blocks);
  std::vector<double> bre(n_blocks, 0.0), bim(n_blocks, 0.0), bw(n_blocks, 0.0);
  for (int b = 0; b < n_blocks; ++b) {
    for (int64_t r = ranges[b].first; r < ranges[b].second; ++r) {
      double phase = 0.0;
      for (int c = 0; c < samples.cols; ++c) phase += z[c] * samples.at(r, c);
      bre[b] += std::cos(phase);
      bim[b] += std::sin(phase);
    }
    bw[b] = static_cast<double>(ranges[b].second - ranges[b].first);
  }

  auto part = [&](const std::vector<double>& sums, int skip) {
    double sv = 0.0, sw = 0.0;
    for (int b = 0; b < n_blocks; ++b) {
      if (b == skip) continue;
      sv += sums[b];
      sw += bw[b];
    }
    return sv / sw;
  };

  ComplexEstimate est;
  const double fre = part(bre, -1);
  const double fim = part(bim, -1);
  est.value = {fre, fim};
  std::vector<double> rre(n_blocks), rim(n_blocks);
  for (int b = 0; b < n_blocks; ++b) {
    rre[b] = part(bre, b);
    rim[b] = part(bim, b);
  }
  est.err_re = jackknife_from_replicas(fre, rre).err;
  est.err_im = jackknife_from_replicas(fim, rim).err;
  return est;
}

std::vector<std::vector<double>> default_cf_grid(int n_vars) {
  const double scales[] = {0.25, 0.5, 1.0, 2.0};
  std::vector<std::vector<double>> grid;
  for (double c : scales) {
    for (int i = 0; i < n_vars; ++i) {
      std::vector<double> z(n_vars, 0.0);
      z[i] = c;
      grid.push_back(std::move(z));
    }
    if (n_vars > 1) grid.emplace_back(n_vars, c);
  }
  return grid;
}

CFReport cf_report(const SamplesView& samples,
                   const std::vector<std::vector<double>>& z_grid,
                   int n_blocks) {
  const int n = samples.cols;
  CFReport rep;
  rep.n_vars = n;

  // sample covariance (mean-zero Gaussian reference uses it directly)
  std::vector<double> mu(n, 0.0);
  for (int64_t r = 0; r < samples.rows; ++r)
    for (int c = 0; c < n; ++c) mu[c] += samples.at(r, c);
  for (auto& m : mu) m /= static_cast<double>(samples.rows);
  rep.covariance.assign(static_cast<size_t>(n) * n, 0.0);
  for (int64_t r = 0; r < samples.rows; ++r)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rep.covariance[static_cast<size_t>(i) * n + j] +=
            (samples.at(r, i) - mu[i]) * (samples.at(r, j) - mu[j]);
  for (auto& c : rep.covariance) c /= static_cast<double>(samples.rows - 1);

  for (const auto& z : z_grid) {
    CFPoint pt;
    pt.z = z;
    const ComplexEstimate est = empirical_cf(samples, z, n_blocks);
    pt.empirical = est.value;
    pt.err_re = est.err_re;
    pt.err_im = est.err_im;
    double q = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        q += z[i] * rep.covariance[static_cast<size_t>(i) * n + j] * z[j];
    pt.gaussian_ref = std::exp(-0.5 * q);
    pt.abs_gap = std::abs(pt.empirical - pt.gaussian_ref);
    rep.max_abs_gap = std::max(rep.max_abs_gap, pt.abs_gap);
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

NewmanBoundReport newman_bound_check(const SamplesView& U,
                                     const std::vector<std::vector<double>>& r_grid,
                                     int n_blocks, double n_sigma) {
  const int m = U.cols;
  if (U.rows < 4) throw std::invalid_argument("too few samples");
  n_blocks = static_cast<int>(std::min<int64_t>(n_blocks, U.rows / 2));
  const auto ranges = block_ranges(U.rows, n_blocks);

  NewmanBoundReport rep;
  for (const auto& r : r_grid) {
    if (static_cast<int>(r.size()) != m)
      throw std::invalid_argument("r dimension does not match U columns");

    // per-block sums of every ingredient, so replicas are cheap
    struct Sums {
      double w = 0.0;
      double joint_re = 0.0, joint_im = 0.0;
      std::vector<double> single_re, single_im;  // per variable
      std::vector<double> u;                      // sums of U_l
      std::vector<double> uu;                     // sums of U_l U_n, packed l<n
    };
    std::vector<Sums> blk(n_blocks);
    const int n_pairs = m * (m - 1) / 2;
    for (int b = 0; b < n_blocks; ++b) {
      auto& s = blk[b];
      s.single_re.assign(m, 0.0);
      s.single_im.assign(m, 0.0);
      s.u.assign(m, 0.0);
      s.uu.assign(n_pairs, 0.0);
      for (int64_t row = ranges[b].first; row < ranges[b].second; ++row) {
        double phase = 0.0;
        for (int l = 0; l < m; ++l) {
          const double x = U.at(row, l);
          phase += r[l] * x;
          s.single_re[l] += std::cos(r[l] * x);
          s.single_im[l] += std::sin(r[l] * x);
          s.u[l] += x;
        }
        s.joint_re += std::cos(phase);
        s.joint_im += std::sin(phase);
        int p = 0;
        for (int l = 0; l < m; ++l)
          for (int n2 = l + 1; n2 < m; ++n2)
            s.uu[p++] += U.at(row, l) * U.at(row, n2);
      }
      s.w = static_cast<double>(ranges[b].second - ranges[b].first);
    }

    auto eval = [&](int skip, double& lhs, double& rhs) {
      double w = 0.0, jre = 0.0, jim = 0.0;
      std::vector<double> sre(m, 0.0), sim(m, 0.0), su(m, 0.0), suu(n_pairs, 0.0);
      for (int b = 0; b < n_blocks; ++b) {
        if (b == skip) continue;
        w += blk[b].w;
        jre += blk[b].joint_re;
        jim += blk[b].joint_im;
        for (int l = 0; l < m; ++l) {
          sre[l] += blk[b].single_re[l];
          sim[l] += blk[b].single_im[l];
          su[l] += blk[b].u[l];
        }
        for (int p = 0; p < n_pairs; ++p) suu[p] += blk[b].uu[p];
      }
      std::complex<double> joint(jre / w, jim / w);
      std::complex<double> prod(1.0, 0.0);
      for (int l = 0; l < m; ++l)
        prod *= std::complex<double>(sre[l] / w, sim[l] / w);
      lhs = std::abs(joint - prod);
      rhs = 0.0;
      int p = 0;
      for (int l = 0; l < m; ++l)
        for (int n2 = l + 1; n2 < m; ++n2) {
          const double cov = suu[p] / w - (su[l] / w) * (su[n2] / w);
          rhs += std::abs(r[l] * r[n2]) * cov;
          ++p;
        }
      // the double sum over l != n counts each pair twice; with the 1/2
      // prefactor that is exactly the sum over unordered pairs
    };

    NewmanPoint pt;
    pt.r = r;
    eval(-1, pt.lhs, pt.rhs);
    std::vector<double> rl(n_blocks), rr(n_blocks);
    for (int b = 0; b < n_blocks; ++b) {
      double l = 0.0, h = 0.0;
      eval(b, l, h);
      rl[b] = l;
      rr[b] = h;
    }
    pt.lhs_err = jackknife_from_replicas(pt.lhs, rl).err;
    pt.rhs_err = jackknife_from_replicas(pt.rhs, rr).err;
    pt.slack = pt.rhs - pt.lhs;
    const double err = std::sqrt(pt.lhs_err * pt.lhs_err + pt.rhs_err * pt.rhs_err);
    pt.violation = pt.lhs > pt.rhs + n_sigma * err;
    if (pt.violation) rep.pass = false;
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

CumulantDiagnostics cumulant_diagnostics(std::span<const double> xs,
                                         int n_blocks) {
  const auto n = static_cast<int64_t>(xs.size());
  if (n < 1000)
    throw std::invalid_argument("cumulant diagnostics need >= 1000 samples");
  for (double x : xs)
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite sample");

  const AutocorrEstimate ac = integrated_autocorrelation(xs);  // throws if degenerate
  if (ac.ess < 1000.0)
    throw std::invalid_argument(
        "cumulant diagnostics need >= 1000 effective samples");

  n_blocks = static_cast<int>(std::min<int64_t>(n_blocks, n / 2));
  const auto ranges = block_ranges(n, n_blocks);
  struct Pow {
    double w = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  };
  std::vector<Pow> blk(n_blocks);
  for (int b = 0; b < n_blocks; ++b) {
    for (int64_t i = ranges[b].first; i < ranges[b].second; ++i) {
      const double x = xs[i];
      blk[b].s1 += x;
      blk[b].s2 += x * x;
      blk[b].s3 += x * x * x;
      blk[b].s4 += x * x * x * x;
    }
    blk[b].w = static_cast<double>(ranges[b].second - ranges[b].first);
  }

  struct Stats {
    double mean, var, skew, kurt;
  };
  auto eval = [&](int skip) {
    double w = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (int b = 0; b < n_blocks; ++b) {
      if (b == skip) continue;
      w += blk[b].w;
      s1 += blk[b].s1;
      s2 += blk[b].s2;
      s3 += blk[b].s3;
      s4 += blk[b].s4;
    }
    const double m1 = s1 / w;
    const double m2 = s2 / w - m1 * m1;
    const double m3 = s3 / w - 3.0 * m1 * s2 / w + 2.0 * m1 * m1 * m1;
    const double m4 = s4 / w - 4.0 * m1 * s3 / w + 6.0 * m1 * m1 * s2 / w -
                      3.0 * m1 * m1 * m1 * m1;
    Stats st;
    st.mean = m1;
    st.var = w / (w - 1.0) * m2;
    if (!(m2 > 0.0)) throw std::invalid_argument("degenerate (constant) input");
    const double g1 = m3 / std::pow(m2, 1.5);
    const double g2 = m4 / (m2 * m2) - 3.0;
    st.skew = g1 * std::sqrt(w * (w - 1.0)) / (w - 2.0);
    st.kurt = ((w + 1.0) * g2 + 6.0) * (w - 1.0) / ((w - 2.0) * (w - 3.0));
    return st;
  };

  const Stats full = eval(-1);
  std::vector<double> rm(n_blocks), rv(n_blocks), rs(n_blocks), rk(n_blocks);
  for (int b = 0; b < n_blocks; ++b) {
    const Stats s = eval(b);
    rm[b] = s.mean;
    rv[b] = s.var;
    rs[b] = s.skew;
    rk[b] = s.kurt;
  }

  CumulantDiagnostics d;
  d.mean = full.mean;
  d.mean_err = jackknife_from_replicas(full.mean, rm).err;
  d.variance = full.var;
  d.variance_err = jackknife_from_replicas(full.var, rv).err;
  d.skewness = full.skew;
  d.skewness_err = jackknife_from_replicas(full.skew, rs).err;
  d.excess_kurtosis = full.kurt;
  d.excess_kurtosis_err = jackknife_from_replicas(full.kurt, rk).err;
  d.ess = ac.ess;
  return d;
}

bool ConvergenceSweep::kurtosis_trend_decreasing(double n_sigma) const {
  for (size_t i = 1; i < max_abs_kurtosis.size(); ++i) {
    const double err = std::sqrt(
        max_abs_kurtosis_err[i] * max_abs_kurtosis_err[i] +
        max_abs_kurtosis_err[i - 1] * max_abs_kurtosis_err[i - 1]);
    if (max_abs_kurtosis[i] > max_abs_kurtosis[i - 1] + n_sigma * err)
      return false;
  }
  return true;
}

ConvergenceSweep gaussian_convergence_sweep(std::span<const LineSampleSet> sets,
                                            int n_blocks) {
  if (sets.empty()) throw std::invalid_argument("no sample sets");
  ConvergenceSweep sweep;
  for (const auto& set : sets) {
    if (set.s_values.size() != sets.front().s_values.size())
      throw std::invalid_argument("sample sets must share the s grid");
    sweep.L_values.push_back(set.L);

    double worst = -1.0, worst_err = 0.0;
    for (size_t si = 0; si < set.s_values.size(); ++si) {
      ConvergenceEntry e;
      e.L = set.L;
      e.s = set.s_values[si];
      const auto col = set.column(si);
      e.cumulants = cumulant_diagnostics(col, n_blocks);
      if (std::abs(e.cumulants.excess_kurtosis) > worst) {
        worst = std::abs(e.cumulants.excess_kurtosis);
        worst_err = e.cumulants.excess_kurtosis_err;
      }
      sweep.entries.push_back(std::move(e));
    }
    sweep.max_abs_kurtosis.push_back(worst);
    sweep.max_abs_kurtosis_err.push_back(worst_err);

    SamplesView view{set.samples.data(), set.n_measurements,
                     static_cast<int>(set.s_values.size())};
    const auto grid = default_cf_grid(static_cast<int>(set.s_values.size()));
    sweep.cf_max_gap.push_back(cf_report(view, grid, n_blocks).max_abs_gap);
  }
  return sweep;
}

}  // namespace isingspec
