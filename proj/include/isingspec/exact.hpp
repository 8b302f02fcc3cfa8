#pragma once

#include <cstdint>
#include <vector>

#include "isingspec/lattice.hpp"

namespace isingspec {

// Exact moments from full enumeration of a small box.
// two_point is stored as a full symmetric matrix (row-major, n x n).
struct ExactMoments {
  ModelParams params;
  GridGeometry geom;
  std::vector<double> one_point;
  std::vector<double> two_point;
  double log_partition = 0.0;

  double one(int64_t x) const { return one_point[static_cast<size_t>(x)]; }
  double two(int64_t x, int64_t y) const {
    return two_point[static_cast<size_t>(x * geom.n_sites() + y)];
  }
  double truncated(int64_t x, int64_t y) const {
    return two(x, y) - one(x) * one(y);
  }
};

// Exhaustive sum over all 2^N configurations with Boltzmann weight
// exp(beta * sum_bonds ss + h_lat * sum s) (plus the boundary clamp terms
// under Plus bc), log-sum-exp stabilized. Gray-code ordering makes each
// configuration an O(1) energy update; the state space is split into
// contiguous Gray blocks reduced in fixed order, so results do not depend
// on the thread count. Throws when the box exceeds site_cap sites.
ExactMoments enumerate_moments(const ModelParams& params,
                               const std::vector<int64_t>& extents, Boundary bc,
                               int n_threads = 1, int site_cap = 24);

// Transfer-matrix moments for a strip: length N along axis 0, width W along
// axis 1, matrix dimension 2^W. one_point covers every site; two-point
// functions are taken from the reference column 0 up to separation t_cap
// (default: all separations).
struct StripMoments {
  ModelParams params;
  int64_t length = 0;
  int width = 0;
  Boundary bc_length = Boundary::Free;
  Boundary bc_width = Boundary::Free;
  int64_t t_cap = 0;
  std::vector<double> one_point;        // [t * W + i]
  std::vector<double> two_from_origin;  // [(t * W + j) * W + i]
  double log_partition = 0.0;

  double one(int64_t t, int i) const {
    return one_point[static_cast<size_t>(t * width + i)];
  }
  // <sigma_(0,i) sigma_(t,j)>
  double two(int i, int64_t t, int j) const {
    return two_from_origin[static_cast<size_t>((t * width + j) * width + i)];
  }
  double truncated(int i, int64_t t, int j) const {
    return two(i, t, j) - one(0, i) * one(t, j);
  }
};

StripMoments strip_transfer_moments(const ModelParams& params, int64_t length,
                                    int width, Boundary bc_length,
                                    Boundary bc_width, int64_t t_cap = -1);

inline constexpr double kExactTol = 1e-12;

// GKS: truncated two-point functions are nonnegative.
struct GksReport {
  double min_truncated = 0.0;
  bool pass = false;
};
GksReport verify_gks(const ExactMoments& m, double tol = kExactTol);
GksReport verify_gks(const StripMoments& m, double tol = kExactTol);

// Reflection monotonicity of two-point functions. Periodic boxes check the
// translation-averaged axis families (correlations non-increasing in the
// periodic distance along either coordinate) and, on square even boxes,
// the diagonal-reflection comparisons; free/plus boxes check the mid-line
// reflections, which are the exact symmetries a finite open box has.
struct SmmReport {
  int64_t comparisons = 0;
  int64_t violations = 0;
  double worst = 0.0;  // most negative slack found
  bool pass = false;
};
SmmReport verify_smm(const ExactMoments& m, double tol = kExactTol);

// GHS: magnetization concave in the field on h >= 0, and truncated
// correlations at h > 0 dominated by the zero-field correlations.
struct GhsReport {
  double max_second_difference = 0.0;
  bool concavity_pass = false;
  bool dominance_pass = false;
  bool pass = false;
};
GhsReport verify_ghs(const ModelParams& params,
                     const std::vector<int64_t>& extents, Boundary bc,
                     const std::vector<double>& h_grid, double tol = kExactTol,
                     int n_threads = 1);

}  // namespace isingspec
