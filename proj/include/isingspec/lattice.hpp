#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isingspec/rng.hpp"

namespace isingspec {

// Boundary condition of the finite box. Plus clamps a virtual layer of +1
// spins around the box; it is used by the exact-oracle comparison measures,
// production runs default to Periodic.
enum class Boundary { Periodic, Free, Plus };

std::string to_string(Boundary bc);
Boundary boundary_from_string(const std::string& s);

// Model parameters. All lattice-scale quantities derive from these; in
// particular the lattice field is never stored, always recomputed as
//   h_lat = a^{(d+2-eta)/2} * h,
// which for d=2, eta=1/4 is the a^{15/8} h scaling of the near-critical
// magnetization field.
struct ModelParams {
  int d = 2;           // spatial dimension (2 or 3)
  double a = 1.0;      // lattice spacing
  double beta = 0.0;   // inverse temperature (multiplies the bond term only)
  double h = 0.0;      // continuum external field, >= 0
  double eta = 0.25;   // anomalous dimension; fixed to 1/4 for d=2

  double field_exponent() const { return 0.5 * (d + 2 - eta); }
  double lattice_field() const;

  // throws std::invalid_argument on violated invariants
  void validate() const;
};

// Inverse critical temperature of the square-lattice model: the root of
// sinh(2*beta) = 1. Only d=2 has a built-in value.
double critical_beta(int d);

// Site indexing on a finite box. Axis 0 is the "time" axis; the remaining
// axes are space. Linear indices are row-major with axis 0 slowest, so a
// fixed-time column/slab is contiguous.
class GridGeometry {
 public:
  GridGeometry() = default;
  GridGeometry(std::vector<int64_t> extents, Boundary bc);

  int dim() const { return static_cast<int>(extents_.size()); }
  const std::vector<int64_t>& extents() const { return extents_; }
  Boundary bc() const { return bc_; }
  int64_t n_sites() const { return n_sites_; }

  int64_t linear_index(const std::vector<int64_t>& coords) const;
  std::vector<int64_t> coords_of(int64_t linear) const;

  // Neighbor along +/- axis. Returns -1 when the neighbor falls outside the
  // box (Free: no bond; Plus: virtual +1 spin).
  int64_t neighbor(int64_t site, int axis, int dir) const;

  // Number of virtual +1 neighbors (nonzero only under Plus bc).
  int virtual_neighbors(int64_t site) const;

  // Axes of extent 1 carry no bonds (a wrap bond would be a self-loop).
  bool axis_has_bonds(int axis) const { return extents_[axis] > 1; }

  bool operator==(const GridGeometry& other) const {
    return extents_ == other.extents_ && bc_ == other.bc_;
  }

 private:
  std::vector<int64_t> extents_;
  std::vector<int64_t> strides_;
  Boundary bc_ = Boundary::Periodic;
  int64_t n_sites_ = 0;
};

// +-1 spins on a finite box.
struct SpinField {
  GridGeometry geom;
  std::vector<int8_t> spins;

  int8_t spin(int64_t site) const { return spins[static_cast<size_t>(site)]; }
  int64_t total_magnetization() const;
  double mean_magnetization() const;
  void check() const;  // throws if any spin is not exactly +-1
};

enum class InitMode { AllUp, Random };

inline constexpr int64_t kDefaultSiteCap = int64_t(1) << 26;

// Builds a spin field. Random init draws fair +-1 spins from the given seed
// and is deterministic. Throws on non-positive extents or when the site
// count exceeds the cap.
SpinField build_lattice(const std::vector<int64_t>& extents, Boundary bc,
                        InitMode init, uint64_t seed = 0,
                        int64_t site_cap = kDefaultSiteCap);

}  // namespace isingspec
