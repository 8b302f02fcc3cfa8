#include "isingspec/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace isingspec {

std::string to_string(Boundary bc) {
  switch (bc) {
    case Boundary::Periodic: return "periodic";
    case Boundary::Free: return "free";
    case Boundary::Plus: return "plus";
  }
  return "?";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::Periodic;
  if (s == "free") return Boundary::Free;
  if (s == "plus") return Boundary::Plus;
  throw std::invalid_argument("unknown boundary condition: " + s);
}

double ModelParams::lattice_field() const {
  return std::pow(a, field_exponent()) * h;
}

void ModelParams::validate() const {
  if (d != 2 && d != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (!(a > 0.0)) throw std::invalid_argument("lattice spacing a must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(h >= 0.0)) throw std::invalid_argument("external field h must be >= 0");
  if (d == 2 && eta != 0.25)
    throw std::invalid_argument("eta is fixed to 1/4 for d=2");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
}

double critical_beta(int d) {
  if (d != 2)
    throw std::invalid_argument(
        "no built-in critical point for d != 2; supply beta explicitly");
  // root of sinh(2 beta) = 1
  return 0.5 * std::asinh(1.0);
}

GridGeometry::GridGeometry(std::vector<int64_t> extents, Boundary bc)
    : extents_(std::move(extents)), bc_(bc) {
  if (extents_.empty()) throw std::invalid_argument("extents must be non-empty");
  n_sites_ = 1;
  for (int64_t e : extents_) {
    if (e < 1) throw std::invalid_argument("every extent must be >= 1");
    if (n_sites_ > (int64_t(1) << 62) / e)
      throw std::invalid_argument("site count overflow");
    n_sites_ *= e;
  }
  strides_.assign(extents_.size(), 1);
  for (int ax = static_cast<int>(extents_.size()) - 2; ax >= 0; --ax)
    strides_[ax] = strides_[ax + 1] * extents_[ax + 1];
}

int64_t GridGeometry::linear_index(const std::vector<int64_t>& coords) const {
  int64_t idx = 0;
  for (size_t ax = 0; ax < extents_.size(); ++ax) idx += coords[ax] * strides_[ax];
  return idx;
}

std::vector<int64_t> GridGeometry::coords_of(int64_t linear) const {
  std::vector<int64_t> c(extents_.size());
  for (size_t ax = 0; ax < extents_.size(); ++ax) {
    c[ax] = linear / strides_[ax];
    linear -= c[ax] * strides_[ax];
  }
  return c;
}

int64_t GridGeometry::neighbor(int64_t site, int axis, int dir) const {
  const int64_t e = extents_[axis];
  if (e == 1) return -1;
  const int64_t stride = strides_[axis];
  const int64_t coord = (site / stride) % e;
  int64_t next = coord + dir;
  if (next < 0 || next >= e) {
    if (bc_ == Boundary::Periodic) next = (next + e) % e;
    else return -1;
  }
  return site + (next - coord) * stride;
}

int GridGeometry::virtual_neighbors(int64_t site) const {
  if (bc_ != Boundary::Plus) return 0;
  int count = 0;
  for (int ax = 0; ax < dim(); ++ax) {
    if (!axis_has_bonds(ax)) continue;
    const int64_t e = extents_[ax];
    const int64_t coord = (site / strides_[ax]) % e;
    if (coord == 0) ++count;
    if (coord == e - 1) ++count;
  }
  return count;
}

int64_t SpinField::total_magnetization() const {
  int64_t m = 0;
  for (int8_t s : spins) m += s;
  return m;
}

double SpinField::mean_magnetization() const {
  return static_cast<double>(total_magnetization()) /
         static_cast<double>(spins.size());
}

void SpinField::check() const {
  if (static_cast<int64_t>(spins.size()) != geom.n_sites())
    throw std::runtime_error("spin count does not match geometry");
  for (int8_t s : spins)
    if (s != 1 && s != -1) throw std::runtime_error("spin value not in {-1,+1}");
}

SpinField build_lattice(const std::vector<int64_t>& extents, Boundary bc,
                        InitMode init, uint64_t seed, int64_t site_cap) {
  GridGeometry geom(extents, bc);
  if (geom.n_sites() > site_cap)
    throw std::invalid_argument("site count exceeds the configured memory cap");
  SpinField field;
  field.geom = geom;
  field.spins.assign(static_cast<size_t>(geom.n_sites()), int8_t{1});
  if (init == InitMode::Random) {
    Rng rng(seed);
    for (auto& s : field.spins) s = (rng.next_u64() & 1) ? int8_t{1} : int8_t{-1};
  }
  return field;
}

}  // namespace isingspec
