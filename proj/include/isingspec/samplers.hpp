#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "isingspec/lattice.hpp"
#include "isingspec/rng.hpp"

namespace isingspec {

enum class SamplerKind { Metropolis, HeatBath, WolffGhost, Mixed };

std::string to_string(SamplerKind k);
SamplerKind sampler_from_string(const std::string& s);

// One Markov chain: configuration + generator + update count. Value type;
// chains are cloned and advanced independently, never shared.
struct ChainState {
  SpinField field;
  Rng rng;
  uint64_t sweeps_done = 0;  // compound updates applied
};

// Scratch space for cluster growth, owned by the caller so that a const
// Sampler can be shared across concurrently running chains.
struct ClusterWorkspace {
  std::vector<int64_t> stack;
  std::vector<int64_t> members;
  std::vector<uint8_t> flag;
};

// Update kernels for a fixed (params, geometry) pair. The Gibbs weight is
//   exp( beta * sum_bonds sigma sigma + h_lat * sum_x sigma_x ),
// with h_lat = params.lattice_field(). Bonds follow the +e convention per
// axis (a periodic axis of extent 2 therefore carries a doubled bond);
// under Plus bc the clamped boundary enters as extra +1 neighbors.
class Sampler {
 public:
  Sampler(const ModelParams& params, const GridGeometry& geom);

  // One full lattice scan of single-site Metropolis updates,
  // acceptance min(1, exp(-dE)), dE = 2 sigma_x (beta * nsum + h_lat).
  void metropolis_sweep(SpinField& field, Rng& rng) const;

  // One full lattice scan of Glauber (conditional-distribution) updates,
  // P(sigma_x = +1) = 1 / (1 + exp(-2 (beta * nsum + h_lat))).
  void heat_bath_sweep(SpinField& field, Rng& rng) const;

  // One cluster flip of the model extended by a ghost spin that couples to
  // every site with strength h_lat (plus the boundary clamp under Plus bc).
  // Reduces to the plain cluster update at h_lat = 0. Returns the number of
  // real sites in the cluster.
  uint64_t wolff_ghost_step(SpinField& field, Rng& rng,
                            ClusterWorkspace& ws) const;

  // One compound update: Mixed = one cluster step followed by one
  // Metropolis sweep; the other kinds apply a single step of themselves.
  void compound_update(ChainState& chain, SamplerKind kind,
                       ClusterWorkspace& ws) const;

  const GridGeometry& geometry() const { return geom_; }
  double lattice_field() const { return h_lat_; }

 private:
  ModelParams params_;
  GridGeometry geom_;
  double h_lat_ = 0.0;
  int max_nbr_ = 0;  // 2 * dim
  std::vector<int32_t> nbr_;    // [site * max_nbr_ + k], -1 if absent
  std::vector<uint8_t> vcnt_;   // virtual +1 neighbors (Plus bc)
  std::vector<double> acc_up_, acc_down_;  // Metropolis acceptance by nsum
  std::vector<double> p_up_;               // heat-bath P(+1) by nsum
  double p_bond_ = 0.0;                    // 1 - exp(-2 beta)
  std::vector<double> p_ghost_;            // by virtual-neighbor count
};

// Convenience single-shot wrappers (build the kernel tables on each call;
// fine for small lattices and tests).
void metropolis_sweep(ChainState& chain, const ModelParams& params);
void heat_bath_sweep(ChainState& chain, const ModelParams& params);
uint64_t wolff_ghost_step(ChainState& chain, const ModelParams& params);

// ---------------------------------------------------------------------------
// Chain driver

struct Schedule {
  int64_t therm_updates = 0;  // compound updates discarded
  int64_t n_measure = 0;      // measurements to record
  int64_t stride = 1;         // compound updates between measurements
  SamplerKind sampler = SamplerKind::Mixed;
  int64_t checkpoint_every = 0;  // measurements between checkpoints, 0 = off
  std::string checkpoint_path;
  void validate() const;  // throws on non-positive entries
};

struct SampleSeries {
  std::string observable;
  int64_t sweep_stride = 1;
  std::vector<double> values;
  int64_t span() const { return sweep_stride * static_cast<int64_t>(values.size()); }
};

struct NamedHook {
  std::string name;
  std::function<double(const SpinField&)> fn;
};

using ProgressFn = std::function<void(int64_t measured, int64_t total)>;

// Thermalizes (if the chain has not yet passed therm_updates), then records
// each hook every `stride` compound updates. The chain's sweeps_done tracks
// position, so a chain restored from a checkpoint continues exactly where
// it left off: measurements already taken are not re-emitted, and the
// concatenation of pre-checkpoint and post-resume series is bit-identical
// to an uninterrupted run. Hook failures are rethrown with the chain
// position attached.
std::vector<SampleSeries> run_chain(const ModelParams& params,
                                    const Schedule& schedule, ChainState& chain,
                                    std::span<const NamedHook> hooks,
                                    const ProgressFn& progress = {});

// Checkpoint I/O: versioned binary snapshot of ChainState with an
// integrity digest. Loading verifies the digest and version.
void save_checkpoint(const std::string& path, const ChainState& chain,
                     const ModelParams& params);
ChainState load_checkpoint(const std::string& path, const ModelParams& params);

// ---------------------------------------------------------------------------
// Error analysis

struct AutocorrEstimate {
  double tau_int = 0.5;  // in measurement units; IID convention 0.5
  double ess = 0.0;      // N / (2 tau_int)
  int64_t window = 0;    // summation window used
};

// Windowed autocorrelation sum with automatic window: the first W with
// W >= 6 * tau_int(W). Requires >= 100 finite samples and nonzero variance.
AutocorrEstimate integrated_autocorrelation(std::span<const double> series);

}  // namespace isingspec
