#include "isingspec/samplers.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "isingspec/digest.hpp"

namespace isingspec {

std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::Metropolis: return "metropolis";
    case SamplerKind::HeatBath: return "heat_bath";
    case SamplerKind::WolffGhost: return "wolff_ghost";
    case SamplerKind::Mixed: return "mixed";
  }
  return "?";
}

SamplerKind sampler_from_string(const std::string& s) {
  if (s == "metropolis") return SamplerKind::Metropolis;
  if (s == "heat_bath") return SamplerKind::HeatBath;
  if (s == "wolff_ghost") return SamplerKind::WolffGhost;
  if (s == "mixed") return SamplerKind::Mixed;
  throw std::invalid_argument("unknown sampler: " + s);
}

Sampler::Sampler(const ModelParams& params, const GridGeometry& geom)
    : params_(params), geom_(geom) {
  params_.validate();
  h_lat_ = params_.lattice_field();
  const int dim = geom_.dim();
  const int64_t n = geom_.n_sites();
  max_nbr_ = 2 * dim;
  if (n > std::numeric_limits<int32_t>::max())
    throw std::invalid_argument("lattice too large for sampler index tables");

  nbr_.assign(static_cast<size_t>(n) * max_nbr_, -1);
  vcnt_.assign(static_cast<size_t>(n), 0);
  for (int64_t x = 0; x < n; ++x) {
    for (int ax = 0; ax < dim; ++ax) {
      nbr_[x * max_nbr_ + 2 * ax] = static_cast<int32_t>(geom_.neighbor(x, ax, +1));
      nbr_[x * max_nbr_ + 2 * ax + 1] = static_cast<int32_t>(geom_.neighbor(x, ax, -1));
    }
    vcnt_[x] = static_cast<uint8_t>(geom_.virtual_neighbors(x));
  }

  // acceptance tables indexed by nsum + max_nbr_, where nsum is the sum of
  // neighbor spins plus the virtual +1 count
  const int table = 2 * max_nbr_ + 1;
  acc_up_.resize(table);
  acc_down_.resize(table);
  p_up_.resize(table);
  for (int i = 0; i < table; ++i) {
    const double nsum = i - max_nbr_;
    const double f = params_.beta * nsum + h_lat_;
    acc_up_[i] = std::min(1.0, std::exp(-2.0 * f));
    acc_down_[i] = std::min(1.0, std::exp(2.0 * f));
    p_up_[i] = 1.0 / (1.0 + std::exp(-2.0 * f));
  }

  p_bond_ = 1.0 - std::exp(-2.0 * params_.beta);
  p_ghost_.resize(max_nbr_ + 1);
  for (int v = 0; v <= max_nbr_; ++v)
    p_ghost_[v] = 1.0 - std::exp(-2.0 * (h_lat_ + params_.beta * v));
}

void Sampler::metropolis_sweep(SpinField& field, Rng& rng) const {
  const int64_t n = geom_.n_sites();
  int8_t* s = field.spins.data();
  for (int64_t x = 0; x < n; ++x) {
    int nsum = vcnt_[x];
    const int32_t* nb = &nbr_[x * max_nbr_];
    for (int k = 0; k < max_nbr_; ++k)
      if (nb[k] >= 0) nsum += s[nb[k]];
    const double acc =
        (s[x] > 0 ? acc_up_ : acc_down_)[nsum + max_nbr_];
    if (acc >= 1.0 || rng.uniform() < acc) s[x] = -s[x];
  }
}

void Sampler::heat_bath_sweep(SpinField& field, Rng& rng) const {
  const int64_t n = geom_.n_sites();
  int8_t* s = field.spins.data();
  for (int64_t x = 0; x < n; ++x) {
    int nsum = vcnt_[x];
    const int32_t* nb = &nbr_[x * max_nbr_];
    for (int k = 0; k < max_nbr_; ++k)
      if (nb[k] >= 0) nsum += s[nb[k]];
    s[x] = rng.uniform() < p_up_[nsum + max_nbr_] ? int8_t{1} : int8_t{-1};
  }
}

uint64_t Sampler::wolff_ghost_step(SpinField& field, Rng& rng,
                                   ClusterWorkspace& ws) const {
  const int64_t n = geom_.n_sites();
  int8_t* s = field.spins.data();
  // flags of previous members were cleared on exit, so only resize on first use
  if (ws.flag.size() != static_cast<size_t>(n)) ws.flag.assign(n, 0);
  ws.stack.clear();
  ws.members.clear();

  const int64_t seed = static_cast<int64_t>(rng.below(static_cast<uint64_t>(n)));
  const int8_t v = s[seed];
  bool ghost_in = false;

  ws.flag[seed] = 1;
  ws.stack.push_back(seed);
  ws.members.push_back(seed);

  while (!ws.stack.empty()) {
    const int64_t x = ws.stack.back();
    ws.stack.pop_back();

    const int32_t* nb = &nbr_[x * max_nbr_];
    for (int k = 0; k < max_nbr_; ++k) {
      const int32_t y = nb[k];
      if (y < 0 || ws.flag[y] || s[y] != v) continue;
      if (rng.uniform() < p_bond_) {
        ws.flag[y] = 1;
        ws.stack.push_back(y);
        ws.members.push_back(y);
      }
    }

    // ghost bond: the ghost spin is +1 and couples to x with strength
    // h_lat + beta * (virtual neighbor count)
    if (!ghost_in && v > 0 && p_ghost_[vcnt_[x]] > 0.0 &&
        rng.uniform() < p_ghost_[vcnt_[x]]) {
      ghost_in = true;
      // the ghost neighbors every site: give each aligned outside site its
      // one activation attempt
      for (int64_t y = 0; y < n; ++y) {
        if (ws.flag[y] || s[y] != v) continue;
        if (p_ghost_[vcnt_[y]] > 0.0 && rng.uniform() < p_ghost_[vcnt_[y]]) {
          ws.flag[y] = 1;
          ws.stack.push_back(y);
          ws.members.push_back(y);
        }
      }
    }
  }

  const uint64_t size = ws.members.size();
  if (!ghost_in) {
    for (int64_t x : ws.members) s[x] = -s[x];
  } else {
    // flipping cluster + ghost, then globally negating, restores the
    // ghost to +1: net effect is a flip of the complement
    for (int64_t x = 0; x < n; ++x)
      if (!ws.flag[x]) s[x] = -s[x];
  }
  for (int64_t x : ws.members) ws.flag[x] = 0;
  return size;
}

void Sampler::compound_update(ChainState& chain, SamplerKind kind,
                              ClusterWorkspace& ws) const {
  switch (kind) {
    case SamplerKind::Metropolis:
      metropolis_sweep(chain.field, chain.rng);
      break;
    case SamplerKind::HeatBath:
      heat_bath_sweep(chain.field, chain.rng);
      break;
    case SamplerKind::WolffGhost:
      wolff_ghost_step(chain.field, chain.rng, ws);
      break;
    case SamplerKind::Mixed:
      wolff_ghost_step(chain.field, chain.rng, ws);
      metropolis_sweep(chain.field, chain.rng);
      break;
  }
  ++chain.sweeps_done;
}

void metropolis_sweep(ChainState& chain, const ModelParams& params) {
  Sampler(params, chain.field.geom).metropolis_sweep(chain.field, chain.rng);
  ++chain.sweeps_done;
}

void heat_bath_sweep(ChainState& chain, const ModelParams& params) {
  Sampler(params, chain.field.geom).heat_bath_sweep(chain.field, chain.rng);
  ++chain.sweeps_done;
}

uint64_t wolff_ghost_step(ChainState& chain, const ModelParams& params) {
  ClusterWorkspace ws;
  const uint64_t size =
      Sampler(params, chain.field.geom).wolff_ghost_step(chain.field, chain.rng, ws);
  ++chain.sweeps_done;
  return size;
}

void Schedule::validate() const {
  if (therm_updates < 0) throw std::invalid_argument("therm_updates must be >= 0");
  if (n_measure <= 0) throw std::invalid_argument("n_measure must be > 0");
  if (stride <= 0) throw std::invalid_argument("stride must be > 0");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_path.empty())
    throw std::invalid_argument("checkpoint_every set without checkpoint_path");
}

std::vector<SampleSeries> run_chain(const ModelParams& params,
                                    const Schedule& schedule, ChainState& chain,
                                    std::span<const NamedHook> hooks,
                                    const ProgressFn& progress) {
  schedule.validate();
  const Sampler sampler(params, chain.field.geom);
  ClusterWorkspace ws;

  // position bookkeeping: measurements happen at sweeps therm + k*stride
  int64_t measured = 0;
  if (static_cast<int64_t>(chain.sweeps_done) > schedule.therm_updates) {
    const int64_t past = chain.sweeps_done - schedule.therm_updates;
    if (past % schedule.stride != 0)
      throw std::runtime_error("chain position is not at a measurement boundary");
    measured = past / schedule.stride;
  }
  const int64_t already = measured;

  std::vector<SampleSeries> out(hooks.size());
  for (size_t i = 0; i < hooks.size(); ++i) {
    out[i].observable = hooks[i].name;
    out[i].sweep_stride = schedule.stride;
    if (schedule.n_measure > measured)
      out[i].values.reserve(schedule.n_measure - measured);
  }

  while (static_cast<int64_t>(chain.sweeps_done) < schedule.therm_updates)
    sampler.compound_update(chain, schedule.sampler, ws);

  while (measured < schedule.n_measure) {
    for (int64_t i = 0; i < schedule.stride; ++i)
      sampler.compound_update(chain, schedule.sampler, ws);
    for (size_t i = 0; i < hooks.size(); ++i) {
      try {
        out[i].values.push_back(hooks[i].fn(chain.field));
      } catch (const std::exception& e) {
        throw std::runtime_error("observable hook '" + hooks[i].name +
                                 "' failed at compound update " +
                                 std::to_string(chain.sweeps_done) + ": " + e.what());
      }
    }
    ++measured;
    if (schedule.checkpoint_every > 0 &&
        (measured - already) % schedule.checkpoint_every == 0)
      save_checkpoint(schedule.checkpoint_path, chain, params);
    if (progress) progress(measured, schedule.n_measure);
  }
  return out;
}

namespace {

constexpr uint32_t kCheckpointMagic = 0x4953434bu;  // "ISCK"
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const std::string& buf, size_t& pos) {
  if (pos + sizeof(T) > buf.size())
    throw std::runtime_error("checkpoint truncated");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ChainState& chain,
                     const ModelParams& params) {
  std::string buf;
  put(buf, kCheckpointMagic);
  put(buf, kCheckpointVersion);
  put(buf, params.d);
  put(buf, params.a);
  put(buf, params.beta);
  put(buf, params.h);
  put(buf, params.eta);
  const auto& geom = chain.field.geom;
  put(buf, static_cast<int32_t>(geom.dim()));
  for (int64_t e : geom.extents()) put(buf, e);
  put(buf, static_cast<uint8_t>(geom.bc()));
  put(buf, chain.sweeps_done);
  for (uint64_t w : chain.rng.state()) put(buf, w);
  buf.append(reinterpret_cast<const char*>(chain.field.spins.data()),
             chain.field.spins.size());
  const uint64_t digest = fnv1a64(buf.data(), buf.size());
  put(buf, digest);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("checkpoint rename failed: " + path);
}

ChainState load_checkpoint(const std::string& path, const ModelParams& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(is)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 8) throw std::runtime_error("checkpoint truncated");

  const size_t body = buf.size() - 8;
  uint64_t stored;
  std::memcpy(&stored, buf.data() + body, 8);
  if (fnv1a64(buf.data(), body) != stored)
    throw std::runtime_error("checkpoint digest mismatch: " + path);

  size_t pos = 0;
  if (get<uint32_t>(buf, pos) != kCheckpointMagic)
    throw std::runtime_error("not a checkpoint file: " + path);
  if (get<uint32_t>(buf, pos) != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version: " + path);

  ModelParams stored_params;
  stored_params.d = get<int>(buf, pos);
  stored_params.a = get<double>(buf, pos);
  stored_params.beta = get<double>(buf, pos);
  stored_params.h = get<double>(buf, pos);
  stored_params.eta = get<double>(buf, pos);
  if (stored_params.d != params.d || stored_params.a != params.a ||
      stored_params.beta != params.beta || stored_params.h != params.h ||
      stored_params.eta != params.eta)
    throw std::runtime_error("checkpoint parameters do not match the run config");

  const auto dim = get<int32_t>(buf, pos);
  std::vector<int64_t> extents(dim);
  for (auto& e : extents) e = get<int64_t>(buf, pos);
  const auto bc = static_cast<Boundary>(get<uint8_t>(buf, pos));

  ChainState chain;
  chain.field.geom = GridGeometry(extents, bc);
  chain.sweeps_done = get<uint64_t>(buf, pos);
  std::array<uint64_t, 4> state;
  for (auto& w : state) w = get<uint64_t>(buf, pos);
  chain.rng.set_state(state);

  const auto n = static_cast<size_t>(chain.field.geom.n_sites());
  if (pos + n != body) throw std::runtime_error("checkpoint size mismatch");
  chain.field.spins.resize(n);
  std::memcpy(chain.field.spins.data(), buf.data() + pos, n);
  chain.field.check();
  return chain;
}

AutocorrEstimate integrated_autocorrelation(std::span<const double> series) {
  const auto n = static_cast<int64_t>(series.size());
  if (n < 100)
    throw std::invalid_argument("autocorrelation needs >= 100 measurements");
  double m = 0.0;
  for (double x : series) {
    if (!std::isfinite(x))
      throw std::invalid_argument("non-finite value in series");
    m += x;
  }
  m /= static_cast<double>(n);

  double c0 = 0.0;
  for (double x : series) c0 += (x - m) * (x - m);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) throw std::invalid_argument("series has zero variance");

  const int64_t w_max = n / 4;
  double tau = 0.5;
  int64_t window = w_max;
  for (int64_t w = 1; w <= w_max; ++w) {
    double c = 0.0;
    for (int64_t i = 0; i + w < n; ++i)
      c += (series[i] - m) * (series[i + w] - m);
    c /= static_cast<double>(n);
    tau += c / c0;
    if (static_cast<double>(w) >= 6.0 * tau) {
      window = w;
      break;
    }
  }

  AutocorrEstimate est;
  est.tau_int = std::max(0.5, tau);
  est.window = window;
  est.ess = static_cast<double>(n) / (2.0 * est.tau_int);
  return est;
}

}  // namespace isingspec
