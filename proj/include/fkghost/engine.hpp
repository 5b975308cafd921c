#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fkghost/clusters.hpp"
#include "fkghost/lattice.hpp"
#include "fkghost/rng.hpp"

namespace fkghost {

struct ChainState {
  SpinConfig spins;
  FkConfig bonds;
  int64_t sweep_count = 0;
  Rng rng;
};

ChainState init_chain(const GhostGraph& g, uint64_t seed);

// One full cluster update: bonds given spins, then cluster spins given
// bonds. Ghost-connected clusters are set to +1. Leaves the Gibbs measure
// with field H invariant.
void sw_step(ChainState& state, const GhostGraph& g, const FieldParams& params);

// Single-cluster flip; zero field only, free or periodic boundary. Bonds in
// the state are kept all-closed.
void wolff_step(ChainState& state, const GhostGraph& g, double beta);

SpinConfig es_assign_spins(const GhostGraph& g, const FkConfig& fk, Rng& rng);

// Independent per-cluster ghost attachment with probability tanh(H |C|),
// flags in canonical cluster order. The bonds must cover internal edges only
// (ghost edges ignored); free boundary.
std::vector<uint8_t> tanh_attach_ghost(const GhostGraph& g, const FkConfig& internal_fk,
                                       const FieldParams& params, Rng& rng);

// log of the cosh-product reweighting factor prod_C cosh(H |C|).
double rn_log_weight(const GhostGraph& g, const FkConfig& internal_fk,
                     const FieldParams& params);

// --- observables -----------------------------------------------------------

struct Observable {
  std::string name;
  // Needs the cluster decomposition only when use_clusters is set.
  bool use_clusters = false;
  std::function<double(const ChainState&, const GhostGraph&, const ClusterDecomposition*)>
      eval;
};

// Known names: mag, abs_mag, energy, ghost_fraction, largest_cluster,
// n_clusters, sigma:<col>,<row>, pair:<col>,<row>:<col>,<row>
Observable make_observable(const std::string& name, const LatticeSpec& spec);

// --- chain driving ----------------------------------------------------------

enum class Sampler : uint8_t { SwendsenWang = 0, Wolff = 1 };

struct SampleSchedule {
  int64_t sweeps = 0;       // total update steps
  int64_t burn_in = 0;      // discarded leading steps
  int64_t thin = 1;         // emit every thin-th step after burn-in
  uint64_t seed = 1;
  Sampler sampler = Sampler::SwendsenWang;

  void validate() const;
  int64_t n_samples() const { return (sweeps - burn_in) / thin; }
};

struct SampleSeries {
  std::vector<std::string> names;
  std::vector<int64_t> sweep;            // per retained sample
  std::vector<std::vector<double>> values;  // [observable][sample]
};

SampleSeries sample_chain(const GhostGraph& g, const FieldParams& params,
                          const SampleSchedule& schedule,
                          const std::vector<Observable>& observables);

// Visitor variant for custom accumulation; called on every retained sample.
void sample_chain_visit(const GhostGraph& g, const FieldParams& params,
                        const SampleSchedule& schedule,
                        const std::function<void(const ChainState&, int64_t sweep)>& visit);

// 20x the measured integrated autocorrelation time of the energy on a short
// pilot run; used when callers do not override burn-in.
int64_t default_burn_in(const GhostGraph& g, const FieldParams& params, uint64_t seed,
                        Sampler sampler = Sampler::SwendsenWang);

// --- checkpoints -------------------------------------------------------------

std::vector<uint8_t> serialize_chain(const LatticeSpec& spec, const GhostGraph& g,
                                     const ChainState& state);
ChainState deserialize_chain(const LatticeSpec& spec, const GhostGraph& g,
                             const std::vector<uint8_t>& bytes);
void save_chain(const std::string& path, const LatticeSpec& spec, const GhostGraph& g,
                const ChainState& state);
ChainState load_chain(const std::string& path, const LatticeSpec& spec, const GhostGraph& g);

}  // namespace fkghost
