#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fkghost/clusters.hpp"
#include "fkghost/lattice.hpp"

namespace fkghost {

// Dense distribution over bit-indexed configurations. Weights are kept in
// log space (fields up to H=50 appear in saturation tests); zero-weight
// configurations carry -inf.
struct ExactDistribution {
  int dof_bits = 0;
  std::vector<double> log_weight;  // size 2^dof_bits
  double log_partition = 0.0;

  uint64_t support_size() const { return uint64_t{1} << dof_bits; }
  double prob(uint64_t cfg) const;
};

// Edwards-Sokal joint over (spin config, bond config); only the compatible
// pairs (positive weight) are stored.
struct JointEsDistribution {
  int spin_bits = 0;
  int fk_bits = 0;
  struct Entry {
    uint32_t spin_cfg;
    uint32_t fk_cfg;
    double log_weight;
  };
  std::vector<Entry> entries;
  double log_partition = 0.0;

  std::vector<double> marginal_spins() const;  // probabilities, size 2^spin_bits
  std::vector<double> marginal_fk() const;     // probabilities, size 2^fk_bits
};

// Spin config bit k = site k is +1. Boundary free/periodic/plus-spin.
ExactDistribution enumerate_ising(const GhostGraph& g, const FieldParams& params);

// Bond config bits: internal edges in canonical order, then one ghost edge
// per site. Boundary free/periodic/wired-fk.
ExactDistribution enumerate_fk_ghost(const GhostGraph& g, const FieldParams& params);

JointEsDistribution enumerate_joint_es(const GhostGraph& g, const FieldParams& params);

double exact_magnetization(const GhostGraph& g, const FieldParams& params, Site x);
double exact_truncated_two_point(const GhostGraph& g, const FieldParams& params, Site x,
                                 Site y);

// lhs: covariance route; rhs: connection-probability route.
std::pair<double, double> verify_es_identity(const GhostGraph& g, const FieldParams& params,
                                             Site x, Site y);

// Checks, for every internal-edge configuration, the cosh-product reweighting
// of the zero-field measure, the per-cluster tanh attachment law, and the
// mutual independence of attachments. Returns the largest discrepancy.
double verify_rn_coupling(const GhostGraph& g, const FieldParams& params);

// Exact probability of an arbitrary event under enumerate_fk_ghost.
template <typename Pred>
double exact_fk_event_probability(const ExactDistribution& dist, Pred&& pred) {
  double acc = 0.0;
  for (uint64_t cfg = 0; cfg < dist.support_size(); ++cfg)
    if (pred(cfg)) acc += dist.prob(cfg);
  return acc;
}

}  // namespace fkghost
