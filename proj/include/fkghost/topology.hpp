#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fkghost/clusters.hpp"
#include "fkghost/lattice.hpp"

namespace fkghost {

struct EventReport {
  enum class Witness : uint8_t { None = 0, Path = 1, Circuit = 2, ClusterCycle = 3 };

  bool occurred = false;
  Witness kind = Witness::None;
  std::vector<Site> sites;             // path or circuit
  std::vector<int32_t> cluster_cycle;  // representative site per chained cluster
};

// Open-path connectivity restricted to a region (internal edges only).
bool connected(const GhostGraph& g, const FkConfig& fk, Site x, Site y, const Region& region);

// True iff an open path inside the region links x to a site whose ghost edge
// is open (x itself counts).
bool connected_to_ghost(const GhostGraph& g, const FkConfig& fk, Site x, const Region& region);

// Crossing of the annulus by an open path whose whole cluster (within the
// annulus) carries no open ghost edge.
EventReport detect_event_F(const GhostGraph& g, const FkConfig& fk, const Region& annulus);

// Nearest-neighbour circuit of sites surrounding the hole, each circuit site
// ghost-connected within the annulus.
EventReport detect_event_G(const GhostGraph& g, const FkConfig& fk, const Region& annulus);

struct NecklaceOptions {
  int max_clusters = 1;     // K
  double min_mass = 0.0;    // sites
  bool ghost_only = false;  // restrict to ghost-connected clusters
};

// Cyclic chain of distinct clusters at lattice-distance-one adjacency whose
// union contains a circuit surrounding the hole.
EventReport detect_necklace_general(const GhostGraph& g, const FkConfig& fk,
                                    const Region& annulus, const NecklaceOptions& options);

EventReport detect_necklace(const GhostGraph& g, const FkConfig& fk, const Region& annulus,
                            int k_max, double min_mass);

// Annulus A(N, 3N) around the N+1 x N+1 hole anchored at z (lower-left hole
// site). True iff the ghost-connected clusters of the annulus contain a
// circuit surrounding the hole.
bool block_good(const GhostGraph& g, const FkConfig& fk, Site z, int scale);

Region block_annulus(Site z, int scale);

struct BlockField {
  int anchor_cols = 0;
  int anchor_rows = 0;
  Site first_anchor{0, 0};
  std::vector<uint8_t> good;  // row-major over anchors

  double density() const;
};

BlockField block_field_scan(const GhostGraph& g, const FkConfig& fk, int scale);

// --- witness validation -------------------------------------------------------

// Signed winding number of the closed polygonal site path around (px, py).
double winding_number(const std::vector<Site>& circuit, double px, double py);

struct WindingFrame {
  double px = 0.0, py = 0.0;
};
WindingFrame annulus_frame(const Region& annulus);

bool validate_f_witness(const GhostGraph& g, const FkConfig& fk, const Region& annulus,
                        const EventReport& report);
bool validate_g_witness(const GhostGraph& g, const FkConfig& fk, const Region& annulus,
                        const EventReport& report);
bool validate_necklace_witness(const GhostGraph& g, const FkConfig& fk, const Region& annulus,
                               const NecklaceOptions& options, const EventReport& report);

}  // namespace fkghost
