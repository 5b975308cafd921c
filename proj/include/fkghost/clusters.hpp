#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fkghost/lattice.hpp"

namespace fkghost {

// Union-find with path compression and union by size.
class DisjointSet {
 public:
  void reset(int n) {
    parent_.resize(n);
    size_.assign(n, 1);
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }

  int find(int x) {
    int root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      int next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  int size_of_root(int root) const { return size_[root]; }

 private:
  std::vector<int32_t> parent_;
  std::vector<int32_t> size_;
};

// Partition of sites into FK-open clusters. Ghost edges never merge site
// clusters; ghost connectivity is the per-cluster flag. Cluster ids are the
// row-major-smallest site index of each cluster.
struct ClusterDecomposition {
  std::vector<int32_t> label;           // per site -> cluster id
  std::vector<int32_t> ids;             // ascending
  std::vector<int32_t> sizes;           // aligned with ids
  std::vector<uint8_t> ghost_connected; // aligned with ids
  std::optional<int32_t> ghost_cluster_id;  // smallest ghost-connected id

  int n_clusters() const { return static_cast<int>(ids.size()); }
  int index_of_id(int32_t id) const;
  int cluster_index_of_site(int site) const { return index_of_id(label[site]); }
};

// Merge open internal edges into ds (ds must be reset to n_sites first).
// Wired boundary pre-merges all sites touching the lattice edge.
void union_open_edges(const GhostGraph& g, const uint8_t* internal_open, DisjointSet& ds);

ClusterDecomposition find_clusters(const GhostGraph& g, const FkConfig& fk);

// Cluster structure of the configuration restricted to a region: only region
// sites, only internal edges with both endpoints in the region.
struct RegionClusters {
  std::vector<int32_t> region_sites;     // site indices, row-major
  std::vector<int32_t> local_of_site;    // per lattice site, -1 outside region
  std::vector<int32_t> label;            // per local site -> cluster index
  std::vector<int32_t> sizes;            // per cluster
  std::vector<uint8_t> ghost_connected;  // per cluster
  std::vector<int32_t> rep_site;         // per cluster: smallest member site index

  int n_clusters() const { return static_cast<int>(sizes.size()); }
};

RegionClusters region_clusters(const GhostGraph& g, const FkConfig& fk, const Region& region);

}  // namespace fkghost
