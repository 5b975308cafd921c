#include "fkghost/clusters.hpp"

#include <algorithm>
#include <stdexcept>

namespace fkghost {

int ClusterDecomposition::index_of_id(int32_t id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) throw std::invalid_argument("unknown cluster id");
  return static_cast<int>(it - ids.begin());
}

void union_open_edges(const GhostGraph& g, const uint8_t* internal_open, DisjointSet& ds) {
  const auto& edges = g.internal_edges;
  for (size_t e = 0; e < edges.size(); ++e)
    if (internal_open[e]) ds.unite(edges[e].a, edges[e].b);
  if (g.spec.boundary == Boundary::WiredFk) {
    int anchor = -1;
    for (int s = 0; s < g.n_sites(); ++s) {
      if (g.boundary_contacts[s] == 0) continue;
      if (anchor < 0)
        anchor = s;
      else
        ds.unite(anchor, s);
    }
  }
}

ClusterDecomposition find_clusters(const GhostGraph& g, const FkConfig& fk) {
  if (static_cast<int>(fk.internal_open.size()) != g.n_internal() ||
      static_cast<int>(fk.ghost_open.size()) != g.n_sites())
    throw std::invalid_argument("configuration does not match graph");

  const int n = g.n_sites();
  DisjointSet ds;
  ds.reset(n);
  union_open_edges(g, fk.internal_open.data(), ds);

  ClusterDecomposition d;
  d.label.assign(n, -1);
  // canonical id: smallest site index in each cluster (first hit in site order)
  std::vector<int32_t> id_of_root(n, -1);
  for (int s = 0; s < n; ++s) {
    int root = ds.find(s);
    if (id_of_root[root] < 0) id_of_root[root] = s;
    d.label[s] = id_of_root[root];
  }

  std::vector<int32_t> index_of_id(n, -1);
  for (int s = 0; s < n; ++s) {
    if (d.label[s] == s) {
      index_of_id[s] = static_cast<int32_t>(d.ids.size());
      d.ids.push_back(s);
      d.sizes.push_back(0);
      d.ghost_connected.push_back(0);
    }
  }
  for (int s = 0; s < n; ++s) {
    int idx = index_of_id[d.label[s]];
    d.sizes[idx] += 1;
    if (fk.ghost_open[s]) d.ghost_connected[idx] = 1;
  }
  for (size_t i = 0; i < d.ids.size(); ++i) {
    if (d.ghost_connected[i]) {
      d.ghost_cluster_id = d.ids[i];
      break;
    }
  }
  return d;
}

RegionClusters region_clusters(const GhostGraph& g, const FkConfig& fk, const Region& region) {
  const auto& spec = g.spec;
  if (spec.boundary == Boundary::Periodic)
    throw std::invalid_argument("region clusters need a planar embedding, not periodic");

  RegionClusters rc;
  rc.local_of_site.assign(spec.n_sites(), -1);
  for (int row = 0; row < spec.height; ++row)
    for (int col = 0; col < spec.width; ++col)
      if (region.contains(col, row)) {
        int s = spec.site_index(col, row);
        rc.local_of_site[s] = static_cast<int32_t>(rc.region_sites.size());
        rc.region_sites.push_back(s);
      }

  const int m = static_cast<int>(rc.region_sites.size());
  DisjointSet ds;
  ds.reset(m);
  for (int e = 0; e < g.n_internal(); ++e) {
    if (!fk.internal_open[e]) continue;
    int la = rc.local_of_site[g.internal_edges[e].a];
    int lb = rc.local_of_site[g.internal_edges[e].b];
    if (la >= 0 && lb >= 0) ds.unite(la, lb);
  }

  rc.label.assign(m, -1);
  std::vector<int32_t> cluster_of_root(m, -1);
  for (int l = 0; l < m; ++l) {
    int root = ds.find(l);
    if (cluster_of_root[root] < 0) {
      cluster_of_root[root] = static_cast<int32_t>(rc.sizes.size());
      rc.sizes.push_back(0);
      rc.ghost_connected.push_back(0);
      rc.rep_site.push_back(rc.region_sites[l]);  // smallest: first in local order
    }
    int c = cluster_of_root[root];
    rc.label[l] = c;
    rc.sizes[c] += 1;
    if (fk.ghost_open[rc.region_sites[l]]) rc.ghost_connected[c] = 1;
  }
  return rc;
}

}  // namespace fkghost
