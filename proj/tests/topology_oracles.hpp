#pragma once

// Brute-force reference implementations for the topology detectors, shared
// by the unit tests and the acceptance suite. All of these take independent
// routes from the production code: plain DFS for connectivity, the
// *-connectivity dual for surrounding circuits, and subsets plus
// permutations for necklace chains.

#include <algorithm>
#include <deque>
#include <utility>
#include <vector>

#include "fkghost/clusters.hpp"
#include "fkghost/lattice.hpp"
#include "fkghost/rng.hpp"

namespace fkghost::testing {

inline FkConfig random_fk(const GhostGraph& g, Rng& rng, double p_int, double p_ghost) {
  FkConfig fk = FkConfig::all_closed(g);
  for (auto& b : fk.internal_open) b = rng.coin(p_int);
  for (auto& b : fk.ghost_open) b = rng.coin(p_ghost);
  return fk;
}

inline bool dfs_connected(const GhostGraph& g, const FkConfig& fk, Site x, Site y,
                          const Region& region) {
  const auto& spec = g.spec;
  std::vector<uint8_t> seen(spec.n_sites(), 0);
  std::deque<int> stack{spec.site_index(x)};
  seen[spec.site_index(x)] = 1;
  const int target = spec.site_index(y);
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    if (s == target) return true;
    for (const auto& [nbr, e] : g.neighbors(s)) {
      Site ns = spec.site_at(nbr);
      if (!fk.internal_open[e] || seen[nbr] || !region.contains(ns.col, ns.row)) continue;
      seen[nbr] = 1;
      stack.push_back(nbr);
    }
  }
  return false;
}

inline bool dfs_ghost(const GhostGraph& g, const FkConfig& fk, Site x, const Region& region) {
  const auto& spec = g.spec;
  std::vector<uint8_t> seen(spec.n_sites(), 0);
  std::deque<int> stack{spec.site_index(x)};
  seen[spec.site_index(x)] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    if (fk.ghost_open[s]) return true;
    for (const auto& [nbr, e] : g.neighbors(s)) {
      Site ns = spec.site_at(nbr);
      if (!fk.internal_open[e] || seen[nbr] || !region.contains(ns.col, ns.row)) continue;
      seen[nbr] = 1;
      stack.push_back(nbr);
    }
  }
  return false;
}

inline std::vector<uint8_t> ghost_member_map(const GhostGraph& g, const FkConfig& fk,
                                             const Region& region) {
  const auto& spec = g.spec;
  std::vector<uint8_t> member(spec.n_sites(), 0);
  for (int row = 0; row < spec.height; ++row)
    for (int col = 0; col < spec.width; ++col)
      if (region.contains(col, row) && dfs_ghost(g, fk, {col, row}, region))
        member[spec.site_index(col, row)] = 1;
  return member;
}

// *-path of non-member annulus sites from the hole side to the outer side;
// off-lattice positions count as outside since regions clip to the lattice.
inline bool star_path_blocks(const GhostGraph& g, const Region& region,
                             const std::vector<uint8_t>& member) {
  const auto& spec = g.spec;
  static const int dc[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dr[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  std::vector<uint8_t> seen(spec.n_sites(), 0);
  std::deque<int> queue;
  auto touches = [&](int col, int row, bool hole) {
    for (int k = 0; k < 8; ++k) {
      int nc = col + dc[k], nr = row + dr[k];
      if (hole) {
        if (spec.in_lattice(nc, nr) && region.in_hole(nc, nr)) return true;
      } else {
        if (!spec.in_lattice(nc, nr) || region.beyond(nc, nr)) return true;
      }
    }
    return false;
  };
  for (int row = 0; row < spec.height; ++row)
    for (int col = 0; col < spec.width; ++col) {
      int s = spec.site_index(col, row);
      if (!region.contains(col, row) || member[s]) continue;
      if (touches(col, row, true)) {
        seen[s] = 1;
        queue.push_back(s);
      }
    }
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    Site site = spec.site_at(s);
    if (touches(site.col, site.row, false)) return true;
    for (int k = 0; k < 8; ++k) {
      int nc = site.col + dc[k], nr = site.row + dr[k];
      if (!spec.in_lattice(nc, nr) || !region.contains(nc, nr)) continue;
      int ns = spec.site_index(nc, nr);
      if (seen[ns] || member[ns]) continue;
      seen[ns] = 1;
      queue.push_back(ns);
    }
  }
  return false;
}

inline bool brute_force_f(const GhostGraph& g, const FkConfig& fk, const Region& annulus) {
  const auto& spec = g.spec;
  auto inner = boundary_sites(spec, annulus, RegionSide::Inner);
  auto outer = boundary_sites(spec, annulus, RegionSide::Outer);
  for (const auto& a : inner)
    for (const auto& b : outer)
      if (dfs_connected(g, fk, a, b, annulus) && !dfs_ghost(g, fk, a, annulus)) return true;
  return false;
}

inline bool brute_force_necklace(const GhostGraph& g, const FkConfig& fk,
                                 const Region& annulus, int k_max, double min_mass,
                                 bool ghost_only) {
  auto rc = region_clusters(g, fk, annulus);
  std::vector<int> eligible;
  for (int c = 0; c < rc.n_clusters(); ++c)
    if (rc.sizes[c] >= min_mass && (!ghost_only || rc.ghost_connected[c]))
      eligible.push_back(c);
  const int n = static_cast<int>(eligible.size());
  if (n == 0) return false;

  std::vector<std::vector<uint8_t>> adj(rc.n_clusters(),
                                        std::vector<uint8_t>(rc.n_clusters(), 0));
  for (size_t l = 0; l < rc.region_sites.size(); ++l) {
    Site s = g.spec.site_at(rc.region_sites[l]);
    for (auto [dc, dr] : {std::pair{1, 0}, std::pair{0, 1}}) {
      int nc = s.col + dc, nr = s.row + dr;
      if (!g.spec.in_lattice(nc, nr)) continue;
      int nl = rc.local_of_site[g.spec.site_index(nc, nr)];
      if (nl < 0) continue;
      int a = rc.label[l], b = rc.label[nl];
      if (a != b) adj[a][b] = adj[b][a] = 1;
    }
  }

  auto union_has_circuit = [&](uint64_t subset_mask) {
    std::vector<uint8_t> member(g.spec.n_sites(), 0);
    for (size_t l = 0; l < rc.region_sites.size(); ++l) {
      int c = rc.label[l];
      for (int j = 0; j < n; ++j)
        if (((subset_mask >> j) & 1) && eligible[j] == c) member[rc.region_sites[l]] = 1;
    }
    return !star_path_blocks(g, annulus, member);
  };

  auto has_cyclic_order = [&](const std::vector<int>& subset) {
    if (subset.size() <= 1) return true;
    if (subset.size() == 2) return adj[subset[0]][subset[1]] != 0;
    std::vector<int> perm(subset.begin() + 1, subset.end());
    std::sort(perm.begin(), perm.end());
    do {
      bool ok = adj[subset[0]][perm.front()] && adj[perm.back()][subset[0]];
      for (size_t i = 0; ok && i + 1 < perm.size(); ++i) ok = adj[perm[i]][perm[i + 1]];
      if (ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
  };

  for (uint64_t mask = 1; mask < (uint64_t{1} << n); ++mask) {
    int k = __builtin_popcountll(mask);
    if (k > k_max) continue;
    std::vector<int> subset;
    for (int j = 0; j < n; ++j)
      if ((mask >> j) & 1) subset.push_back(eligible[j]);
    if (!has_cyclic_order(subset)) continue;
    if (union_has_circuit(mask)) return true;
  }
  return false;
}

}  // namespace fkghost::testing
