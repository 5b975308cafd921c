#include "fkghost/topology.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>

namespace fkghost {

namespace {

void require_planar_annulus(const GhostGraph& g, const Region& region) {
  if (g.spec.boundary == Boundary::Periodic)
    throw std::invalid_argument("annulus detectors need a planar embedding, not periodic");
  if (region.kind != Region::Kind::Annulus)
    throw std::invalid_argument("detector needs an annulus region");
  region.validate();
}

// Cut ray for winding levels: vertical, upward from (cut_x, cy) with cut_x a
// half-integer so no site or vertical edge lies on it.
struct CutFrame {
  double cut_x;
  double cy;
};

CutFrame cut_frame(const Region& region) {
  double cx = region.cx;
  double cut = std::floor(cx) + 0.5;
  return CutFrame{cut, region.cy};
}

int crossing_delta(Site from, Site to, const CutFrame& frame) {
  if (from.row != to.row) return 0;  // vertical steps are parallel to the cut
  if (from.row < frame.cy) return 0;
  double lo = std::min(from.col, to.col), hi = std::max(from.col, to.col);
  if (!(lo < frame.cut_x && frame.cut_x < hi)) return 0;
  return to.col > from.col ? -1 : +1;  // westward crossing is counterclockwise
}

// Search the member set for a self-avoiding nearest-neighbour circuit with
// winding +-1 around the cut origin. BFS runs in the annulus's cyclic cover,
// indexed by (site, crossing level); any return to the start site on a
// different level yields a closed walk with nonzero winding, from which a
// simple circuit is extracted by loop erasure.
std::optional<std::vector<Site>> find_surrounding_circuit(
    const LatticeSpec& spec, const Region& region, const std::vector<uint8_t>& member,
    const std::vector<int32_t>& local_of_site, const std::vector<int32_t>& region_sites) {
  const CutFrame frame = cut_frame(region);
  const int m = static_cast<int>(region_sites.size());
  if (m == 0) return std::nullopt;

  // level bound: straddling edges at rows >= cy, twice, plus margin
  int straddle_rows = 0;
  {
    int col_w = static_cast<int>(std::floor(frame.cut_x));
    int col_e = col_w + 1;
    for (int row = static_cast<int>(std::ceil(frame.cy - 0.5)); row < spec.height; ++row) {
      if (row < frame.cy) continue;
      if (spec.in_lattice(col_w, row) && spec.in_lattice(col_e, row) &&
          region.contains(col_w, row) && region.contains(col_e, row))
        ++straddle_rows;
    }
  }
  const int w_bound = 2 * straddle_rows + 2;
  const int n_levels = 2 * w_bound + 1;

  static const int dc[4] = {1, -1, 0, 0};
  static const int dr[4] = {0, 0, 1, -1};

  std::vector<int32_t> parent(static_cast<size_t>(m) * n_levels, -2);  // -2 unvisited
  std::vector<uint8_t> in_done_component(m, 0);

  for (int start_local = 0; start_local < m; ++start_local) {
    if (!member[start_local] || in_done_component[start_local]) continue;

    std::fill(parent.begin(), parent.end(), -2);
    std::deque<int32_t> queue;
    auto state_of = [m](int local, int level) { return level * m + local; };
    const int start_state = state_of(start_local, w_bound);
    parent[start_state] = -1;
    queue.push_back(start_state);
    int found_state = -1;

    while (!queue.empty() && found_state < 0) {
      const int cur = queue.front();
      queue.pop_front();
      const int cur_local = cur % m;
      const int cur_level = cur / m;
      const Site cur_site = spec.site_at(region_sites[cur_local]);
      for (int k = 0; k < 4; ++k) {
        const int nc = cur_site.col + dc[k], nr = cur_site.row + dr[k];
        if (!spec.in_lattice(nc, nr)) continue;
        const int ns = spec.site_index(nc, nr);
        const int nl = local_of_site[ns];
        if (nl < 0 || !member[nl]) continue;
        const int level = cur_level + crossing_delta(cur_site, Site{nc, nr}, frame);
        if (level < 0 || level >= n_levels) continue;
        const int next_state = state_of(nl, level);
        if (parent[next_state] != -2) continue;
        parent[next_state] = cur;
        if (nl == start_local && level != w_bound) {
          found_state = next_state;
          break;
        }
        queue.push_back(next_state);
      }
    }

    // everything reached at any level belongs to this base component
    for (int l = 0; l < m; ++l)
      for (int lev = 0; lev < n_levels; ++lev)
        if (parent[state_of(l, lev)] != -2) in_done_component[l] = 1;
    in_done_component[start_local] = 1;

    if (found_state < 0) continue;

    // reconstruct the closed walk
    std::vector<Site> walk;
    for (int s = found_state; s != -1; s = parent[s])
      walk.push_back(spec.site_at(region_sites[s % m]));
    std::reverse(walk.begin(), walk.end());

    // loop-erasure keeping crossing sums; first simple sub-loop with winding
    // +-1 is the circuit
    std::vector<int> stack_site;   // local indices
    std::vector<int> stack_cum;    // crossing sums
    std::vector<int32_t> pos(m, -1);
    int cum = 0;
    auto local_of = [&](Site s) { return local_of_site[spec.site_index(s.col, s.row)]; };
    stack_site.push_back(local_of(walk[0]));
    stack_cum.push_back(0);
    pos[stack_site[0]] = 0;
    for (size_t i = 1; i < walk.size(); ++i) {
      cum += crossing_delta(walk[i - 1], walk[i], frame);
      const int v = local_of(walk[i]);
      if (pos[v] >= 0) {
        const int w = cum - stack_cum[pos[v]];
        assert(w == 0 || w == 1 || w == -1);
        if (w != 0) {
          std::vector<Site> circuit;
          for (size_t j = pos[v]; j < stack_site.size(); ++j)
            circuit.push_back(spec.site_at(region_sites[stack_site[j]]));
          // deterministic normalization: smallest site first, fixed direction
          size_t best = 0;
          for (size_t j = 1; j < circuit.size(); ++j)
            if (circuit[j] < circuit[best]) best = j;
          std::rotate(circuit.begin(), circuit.begin() + best, circuit.end());
          if (circuit.size() > 2 && circuit.back() < circuit[1])
            std::reverse(circuit.begin() + 1, circuit.end());
          return circuit;
        }
        while (static_cast<int>(stack_site.size()) > pos[v] + 1) {
          pos[stack_site.back()] = -1;
          stack_site.pop_back();
          stack_cum.pop_back();
        }
        cum = stack_cum.back();
      } else {
        stack_site.push_back(v);
        stack_cum.push_back(cum);
        pos[v] = static_cast<int>(stack_site.size()) - 1;
      }
    }
    assert(false && "closed walk with nonzero winding must contain a simple circuit");
  }
  return std::nullopt;
}

std::vector<uint8_t> ring_bitmap(const LatticeSpec& spec, const Region& region,
                                 RegionSide side, const std::vector<int32_t>& local_of_site) {
  std::vector<uint8_t> bitmap(spec.n_sites(), 0);
  for (const Site& s : boundary_sites(spec, region, side)) bitmap[spec.site_index(s)] = 1;
  (void)local_of_site;
  return bitmap;
}

}  // namespace

bool connected(const GhostGraph& g, const FkConfig& fk, Site x, Site y, const Region& region) {
  if (!region.contains(x.col, x.row) || !region.contains(y.col, y.row))
    throw std::invalid_argument("sites outside region");
  if (x == y) return true;
  auto rc = region_clusters(g, fk, region);
  return rc.label[rc.local_of_site[g.spec.site_index(x)]] ==
         rc.label[rc.local_of_site[g.spec.site_index(y)]];
}

bool connected_to_ghost(const GhostGraph& g, const FkConfig& fk, Site x, const Region& region) {
  if (!region.contains(x.col, x.row)) throw std::invalid_argument("site outside region");
  auto rc = region_clusters(g, fk, region);
  return rc.ghost_connected[rc.label[rc.local_of_site[g.spec.site_index(x)]]] != 0;
}

EventReport detect_event_F(const GhostGraph& g, const FkConfig& fk, const Region& annulus) {
  require_planar_annulus(g, annulus);
  auto rc = region_clusters(g, fk, annulus);
  auto inner = ring_bitmap(g.spec, annulus, RegionSide::Inner, rc.local_of_site);
  auto outer = ring_bitmap(g.spec, annulus, RegionSide::Outer, rc.local_of_site);

  const int nc = rc.n_clusters();
  std::vector<uint8_t> touches_inner(nc, 0), touches_outer(nc, 0);
  for (size_t l = 0; l < rc.region_sites.size(); ++l) {
    int site = rc.region_sites[l];
    if (inner[site]) touches_inner[rc.label[l]] = 1;
    if (outer[site]) touches_outer[rc.label[l]] = 1;
  }

  EventReport report;
  int chosen = -1;
  for (int c = 0; c < nc; ++c)
    if (!rc.ghost_connected[c] && touches_inner[c] && touches_outer[c]) {
      chosen = c;
      break;  // clusters are ordered by smallest member site
    }
  if (chosen < 0) return report;

  // BFS through the chosen cluster from inner-ring to outer-ring sites
  const int m = static_cast<int>(rc.region_sites.size());
  std::vector<int32_t> parent(m, -2);
  std::deque<int32_t> queue;
  for (int l = 0; l < m; ++l)
    if (rc.label[l] == chosen && inner[rc.region_sites[l]]) {
      parent[l] = -1;
      queue.push_back(l);
    }
  int goal = -1;
  while (!queue.empty() && goal < 0) {
    int cur = queue.front();
    queue.pop_front();
    if (outer[rc.region_sites[cur]]) {
      goal = cur;
      break;
    }
    Site cs = g.spec.site_at(rc.region_sites[cur]);
    for (const auto& [nbr, e] : g.neighbors(g.spec.site_index(cs))) {
      if (!fk.internal_open[e]) continue;
      int nl = rc.local_of_site[nbr];
      if (nl < 0 || parent[nl] != -2) continue;
      parent[nl] = cur;
      queue.push_back(nl);
    }
  }
  if (goal < 0) return report;  // spanning flags guarantee this cannot happen

  report.occurred = true;
  report.kind = EventReport::Witness::Path;
  for (int l = goal; l != -1; l = parent[l])
    report.sites.push_back(g.spec.site_at(rc.region_sites[l]));
  std::reverse(report.sites.begin(), report.sites.end());
  return report;
}

EventReport detect_event_G(const GhostGraph& g, const FkConfig& fk, const Region& annulus) {
  require_planar_annulus(g, annulus);
  auto rc = region_clusters(g, fk, annulus);
  std::vector<uint8_t> member(rc.region_sites.size(), 0);
  for (size_t l = 0; l < rc.region_sites.size(); ++l)
    member[l] = rc.ghost_connected[rc.label[l]];

  EventReport report;
  auto circuit = find_surrounding_circuit(g.spec, annulus, member, rc.local_of_site,
                                          rc.region_sites);
  if (!circuit) return report;
  report.occurred = true;
  report.kind = EventReport::Witness::Circuit;
  report.sites = std::move(*circuit);
  return report;
}

namespace {

struct ClusterAdjacency {
  std::vector<std::vector<int32_t>> nbr;  // eligible-cluster graph
};

ClusterAdjacency cluster_adjacency(const GhostGraph& g, const RegionClusters& rc,
                                   const std::vector<uint8_t>& eligible) {
  const int nc = rc.n_clusters();
  std::vector<std::vector<int32_t>> sets(nc);
  static const int dc[2] = {1, 0};
  static const int dr[2] = {0, 1};
  for (size_t l = 0; l < rc.region_sites.size(); ++l) {
    Site s = g.spec.site_at(rc.region_sites[l]);
    int ca = rc.label[l];
    for (int k = 0; k < 2; ++k) {
      int nco = s.col + dc[k], nro = s.row + dr[k];
      if (!g.spec.in_lattice(nco, nro)) continue;
      int nl = rc.local_of_site[g.spec.site_index(nco, nro)];
      if (nl < 0) continue;
      int cb = rc.label[nl];
      if (ca == cb || !eligible[ca] || !eligible[cb]) continue;
      sets[ca].push_back(cb);
      sets[cb].push_back(ca);
    }
  }
  ClusterAdjacency adj;
  adj.nbr.resize(nc);
  for (int c = 0; c < nc; ++c) {
    auto& v = sets[c];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    adj.nbr[c] = std::move(v);
  }
  return adj;
}

}  // namespace

EventReport detect_necklace_general(const GhostGraph& g, const FkConfig& fk,
                                    const Region& annulus, const NecklaceOptions& options) {
  require_planar_annulus(g, annulus);
  if (options.max_clusters < 1) throw std::invalid_argument("necklace needs K >= 1");

  auto rc = region_clusters(g, fk, annulus);
  const int nc = rc.n_clusters();
  std::vector<uint8_t> eligible(nc, 0);
  for (int c = 0; c < nc; ++c)
    eligible[c] = rc.sizes[c] >= options.min_mass &&
                  (!options.ghost_only || rc.ghost_connected[c]);

  EventReport report;

  // fast negative: the union of every eligible cluster carries no circuit
  std::vector<uint8_t> member(rc.region_sites.size(), 0);
  bool any = false;
  for (size_t l = 0; l < rc.region_sites.size(); ++l) {
    member[l] = eligible[rc.label[l]];
    any |= member[l] != 0;
  }
  if (!any) return report;
  if (!find_surrounding_circuit(g.spec, annulus, member, rc.local_of_site, rc.region_sites))
    return report;

  auto try_chain = [&](const std::vector<int32_t>& chain) -> bool {
    std::vector<uint8_t> chain_member(rc.region_sites.size(), 0);
    std::vector<uint8_t> in_chain(nc, 0);
    for (int c : chain) in_chain[c] = 1;
    for (size_t l = 0; l < rc.region_sites.size(); ++l)
      chain_member[l] = in_chain[rc.label[l]];
    auto circuit = find_surrounding_circuit(g.spec, annulus, chain_member, rc.local_of_site,
                                            rc.region_sites);
    if (!circuit) return false;
    report.occurred = true;
    report.kind = EventReport::Witness::ClusterCycle;
    report.sites = std::move(*circuit);
    report.cluster_cycle.clear();
    for (int c : chain) report.cluster_cycle.push_back(rc.rep_site[c]);
    return true;
  };

  // single clusters first
  for (int c = 0; c < nc; ++c)
    if (eligible[c] && try_chain({c})) return report;
  if (options.max_clusters == 1) return report;

  auto adj = cluster_adjacency(g, rc, eligible);

  // pairs: two mutually adjacent clusters
  for (int c = 0; c < nc; ++c) {
    if (!eligible[c]) continue;
    for (int d : adj.nbr[c]) {
      if (d <= c) continue;
      if (try_chain({c, d})) return report;
    }
  }
  if (options.max_clusters == 2) return report;

  // simple cycles of length 3..K; anchor = smallest cluster in the cycle
  constexpr int64_t kSearchBudget = 4'000'000;
  int64_t budget = kSearchBudget;
  std::vector<int32_t> path;
  std::vector<uint8_t> on_path(nc, 0);

  std::function<bool(int, int)> dfs = [&](int anchor, int cur) -> bool {
    if (--budget <= 0) throw std::runtime_error("necklace search budget exceeded");
    for (int nxt : adj.nbr[cur]) {
      if (nxt == anchor && path.size() >= 3) {
        if (try_chain(path)) return true;
      }
      if (nxt <= anchor || on_path[nxt]) continue;
      if (static_cast<int>(path.size()) >= options.max_clusters) continue;
      path.push_back(nxt);
      on_path[nxt] = 1;
      bool hit = dfs(anchor, nxt);
      on_path[nxt] = 0;
      path.pop_back();
      if (hit) return true;
    }
    return false;
  };

  for (int anchor = 0; anchor < nc; ++anchor) {
    if (!eligible[anchor]) continue;
    path = {anchor};
    on_path.assign(nc, 0);
    on_path[anchor] = 1;
    if (dfs(anchor, anchor)) return report;
  }
  return report;
}

EventReport detect_necklace(const GhostGraph& g, const FkConfig& fk, const Region& annulus,
                            int k_max, double min_mass) {
  NecklaceOptions options;
  options.max_clusters = k_max;
  options.min_mass = min_mass;
  return detect_necklace_general(g, fk, annulus, options);
}

Region block_annulus(Site z, int scale) {
  const double half_n = scale / 2.0;
  return Region::annulus(z.col + half_n, z.row + half_n, half_n + 0.5, 3.0 * half_n);
}

bool block_good(const GhostGraph& g, const FkConfig& fk, Site z, int scale) {
  if (scale < 1) throw std::invalid_argument("block scale must be >= 1");
  if (z.col - scale < 0 || z.row - scale < 0 || z.col + 2 * scale >= g.spec.width ||
      z.row + 2 * scale >= g.spec.height)
    throw std::invalid_argument("block out of bounds");
  auto report = detect_event_G(g, fk, block_annulus(z, scale));
  return report.occurred;
}

double BlockField::density() const {
  if (good.empty()) return 0.0;
  double acc = 0;
  for (uint8_t v : good) acc += v;
  return acc / static_cast<double>(good.size());
}

BlockField block_field_scan(const GhostGraph& g, const FkConfig& fk, int scale) {
  BlockField field;
  field.anchor_cols = g.spec.width - 3 * scale;
  field.anchor_rows = g.spec.height - 3 * scale;
  field.first_anchor = Site{scale, scale};
  if (field.anchor_cols < 2 || field.anchor_rows < 2)
    throw std::invalid_argument("degenerate block grid; lattice must fit at least 2x2 blocks");
  field.good.resize(static_cast<size_t>(field.anchor_cols) * field.anchor_rows);
  for (int br = 0; br < field.anchor_rows; ++br)
    for (int bc = 0; bc < field.anchor_cols; ++bc) {
      Site z{scale + bc, scale + br};
      field.good[static_cast<size_t>(br) * field.anchor_cols + bc] =
          block_good(g, fk, z, scale);
    }
  return field;
}

// --- witness validation -------------------------------------------------------

double winding_number(const std::vector<Site>& circuit, double px, double py) {
  double total = 0.0;
  const size_t n = circuit.size();
  for (size_t i = 0; i < n; ++i) {
    const Site& a = circuit[i];
    const Site& b = circuit[(i + 1) % n];
    double ax = a.col - px, ay = a.row - py;
    double bx = b.col - px, by = b.row - py;
    total += std::atan2(ax * by - ay * bx, ax * bx + ay * by);
  }
  return total / (2.0 * M_PI);
}

WindingFrame annulus_frame(const Region& annulus) {
  const CutFrame f = cut_frame(annulus);
  return WindingFrame{f.cut_x, f.cy};
}

namespace {

bool sites_adjacent(const Site& a, const Site& b) {
  return std::abs(a.col - b.col) + std::abs(a.row - b.row) == 1;
}

bool circuit_ok(const std::vector<Site>& circuit, const Region& annulus) {
  if (circuit.size() < 4) return false;
  for (size_t i = 0; i < circuit.size(); ++i) {
    if (!annulus.contains(circuit[i].col, circuit[i].row)) return false;
    if (!sites_adjacent(circuit[i], circuit[(i + 1) % circuit.size()])) return false;
    for (size_t j = i + 1; j < circuit.size(); ++j)
      if (circuit[i] == circuit[j]) return false;
  }
  const auto frame = annulus_frame(annulus);
  double w = winding_number(circuit, frame.px, frame.py);
  return std::abs(std::abs(w) - 1.0) < 1e-6;
}

}  // namespace

bool validate_f_witness(const GhostGraph& g, const FkConfig& fk, const Region& annulus,
                        const EventReport& report) {
  if (!report.occurred) return report.kind == EventReport::Witness::None;
  if (report.kind != EventReport::Witness::Path || report.sites.empty()) return false;
  const auto& path = report.sites;
  for (const auto& s : path)
    if (!annulus.contains(s.col, s.row)) return false;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    if (!sites_adjacent(path[i], path[i + 1])) return false;
    bool open = false;
    for (const auto& [nbr, e] : g.neighbors(g.spec.site_index(path[i])))
      if (nbr == g.spec.site_index(path[i + 1]) && fk.internal_open[e]) open = true;
    if (!open) return false;
  }
  auto inner = boundary_sites(g.spec, annulus, RegionSide::Inner);
  auto outer = boundary_sites(g.spec, annulus, RegionSide::Outer);
  if (!std::binary_search(inner.begin(), inner.end(), path.front())) return false;
  if (!std::binary_search(outer.begin(), outer.end(), path.back())) return false;
  // the path's whole annulus cluster must be ghost-free
  auto rc = region_clusters(g, fk, annulus);
  int c = rc.label[rc.local_of_site[g.spec.site_index(path.front())]];
  for (const auto& s : path)
    if (rc.label[rc.local_of_site[g.spec.site_index(s)]] != c) return false;
  return rc.ghost_connected[c] == 0;
}

bool validate_g_witness(const GhostGraph& g, const FkConfig& fk, const Region& annulus,
                        const EventReport& report) {
  if (!report.occurred) return report.kind == EventReport::Witness::None;
  if (report.kind != EventReport::Witness::Circuit) return false;
  if (!circuit_ok(report.sites, annulus)) return false;
  auto rc = region_clusters(g, fk, annulus);
  for (const auto& s : report.sites)
    if (!rc.ghost_connected[rc.label[rc.local_of_site[g.spec.site_index(s)]]]) return false;
  return true;
}

bool validate_necklace_witness(const GhostGraph& g, const FkConfig& fk, const Region& annulus,
                               const NecklaceOptions& options, const EventReport& report) {
  if (!report.occurred) return report.kind == EventReport::Witness::None;
  if (report.kind != EventReport::Witness::ClusterCycle) return false;
  if (report.cluster_cycle.empty() ||
      static_cast<int>(report.cluster_cycle.size()) > options.max_clusters)
    return false;
  if (!circuit_ok(report.sites, annulus)) return false;

  auto rc = region_clusters(g, fk, annulus);
  // map representative sites to cluster indices and re-check eligibility
  std::vector<int32_t> chain;
  for (int32_t rep : report.cluster_cycle) {
    int local = rc.local_of_site[rep];
    if (local < 0) return false;
    int c = rc.label[local];
    if (rc.rep_site[c] != rep) return false;
    if (rc.sizes[c] < options.min_mass) return false;
    if (options.ghost_only && !rc.ghost_connected[c]) return false;
    chain.push_back(c);
  }
  for (size_t i = 0; i < chain.size(); ++i)
    for (size_t j = i + 1; j < chain.size(); ++j)
      if (chain[i] == chain[j]) return false;

  // adjacency along the cyclic chain (trivial for a single cluster)
  if (chain.size() >= 2) {
    std::vector<uint8_t> all_eligible(rc.n_clusters(), 1);
    auto adj = cluster_adjacency(g, rc, all_eligible);
    for (size_t i = 0; i < chain.size(); ++i) {
      int a = chain[i], b = chain[(i + 1) % chain.size()];
      if (chain.size() == 2 && i == 1) break;  // same pair twice
      if (!std::binary_search(adj.nbr[a].begin(), adj.nbr[a].end(), b)) return false;
    }
  }

  // witness circuit must stay inside the chained clusters
  std::vector<uint8_t> in_chain(rc.n_clusters(), 0);
  for (int c : chain) in_chain[c] = 1;
  for (const auto& s : report.sites)
    if (!in_chain[rc.label[rc.local_of_site[g.spec.site_index(s)]]]) return false;
  return true;
}

}  // namespace fkghost
