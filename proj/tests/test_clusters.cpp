#include <doctest.h>

#include <deque>
#include <stdexcept>

#include "fkghost/clusters.hpp"
#include "fkghost/rng.hpp"

using namespace fkghost;

TEST_SUITE_BEGIN("clusters");

namespace {

// independent reference labeling by depth-first search
std::vector<int32_t> dfs_labels(const GhostGraph& g, const FkConfig& fk) {
  const int n = g.n_sites();
  std::vector<int32_t> label(n, -1);
  for (int start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    std::deque<int> stack{start};
    label[start] = start;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (const auto& [nbr, e] : g.neighbors(s)) {
        if (!fk.internal_open[e] || label[nbr] >= 0) continue;
        label[nbr] = start;
        stack.push_back(nbr);
      }
    }
  }
  return label;
}

FkConfig random_config(const GhostGraph& g, Rng& rng, double p_int, double p_ghost) {
  FkConfig fk = FkConfig::all_closed(g);
  for (auto& b : fk.internal_open) b = rng.coin(p_int);
  for (auto& b : fk.ghost_open) b = rng.coin(p_ghost);
  return fk;
}

}  // namespace

TEST_CASE("all edges closed: singletons") {
  auto g = build_graph({3, 3, 1.0, Boundary::Free});
  auto d = find_clusters(g, FkConfig::all_closed(g));
  CHECK(d.n_clusters() == 9);
  for (int i = 0; i < d.n_clusters(); ++i) {
    CHECK(d.sizes[i] == 1);
    CHECK(d.ids[i] == i);
    CHECK(!d.ghost_connected[i]);
  }
  CHECK(!d.ghost_cluster_id.has_value());
}

TEST_CASE("all edges open on a connected box: one cluster") {
  auto g = build_graph({4, 3, 1.0, Boundary::Free});
  auto d = find_clusters(g, FkConfig::all_open(g));
  CHECK(d.n_clusters() == 1);
  CHECK(d.sizes[0] == 12);
  CHECK(d.ghost_connected[0]);
  CHECK(d.ghost_cluster_id.value() == 0);
}

TEST_CASE("random 4x4 configurations match the DFS oracle") {
  auto g = build_graph({4, 4, 1.0, Boundary::Free});
  Rng rng(20240817);
  for (int trial = 0; trial < 100; ++trial) {
    auto fk = random_config(g, rng, 0.5, 0.3);
    auto d = find_clusters(g, fk);
    auto ref = dfs_labels(g, fk);
    // same partition, same canonical smallest-site labels
    CHECK(d.label == ref);
    // sizes match counts
    int total = 0;
    for (int i = 0; i < d.n_clusters(); ++i) total += d.sizes[i];
    CHECK(total == g.n_sites());
    // ghost flags match direct scan
    for (int s = 0; s < g.n_sites(); ++s) {
      if (fk.ghost_open[s]) CHECK(d.ghost_connected[d.cluster_index_of_site(s)]);
    }
  }
}

TEST_CASE("wired boundary merges the lattice edge") {
  auto g = build_graph({4, 4, 1.0, Boundary::WiredFk});
  auto d = find_clusters(g, FkConfig::all_closed(g));
  // 12 edge sites merge into one cluster; 4 interior singletons
  CHECK(d.n_clusters() == 5);
  CHECK(d.sizes[d.cluster_index_of_site(0)] == 12);
}

TEST_CASE("size mismatch is rejected") {
  auto g = build_graph({3, 3, 1.0, Boundary::Free});
  FkConfig bad;
  bad.internal_open.assign(3, 0);
  bad.ghost_open.assign(9, 0);
  CHECK_THROWS_AS(find_clusters(g, bad), std::invalid_argument);
}

TEST_CASE("region clusters are restricted to the region") {
  auto g = build_graph({7, 7, 1.0, Boundary::Free});
  Region annulus = Region::annulus(3.0, 3.0, 1.0, 2.0);
  auto fk = FkConfig::all_open(g);
  auto rc = region_clusters(g, fk, annulus);
  CHECK(rc.region_sites.size() == 24);
  CHECK(rc.n_clusters() == 1);
  CHECK(rc.sizes[0] == 24);

  // hole sites carry no local index
  CHECK(rc.local_of_site[g.spec.site_index(3, 3)] == -1);
}

TEST_SUITE_END();
