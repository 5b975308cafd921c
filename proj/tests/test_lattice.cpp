#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "fkghost/lattice.hpp"

using namespace fkghost;

TEST_SUITE_BEGIN("lattice");

TEST_CASE("critical beta value") {
  CHECK(critical_beta() == doctest::Approx(0.44068679350977151262).epsilon(1e-15));
}

TEST_CASE("edge counts") {
  SUBCASE("2x2 free") {
    auto g = build_graph({2, 2, 1.0, Boundary::Free});
    CHECK(g.n_internal() == 4);
    CHECK(g.n_external() == 4);
  }
  SUBCASE("2x2 periodic wraps both directions") {
    auto g = build_graph({2, 2, 1.0, Boundary::Periodic});
    CHECK(g.n_internal() == 8);
    CHECK(g.n_external() == 4);
  }
  SUBCASE("1x1 free is degenerate") {
    auto g = build_graph({1, 1, 1.0, Boundary::Free});
    CHECK(g.n_internal() == 0);
    CHECK(g.n_external() == 1);
  }
  SUBCASE("general free count") {
    auto g = build_graph({5, 3, 1.0, Boundary::Free});
    CHECK(g.n_internal() == 4 * 3 + 5 * 2);
  }
}

TEST_CASE("graph construction is deterministic") {
  LatticeSpec spec{4, 3, 0.5, Boundary::Periodic};
  auto a = build_graph(spec);
  auto b = build_graph(spec);
  REQUIRE(a.n_internal() == b.n_internal());
  for (int e = 0; e < a.n_internal(); ++e) {
    CHECK(a.internal_edges[e].a == b.internal_edges[e].a);
    CHECK(a.internal_edges[e].b == b.internal_edges[e].b);
  }
}

TEST_CASE("every internal edge joins sites at lattice distance one") {
  for (auto boundary : {Boundary::Free, Boundary::Periodic}) {
    LatticeSpec spec{5, 4, 1.0, boundary};
    auto g = build_graph(spec);
    for (const auto& e : g.internal_edges) {
      Site a = spec.site_at(e.a), b = spec.site_at(e.b);
      int dc = std::abs(a.col - b.col);
      int dr = std::abs(a.row - b.row);
      if (boundary == Boundary::Periodic) {
        dc = std::min(dc, spec.width - dc);
        dr = std::min(dr, spec.height - dr);
      }
      CHECK(dc + dr == 1);
    }
  }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(build_graph({0, 2, 1.0, Boundary::Free}), std::invalid_argument);
  CHECK_THROWS_AS(build_graph({2, -1, 1.0, Boundary::Free}), std::invalid_argument);
  CHECK_THROWS_AS(build_graph({2, 2, 0.0, Boundary::Free}), std::invalid_argument);
}

TEST_CASE("field parameterization") {
  FieldParams p = FieldParams::from_little_h(0.4, 2.0, 0.5);
  CHECK(p.big_h == doctest::Approx(2.0 * std::pow(0.5, 15.0 / 8.0)).epsilon(1e-15));
  CHECK(p.little_h(0.5) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(FieldParams(0.4, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(FieldParams(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("boundary sites of an annulus") {
  LatticeSpec spec{9, 9, 1.0, Boundary::Free};
  Region annulus = Region::annulus(4.0, 4.0, 1.0, 3.0);

  SUBCASE("inner ring is the four neighbours of the removed center") {
    auto inner = boundary_sites(spec, annulus, RegionSide::Inner);
    std::vector<Site> expected{{4, 3}, {3, 4}, {5, 4}, {4, 5}};
    CHECK(inner == expected);
  }
  SUBCASE("outer ring is the Chebyshev-3 ring") {
    auto outer = boundary_sites(spec, annulus, RegionSide::Outer);
    CHECK(outer.size() == 24);
    for (const auto& s : outer)
      CHECK(std::max(std::abs(s.col - 4), std::abs(s.row - 4)) == 3);
  }
}

TEST_CASE("boundary sites: brute-force oracle on clipped annulus") {
  // annulus sticking past the lattice edge; oracle enumerates adjacency
  LatticeSpec spec{9, 9, 1.0, Boundary::Free};
  Region annulus = Region::annulus(1.0, 4.0, 1.0, 3.0);

  auto brute = [&](RegionSide side) {
    std::set<std::pair<int, int>> out;
    static const int dc[4] = {1, -1, 0, 0};
    static const int dr[4] = {0, 0, 1, -1};
    for (int row = 0; row < 9; ++row)
      for (int col = 0; col < 9; ++col) {
        if (!annulus.contains(col, row)) continue;
        for (int k = 0; k < 4; ++k) {
          int nc = col + dc[k], nr = row + dr[k];
          if (nc < 0 || nc >= 9 || nr < 0 || nr >= 9) continue;
          if (annulus.contains(nc, nr)) continue;
          bool inner = annulus.in_hole(nc, nr);
          if ((side == RegionSide::Inner) == inner) {
            out.insert({col, row});
            break;
          }
        }
      }
    return out;
  };

  for (auto side : {RegionSide::Inner, RegionSide::Outer}) {
    auto got = boundary_sites(spec, annulus, side);
    std::set<std::pair<int, int>> got_set;
    for (const auto& s : got) got_set.insert({s.col, s.row});
    CHECK(got_set == brute(side));
  }
}

TEST_CASE("box region outer side returns the full inner boundary") {
  LatticeSpec spec{6, 6, 1.0, Boundary::Free};
  Region box = Region::box(2.5, 2.5, 1.5);  // sites 1..4 squared
  auto ring = boundary_sites(spec, box, RegionSide::Outer);
  CHECK(ring.size() == 12);
  CHECK_THROWS_AS(boundary_sites(spec, box, RegionSide::Inner), std::invalid_argument);
}

TEST_CASE("periodic lattice rejects annulus ring requests") {
  LatticeSpec spec{9, 9, 1.0, Boundary::Periodic};
  Region annulus = Region::annulus(4.0, 4.0, 1.0, 3.0);
  CHECK_THROWS_AS(boundary_sites(spec, annulus, RegionSide::Inner), std::invalid_argument);
}

TEST_CASE("config blocks round-trip") {
  LatticeSpec spec{7, 5, 0.25, Boundary::PlusSpin};
  CHECK(lattice_from_config_block(to_config_block(spec)) == spec);

  Region annulus = Region::annulus(3.5, 3.0, 1.5, 3.0);
  Region back = region_from_config_block(to_config_block(annulus));
  CHECK(back.kind == Region::Kind::Annulus);
  CHECK(back.cx == annulus.cx);
  CHECK(back.inner == annulus.inner);
  CHECK(back.half_w == annulus.half_w);
}

TEST_CASE("packed bitstrings round-trip bit-exactly") {
  LatticeSpec spec{5, 3, 1.0, Boundary::Free};
  auto g = build_graph(spec);

  SpinConfig s;
  for (int i = 0; i < spec.n_sites(); ++i) s.spin.push_back(i % 3 == 0 ? +1 : -1);
  auto bytes = pack_spins(spec, s);
  CHECK(bytes.size() == 16 + (spec.n_sites() + 7) / 8);
  auto s2 = unpack_spins(spec, bytes);
  CHECK(s2.spin == s.spin);

  FkConfig fk = FkConfig::all_closed(g);
  fk.internal_open[3] = 1;
  fk.internal_open[7] = 1;
  fk.ghost_open[14] = 1;
  auto bb = pack_bonds(spec, g, fk);
  auto fk2 = unpack_bonds(spec, g, bb);
  CHECK(fk2.internal_open == fk.internal_open);
  CHECK(fk2.ghost_open == fk.ghost_open);

  // header mismatch is rejected
  LatticeSpec other{5, 4, 1.0, Boundary::Free};
  CHECK_THROWS_AS(unpack_spins(other, bytes), std::invalid_argument);
}

TEST_SUITE_END();
