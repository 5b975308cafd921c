#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fkghost {

// Critical inverse temperature of the square-lattice Ising model.
double critical_beta();

enum class Boundary : uint8_t { Free = 0, Periodic = 1, PlusSpin = 2, WiredFk = 3 };

const char* to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct Site {
  int col = 0;
  int row = 0;
  friend bool operator==(const Site& a, const Site& b) {
    return a.col == b.col && a.row == b.row;
  }
  friend bool operator<(const Site& a, const Site& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;  // row-major
  }
};

struct LatticeSpec {
  int width = 1;
  int height = 1;
  double spacing = 1.0;
  Boundary boundary = Boundary::Free;

  void validate() const;
  int n_sites() const { return width * height; }
  int site_index(int col, int row) const { return row * width + col; }
  int site_index(Site s) const { return site_index(s.col, s.row); }
  Site site_at(int index) const { return Site{index % width, index / width}; }
  bool in_lattice(int col, int row) const {
    return col >= 0 && col < width && row >= 0 && row < height;
  }

  friend bool operator==(const LatticeSpec& a, const LatticeSpec& b) {
    return a.width == b.width && a.height == b.height && a.spacing == b.spacing &&
           a.boundary == b.boundary;
  }
};

// Couplings: beta and the lattice field H are what every sampling weight
// uses; the renormalized field h = H * a^{-15/8} is derived.
struct FieldParams {
  double beta;
  double big_h = 0.0;

  FieldParams() : beta(critical_beta()) {}
  explicit FieldParams(double beta_, double big_h_ = 0.0) : beta(beta_), big_h(big_h_) {
    validate();
  }
  static FieldParams from_little_h(double beta, double little_h, double spacing);

  double little_h(double spacing) const;
  void validate() const;
};

// Axis-aligned region in lattice units. Centers may sit on half-integer
// points; an annulus removes the open box {max(|dx|,|dy|) < inner}.
struct Region {
  enum class Kind : uint8_t { Box = 0, Annulus = 1, Rectangle = 2 };

  Kind kind = Kind::Box;
  double cx = 0.0, cy = 0.0;
  double inner = 0.0;        // annulus only
  double half_w = 0.0;       // outer half-side (box/annulus: both axes)
  double half_h = 0.0;

  static Region box(double cx, double cy, double half);
  static Region annulus(double cx, double cy, double inner, double outer);
  static Region rectangle(double cx, double cy, double half_w, double half_h);

  bool contains(int col, int row) const;
  bool in_hole(int col, int row) const;    // annulus: inside the removed box
  bool beyond(int col, int row) const;     // outside the outer box
  double outer() const { return half_w; }
  void validate() const;
};

struct GhostGraph {
  struct Edge {
    int32_t a = 0, b = 0;  // site indices, a < b after unwrap ordering not guaranteed
  };

  LatticeSpec spec;
  std::vector<Edge> internal_edges;       // canonical order: row-major, east then north
  std::vector<int32_t> boundary_contacts; // per site: # of off-lattice nearest neighbours
  // External (ghost) edges are implicit: exactly one per site, site order.

  int n_sites() const { return spec.n_sites(); }
  int n_internal() const { return static_cast<int>(internal_edges.size()); }
  int n_external() const { return n_sites(); }

  // Site adjacency over internal edges: for site s, list of (neighbour, edge).
  const std::vector<std::pair<int32_t, int32_t>>& neighbors(int site) const {
    return adjacency_[site];
  }

  friend GhostGraph build_graph(const LatticeSpec& spec);

 private:
  std::vector<std::vector<std::pair<int32_t, int32_t>>> adjacency_;
};

// Deterministic construction; equal specs give byte-equal edge lists.
GhostGraph build_graph(const LatticeSpec& spec);

enum class RegionSide : uint8_t { Inner, Outer };

// Sites of the region adjacent to a lattice site outside it on the named
// side, sorted row-major.
std::vector<Site> boundary_sites(const LatticeSpec& spec, const Region& region,
                                 RegionSide side);

struct SpinConfig {
  std::vector<int8_t> spin;  // +1 / -1 per site, row-major

  int size() const { return static_cast<int>(spin.size()); }
  static SpinConfig all_plus(int n) { return SpinConfig{std::vector<int8_t>(n, +1)}; }
};

struct FkConfig {
  std::vector<uint8_t> internal_open;  // per internal edge, canonical order
  std::vector<uint8_t> ghost_open;     // per site

  static FkConfig all_closed(const GhostGraph& g) {
    return FkConfig{std::vector<uint8_t>(g.n_internal(), 0),
                    std::vector<uint8_t>(g.n_sites(), 0)};
  }
  static FkConfig all_open(const GhostGraph& g) {
    return FkConfig{std::vector<uint8_t>(g.n_internal(), 1),
                    std::vector<uint8_t>(g.n_sites(), 1)};
  }
};

// --- plain-text key=value block for lattice and region descriptions ---
std::string to_config_block(const LatticeSpec& spec);
std::string to_config_block(const Region& region);
LatticeSpec lattice_from_config_block(const std::string& text);
Region region_from_config_block(const std::string& text);

// --- packed bitstring serialization (16-byte header) ---
// Header: magic "FKG1", version u8, kind u8 (0 spins, 1 bonds), boundary u8,
// reserved u8, width u32 LE, height u32 LE.
std::vector<uint8_t> pack_spins(const LatticeSpec& spec, const SpinConfig& s);
std::vector<uint8_t> pack_bonds(const LatticeSpec& spec, const GhostGraph& g,
                                const FkConfig& fk);
SpinConfig unpack_spins(const LatticeSpec& spec, const std::vector<uint8_t>& bytes);
FkConfig unpack_bonds(const LatticeSpec& spec, const GhostGraph& g,
                      const std::vector<uint8_t>& bytes);

}  // namespace fkghost
