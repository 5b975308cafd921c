#include "fkghost/lattice.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fkghost {

double critical_beta() {
  static const double value = std::log1p(std::sqrt(2.0)) / 2.0;
  return value;
}

const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::Free: return "free";
    case Boundary::Periodic: return "periodic";
    case Boundary::PlusSpin: return "plus-spin";
    case Boundary::WiredFk: return "wired-fk";
  }
  return "?";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "free") return Boundary::Free;
  if (s == "periodic") return Boundary::Periodic;
  if (s == "plus-spin") return Boundary::PlusSpin;
  if (s == "wired-fk") return Boundary::WiredFk;
  throw std::invalid_argument("unknown boundary: " + s);
}

void LatticeSpec::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("lattice dimensions must be >= 1");
  if (!(spacing > 0.0)) throw std::invalid_argument("lattice spacing must be > 0");
}

FieldParams FieldParams::from_little_h(double beta, double little_h, double spacing) {
  return FieldParams(beta, little_h * std::pow(spacing, 15.0 / 8.0));
}

double FieldParams::little_h(double spacing) const {
  return big_h * std::pow(spacing, -15.0 / 8.0);
}

void FieldParams::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (big_h < 0.0) throw std::invalid_argument("field H must be >= 0");
}

Region Region::box(double cx, double cy, double half) {
  Region r;
  r.kind = Kind::Box;
  r.cx = cx;
  r.cy = cy;
  r.half_w = r.half_h = half;
  r.validate();
  return r;
}

Region Region::annulus(double cx, double cy, double inner, double outer) {
  Region r;
  r.kind = Kind::Annulus;
  r.cx = cx;
  r.cy = cy;
  r.inner = inner;
  r.half_w = r.half_h = outer;
  r.validate();
  return r;
}

Region Region::rectangle(double cx, double cy, double half_w, double half_h) {
  Region r;
  r.kind = Kind::Rectangle;
  r.cx = cx;
  r.cy = cy;
  r.half_w = half_w;
  r.half_h = half_h;
  r.validate();
  return r;
}

void Region::validate() const {
  if (half_w < 0 || half_h < 0) throw std::invalid_argument("region half-sides must be >= 0");
  if (kind == Kind::Annulus && !(inner > 0 && inner < half_w))
    throw std::invalid_argument("annulus requires 0 < inner < outer");
}

bool Region::beyond(int col, int row) const {
  double dx = std::abs(col - cx), dy = std::abs(row - cy);
  return dx > half_w || dy > half_h;
}

bool Region::in_hole(int col, int row) const {
  if (kind != Kind::Annulus) return false;
  double dx = std::abs(col - cx), dy = std::abs(row - cy);
  return std::max(dx, dy) < inner;
}

bool Region::contains(int col, int row) const {
  return !beyond(col, row) && !in_hole(col, row);
}

GhostGraph build_graph(const LatticeSpec& spec) {
  spec.validate();
  GhostGraph g;
  g.spec = spec;
  g.boundary_contacts.assign(spec.n_sites(), 0);
  const bool periodic = spec.boundary == Boundary::Periodic;

  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const int s = spec.site_index(col, row);
      // east then north, skipping self-loops on periodic 1-wide directions
      if (periodic) {
        if (spec.width > 1) {
          int e = spec.site_index((col + 1) % spec.width, row);
          g.internal_edges.push_back({s, e});
        }
        if (spec.height > 1) {
          int n = spec.site_index(col, (row + 1) % spec.height);
          g.internal_edges.push_back({s, n});
        }
      } else {
        if (col + 1 < spec.width) g.internal_edges.push_back({s, spec.site_index(col + 1, row)});
        if (row + 1 < spec.height) g.internal_edges.push_back({s, spec.site_index(col, row + 1)});
        int contacts = 0;
        if (col == 0) ++contacts;
        if (col == spec.width - 1) ++contacts;
        if (row == 0) ++contacts;
        if (row == spec.height - 1) ++contacts;
        g.boundary_contacts[s] = contacts;
      }
    }
  }

  g.adjacency_.assign(spec.n_sites(), {});
  for (int32_t e = 0; e < g.n_internal(); ++e) {
    const auto& edge = g.internal_edges[e];
    g.adjacency_[edge.a].push_back({edge.b, e});
    g.adjacency_[edge.b].push_back({edge.a, e});
  }
  return g;
}

std::vector<Site> boundary_sites(const LatticeSpec& spec, const Region& region,
                                 RegionSide side) {
  spec.validate();
  region.validate();
  if (side == RegionSide::Inner && region.kind != Region::Kind::Annulus)
    throw std::invalid_argument("inner boundary side requires an annulus region");
  if (spec.boundary == Boundary::Periodic && region.kind == Region::Kind::Annulus)
    throw std::invalid_argument("annulus boundaries need a planar embedding, not periodic");

  static const int dc[4] = {1, -1, 0, 0};
  static const int dr[4] = {0, 0, 1, -1};
  std::vector<Site> out;
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      if (!region.contains(col, row)) continue;
      bool hit = false;
      for (int k = 0; k < 4 && !hit; ++k) {
        int nc = col + dc[k], nr = row + dr[k];
        if (spec.boundary == Boundary::Periodic) {
          nc = (nc + spec.width) % spec.width;
          nr = (nr + spec.height) % spec.height;
        }
        if (!spec.in_lattice(nc, nr)) continue;
        if (region.contains(nc, nr)) continue;
        if (side == RegionSide::Inner)
          hit = region.in_hole(nc, nr);
        else
          hit = !region.in_hole(nc, nr);
      }
      if (hit) out.push_back(Site{col, row});
    }
  }
  return out;  // row-major by construction
}

// --- config blocks ---

static std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string to_config_block(const LatticeSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "type = lattice\n"
      << "width = " << spec.width << "\n"
      << "height = " << spec.height << "\n"
      << "spacing = " << spec.spacing << "\n"
      << "boundary = " << to_string(spec.boundary) << "\n";
  return out.str();
}

std::string to_config_block(const Region& region) {
  std::ostringstream out;
  out.precision(17);
  const char* kind = region.kind == Region::Kind::Box        ? "box"
                     : region.kind == Region::Kind::Annulus  ? "annulus"
                                                             : "rectangle";
  out << "type = region\n"
      << "kind = " << kind << "\n"
      << "cx = " << region.cx << "\n"
      << "cy = " << region.cy << "\n";
  if (region.kind == Region::Kind::Annulus) out << "inner = " << region.inner << "\n";
  out << "half_w = " << region.half_w << "\n"
      << "half_h = " << region.half_h << "\n";
  return out.str();
}

LatticeSpec lattice_from_config_block(const std::string& text) {
  auto kv = parse_kv(text);
  if (kv["type"] != "lattice") throw std::invalid_argument("not a lattice config block");
  LatticeSpec spec;
  spec.width = std::stoi(kv.at("width"));
  spec.height = std::stoi(kv.at("height"));
  spec.spacing = std::stod(kv.at("spacing"));
  spec.boundary = boundary_from_string(kv.at("boundary"));
  spec.validate();
  return spec;
}

Region region_from_config_block(const std::string& text) {
  auto kv = parse_kv(text);
  if (kv["type"] != "region") throw std::invalid_argument("not a region config block");
  const std::string kind = kv.at("kind");
  double cx = std::stod(kv.at("cx")), cy = std::stod(kv.at("cy"));
  if (kind == "box") return Region::box(cx, cy, std::stod(kv.at("half_w")));
  if (kind == "annulus")
    return Region::annulus(cx, cy, std::stod(kv.at("inner")), std::stod(kv.at("half_w")));
  if (kind == "rectangle")
    return Region::rectangle(cx, cy, std::stod(kv.at("half_w")), std::stod(kv.at("half_h")));
  throw std::invalid_argument("unknown region kind: " + kind);
}

// --- packed bitstrings ---

namespace {

constexpr char kMagic[4] = {'F', 'K', 'G', '1'};
constexpr uint8_t kVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

std::vector<uint8_t> make_header(const LatticeSpec& spec, uint8_t kind) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(kind);
  out.push_back(static_cast<uint8_t>(spec.boundary));
  out.push_back(0);  // reserved
  put_u32(out, static_cast<uint32_t>(spec.width));
  put_u32(out, static_cast<uint32_t>(spec.height));
  return out;
}

void check_header(const LatticeSpec& spec, uint8_t kind, const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::invalid_argument("bad bitstring header");
  if (bytes[4] != kVersion) throw std::invalid_argument("unsupported bitstring version");
  if (bytes[5] != kind) throw std::invalid_argument("bitstring kind mismatch");
  if (bytes[6] != static_cast<uint8_t>(spec.boundary) ||
      get_u32(bytes.data() + 8) != static_cast<uint32_t>(spec.width) ||
      get_u32(bytes.data() + 12) != static_cast<uint32_t>(spec.height))
    throw std::invalid_argument("bitstring does not match lattice spec");
}

void append_bits(std::vector<uint8_t>& out, const std::vector<uint8_t>& bits, bool plus_is_one) {
  uint8_t acc = 0;
  int n = 0;
  for (uint8_t b : bits) {
    acc |= static_cast<uint8_t>((plus_is_one ? (b != 0) : b) ? 1 : 0) << n;
    if (++n == 8) {
      out.push_back(acc);
      acc = 0;
      n = 0;
    }
  }
  if (n > 0) out.push_back(acc);
}

void read_bits(const std::vector<uint8_t>& bytes, size_t& offset, size_t count,
               std::vector<uint8_t>& out) {
  out.resize(count);
  for (size_t i = 0; i < count; ++i) {
    size_t byte = offset + i / 8;
    if (byte >= bytes.size()) throw std::invalid_argument("bitstring truncated");
    out[i] = (bytes[byte] >> (i % 8)) & 1;
  }
  offset += (count + 7) / 8;
}

}  // namespace

std::vector<uint8_t> pack_spins(const LatticeSpec& spec, const SpinConfig& s) {
  if (s.size() != spec.n_sites()) throw std::invalid_argument("spin config size mismatch");
  auto out = make_header(spec, 0);
  std::vector<uint8_t> bits(s.spin.size());
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = s.spin[i] > 0;
  append_bits(out, bits, true);
  return out;
}

SpinConfig unpack_spins(const LatticeSpec& spec, const std::vector<uint8_t>& bytes) {
  check_header(spec, 0, bytes);
  size_t offset = 16;
  std::vector<uint8_t> bits;
  read_bits(bytes, offset, static_cast<size_t>(spec.n_sites()), bits);
  SpinConfig s;
  s.spin.resize(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) s.spin[i] = bits[i] ? +1 : -1;
  return s;
}

std::vector<uint8_t> pack_bonds(const LatticeSpec& spec, const GhostGraph& g,
                                const FkConfig& fk) {
  if (static_cast<int>(fk.internal_open.size()) != g.n_internal() ||
      static_cast<int>(fk.ghost_open.size()) != g.n_sites())
    throw std::invalid_argument("bond config size mismatch");
  auto out = make_header(spec, 1);
  append_bits(out, fk.internal_open, false);
  append_bits(out, fk.ghost_open, false);
  return out;
}

FkConfig unpack_bonds(const LatticeSpec& spec, const GhostGraph& g,
                      const std::vector<uint8_t>& bytes) {
  check_header(spec, 1, bytes);
  size_t offset = 16;
  FkConfig fk;
  read_bits(bytes, offset, static_cast<size_t>(g.n_internal()), fk.internal_open);
  read_bits(bytes, offset, static_cast<size_t>(g.n_sites()), fk.ghost_open);
  return fk;
}

}  // namespace fkghost
