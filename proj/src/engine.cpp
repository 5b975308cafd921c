#include "fkghost/engine.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fkghost/estimators.hpp"

namespace fkghost {

ChainState init_chain(const GhostGraph& g, uint64_t seed) {
  ChainState state;
  state.rng = Rng(seed);
  state.spins.spin.resize(g.n_sites());
  for (auto& s : state.spins.spin) s = state.rng.fair_coin() ? +1 : -1;
  state.bonds = FkConfig::all_closed(g);
  state.sweep_count = 0;
  return state;
}

namespace {

// Shared cluster pass for one sweep: open internal bonds between equal
// spins, plus the boundary attachments the spec's boundary realizations
// require. Returns the disjoint-set over sites and which roots are forced
// to +1 (ghost or plus boundary).
struct SweepScratch {
  DisjointSet ds;
  std::vector<uint8_t> forced_plus;  // per root
  std::vector<uint8_t> coin_plus;    // per root, from fair coins
};

void debug_check_invariants(const ChainState& state, const GhostGraph& g) {
#ifndef NDEBUG
  DisjointSet ds;
  ds.reset(g.n_sites());
  union_open_edges(g, state.bonds.internal_open.data(), ds);
  for (int e = 0; e < g.n_internal(); ++e) {
    if (state.bonds.internal_open[e]) {
      assert(state.spins.spin[g.internal_edges[e].a] == state.spins.spin[g.internal_edges[e].b]);
    }
  }
  for (int s = 0; s < g.n_sites(); ++s)
    if (state.bonds.ghost_open[s]) assert(state.spins.spin[s] == +1);
#else
  (void)state;
  (void)g;
#endif
}

}  // namespace

void sw_step(ChainState& state, const GhostGraph& g, const FieldParams& params) {
  params.validate();
  const int n = g.n_sites();
  if (state.spins.size() != n) throw std::invalid_argument("state does not match graph");
  const double p_int = -std::expm1(-2.0 * params.beta);
  const double p_ext = -std::expm1(-2.0 * params.big_h);
  const bool plus = g.spec.boundary == Boundary::PlusSpin;
  const bool wired = g.spec.boundary == Boundary::WiredFk;
  auto& rng = state.rng;

  // (i) internal bonds, canonical edge order
  for (int e = 0; e < g.n_internal(); ++e) {
    const auto& edge = g.internal_edges[e];
    const double u = rng.uniform();
    state.bonds.internal_open[e] =
        state.spins.spin[edge.a] == state.spins.spin[edge.b] && u < p_int;
  }
  // (ii) ghost bonds, site order
  for (int s = 0; s < n; ++s) {
    const double u = rng.uniform();
    state.bonds.ghost_open[s] = state.spins.spin[s] == +1 && u < p_ext;
  }

  // boundary attachment: one draw per boundary contact, site order
  std::vector<uint8_t> touches_boundary;
  if (plus) {
    touches_boundary.assign(n, 0);
    for (int s = 0; s < n; ++s) {
      for (int c = 0; c < g.boundary_contacts[s]; ++c) {
        const double u = rng.uniform();
        if (state.spins.spin[s] == +1 && u < p_int) touches_boundary[s] = 1;
      }
    }
  }

  // (iii) clusters and fresh spins
  DisjointSet ds;
  ds.reset(n);
  union_open_edges(g, state.bonds.internal_open.data(), ds);  // handles wired merge
  (void)wired;

  std::vector<uint8_t> forced(n, 0);
  for (int s = 0; s < n; ++s) {
    if (state.bonds.ghost_open[s]) forced[ds.find(s)] = 1;
    if (plus && touches_boundary[s]) forced[ds.find(s)] = 1;
  }
  // one coin per cluster in canonical (smallest-site-first) order
  std::vector<int8_t> fresh(n, 0);
  for (int s = 0; s < n; ++s) {
    int root = ds.find(s);
    if (fresh[root] == 0) {
      int8_t coin = rng.fair_coin() ? +1 : -1;
      fresh[root] = forced[root] ? +1 : coin;
    }
  }
  for (int s = 0; s < n; ++s) state.spins.spin[s] = fresh[ds.find(s)];
  state.sweep_count += 1;
  debug_check_invariants(state, g);
}

void wolff_step(ChainState& state, const GhostGraph& g, double beta) {
  if (g.spec.boundary != Boundary::Free && g.spec.boundary != Boundary::Periodic)
    throw std::invalid_argument("wolff needs free or periodic boundary");
  const int n = g.n_sites();
  if (state.spins.size() != n) throw std::invalid_argument("state does not match graph");
  const double p_add = -std::expm1(-2.0 * beta);
  auto& rng = state.rng;

  const int seed_site = static_cast<int>(rng.pick(static_cast<uint64_t>(n)));
  const int8_t cluster_spin = state.spins.spin[seed_site];
  std::vector<int32_t> stack{seed_site};
  std::vector<uint8_t> in_cluster(n, 0);
  in_cluster[seed_site] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (const auto& [nbr, e] : g.neighbors(s)) {
      (void)e;
      if (in_cluster[nbr] || state.spins.spin[nbr] != cluster_spin) continue;
      if (rng.uniform() < p_add) {
        in_cluster[nbr] = 1;
        stack.push_back(nbr);
      }
    }
  }
  for (int s = 0; s < n; ++s)
    if (in_cluster[s]) state.spins.spin[s] = -state.spins.spin[s];
  // bonds stay all-closed so the state invariants hold trivially
  std::fill(state.bonds.internal_open.begin(), state.bonds.internal_open.end(), 0);
  std::fill(state.bonds.ghost_open.begin(), state.bonds.ghost_open.end(), 0);
  state.sweep_count += 1;
}

SpinConfig es_assign_spins(const GhostGraph& g, const FkConfig& fk, Rng& rng) {
  auto d = find_clusters(g, fk);
  std::vector<int8_t> cluster_spin(d.n_clusters());
  for (int i = 0; i < d.n_clusters(); ++i) {
    int8_t coin = rng.fair_coin() ? +1 : -1;
    cluster_spin[i] = d.ghost_connected[i] ? +1 : coin;
  }
  SpinConfig out;
  out.spin.resize(g.n_sites());
  for (int s = 0; s < g.n_sites(); ++s)
    out.spin[s] = cluster_spin[d.cluster_index_of_site(s)];
  return out;
}

std::vector<uint8_t> tanh_attach_ghost(const GhostGraph& g, const FkConfig& internal_fk,
                                       const FieldParams& params, Rng& rng) {
  params.validate();
  if (g.spec.boundary != Boundary::Free)
    throw std::invalid_argument("tanh attachment is stated for free boundary");
  auto d = find_clusters(g, internal_fk);
  std::vector<uint8_t> flags(d.n_clusters());
  for (int i = 0; i < d.n_clusters(); ++i)
    flags[i] = rng.coin(std::tanh(params.big_h * d.sizes[i]));
  return flags;
}

double rn_log_weight(const GhostGraph& g, const FkConfig& internal_fk,
                     const FieldParams& params) {
  params.validate();
  if (g.spec.boundary != Boundary::Free)
    throw std::invalid_argument("cosh-product reweighting is stated for free boundary");
  auto d = find_clusters(g, internal_fk);
  const double ln2 = std::log(2.0);
  double acc = 0.0;
  for (int i = 0; i < d.n_clusters(); ++i) {
    double hc = params.big_h * d.sizes[i];
    acc += hc + std::log1p(std::exp(-2.0 * hc)) - ln2;  // log cosh
  }
  return acc;
}

// --- observables -----------------------------------------------------------

namespace {

Site parse_site(const std::string& text, const LatticeSpec& spec) {
  auto comma = text.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("expected <col>,<row>");
  Site s{std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
  if (!spec.in_lattice(s.col, s.row)) throw std::invalid_argument("site out of range");
  return s;
}

double site_energy(const ChainState& state, const GhostGraph& g) {
  double e = 0.0;
  for (const auto& edge : g.internal_edges)
    e += state.spins.spin[edge.a] * state.spins.spin[edge.b];
  if (g.spec.boundary == Boundary::PlusSpin)
    for (int s = 0; s < g.n_sites(); ++s)
      e += g.boundary_contacts[s] * state.spins.spin[s];
  return -e / g.n_sites();
}

}  // namespace

Observable make_observable(const std::string& name, const LatticeSpec& spec) {
  Observable obs;
  obs.name = name;
  if (name == "mag") {
    obs.eval = [](const ChainState& st, const GhostGraph& g, const ClusterDecomposition*) {
      double m = 0;
      for (auto s : st.spins.spin) m += s;
      return m / g.n_sites();
    };
  } else if (name == "abs_mag") {
    obs.eval = [](const ChainState& st, const GhostGraph& g, const ClusterDecomposition*) {
      double m = 0;
      for (auto s : st.spins.spin) m += s;
      return std::abs(m) / g.n_sites();
    };
  } else if (name == "energy") {
    obs.eval = [](const ChainState& st, const GhostGraph& g, const ClusterDecomposition*) {
      return site_energy(st, g);
    };
  } else if (name == "ghost_fraction") {
    obs.use_clusters = true;
    obs.eval = [](const ChainState&, const GhostGraph& g, const ClusterDecomposition* d) {
      double n = 0;
      for (int s = 0; s < g.n_sites(); ++s)
        if (d->ghost_connected[d->cluster_index_of_site(s)]) n += 1;
      return n / g.n_sites();
    };
  } else if (name == "largest_cluster") {
    obs.use_clusters = true;
    obs.eval = [](const ChainState&, const GhostGraph& g, const ClusterDecomposition* d) {
      int32_t best = 0;
      for (auto s : d->sizes) best = std::max(best, s);
      return static_cast<double>(best) / g.n_sites();
    };
  } else if (name == "n_clusters") {
    obs.use_clusters = true;
    obs.eval = [](const ChainState&, const GhostGraph&, const ClusterDecomposition* d) {
      return static_cast<double>(d->n_clusters());
    };
  } else if (name.rfind("sigma:", 0) == 0) {
    Site site = parse_site(name.substr(6), spec);
    int idx = spec.site_index(site);
    obs.eval = [idx](const ChainState& st, const GhostGraph&, const ClusterDecomposition*) {
      return static_cast<double>(st.spins.spin[idx]);
    };
  } else if (name.rfind("pair:", 0) == 0) {
    auto rest = name.substr(5);
    auto colon = rest.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("expected pair:<site>:<site>");
    int ia = spec.site_index(parse_site(rest.substr(0, colon), spec));
    int ib = spec.site_index(parse_site(rest.substr(colon + 1), spec));
    obs.eval = [ia, ib](const ChainState& st, const GhostGraph&, const ClusterDecomposition*) {
      return static_cast<double>(st.spins.spin[ia] * st.spins.spin[ib]);
    };
  } else {
    throw std::invalid_argument("unknown observable: " + name);
  }
  return obs;
}

// --- chain driving ----------------------------------------------------------

void SampleSchedule::validate() const {
  if (sweeps <= 0 || burn_in < 0 || sweeps <= burn_in || thin < 1)
    throw std::invalid_argument("invalid schedule: need sweeps > burn-in >= 0 and thin >= 1");
}

void sample_chain_visit(const GhostGraph& g, const FieldParams& params,
                        const SampleSchedule& schedule,
                        const std::function<void(const ChainState&, int64_t)>& visit) {
  schedule.validate();
  if (schedule.sampler == Sampler::Wolff && params.big_h != 0.0)
    throw std::invalid_argument("wolff requires H = 0");
  ChainState state = init_chain(g, schedule.seed);
  for (int64_t sweep = 1; sweep <= schedule.sweeps; ++sweep) {
    if (schedule.sampler == Sampler::Wolff)
      wolff_step(state, g, params.beta);
    else
      sw_step(state, g, params);
    if (sweep > schedule.burn_in && (sweep - schedule.burn_in) % schedule.thin == 0)
      visit(state, sweep);
  }
}

SampleSeries sample_chain(const GhostGraph& g, const FieldParams& params,
                          const SampleSchedule& schedule,
                          const std::vector<Observable>& observables) {
  SampleSeries series;
  series.values.resize(observables.size());
  for (const auto& o : observables) series.names.push_back(o.name);
  bool need_clusters = false;
  for (const auto& o : observables) need_clusters |= o.use_clusters;

  sample_chain_visit(g, params, schedule, [&](const ChainState& state, int64_t sweep) {
    series.sweep.push_back(sweep);
    ClusterDecomposition d;
    if (need_clusters) d = find_clusters(g, state.bonds);
    for (size_t i = 0; i < observables.size(); ++i)
      series.values[i].push_back(
          observables[i].eval(state, g, need_clusters ? &d : nullptr));
  });
  return series;
}

int64_t default_burn_in(const GhostGraph& g, const FieldParams& params, uint64_t seed,
                        Sampler sampler) {
  SampleSchedule pilot;
  pilot.sweeps = 2000;
  pilot.burn_in = 0;
  pilot.thin = 1;
  pilot.seed = seed;
  pilot.sampler = sampler;
  auto series = sample_chain(g, params, pilot, {make_observable("energy", g.spec)});
  auto tau = autocorrelation(series.values[0]);
  double t = std::max(0.5, tau.tau);
  return static_cast<int64_t>(std::ceil(20.0 * t));
}

// --- checkpoints -------------------------------------------------------------

namespace {
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}
uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}
}  // namespace

std::vector<uint8_t> serialize_chain(const LatticeSpec& spec, const GhostGraph& g,
                                     const ChainState& state) {
  std::vector<uint8_t> out;
  auto spins = pack_spins(spec, state.spins);
  auto bonds = pack_bonds(spec, g, state.bonds);
  // chain header: reuse the spin header bytes but mark kind=2
  out = spins;
  out[5] = 2;
  std::vector<uint8_t> tail;
  put_u64(tail, static_cast<uint64_t>(state.sweep_count));
  for (uint64_t w : state.rng.state()) put_u64(tail, w);
  out.insert(out.end(), tail.begin(), tail.end());
  out.insert(out.end(), bonds.begin() + 16, bonds.end());  // skip duplicate header
  return out;
}

ChainState deserialize_chain(const LatticeSpec& spec, const GhostGraph& g,
                             const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 16 + 40) throw std::invalid_argument("checkpoint truncated");
  std::vector<uint8_t> spin_bytes(bytes.begin(), bytes.begin() + 16);
  spin_bytes[5] = 0;
  const size_t spin_bits_len = (static_cast<size_t>(spec.n_sites()) + 7) / 8;
  spin_bytes.insert(spin_bytes.end(), bytes.begin() + 16, bytes.begin() + 16 + spin_bits_len);

  ChainState state;
  state.spins = unpack_spins(spec, spin_bytes);
  size_t off = 16 + spin_bits_len;
  if (bytes.size() < off + 40) throw std::invalid_argument("checkpoint truncated");
  state.sweep_count = static_cast<int64_t>(get_u64(bytes.data() + off));
  off += 8;
  std::array<uint64_t, 4> rs;
  for (auto& w : rs) {
    w = get_u64(bytes.data() + off);
    off += 8;
  }
  state.rng.set_state(rs);

  std::vector<uint8_t> bond_bytes;
  {
    auto header = pack_bonds(spec, g, FkConfig::all_closed(g));
    bond_bytes.assign(header.begin(), header.begin() + 16);
  }
  bond_bytes.insert(bond_bytes.end(), bytes.begin() + off, bytes.end());
  state.bonds = unpack_bonds(spec, g, bond_bytes);
  return state;
}

void save_chain(const std::string& path, const LatticeSpec& spec, const GhostGraph& g,
                const ChainState& state) {
  auto bytes = serialize_chain(spec, g, state);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ChainState load_chain(const std::string& path, const LatticeSpec& spec, const GhostGraph& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return deserialize_chain(spec, g, bytes);
}

}  // namespace fkghost
