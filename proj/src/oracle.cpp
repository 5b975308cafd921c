#include "fkghost/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

namespace fkghost {

namespace {

constexpr int kMaxIsingSites = 20;
constexpr int kMaxFkEdges = 24;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const double* v, size_t n) {
  double m = kNegInf;
  for (size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (v[i] != kNegInf) acc += std::exp(v[i] - m);
  return m + std::log(acc);
}

// Fill log weights chunk-parallel, then reduce partitions in fixed chunk
// order so results do not depend on the worker count.
template <typename Fn>
void fill_log_weights(ExactDistribution& dist, Fn&& weight_of) {
  const uint64_t n = dist.support_size();
  dist.log_weight.resize(n);
  const uint64_t chunk = uint64_t{1} << 16;
  const uint64_t n_chunks = (n + chunk - 1) / chunk;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (n_chunks <= 1 || workers == 1) {
    for (uint64_t cfg = 0; cfg < n; ++cfg) dist.log_weight[cfg] = weight_of(cfg);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<uint64_t> next{0};
    for (unsigned w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, [&]() {
        for (;;) {
          uint64_t c = next.fetch_add(1);
          if (c >= n_chunks) return;
          uint64_t lo = c * chunk, hi = std::min(n, lo + chunk);
          for (uint64_t cfg = lo; cfg < hi; ++cfg) dist.log_weight[cfg] = weight_of(cfg);
        }
      }));
    }
    for (auto& f : futures) f.get();
  }
  // per-chunk logsumexp merged in order
  std::vector<double> partials(n_chunks);
  for (uint64_t c = 0; c < n_chunks; ++c) {
    uint64_t lo = c * chunk, hi = std::min(n, lo + chunk);
    partials[c] = logsumexp(dist.log_weight.data() + lo, hi - lo);
  }
  dist.log_partition = logsumexp(partials.data(), partials.size());
}

struct FkWeightContext {
  const GhostGraph* g;
  int n_int, n_sites;
  double log_p_int, log_q_int, log_p_ext, log_q_ext;
};

// Cluster/ghost scan for one bond configuration. Returns the number of
// clusters not attached to the ghost.
int count_non_ghost_clusters(const GhostGraph& g, uint64_t cfg, DisjointSet& ds,
                             std::vector<uint8_t>& open_scratch) {
  const int n_int = g.n_internal();
  const int n_sites = g.n_sites();
  open_scratch.resize(n_int);
  for (int e = 0; e < n_int; ++e) open_scratch[e] = (cfg >> e) & 1;
  ds.reset(n_sites);
  union_open_edges(g, open_scratch.data(), ds);
  // mark ghost-attached roots
  thread_local std::vector<uint8_t> ghosted;
  ghosted.assign(n_sites, 0);
  for (int s = 0; s < n_sites; ++s)
    if ((cfg >> (n_int + s)) & 1) ghosted[ds.find(s)] = 1;
  int k = 0;
  for (int s = 0; s < n_sites; ++s)
    if (ds.find(s) == s && !ghosted[s]) ++k;
  return k;
}

}  // namespace

double ExactDistribution::prob(uint64_t cfg) const {
  double lw = log_weight[cfg];
  return lw == kNegInf ? 0.0 : std::exp(lw - log_partition);
}

ExactDistribution enumerate_ising(const GhostGraph& g, const FieldParams& params) {
  params.validate();
  const auto& spec = g.spec;
  if (spec.boundary == Boundary::WiredFk)
    throw std::invalid_argument("wired-fk is a bond boundary; spin enumeration needs free, periodic or plus-spin");
  if (spec.n_sites() > kMaxIsingSites)
    throw std::invalid_argument("spin enumeration limited to 20 sites");

  const int n = spec.n_sites();
  const double beta = params.beta, H = params.big_h;
  const bool plus = spec.boundary == Boundary::PlusSpin;

  ExactDistribution dist;
  dist.dof_bits = n;
  fill_log_weights(dist, [&](uint64_t cfg) {
    double energy = 0.0;
    for (const auto& e : g.internal_edges) {
      int su = (cfg >> e.a) & 1 ? 1 : -1;
      int sv = (cfg >> e.b) & 1 ? 1 : -1;
      energy += su * sv;
    }
    double field_sum = 0.0, boundary_sum = 0.0;
    for (int s = 0; s < n; ++s) {
      int ss = (cfg >> s) & 1 ? 1 : -1;
      field_sum += ss;
      if (plus) boundary_sum += ss * g.boundary_contacts[s];
    }
    return beta * (energy + boundary_sum) + H * field_sum;
  });
  return dist;
}

ExactDistribution enumerate_fk_ghost(const GhostGraph& g, const FieldParams& params) {
  params.validate();
  const auto& spec = g.spec;
  if (spec.boundary == Boundary::PlusSpin)
    throw std::invalid_argument("plus-spin is a spin boundary; bond enumeration needs free, periodic or wired-fk");
  const int n_int = g.n_internal();
  const int n_sites = g.n_sites();
  if (n_int + n_sites > kMaxFkEdges)
    throw std::invalid_argument("bond enumeration limited to 24 edges");

  const double beta = params.beta, H = params.big_h;
  FkWeightContext ctx;
  ctx.log_p_int = std::log1p(-std::exp(-2.0 * beta));
  ctx.log_q_int = -2.0 * beta;
  ctx.log_p_ext = H > 0 ? std::log1p(-std::exp(-2.0 * H)) : kNegInf;
  ctx.log_q_ext = -2.0 * H;
  const double ln2 = std::log(2.0);

  ExactDistribution dist;
  dist.dof_bits = n_int + n_sites;
  fill_log_weights(dist, [&](uint64_t cfg) {
    thread_local DisjointSet ds;
    thread_local std::vector<uint8_t> open_scratch;
    double lw = 0.0;
    for (int e = 0; e < n_int; ++e) lw += ((cfg >> e) & 1) ? ctx.log_p_int : ctx.log_q_int;
    for (int s = 0; s < n_sites; ++s) {
      if ((cfg >> (n_int + s)) & 1) {
        if (ctx.log_p_ext == kNegInf) return kNegInf;
        lw += ctx.log_p_ext;
      } else {
        lw += ctx.log_q_ext;
      }
    }
    lw += ln2 * count_non_ghost_clusters(g, cfg, ds, open_scratch);
    return lw;
  });
  return dist;
}

JointEsDistribution enumerate_joint_es(const GhostGraph& g, const FieldParams& params) {
  params.validate();
  const auto& spec = g.spec;
  if (spec.boundary != Boundary::Free && spec.boundary != Boundary::Periodic)
    throw std::invalid_argument("joint enumeration supports free or periodic boundaries");
  const int n_int = g.n_internal();
  const int n_sites = g.n_sites();
  if (n_sites + n_int + n_sites > kMaxIsingSites + kMaxFkEdges)
    throw std::invalid_argument("joint enumeration too large");
  if (n_int + n_sites > kMaxFkEdges)
    throw std::invalid_argument("bond enumeration limited to 24 edges");

  ExactDistribution fk = enumerate_fk_ghost(g, params);
  const double ln2 = std::log(2.0);

  JointEsDistribution joint;
  joint.spin_bits = n_sites;
  joint.fk_bits = fk.dof_bits;

  DisjointSet ds;
  std::vector<uint8_t> open_scratch;
  std::vector<int32_t> free_cluster_root;  // roots of non-ghost clusters
  std::vector<uint8_t> ghosted;
  std::vector<double> logws;

  for (uint64_t cfg = 0; cfg < fk.support_size(); ++cfg) {
    double lw_fk = fk.log_weight[cfg];
    if (lw_fk == kNegInf) continue;
    open_scratch.assign(n_int, 0);
    for (int e = 0; e < n_int; ++e) open_scratch[e] = (cfg >> e) & 1;
    ds.reset(n_sites);
    union_open_edges(g, open_scratch.data(), ds);
    ghosted.assign(n_sites, 0);
    for (int s = 0; s < n_sites; ++s)
      if ((cfg >> (n_int + s)) & 1) ghosted[ds.find(s)] = 1;
    free_cluster_root.clear();
    for (int s = 0; s < n_sites; ++s)
      if (ds.find(s) == s && !ghosted[s]) free_cluster_root.push_back(s);

    const int k = static_cast<int>(free_cluster_root.size());
    const double lw = lw_fk - k * ln2;
    for (uint64_t signs = 0; signs < (uint64_t{1} << k); ++signs) {
      uint32_t spin_cfg = 0;
      for (int s = 0; s < n_sites; ++s) {
        int root = ds.find(s);
        bool up;
        if (ghosted[root]) {
          up = true;
        } else {
          int j = static_cast<int>(std::lower_bound(free_cluster_root.begin(),
                                                    free_cluster_root.end(), root) -
                                   free_cluster_root.begin());
          up = (signs >> j) & 1;
        }
        if (up) spin_cfg |= uint32_t{1} << s;
      }
      joint.entries.push_back({spin_cfg, static_cast<uint32_t>(cfg), lw});
      logws.push_back(lw);
    }
  }
  joint.log_partition = logsumexp(logws.data(), logws.size());
  return joint;
}

std::vector<double> JointEsDistribution::marginal_spins() const {
  std::vector<double> probs(uint64_t{1} << spin_bits, 0.0);
  for (const auto& e : entries) probs[e.spin_cfg] += std::exp(e.log_weight - log_partition);
  return probs;
}

std::vector<double> JointEsDistribution::marginal_fk() const {
  std::vector<double> probs(uint64_t{1} << fk_bits, 0.0);
  for (const auto& e : entries) probs[e.fk_cfg] += std::exp(e.log_weight - log_partition);
  return probs;
}

namespace {

struct SpinMoments {
  double mean_x, mean_y, mean_xy;
};

SpinMoments spin_moments(const ExactDistribution& ising, int ix, int iy) {
  double zx = 0, zy = 0, zxy = 0, z = 0;
  const double shift = ising.log_partition;
  for (uint64_t cfg = 0; cfg < ising.support_size(); ++cfg) {
    double w = std::exp(ising.log_weight[cfg] - shift);
    int sx = (cfg >> ix) & 1 ? 1 : -1;
    int sy = (cfg >> iy) & 1 ? 1 : -1;
    z += w;
    zx += w * sx;
    zy += w * sy;
    zxy += w * sx * sy;
  }
  return {zx / z, zy / z, zxy / z};
}

}  // namespace

double exact_magnetization(const GhostGraph& g, const FieldParams& params, Site x) {
  const int ix = g.spec.site_index(x);
  auto ising = enumerate_ising(g, params);
  return spin_moments(ising, ix, ix).mean_x;
}

double exact_truncated_two_point(const GhostGraph& g, const FieldParams& params, Site x,
                                 Site y) {
  if (!g.spec.in_lattice(x.col, x.row) || !g.spec.in_lattice(y.col, y.row))
    throw std::invalid_argument("site out of range");
  const int ix = g.spec.site_index(x), iy = g.spec.site_index(y);
  auto ising = enumerate_ising(g, params);
  auto m = spin_moments(ising, ix, iy);
  return m.mean_xy - m.mean_x * m.mean_y;
}

std::pair<double, double> verify_es_identity(const GhostGraph& g, const FieldParams& params,
                                             Site x, Site y) {
  const double lhs = exact_truncated_two_point(g, params, x, y);

  const int ix = g.spec.site_index(x), iy = g.spec.site_index(y);
  const int n_int = g.n_internal(), n_sites = g.n_sites();
  auto fk = enumerate_fk_ghost(g, params);

  DisjointSet ds;
  std::vector<uint8_t> open_scratch(n_int);
  double p_xy = 0, p_xg = 0, p_yg = 0;
  for (uint64_t cfg = 0; cfg < fk.support_size(); ++cfg) {
    double p = fk.prob(cfg);
    if (p == 0.0) continue;
    for (int e = 0; e < n_int; ++e) open_scratch[e] = (cfg >> e) & 1;
    ds.reset(n_sites);
    union_open_edges(g, open_scratch.data(), ds);
    auto cluster_ghosted = [&](int site) {
      int root = ds.find(site);
      for (int s = 0; s < n_sites; ++s)
        if (((cfg >> (n_int + s)) & 1) && ds.find(s) == root) return true;
      return false;
    };
    bool xg = cluster_ghosted(ix), yg = cluster_ghosted(iy);
    bool xy = (ds.find(ix) == ds.find(iy)) || (xg && yg);  // paths may pass through g
    if (xy) p_xy += p;
    if (xg) p_xg += p;
    if (yg) p_yg += p;
  }
  return {lhs, p_xy - p_xg * p_yg};
}

double verify_rn_coupling(const GhostGraph& g, const FieldParams& params) {
  params.validate();
  if (g.spec.boundary != Boundary::Free)
    throw std::invalid_argument("cosh-product reweighting is stated for free boundary");
  const int n_int = g.n_internal(), n_sites = g.n_sites();
  if (n_int + n_sites > kMaxFkEdges)
    throw std::invalid_argument("bond enumeration limited to 24 edges");

  const double H = params.big_h;
  auto fk = enumerate_fk_ghost(g, params);

  // marginal over internal-edge configurations, plus conditional attachment
  // pattern probabilities per internal configuration
  const uint64_t n_cfg_int = uint64_t{1} << n_int;
  std::vector<double> marginal(n_cfg_int, 0.0);
  // pattern bit j <-> cluster j (clusters ordered by smallest site)
  std::vector<std::vector<double>> pattern_prob(n_cfg_int);

  DisjointSet ds;
  std::vector<uint8_t> open_scratch(n_int);
  std::vector<int32_t> cluster_roots;

  for (uint64_t icfg = 0; icfg < n_cfg_int; ++icfg) {
    for (int e = 0; e < n_int; ++e) open_scratch[e] = (icfg >> e) & 1;
    ds.reset(n_sites);
    union_open_edges(g, open_scratch.data(), ds);
    cluster_roots.clear();
    std::vector<int> cluster_index_of_root(n_sites, -1);
    for (int s = 0; s < n_sites; ++s)
      if (ds.find(s) == s) {
        cluster_index_of_root[s] = static_cast<int>(cluster_roots.size());
        cluster_roots.push_back(s);
      }
    const int k = static_cast<int>(cluster_roots.size());
    pattern_prob[icfg].assign(uint64_t{1} << k, 0.0);

    for (uint64_t ecfg = 0; ecfg < (uint64_t{1} << n_sites); ++ecfg) {
      uint64_t cfg = icfg | (ecfg << n_int);
      double p = fk.prob(cfg);
      if (p == 0.0) continue;
      marginal[icfg] += p;
      uint64_t pattern = 0;
      for (int s = 0; s < n_sites; ++s)
        if ((ecfg >> s) & 1) pattern |= uint64_t{1} << cluster_index_of_root[ds.find(s)];
      pattern_prob[icfg][pattern] += p;
    }
  }

  // zero-field internal-only measure
  const double log_p_int = std::log1p(-std::exp(-2.0 * params.beta));
  const double log_q_int = -2.0 * params.beta;
  const double ln2 = std::log(2.0);
  std::vector<double> log_q(n_cfg_int);
  std::vector<double> log_rn(n_cfg_int);
  for (uint64_t icfg = 0; icfg < n_cfg_int; ++icfg) {
    for (int e = 0; e < n_int; ++e) open_scratch[e] = (icfg >> e) & 1;
    ds.reset(n_sites);
    union_open_edges(g, open_scratch.data(), ds);
    double lw0 = 0.0;
    double log_cosh_prod = 0.0;
    for (int e = 0; e < n_int; ++e) lw0 += ((icfg >> e) & 1) ? log_p_int : log_q_int;
    for (int s = 0; s < n_sites; ++s)
      if (ds.find(s) == s) {
        lw0 += ln2;
        double hc = H * ds.size_of_root(s);
        // log cosh, overflow-safe
        log_cosh_prod += std::abs(hc) + std::log1p(std::exp(-2.0 * std::abs(hc))) - ln2;
      }
    log_q[icfg] = lw0;
    log_rn[icfg] = lw0 + log_cosh_prod;
  }
  double logz_rn = logsumexp(log_rn.data(), log_rn.size());

  double max_disc = 0.0;
  for (uint64_t icfg = 0; icfg < n_cfg_int; ++icfg) {
    max_disc = std::max(max_disc, std::abs(marginal[icfg] - std::exp(log_rn[icfg] - logz_rn)));

    // tanh attachment probabilities and independence across all patterns
    for (int e = 0; e < n_int; ++e) open_scratch[e] = (icfg >> e) & 1;
    ds.reset(n_sites);
    union_open_edges(g, open_scratch.data(), ds);
    std::vector<double> tanh_of_cluster;
    for (int s = 0; s < n_sites; ++s)
      if (ds.find(s) == s) tanh_of_cluster.push_back(std::tanh(H * ds.size_of_root(s)));
    const int k = static_cast<int>(tanh_of_cluster.size());
    if (marginal[icfg] <= 0) continue;
    for (uint64_t pattern = 0; pattern < (uint64_t{1} << k); ++pattern) {
      double predicted = 1.0;
      for (int j = 0; j < k; ++j)
        predicted *= ((pattern >> j) & 1) ? tanh_of_cluster[j] : 1.0 - tanh_of_cluster[j];
      double observed = pattern_prob[icfg][pattern] / marginal[icfg];
      max_disc = std::max(max_disc, std::abs(observed - predicted));
    }
  }
  return max_disc;
}

}  // namespace fkghost
