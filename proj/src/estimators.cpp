#include "fkghost/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fkghost/clusters.hpp"

namespace fkghost {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct WlsFit {
  double slope = 0.0, intercept = 0.0, slope_err = 0.0, residual_rms = 0.0;
};

// y ~ intercept + slope * x with weights 1/sigma^2. All-zero sigmas mean an
// exact fit; the slope error then comes from the residual scatter.
WlsFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                         const std::vector<double>& sigma) {
  const size_t n = x.size();
  bool all_exact = true;
  for (double s : sigma)
    if (s > 0) all_exact = false;
  double min_pos = 0;
  if (!all_exact) {
    min_pos = std::numeric_limits<double>::infinity();
    for (double s : sigma)
      if (s > 0) min_pos = std::min(min_pos, s);
  }
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    double s = all_exact ? 1.0 : (sigma[i] > 0 ? sigma[i] : min_pos / 10.0);
    w[i] = 1.0 / (s * s);
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
    swxx += w[i] * x[i] * x[i];
    swxy += w[i] * x[i] * y[i];
  }
  const double delta = sw * swxx - swx * swx;
  if (delta <= 0) throw std::invalid_argument("degenerate fit abscissae");
  WlsFit fit;
  fit.slope = (sw * swxy - swx * swy) / delta;
  fit.intercept = (swxx * swy - swx * swxy) / delta;
  double chi2 = 0, rss = 0;
  for (size_t i = 0; i < n; ++i) {
    double resid = y[i] - (fit.intercept + fit.slope * x[i]);
    chi2 += w[i] * resid * resid;
    rss += resid * resid;
  }
  fit.residual_rms = std::sqrt(rss / static_cast<double>(n));
  if (all_exact) {
    double s2 = n > 2 ? chi2 / (static_cast<double>(n) - 2.0) : 0.0;
    fit.slope_err = std::sqrt(s2 * sw / delta);
  } else {
    fit.slope_err = std::sqrt(sw / delta);
  }
  return fit;
}

int bin_length(size_t n, double tau, int n_bins) {
  auto len = static_cast<int64_t>(std::max<double>(
      {static_cast<double>(n) / n_bins, std::ceil(10.0 * std::max(0.5, tau)), 1.0}));
  if (static_cast<size_t>(2 * len) > n) len = static_cast<int64_t>(n) / 2;
  return static_cast<int>(std::max<int64_t>(len, 1));
}

}  // namespace

TauResult autocorrelation(std::span<const double> series) {
  const size_t n = series.size();
  if (n < 100) throw std::invalid_argument("autocorrelation needs at least 100 samples");
  TauResult out;
  const double mean = mean_of(series);
  double c0 = 0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (c0 == 0.0) {
    out.constant = true;
    out.tau = 0.5;
    return out;
  }
  const size_t t_max = n / 4;
  double tau = 0.5;
  size_t window = 0;
  for (size_t t = 1; t <= t_max; ++t) {
    double ct = 0;
    for (size_t i = 0; i + t < n; ++i) ct += (series[i] - mean) * (series[i + t] - mean);
    ct /= static_cast<double>(n - t);
    tau += ct / c0;
    window = t;
    if (static_cast<double>(t) >= 6.0 * tau) break;
  }
  out.tau = tau;
  out.window = static_cast<int>(window);
  out.anti_correlated = tau < 0.45;  // margin below 1/2 so i.i.d. noise is not flagged
  return out;
}

EstimatorResult mean_with_error(std::span<const double> series) {
  const size_t n = series.size();
  if (n == 0) throw std::invalid_argument("empty series");
  EstimatorResult r;
  r.count = static_cast<int64_t>(n);
  r.mean = mean_of(series);
  if (n < 100) {  // too short for tau; plain standard error
    double var = 0;
    for (double v : series) var += (v - r.mean) * (v - r.mean);
    var /= static_cast<double>(n > 1 ? n - 1 : 1);
    r.std_error = std::sqrt(var / static_cast<double>(n));
    return r;
  }
  auto tau = autocorrelation(series);
  r.tau = std::max(0.5, tau.tau);
  r.anti_correlated = tau.anti_correlated;
  r.constant = tau.constant;
  double var = 0;
  for (double v : series) var += (v - r.mean) * (v - r.mean);
  var /= static_cast<double>(n - 1);
  r.std_error = std::sqrt(var * 2.0 * r.tau / static_cast<double>(n));
  return r;
}

namespace {

// Leave-one-bin-out jackknife of theta(means...) over aligned series.
template <typename Theta>
EstimatorResult jackknife_bins(const std::vector<std::span<const double>>& series, Theta&& theta,
                               int n_bins_target) {
  const size_t n = series.front().size();
  for (const auto& s : series)
    if (s.size() != n) throw std::invalid_argument("series length mismatch");
  if (n < 100) throw std::invalid_argument("need at least 100 retained samples");

  double tau_max = 0.5;
  for (const auto& s : series) {
    auto t = autocorrelation(s);
    if (!t.constant) tau_max = std::max(tau_max, t.tau);
  }
  const int len = bin_length(n, tau_max, n_bins_target);
  const int n_bins = static_cast<int>(n) / len;
  const size_t used = static_cast<size_t>(n_bins) * len;

  const size_t k = series.size();
  std::vector<double> total(k, 0.0);
  std::vector<std::vector<double>> bin_sum(k, std::vector<double>(n_bins, 0.0));
  for (size_t j = 0; j < k; ++j) {
    for (size_t i = 0; i < used; ++i) {
      bin_sum[j][i / len] += series[j][i];
      total[j] += series[j][i];
    }
  }

  std::vector<double> full_means(k);
  for (size_t j = 0; j < k; ++j) full_means[j] = total[j] / static_cast<double>(used);
  const double estimate = theta(full_means);

  std::vector<double> loo(k);
  double jk_mean = 0;
  std::vector<double> thetas(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    for (size_t j = 0; j < k; ++j)
      loo[j] = (total[j] - bin_sum[j][b]) / static_cast<double>(used - len);
    thetas[b] = theta(loo);
    jk_mean += thetas[b];
  }
  jk_mean /= n_bins;
  double var = 0;
  for (double t : thetas) var += (t - jk_mean) * (t - jk_mean);
  var *= static_cast<double>(n_bins - 1) / n_bins;

  EstimatorResult r;
  r.mean = estimate;
  r.std_error = std::sqrt(var);
  r.tau = tau_max;
  r.count = static_cast<int64_t>(used);
  return r;
}

}  // namespace

EstimatorResult covariance_estimate(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("series length mismatch");
  std::vector<double> ab(a.size());
  for (size_t i = 0; i < a.size(); ++i) ab[i] = a[i] * b[i];
  return jackknife_bins({a, b, std::span<const double>(ab)},
                        [](const std::vector<double>& m) { return m[2] - m[0] * m[1]; }, 50);
}

EstimatorResult truncated_two_point_spin(const std::vector<SpinConfig>& samples, Site x,
                                         Site y, const LatticeSpec& spec) {
  if (samples.size() < 100) throw std::invalid_argument("need at least 100 retained samples");
  const int ix = spec.site_index(x), iy = spec.site_index(y);
  std::vector<double> a(samples.size()), b(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    a[i] = samples[i].spin[ix];
    b[i] = samples[i].spin[iy];
  }
  return covariance_estimate(a, b);
}

EstimatorResult truncated_two_point_fk(const std::vector<FkConfig>& samples,
                                       const GhostGraph& g, Site x, Site y) {
  if (samples.size() < 100) throw std::invalid_argument("need at least 100 retained samples");
  const int ix = g.spec.site_index(x), iy = g.spec.site_index(y);
  std::vector<double> xy(samples.size()), xg(samples.size()), yg(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    auto d = find_clusters(g, samples[i]);
    bool gx = d.ghost_connected[d.cluster_index_of_site(ix)];
    bool gy = d.ghost_connected[d.cluster_index_of_site(iy)];
    xy[i] = (d.label[ix] == d.label[iy]) || (gx && gy);
    xg[i] = gx;
    yg[i] = gy;
  }
  return jackknife_bins(
      {std::span<const double>(xy), std::span<const double>(xg), std::span<const double>(yg)},
      [](const std::vector<double>& m) { return m[0] - m[1] * m[2]; }, 50);
}

// --- profiles ---------------------------------------------------------------

ProfileAccumulator::ProfileAccumulator(const LatticeSpec& spec, ProfileDirection direction,
                                       std::vector<int> r_list)
    : spec_(spec), direction_(direction), r_list_(std::move(r_list)) {
  if (r_list_.empty()) throw std::invalid_argument("empty separation list");
  for (size_t i = 1; i < r_list_.size(); ++i)
    if (r_list_[i] <= r_list_[i - 1])
      throw std::invalid_argument("separations must be strictly increasing");
  const int max_half = std::min(spec.width, spec.height) / 2;
  for (int r : r_list_)
    if (r < 0 || r > max_half)
      throw std::invalid_argument("separation beyond half the lattice");

  if (direction_ == ProfileDirection::Radial) {
    // per bin: offsets (dx,dy) with round(|.|) == r, canonical half plane,
    // capped per bin to keep the pair scan affordable
    pair_sets_.resize(r_list_.size());
    const bool periodic = spec_.boundary == Boundary::Periodic;
    for (size_t bi = 0; bi < r_list_.size(); ++bi) {
      const int r = r_list_[bi];
      std::vector<std::pair<int, int>> offsets;
      for (int dy = -r - 1; dy <= r + 1; ++dy)
        for (int dx = 0; dx <= r + 1; ++dx) {
          if (dx == 0 && dy <= 0) continue;
          double d = std::hypot(dx, dy);
          if (std::llround(d) == r && std::abs(d - r) < 0.5) offsets.push_back({dx, dy});
        }
      constexpr size_t kMaxOffsets = 64;
      if (offsets.size() > kMaxOffsets) {
        std::vector<std::pair<int, int>> kept;
        for (size_t j = 0; j < kMaxOffsets; ++j)
          kept.push_back(offsets[j * offsets.size() / kMaxOffsets]);
        offsets = kept;
      }
      auto& pairs = pair_sets_[bi];
      for (auto [dx, dy] : offsets) {
        for (int row = 0; row < spec_.height; ++row)
          for (int col = 0; col < spec_.width; ++col) {
            int nc = col + dx, nr = row + dy;
            if (periodic) {
              nc = (nc % spec_.width + spec_.width) % spec_.width;
              nr = (nr % spec_.height + spec_.height) % spec_.height;
            } else if (!spec_.in_lattice(nc, nr)) {
              continue;
            }
            pairs.push_back({spec_.site_index(col, row), spec_.site_index(nc, nr)});
          }
      }
      if (pairs.empty()) throw std::invalid_argument("radial bin has no site pairs");
    }
  }
}

void ProfileAccumulator::add_sample(const SpinConfig& spins) {
  if (spins.size() != spec_.n_sites()) throw std::invalid_argument("spin config size mismatch");
  const auto* s = spins.spin.data();
  std::vector<double> row(r_list_.size(), 0.0);
  const bool periodic = spec_.boundary == Boundary::Periodic;

  if (direction_ == ProfileDirection::Axis) {
    for (size_t bi = 0; bi < r_list_.size(); ++bi) {
      const int r = r_list_[bi];
      int64_t acc = 0, cnt = 0;
      for (int row_i = 0; row_i < spec_.height; ++row_i) {
        const int base = row_i * spec_.width;
        for (int col = 0; col < spec_.width; ++col) {
          int nc = col + r;
          if (nc >= spec_.width) {
            if (!periodic) continue;
            nc -= spec_.width;
          }
          acc += s[base + col] * s[base + nc];
          ++cnt;
        }
      }
      for (int col = 0; col < spec_.width; ++col) {
        for (int row_i = 0; row_i < spec_.height; ++row_i) {
          int nr = row_i + r;
          if (nr >= spec_.height) {
            if (!periodic) continue;
            nr -= spec_.height;
          }
          acc += s[row_i * spec_.width + col] * s[nr * spec_.width + col];
          ++cnt;
        }
      }
      row[bi] = cnt > 0 ? static_cast<double>(acc) / static_cast<double>(cnt) : 0.0;
    }
  } else {
    for (size_t bi = 0; bi < r_list_.size(); ++bi) {
      int64_t acc = 0;
      for (auto [i, j] : pair_sets_[bi]) acc += s[i] * s[j];
      row[bi] = static_cast<double>(acc) / static_cast<double>(pair_sets_[bi].size());
    }
  }
  rows_.push_back(std::move(row));
  int64_t m = 0;
  for (int i = 0; i < spins.size(); ++i) m += spins.spin[i];
  mag_.push_back(static_cast<double>(m) / spec_.n_sites());
}

CorrelationProfile ProfileAccumulator::finalize(int n_bins) const {
  if (rows_.size() < 100) throw std::invalid_argument("need at least 100 retained samples");
  CorrelationProfile profile;
  profile.direction = direction_;
  const size_t n = rows_.size();
  std::vector<double> sr(n);
  for (size_t bi = 0; bi < r_list_.size(); ++bi) {
    for (size_t i = 0; i < n; ++i) sr[i] = rows_[i][bi];
    auto res = jackknife_bins(
        {std::span<const double>(sr), std::span<const double>(mag_)},
        [](const std::vector<double>& m) { return m[0] - m[1] * m[1]; }, n_bins);
    profile.r.push_back(r_list_[bi]);
    profile.value.push_back(res.mean);
    profile.error.push_back(res.std_error);
  }
  return profile;
}

CorrelationProfile correlation_profile(const std::vector<SpinConfig>& samples,
                                       const LatticeSpec& spec, ProfileDirection direction,
                                       const std::vector<int>& r_list, int n_bins) {
  ProfileAccumulator acc(spec, direction, r_list);
  for (const auto& s : samples) acc.add_sample(s);
  return acc.finalize(n_bins);
}

// --- fits --------------------------------------------------------------------

MassFit fit_mass(const CorrelationProfile& profile, FitWindow window, double prefactor_power) {
  if (!(window.r_min < window.r_max)) throw std::invalid_argument("fit window must have r_min < r_max");
  std::vector<double> x, y, sigma;
  int usable = 0;
  for (size_t i = 0; i < profile.r.size(); ++i) {
    const double r = profile.r[i];
    if (r < window.r_min || r > window.r_max || r <= 0) continue;
    const double v = profile.value[i];
    if (v <= 0.0)
      throw std::invalid_argument("non-positive profile value inside fit window; shrink window");
    const double rel = profile.error[i] / v;
    if (rel >= 0.5) continue;
    ++usable;
    x.push_back(r);
    y.push_back(std::log(v) + prefactor_power * std::log(r));
    sigma.push_back(profile.error[i] / v);
  }
  if (usable < 4) throw std::invalid_argument("need at least 4 usable points in fit window");
  auto fit = weighted_line_fit(x, y, sigma);
  MassFit out;
  out.mass = -fit.slope;
  out.mass_std_error = fit.slope_err;
  out.log_prefactor = fit.intercept;
  out.residual_rms = fit.residual_rms;
  out.window = window;
  out.n_points = usable;
  return out;
}

FitWindow default_fit_window(const CorrelationProfile& profile, double prefactor_power) {
  double r_max = 0.0;
  for (size_t i = 0; i < profile.r.size(); ++i) {
    if (profile.value[i] <= 0.0) break;
    if (profile.error[i] / profile.value[i] >= 0.25) break;
    r_max = profile.r[i];
  }
  FitWindow pilot{std::max(1.0, profile.r.front()), r_max};
  double r_min = 4.0;
  try {
    auto fit = fit_mass(profile, pilot, prefactor_power);
    if (fit.mass > 0) r_min = std::max(4.0, 2.0 / fit.mass);
  } catch (const std::invalid_argument&) {
    // keep r_min = 4
  }
  return FitWindow{r_min, r_max};
}

SlopeFit exponent_fit(const std::vector<ExponentPoint>& points) {
  if (points.size() < 4) throw std::invalid_argument("need at least 4 points");
  std::vector<double> x, y, sigma;
  for (const auto& p : points) {
    if (!(p.x > 0) || !(p.y > 0))
      throw std::invalid_argument("log-log regression needs positive coordinates");
    x.push_back(std::log(p.x));
    y.push_back(std::log(p.y));
    sigma.push_back(p.y_err > 0 ? p.y_err / p.y : 0.0);
  }
  auto fit = weighted_line_fit(x, y, sigma);
  return SlopeFit{fit.slope, fit.intercept, fit.slope_err};
}

EstimatorResult block_field_cov(const std::vector<SpinConfig>& samples,
                                const std::vector<double>& f_grid,
                                const std::vector<double>& g_grid, const LatticeSpec& spec,
                                double spacing) {
  if (static_cast<int>(f_grid.size()) != spec.n_sites() ||
      static_cast<int>(g_grid.size()) != spec.n_sites())
    throw std::invalid_argument("test-function grid does not match lattice");
  std::vector<double> a(samples.size()), b(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    double sa = 0, sb = 0;
    for (int s = 0; s < spec.n_sites(); ++s) {
      sa += f_grid[s] * samples[i].spin[s];
      sb += g_grid[s] * samples[i].spin[s];
    }
    a[i] = sa;
    b[i] = sb;
  }
  auto res = covariance_estimate(a, b);
  const double scale = std::pow(spacing, 15.0 / 4.0);
  res.mean *= scale;
  res.std_error *= scale;
  return res;
}

// --- scaling comparison -------------------------------------------------------

BlockMoments block_moments(const std::vector<SpinConfig>& samples, const LatticeSpec& spec,
                           double little_h, int blocks_per_side) {
  if (blocks_per_side < 1) throw std::invalid_argument("need at least one block");
  BlockMoments bm;
  bm.blocks_per_side = blocks_per_side;
  bm.spacing = spec.spacing;
  bm.little_h = little_h;
  const int nb = blocks_per_side * blocks_per_side;
  const double amp = std::pow(spec.spacing, 15.0 / 8.0);

  std::vector<int> block_of_site(spec.n_sites());
  for (int row = 0; row < spec.height; ++row)
    for (int col = 0; col < spec.width; ++col) {
      int bc = std::min(blocks_per_side - 1, col * blocks_per_side / spec.width);
      int br = std::min(blocks_per_side - 1, row * blocks_per_side / spec.height);
      block_of_site[spec.site_index(col, row)] = br * blocks_per_side + bc;
    }

  std::vector<std::vector<double>> series(nb, std::vector<double>(samples.size(), 0.0));
  for (size_t i = 0; i < samples.size(); ++i) {
    for (int s = 0; s < spec.n_sites(); ++s)
      series[block_of_site[s]][i] += samples[i].spin[s];
    for (int b = 0; b < nb; ++b) series[b][i] *= amp;
  }

  for (int b = 0; b < nb; ++b) {
    auto res = mean_with_error(series[b]);
    bm.mean.push_back(res.mean);
    bm.mean_err.push_back(res.std_error);
  }
  for (int i = 0; i < nb; ++i)
    for (int j = i; j < nb; ++j) {
      auto res = covariance_estimate(series[i], series[j]);
      bm.cov.push_back(res.mean);
      bm.cov_err.push_back(res.std_error);
    }
  return bm;
}

ScalingReport scaling_check(const BlockMoments& run_a, const BlockMoments& run_b) {
  if (run_a.blocks_per_side != run_b.blocks_per_side)
    throw std::invalid_argument("block grids must match");
  if (!(run_a.little_h > 0) || !(run_b.little_h > 0))
    throw std::invalid_argument("scaling comparison needs positive field strengths");
  ScalingReport rep;
  rep.lambda = std::pow(run_b.little_h / run_a.little_h, 8.0 / 15.0);
  const double amp = std::pow(rep.lambda, -15.0 / 8.0);
  const double amp2 = amp * amp;

  double max_z = 0;
  for (size_t i = 0; i < run_a.mean.size(); ++i) {
    double diff = run_b.mean[i] - amp * run_a.mean[i];
    double err = std::hypot(run_b.mean_err[i], amp * run_a.mean_err[i]);
    double z = err > 0 ? diff / err : (diff == 0 ? 0 : std::numeric_limits<double>::infinity());
    rep.z_mean.push_back(z);
    max_z = std::max(max_z, std::abs(z));
  }
  rep.max_abs_z_mean = max_z;

  max_z = 0;
  for (size_t i = 0; i < run_a.cov.size(); ++i) {
    double diff = run_b.cov[i] - amp2 * run_a.cov[i];
    double err = std::hypot(run_b.cov_err[i], amp2 * run_a.cov_err[i]);
    double z = err > 0 ? diff / err : (diff == 0 ? 0 : std::numeric_limits<double>::infinity());
    rep.z_cov.push_back(z);
    max_z = std::max(max_z, std::abs(z));
  }
  rep.max_abs_z_cov = max_z;
  return rep;
}

}  // namespace fkghost
