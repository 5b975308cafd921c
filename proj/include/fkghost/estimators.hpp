#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fkghost/lattice.hpp"

namespace fkghost {

struct EstimatorResult {
  double mean = 0.0;
  double std_error = 0.0;
  double tau = 0.5;  // integrated autocorrelation time, sweeps
  int64_t count = 0;
  bool anti_correlated = false;
  bool constant = false;
};

struct TauResult {
  double tau = 0.5;
  bool anti_correlated = false;
  bool constant = false;
  int window = 0;
};

// Windowed-sum estimator; window = smallest W with W >= 6 tau(W).
TauResult autocorrelation(std::span<const double> series);

// Mean with tau-corrected standard error for a scalar chain observable.
EstimatorResult mean_with_error(std::span<const double> series);

// Sample covariance of two aligned series with jackknife-over-bins error.
// Bin length is at least 10x the measured autocorrelation time.
EstimatorResult covariance_estimate(std::span<const double> a, std::span<const double> b);

EstimatorResult truncated_two_point_spin(const std::vector<SpinConfig>& samples, Site x,
                                         Site y, const LatticeSpec& spec);

// Connection-probability route: P(x<->y) - P(x<->g) P(y<->g), errors
// propagated by jackknifing the composite estimator.
EstimatorResult truncated_two_point_fk(const std::vector<FkConfig>& samples,
                                       const GhostGraph& g, Site x, Site y);

enum class ProfileDirection : uint8_t { Axis = 0, Radial = 1 };

struct CorrelationProfile {
  std::vector<double> r;
  std::vector<double> value;
  std::vector<double> error;
  ProfileDirection direction = ProfileDirection::Axis;
};

// Streaming accumulator for translation-averaged truncated two-point
// profiles; keeps per-sample reduced rows only.
class ProfileAccumulator {
 public:
  ProfileAccumulator(const LatticeSpec& spec, ProfileDirection direction,
                     std::vector<int> r_list);

  void add_sample(const SpinConfig& spins);
  CorrelationProfile finalize(int n_bins = 50) const;
  int64_t n_samples() const { return static_cast<int64_t>(mag_.size()); }

 private:
  LatticeSpec spec_;
  ProfileDirection direction_;
  std::vector<int> r_list_;
  std::vector<std::vector<std::pair<int32_t, int32_t>>> pair_sets_;  // per r, site index pairs
  std::vector<std::vector<double>> rows_;  // [sample][r]
  std::vector<double> mag_;                // per-sample mean spin
};

CorrelationProfile correlation_profile(const std::vector<SpinConfig>& samples,
                                       const LatticeSpec& spec, ProfileDirection direction,
                                       const std::vector<int>& r_list, int n_bins = 50);

struct FitWindow {
  double r_min = 0.0;
  double r_max = 0.0;
};

struct MassFit {
  double mass = 0.0;
  double mass_std_error = 0.0;
  double log_prefactor = 0.0;
  double residual_rms = 0.0;
  FitWindow window;
  int n_points = 0;
};

// Weighted least squares on log(G(r) r^p) = const - m r; p defaults to the
// critical 1/4 compensation, p = 0 gives a plain exponential fit.
MassFit fit_mass(const CorrelationProfile& profile, FitWindow window,
                 double prefactor_power = 0.25);

// r_min = max(4, 2/m) from a pilot fit, r_max = last point with relative
// error below 25%.
FitWindow default_fit_window(const CorrelationProfile& profile, double prefactor_power = 0.25);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};

struct ExponentPoint {
  double x = 0.0;      // field H
  double y = 0.0;      // mass or magnetization
  double y_err = 0.0;  // optional, 0 = unweighted
};

// log-log regression; targets like 8/15 or 1/15 are checked by callers.
SlopeFit exponent_fit(const std::vector<ExponentPoint>& points);

// Covariance of block sums a^{15/4} Cov(sum f sigma, sum g sigma).
EstimatorResult block_field_cov(const std::vector<SpinConfig>& samples,
                                const std::vector<double>& f_grid,
                                const std::vector<double>& g_grid, const LatticeSpec& spec,
                                double spacing);

// --- scaling comparison -------------------------------------------------------

// Per-run block moments over a fixed grid of square blocks on the unit
// domain; block observables are a^{15/8} sum of spins in the block.
struct BlockMoments {
  int blocks_per_side = 0;
  std::vector<double> mean;       // per block
  std::vector<double> mean_err;
  std::vector<double> cov;        // flattened upper triangle incl diagonal
  std::vector<double> cov_err;
  double spacing = 1.0;
  double little_h = 0.0;
};

BlockMoments block_moments(const std::vector<SpinConfig>& samples, const LatticeSpec& spec,
                           double little_h, int blocks_per_side);

struct ScalingReport {
  double lambda = 1.0;
  double max_abs_z_mean = 0.0;
  double max_abs_z_cov = 0.0;
  std::vector<double> z_mean;  // per block
  std::vector<double> z_cov;   // per block pair (upper triangle)
};

// Compares run B against the lambda-rescaled run A; lambda derived from the
// field strengths. Both runs must use the same block grid.
ScalingReport scaling_check(const BlockMoments& run_a, const BlockMoments& run_b);

}  // namespace fkghost
