#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fkghost/engine.hpp"
#include "fkghost/estimators.hpp"
#include "fkghost/oracle.hpp"
#include "fkghost/rng.hpp"

using namespace fkghost;

TEST_SUITE_BEGIN("estimators");

namespace {

// two-state symmetric Markov chain: E[s_t s_{t+r}] = rho^r
std::vector<double> markov_pm1(int n, double rho, Rng& rng) {
  std::vector<double> out(n);
  double s = rng.fair_coin() ? 1.0 : -1.0;
  const double flip = (1.0 - rho) / 2.0;
  for (int i = 0; i < n; ++i) {
    out[i] = s;
    if (rng.coin(flip)) s = -s;
  }
  return out;
}

}  // namespace

TEST_CASE("autocorrelation time") {
  SUBCASE("i.i.d. series") {
    Rng rng(1);
    std::vector<double> series(100000);
    for (auto& v : series) v = rng.uniform();
    auto t = autocorrelation(series);
    CHECK(std::abs(t.tau - 0.5) < 0.05);
    CHECK_FALSE(t.anti_correlated);
  }
  SUBCASE("AR(1) with rho = 0.9 has tau = 9.5") {
    Rng rng(2);
    const double rho = 0.9;
    std::vector<double> series(400000);
    double x = 0;
    for (auto& v : series) {
      x = rho * x + (rng.uniform() - 0.5);
      v = x;
    }
    auto t = autocorrelation(series);
    const double expected = (1 + rho) / (2 * (1 - rho));
    CHECK(std::abs(t.tau - expected) / expected < 0.15);
  }
  SUBCASE("alternating series is flagged anti-correlated") {
    std::vector<double> series(1000);
    for (size_t i = 0; i < series.size(); ++i) series[i] = (i % 2) ? 1.0 : -1.0;
    auto t = autocorrelation(series);
    CHECK(t.tau < 0.5);
    CHECK(t.anti_correlated);
  }
  SUBCASE("constant series is flagged") {
    std::vector<double> series(500, 3.0);
    auto t = autocorrelation(series);
    CHECK(t.tau == 0.5);
    CHECK(t.constant);
  }
  SUBCASE("short series are rejected") {
    std::vector<double> series(50, 0.0);
    CHECK_THROWS_AS(autocorrelation(series), std::invalid_argument);
  }
}

TEST_CASE("covariance estimator basics") {
  Rng rng(3);
  SUBCASE("x = y gives the variance identity") {
    std::vector<SpinConfig> samples;
    LatticeSpec spec{1, 1, 1.0, Boundary::Free};
    for (int i = 0; i < 5000; ++i) {
      SpinConfig s;
      s.spin.push_back(rng.coin(0.7) ? +1 : -1);
      samples.push_back(s);
    }
    auto res = truncated_two_point_spin(samples, {0, 0}, {0, 0}, spec);
    double mean = 0;
    for (const auto& s : samples) mean += s.spin[0];
    mean /= samples.size();
    CHECK(res.mean == doctest::Approx(1 - mean * mean).epsilon(1e-9));
  }
  SUBCASE("independent noise has zero covariance") {
    std::vector<double> a(20000), b(20000);
    for (size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.fair_coin() ? 1 : -1;
      b[i] = rng.fair_coin() ? 1 : -1;
    }
    auto res = covariance_estimate(a, b);
    CHECK(std::abs(res.mean) < 3 * res.std_error);
  }
  SUBCASE("too few samples are rejected") {
    std::vector<double> a(20, 1.0), b(20, 1.0);
    CHECK_THROWS_AS(covariance_estimate(a, b), std::invalid_argument);
  }
}

TEST_CASE("spin and bond routes agree with enumeration on a 3x3 chain") {
  LatticeSpec spec{3, 3, 1.0, Boundary::Free};
  auto g = build_graph(spec);
  FieldParams params(critical_beta(), 0.1);
  Site x{0, 0}, y{2, 2};
  double exact = exact_truncated_two_point(g, params, x, y);

  SampleSchedule sched;
  sched.sweeps = 120000;
  sched.burn_in = 2000;
  sched.seed = 77;
  std::vector<SpinConfig> spins;
  std::vector<FkConfig> bonds;
  sample_chain_visit(g, params, sched, [&](const ChainState& st, int64_t) {
    spins.push_back(st.spins);
    bonds.push_back(st.bonds);
  });

  auto spin_route = truncated_two_point_spin(spins, x, y, spec);
  auto bond_route = truncated_two_point_fk(bonds, g, x, y);

  CHECK(std::abs(spin_route.mean - exact) < 3 * spin_route.std_error);
  CHECK(std::abs(bond_route.mean - exact) < 3 * bond_route.std_error);
  double combined = std::hypot(spin_route.std_error, bond_route.std_error);
  CHECK(std::abs(spin_route.mean - bond_route.mean) < 3 * combined);
  // Griffiths positivity within errors
  CHECK(spin_route.mean > -3 * spin_route.std_error);
}

TEST_CASE("bond route saturates at strong field") {
  LatticeSpec spec{3, 3, 1.0, Boundary::Free};
  auto g = build_graph(spec);
  FieldParams params(critical_beta(), 50.0);
  SampleSchedule sched;
  sched.sweeps = 3000;
  sched.burn_in = 500;
  sched.seed = 5;
  std::vector<FkConfig> bonds;
  sample_chain_visit(g, params, sched,
                     [&](const ChainState& st, int64_t) { bonds.push_back(st.bonds); });
  auto res = truncated_two_point_fk(bonds, g, {0, 0}, {2, 2});
  CHECK(std::abs(res.mean) < 1e-3);
}

TEST_CASE("profile on a synthetic product field recovers the decay") {
  // spins sigma(c, r) = u[c] v[r] with independent +-1 Markov chains gives
  // an exact axis-averaged two-point rho^r
  const int n = 48;
  LatticeSpec spec{n, n, 1.0, Boundary::Periodic};
  const double rho = 0.8;
  Rng rng(44);
  std::vector<int> r_list{1, 2, 3, 4, 5, 6, 8, 10, 12};
  ProfileAccumulator acc(spec, ProfileDirection::Axis, r_list);
  for (int sample = 0; sample < 4000; ++sample) {
    auto u = markov_pm1(n, rho, rng);
    auto v = markov_pm1(n, rho, rng);
    SpinConfig s;
    s.spin.resize(n * n);
    for (int row = 0; row < n; ++row)
      for (int col = 0; col < n; ++col)
        s.spin[spec.site_index(col, row)] = static_cast<int8_t>(u[col] * v[row]);
    acc.add_sample(s);
  }
  auto profile = acc.finalize();
  // line chains wrapped onto the torus: offset r mixes chain separations r
  // and n - r with weights (n-r)/n and r/n
  auto expected_corr = [&](double r) {
    return ((n - r) * std::pow(rho, r) + r * std::pow(rho, n - r)) / n;
  };
  for (size_t i = 0; i < profile.r.size(); ++i)
    CHECK(std::abs(profile.value[i] - expected_corr(profile.r[i])) <
          4 * profile.error[i] + 1e-4);

  // the fitted decay matches a noiseless fit of the exact curve
  auto fit = fit_mass(profile, FitWindow{1.0, 8.0}, 0.0);
  CorrelationProfile exact;
  for (int r : r_list) {
    exact.r.push_back(r);
    exact.value.push_back(expected_corr(r));
    exact.error.push_back(0.0);
  }
  auto exact_fit = fit_mass(exact, FitWindow{1.0, 8.0}, 0.0);
  CHECK(std::abs(fit.mass - exact_fit.mass) < 4 * fit.mass_std_error + 0.005);
  CHECK(std::abs(exact_fit.mass - (-std::log(rho))) < 0.05);
}

TEST_CASE("profile input validation") {
  LatticeSpec spec{16, 16, 1.0, Boundary::Periodic};
  CHECK_THROWS_AS(ProfileAccumulator(spec, ProfileDirection::Axis, {1, 2, 9}),
                  std::invalid_argument);  // beyond half the lattice
  CHECK_THROWS_AS(ProfileAccumulator(spec, ProfileDirection::Axis, {2, 2}),
                  std::invalid_argument);  // not strictly increasing
  CHECK_THROWS_AS(ProfileAccumulator(spec, ProfileDirection::Axis, {}),
                  std::invalid_argument);
}

TEST_CASE("radial binning matches axis values on an isotropic synthetic field") {
  // product field again; radial bin r collects mixed offsets, so only the
  // r=1 bin (pure axis offsets) is compared exactly
  const int n = 24;
  LatticeSpec spec{n, n, 1.0, Boundary::Periodic};
  Rng rng(9);
  const double rho = 0.7;
  ProfileAccumulator radial(spec, ProfileDirection::Radial, {1});
  ProfileAccumulator axis(spec, ProfileDirection::Axis, {1});
  for (int sample = 0; sample < 1500; ++sample) {
    auto u = markov_pm1(n, rho, rng);
    auto v = markov_pm1(n, rho, rng);
    SpinConfig s;
    s.spin.resize(n * n);
    for (int row = 0; row < n; ++row)
      for (int col = 0; col < n; ++col)
        s.spin[spec.site_index(col, row)] = static_cast<int8_t>(u[col] * v[row]);
    radial.add_sample(s);
    axis.add_sample(s);
  }
  auto rp = radial.finalize();
  auto ap = axis.finalize();
  // bin 1 pools offsets (1,0),(0,1),(1,1),(1,-1); the product field gives
  // correlation A for the axis offsets and A^2 for the diagonals
  double a_val = ap.value[0];
  double expected = (2 * a_val + 2 * a_val * a_val) / 4.0;
  CHECK(std::abs(rp.value[0] - expected) < 5 * (rp.error[0] + ap.error[0]));
}

TEST_CASE("mass fit on its own generating form") {
  SUBCASE("exact exponential with power prefactor") {
    CorrelationProfile profile;
    for (int r = 1; r <= 20; ++r) {
      profile.r.push_back(r);
      profile.value.push_back(std::pow(r, -0.25) * std::exp(-0.2 * r));
      profile.error.push_back(0.0);
    }
    auto fit = fit_mass(profile, FitWindow{1.0, 20.0});
    CHECK(std::abs(fit.mass - 0.2) < 1e-10);
    CHECK(fit.mass_std_error < 1e-10);
    CHECK(std::abs(fit.log_prefactor) < 1e-10);
  }
  SUBCASE("pure power law has zero mass") {
    CorrelationProfile profile;
    for (int r = 1; r <= 20; ++r) {
      profile.r.push_back(r);
      profile.value.push_back(std::pow(r, -0.25));
      profile.error.push_back(0.0);
    }
    auto fit = fit_mass(profile, FitWindow{1.0, 20.0});
    CHECK(std::abs(fit.mass) < 1e-12);
  }
  SUBCASE("fuzzed round trip over m in [0.01, 2]") {
    Rng rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
      double m = 0.01 + 1.99 * rng.uniform();
      double c = 0.5 + rng.uniform();
      CorrelationProfile profile;
      for (int r = 1; r <= 15; ++r) {
        profile.r.push_back(r);
        profile.value.push_back(c * std::pow(r, -0.25) * std::exp(-m * r));
        profile.error.push_back(0.0);
      }
      auto fit = fit_mass(profile, FitWindow{1.0, 15.0});
      CHECK(std::abs(fit.mass - m) < 1e-9);
      CHECK(std::abs(fit.log_prefactor - std::log(c)) < 1e-9);
    }
  }
  SUBCASE("non-positive values inside the window are an error") {
    CorrelationProfile profile;
    for (int r = 1; r <= 10; ++r) {
      profile.r.push_back(r);
      profile.value.push_back(r == 5 ? -0.001 : std::exp(-0.3 * r));
      profile.error.push_back(1e-6);
    }
    CHECK_THROWS_AS(fit_mass(profile, FitWindow{1.0, 10.0}), std::invalid_argument);
  }
  SUBCASE("too few usable points") {
    CorrelationProfile profile;
    for (int r = 1; r <= 3; ++r) {
      profile.r.push_back(r);
      profile.value.push_back(std::exp(-0.3 * r));
      profile.error.push_back(0.0);
    }
    CHECK_THROWS_AS(fit_mass(profile, FitWindow{1.0, 3.0}), std::invalid_argument);
  }
}

TEST_CASE("default window follows the pilot rule") {
  CorrelationProfile profile;
  const double m = 0.1;
  for (int r = 1; r <= 30; ++r) {
    profile.r.push_back(r);
    profile.value.push_back(std::pow(r, -0.25) * std::exp(-m * r));
    profile.error.push_back(r <= 24 ? 1e-6 * profile.value.back() : profile.value.back());
  }
  auto window = default_fit_window(profile);
  CHECK(window.r_min == doctest::Approx(2.0 / m).epsilon(1e-6));  // max(4, 2/m)
  CHECK(window.r_max == doctest::Approx(24.0));

  // fast decay pins r_min at the floor of 4
  CorrelationProfile steep;
  for (int r = 1; r <= 30; ++r) {
    steep.r.push_back(r);
    steep.value.push_back(std::pow(r, -0.25) * std::exp(-0.9 * r));
    steep.error.push_back(1e-8);
  }
  auto w2 = default_fit_window(steep);
  CHECK(w2.r_min == doctest::Approx(4.0));
}

TEST_CASE("log-log slope fits") {
  SUBCASE("exact 8/15 power") {
    std::vector<ExponentPoint> points;
    for (double h : {0.005, 0.01, 0.02, 0.04})
      points.push_back({h, std::pow(h, 8.0 / 15.0), 0.0});
    auto fit = exponent_fit(points);
    CHECK(std::abs(fit.slope - 8.0 / 15.0) < 1e-12);
  }
  SUBCASE("linear relation has slope one") {
    std::vector<ExponentPoint> points;
    for (double h : {0.1, 0.2, 0.4, 0.8}) points.push_back({h, 2 * h, 0.0});
    auto fit = exponent_fit(points);
    CHECK(std::abs(fit.slope - 1.0) < 1e-12);
  }
  SUBCASE("exact 1/15 power and constant") {
    std::vector<ExponentPoint> points;
    for (double h : {0.005, 0.01, 0.02, 0.04})
      points.push_back({h, std::pow(h, 1.0 / 15.0), 0.0});
    CHECK(std::abs(exponent_fit(points).slope - 1.0 / 15.0) < 1e-12);
    std::vector<ExponentPoint> flat;
    for (double h : {0.005, 0.01, 0.02, 0.04}) flat.push_back({h, 0.7, 0.0});
    CHECK(std::abs(exponent_fit(flat).slope) < 1e-12);
  }
  SUBCASE("invalid points are rejected") {
    std::vector<ExponentPoint> points{{0.1, 1.0, 0}, {0.2, -1.0, 0}, {0.3, 1.0, 0}, {0.4, 1.0, 0}};
    CHECK_THROWS_AS(exponent_fit(points), std::invalid_argument);
    points.resize(2);
    CHECK_THROWS_AS(exponent_fit(points), std::invalid_argument);
  }
}

TEST_CASE("block field covariance") {
  LatticeSpec spec{4, 4, 1.0, Boundary::Free};
  Rng rng(17);
  std::vector<SpinConfig> samples;
  for (int i = 0; i < 4000; ++i) {
    SpinConfig s;
    for (int k = 0; k < 16; ++k) s.spin.push_back(rng.coin(0.6) ? +1 : -1);
    samples.push_back(s);
  }

  SUBCASE("single-site indicator reduces to the site variance") {
    std::vector<double> f(16, 0.0);
    f[5] = 1.0;
    const double a = 0.5;
    auto res = block_field_cov(samples, f, f, spec, a);
    std::vector<double> series;
    for (const auto& s : samples) series.push_back(s.spin[5]);
    auto var = covariance_estimate(series, series);
    CHECK(res.mean == doctest::Approx(std::pow(a, 15.0 / 4.0) * var.mean).epsilon(1e-12));
  }
  SUBCASE("disjoint indicators of independent spins decorrelate") {
    std::vector<double> f(16, 0.0), h(16, 0.0);
    f[0] = f[1] = 1.0;
    h[14] = h[15] = 1.0;
    auto res = block_field_cov(samples, f, h, spec, 1.0);
    CHECK(std::abs(res.mean) < 3 * res.std_error);
  }
  SUBCASE("grid mismatch is rejected") {
    std::vector<double> f(9, 0.0);
    CHECK_THROWS_AS(block_field_cov(samples, f, f, spec, 1.0), std::invalid_argument);
  }
}

TEST_CASE("scaling comparison") {
  SUBCASE("identical runs have zero discrepancy") {
    LatticeSpec spec{8, 8, 0.125, Boundary::Free};
    Rng rng(23);
    std::vector<SpinConfig> samples;
    for (int i = 0; i < 2000; ++i) {
      SpinConfig s;
      for (int k = 0; k < 64; ++k) s.spin.push_back(rng.fair_coin() ? +1 : -1);
      samples.push_back(s);
    }
    auto a = block_moments(samples, spec, 1.0, 2);
    auto report = scaling_check(a, a);
    CHECK(report.lambda == doctest::Approx(1.0));
    CHECK(report.max_abs_z_mean == doctest::Approx(0.0));
    CHECK(report.max_abs_z_cov == doctest::Approx(0.0));
  }
  SUBCASE("synthetic moments obeying the exact reparameterization") {
    BlockMoments a;
    a.blocks_per_side = 2;
    a.little_h = 1.0;
    a.mean = {0.5, 0.6, 0.7, 0.8};
    a.mean_err = {0.01, 0.01, 0.01, 0.01};
    for (int i = 0; i < 10; ++i) {
      a.cov.push_back(0.1 + 0.01 * i);
      a.cov_err.push_back(0.005);
    }
    const double lambda = 1.7;
    const double amp = std::pow(lambda, -15.0 / 8.0);
    BlockMoments b = a;
    b.little_h = std::pow(lambda, 15.0 / 8.0) * a.little_h;
    for (auto& v : b.mean) v *= amp;
    for (auto& v : b.mean_err) v *= amp;
    for (auto& v : b.cov) v *= amp * amp;
    for (auto& v : b.cov_err) v *= amp * amp;
    auto report = scaling_check(a, b);
    CHECK(report.lambda == doctest::Approx(lambda).epsilon(1e-12));
    CHECK(report.max_abs_z_mean < 1e-10);
    CHECK(report.max_abs_z_cov < 1e-10);
  }
  SUBCASE("mismatched grids are rejected") {
    BlockMoments a, b;
    a.blocks_per_side = 2;
    b.blocks_per_side = 3;
    a.little_h = b.little_h = 1.0;
    CHECK_THROWS_AS(scaling_check(a, b), std::invalid_argument);
  }
}

TEST_SUITE_END();
