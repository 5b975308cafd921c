// fkghost: lattice experiments for the critical Ising model with a ghost
// field. Subcommands: enumerate | sample | events | mass-scan | tm-scan |
// scaling-check. Exit codes: 0 ok, 1 validation, 2 assertion, 3 I/O.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "fkghost/runner.hpp"

namespace {

using namespace fkghost;

std::string resolve_out(const std::string& path) {
  const char* dir = std::getenv("FKGHOST_OUT_DIR");
  if (!dir || path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

void add_lattice_flags(CLI::App* cmd, int& width, int& height, double& spacing,
                       std::string& boundary) {
  cmd->add_option("--width", width, "lattice width in sites");
  cmd->add_option("--height", height, "lattice height in sites");
  cmd->add_option("--spacing", spacing, "lattice spacing a");
  cmd->add_option("--boundary", boundary, "free | periodic | plus-spin | wired-fk");
}

void add_schedule_flags(CLI::App* cmd, int64_t& sweeps, int64_t& burn_in, int64_t& thin,
                        uint64_t& seed, std::string& sampler) {
  cmd->add_option("--sweeps", sweeps, "total update steps");
  cmd->add_option("--burn-in", burn_in, "discarded leading steps (default: pilot rule)");
  cmd->add_option("--thin", thin, "keep every thin-th sample");
  cmd->add_option("--seed", seed, "64-bit chain seed");
  cmd->add_option("--sampler", sampler, "sw | wolff");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fkghost: FK-Ising lattice engine with a ghost magnetic field"};
  app.require_subcommand(1);
  app.set_config("--config", "", "plain-text config file (flags win)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  // ---- enumerate
  auto* enum_cmd = app.add_subcommand("enumerate", "exact distribution of a tiny system");
  int e_width = 1, e_height = 1;
  double e_spacing = 1.0;
  std::string e_boundary = "free";
  double e_beta = critical_beta(), e_field = 0.0;
  std::string e_measure = "ising", e_out = "enumerate.csv";
  add_lattice_flags(enum_cmd, e_width, e_height, e_spacing, e_boundary);
  enum_cmd->add_option("--beta", e_beta, "inverse temperature (default: critical)");
  enum_cmd->add_option("--field", e_field, "lattice field H");
  enum_cmd->add_option("--measure", e_measure, "ising | fk | joint");
  enum_cmd->add_option("--out", e_out, "output CSV");

  // ---- sample
  auto* sample_cmd = app.add_subcommand("sample", "seeded chain with named observables");
  int s_width = 16, s_height = 16;
  double s_spacing = 1.0;
  std::string s_boundary = "free";
  double s_beta = critical_beta(), s_field = 0.0;
  int64_t s_sweeps = 10000, s_burn = -1, s_thin = 1;
  uint64_t s_seed = 1;
  std::string s_sampler = "sw";
  std::vector<std::string> s_obs{"mag", "energy"};
  std::string s_out = "sample.csv", s_checkpoint;
  add_lattice_flags(sample_cmd, s_width, s_height, s_spacing, s_boundary);
  sample_cmd->add_option("--beta", s_beta, "inverse temperature (default: critical)");
  sample_cmd->add_option("--field", s_field, "lattice field H");
  add_schedule_flags(sample_cmd, s_sweeps, s_burn, s_thin, s_seed, s_sampler);
  sample_cmd->add_option("--observables", s_obs, "observable names");
  sample_cmd->add_option("--out", s_out, "output CSV");
  sample_cmd->add_option("--checkpoint", s_checkpoint, "final chain state file");

  // ---- events
  auto* events_cmd = app.add_subcommand("events", "topology detectors over a sample stream");
  int v_width = 17, v_height = 17;
  double v_spacing = 1.0;
  std::string v_boundary = "free";
  double v_beta = critical_beta(), v_field = 0.1;
  int64_t v_sweeps = 2000, v_burn = -1, v_thin = 10;
  uint64_t v_seed = 1;
  std::string v_sampler = "sw";
  double v_inner = 2.0, v_outer = 6.0;
  std::vector<std::string> v_detectors{"F", "G"};
  int v_k = 4;
  double v_min_mass = 1.0;
  std::string v_out = "events.csv";
  add_lattice_flags(events_cmd, v_width, v_height, v_spacing, v_boundary);
  events_cmd->add_option("--beta", v_beta, "inverse temperature (default: critical)");
  events_cmd->add_option("--field", v_field, "lattice field H");
  add_schedule_flags(events_cmd, v_sweeps, v_burn, v_thin, v_seed, v_sampler);
  events_cmd->add_option("--annulus-inner", v_inner, "annulus inner half-side");
  events_cmd->add_option("--annulus-outer", v_outer, "annulus outer half-side");
  events_cmd->add_option("--detectors", v_detectors, "subset of F G necklace");
  events_cmd->add_option("--necklace-k", v_k, "max clusters in a necklace");
  events_cmd->add_option("--necklace-min-mass", v_min_mass, "cluster mass floor in sites");
  events_cmd->add_option("--out", v_out, "output CSV");

  // ---- mass-scan
  auto* mass_cmd = app.add_subcommand("mass-scan", "fitted masses over an H grid");
  MassScanConfig mass;
  mass.out_path = "mass_scan.csv";
  mass_cmd->add_option("--size", mass.size, "periodic lattice side");
  mass_cmd->add_option("--beta", mass.beta, "inverse temperature (default: critical)");
  mass_cmd->add_option("--fields", mass.h_grid, "H grid")->expected(-1);
  mass_cmd->add_option("--sweeps", mass.sweeps, "sweeps per grid point");
  mass_cmd->add_option("--burn-in", mass.burn_in, "burn-in (default: pilot rule)");
  mass_cmd->add_option("--thin", mass.thin, "keep every thin-th sample");
  mass_cmd->add_option("--seed", mass.seed, "master seed (per-point streams)");
  mass_cmd->add_option("--r-max", mass.r_max, "profile range (default min(40, size/2))");
  mass_cmd->add_option("--out", mass.out_path, "output CSV");

  // ---- tm-scan
  auto* tm_cmd = app.add_subcommand("tm-scan", "strip transfer-matrix spectra");
  TmScanConfig tm;
  tm.out_path = "tm_scan.csv";
  tm_cmd->add_option("--widths", tm.widths, "strip widths")->expected(-1);
  tm_cmd->add_option("--beta", tm.beta, "inverse temperature (default: critical)");
  tm_cmd->add_option("--fields", tm.h_grid, "H grid")->expected(-1);
  tm_cmd->add_option("--out", tm.out_path, "output CSV");

  // ---- scaling-check
  auto* scale_cmd = app.add_subcommand("scaling-check", "block moments at two discretizations");
  ScalingCheckConfig scaling;
  scaling.out_path = "scaling_check.json";
  scale_cmd->add_option("--size-a", scaling.size_a, "run A lattice side");
  scale_cmd->add_option("--size-b", scaling.size_b, "run B lattice side");
  scale_cmd->add_option("--little-h", scaling.little_h, "renormalized field h for run A");
  scale_cmd->add_option("--little-h-b", scaling.little_h_b, "field for run B (default: same as A)");
  scale_cmd->add_option("--blocks", scaling.blocks_per_side, "blocks per side");
  scale_cmd->add_option("--sweeps", scaling.sweeps, "sweeps per run");
  scale_cmd->add_option("--thin", scaling.thin, "keep every thin-th sample");
  scale_cmd->add_option("--seed", scaling.seed, "master seed");
  scale_cmd->add_option("--out", scaling.out_path, "output JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(enum_cmd)) {
      EnumerateConfig config;
      config.lattice = LatticeSpec{e_width, e_height, e_spacing, boundary_from_string(e_boundary)};
      config.params = FieldParams(e_beta, e_field);
      config.measure = e_measure;
      config.out_path = resolve_out(e_out);
      return run_enumerate(config);
    }
    if (app.got_subcommand(sample_cmd)) {
      SampleConfig config;
      config.lattice = LatticeSpec{s_width, s_height, s_spacing, boundary_from_string(s_boundary)};
      config.params = FieldParams(s_beta, s_field);
      config.schedule.sweeps = s_sweeps;
      config.schedule.thin = s_thin;
      config.schedule.seed = s_seed;
      config.schedule.sampler = s_sampler == "wolff" ? Sampler::Wolff : Sampler::SwendsenWang;
      config.burn_in_overridden = s_burn >= 0;
      config.schedule.burn_in = std::max<int64_t>(s_burn, 0);
      config.observables = s_obs;
      config.out_path = resolve_out(s_out);
      config.checkpoint_path = resolve_out(s_checkpoint);
      return run_sample(config);
    }
    if (app.got_subcommand(events_cmd)) {
      EventsConfig config;
      config.lattice = LatticeSpec{v_width, v_height, v_spacing, boundary_from_string(v_boundary)};
      config.params = FieldParams(v_beta, v_field);
      config.schedule.sweeps = v_sweeps;
      config.schedule.thin = v_thin;
      config.schedule.seed = v_seed;
      config.schedule.sampler = v_sampler == "wolff" ? Sampler::Wolff : Sampler::SwendsenWang;
      config.burn_in_overridden = v_burn >= 0;
      config.schedule.burn_in = std::max<int64_t>(v_burn, 0);
      config.annulus_inner = v_inner;
      config.annulus_outer = v_outer;
      config.detectors = v_detectors;
      config.necklace_k = v_k;
      config.necklace_min_mass = v_min_mass;
      config.out_path = resolve_out(v_out);
      return run_events(config);
    }
    if (app.got_subcommand(mass_cmd)) {
      mass.out_path = resolve_out(mass.out_path);
      return run_mass_scan(mass);
    }
    if (app.got_subcommand(tm_cmd)) {
      tm.out_path = resolve_out(tm.out_path);
      return run_tm_scan(tm);
    }
    if (app.got_subcommand(scale_cmd)) {
      scaling.out_path = resolve_out(scaling.out_path);
      return run_scaling_check(scaling);
    }
  } catch (const IoError& err) {
    std::cerr << "io error: " << err.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& err) {
    std::cerr << "validation error: " << err.what() << "\n";
    return kValidation;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kAssertion;
  }
  return kValidation;
}
