#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fkghost/engine.hpp"
#include "fkghost/estimators.hpp"
#include "fkghost/lattice.hpp"

namespace fkghost {

// Exit codes shared by the CLI and the runner: 0 ok, 1 validation,
// 2 assertion/acceptance failure, 3 I/O.
enum ExitCode : int { kOk = 0, kValidation = 1, kAssertion = 2, kIo = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

uint64_t fnv1a(const std::string& text);
std::string format_double(double v);

// Provenance header lines ("# key: value") carrying the full canonical
// config, its hash, and the seed.
std::string provenance_header(const std::string& canonical_config, uint64_t seed);

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);

struct ColumnTolerance {
  double abs_tol = 0.0;
  double rel_tol = 0.0;
};

struct GoldenReport {
  bool pass = true;
  std::vector<std::string> failures;
};

// Columnwise comparison with per-column tolerances; any NaN fails.
GoldenReport golden_compare(const std::string& produced_path, const std::string& reference_path,
                            const std::map<std::string, ColumnTolerance>& tolerances);

// --- subcommands ---------------------------------------------------------------

struct EnumerateConfig {
  LatticeSpec lattice;
  FieldParams params;
  std::string measure = "ising";  // ising | fk | joint
  std::string out_path;
};

struct SampleConfig {
  LatticeSpec lattice;
  FieldParams params;
  SampleSchedule schedule;
  bool burn_in_overridden = false;
  std::vector<std::string> observables;
  std::string out_path;
  std::string checkpoint_path;  // optional
};

struct EventsConfig {
  LatticeSpec lattice;
  FieldParams params;
  SampleSchedule schedule;
  bool burn_in_overridden = false;
  double annulus_inner = 1.0;
  double annulus_outer = 3.0;
  std::vector<std::string> detectors;  // F, G, necklace
  int necklace_k = 4;
  double necklace_min_mass = 1.0;
  std::string out_path;
};

struct MassScanConfig {
  int size = 64;  // periodic size x size lattice
  double beta;
  std::vector<double> h_grid;
  int64_t sweeps = 20000;
  int64_t burn_in = -1;  // -1: pilot rule
  int64_t thin = 2;
  uint64_t seed = 1;
  int r_max = 0;  // 0: min(40, size/2)
  std::string out_path;

  MassScanConfig();
};

struct TmScanConfig {
  std::vector<int> widths;
  double beta;
  std::vector<double> h_grid;
  std::string out_path;

  TmScanConfig();
};

struct ScalingCheckConfig {
  int size_a = 32;
  int size_b = 64;
  double little_h = 1.0;
  double little_h_b = -1.0;  // -1: same continuum field as run A
  int blocks_per_side = 2;
  int64_t sweeps = 20000;
  int64_t thin = 2;
  uint64_t seed = 1;
  std::string out_path;  // JSON report
};

int run_enumerate(const EnumerateConfig& config);
int run_sample(const SampleConfig& config);
int run_events(const EventsConfig& config);
int run_mass_scan(const MassScanConfig& config);
int run_tm_scan(const TmScanConfig& config);
int run_scaling_check(const ScalingCheckConfig& config);

// Helper shared with the acceptance suite: profile + mass fit for one
// (lattice, params) point.
struct MassPoint {
  double big_h = 0.0;
  MassFit fit;
};

MassPoint measure_mass_point(int size, double beta, double big_h, int64_t sweeps,
                             int64_t burn_in, int64_t thin, uint64_t seed, int r_max);

}  // namespace fkghost
