#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "htmean/config.hpp"

namespace htmean {

enum class ExperimentKind {
  BoundCompare,
  Coverage,
  EstDist,
  MomentCheck,
  VilleCheck
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_from_string(const std::string& s);

struct RunRow {
  std::string experiment;
  std::string estimator;
  double p = 0.0;
  int64_t n = 0;
  int64_t k = 0;
  double lambda = 0.0;
  int64_t replication = -1;  // -1 marks formula/aggregate rows
  double distance = 0.0;
  double width = 0.0;
  bool violated = false;
  double wall_ms = 0.0;  // stays 0 unless exp.timing=1
};

struct AssertResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  std::vector<RunRow> rows;
  std::vector<AssertResult> asserts;
  std::string summary_json;  // config echo + aggregates + assert outcomes
};

// Per-experiment config schema with desk-scale defaults. check_config() is
// the union schema used by the `check` subcommand (moment + ville keys, one
// output file).
Config default_config(ExperimentKind kind);
Config check_config();

// Published parameter settings where the paper states them (est_dist:
// n=100000, 250 replications, raw lambda list).
void apply_paper_scale(ExperimentKind kind, Config& cfg);

RunReport run_bound_compare(const Config& cfg);
RunReport run_coverage(const Config& cfg);
RunReport run_est_dist(const Config& cfg);
RunReport run_moment_check(const Config& cfg);
RunReport run_ville_check(const Config& cfg);
RunReport run_experiment(ExperimentKind kind, const Config& cfg);

// RFC-4180 CSV with a header row; doubles at 17 significant digits.
std::string csv_string(const RunReport& report);
void write_csv(const RunReport& report, const std::string& path);

// exp.workers if > 0, else the HTMEAN_WORKERS env var, else hardware threads.
int resolve_workers(const Config& cfg);

// Runs fn(0..count-1) on `workers` threads; any thrown exception is rethrown
// on the caller after all threads stop. Work is claimed from a shared counter,
// so callers must write results into preassigned slots for determinism.
void parallel_for(int64_t count, int workers,
                  const std::function<void(int64_t)>& fn);

// Box-plot summary: quartiles by linear interpolation, whiskers at the most
// extreme data points within median +- 1.5*(q3-q1).
struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double lo_whisker = 0.0;
  double hi_whisker = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

BoxStats box_stats(std::vector<double> values);

}  // namespace htmean
