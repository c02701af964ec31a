#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfsg/config.hpp"

namespace cfsg {

enum class SweptParam { kThresholdDb, kLambdaAp, kNUsers, kTauTr, kAlpha };

enum class Metric {
  kCoverageAnalytical,
  kCoverageMc,
  kRateAnalytical,
  kRateMc,
  kScRateMc,
  kScCoverageMc,
};

const char* param_name(SweptParam p);
const char* metric_name(Metric m);

// One sweep: a parameter, its grid, the metrics to evaluate at each value,
// and the Monte Carlo replicate counts. Values must be strictly monotone;
// integer-valued parameters (K, tau_tr) additionally require integral values.
struct SweepSpec {
  SweptParam param = SweptParam::kThresholdDb;
  std::vector<double> values;
  std::vector<Metric> metrics;
  int n_topologies = 1000;
  int n_channel_draws = 200;
};

struct SweepRow {
  double param_value = 0.0;
  Metric metric = Metric::kCoverageAnalytical;
  double mean = 0.0;
  double std_err = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // value-major, metrics in spec order
  bool truncated = false;      // budget ran out before the grid was done
  double wall_time_s = 0.0;
  SystemConfig config;  // resolved configuration the sweep ran with
  SweepSpec spec;
  std::uint64_t master_seed = 0;
};

// Total primitive evaluations (topology samples plus channel draws) a single
// run_sweep call may spend before truncating.
constexpr long long kSweepBudget = 1'000'000'000LL;

// Parses the flat key=value sweep dialect:
//   parameter = T | lambda_ap | K | tau_tr | alpha
//   values = v1, v2, ...
//   metrics = coverage_analytical, rate_mc, ...
//   n_topologies = 1000
//   n_channel_draws = 200
SweepSpec parse_sweep(const std::string& text);
SweepSpec load_sweep(const std::string& path);
void validate_sweep(const SweepSpec& spec);

// Evaluates the grid in order. Monte Carlo metrics share topology seeds
// across swept values (common random numbers), threshold sweeps reuse one
// set of per-topology SINR samples for the whole grid, and all reductions
// are index-ordered, so results do not depend on the thread count. The
// budget caps primitive evaluations; the default is kSweepBudget.
SweepResult run_sweep(const SystemConfig& cfg, const SweepSpec& spec,
                      unsigned n_threads, long long budget = kSweepBudget);

// Named figure reproductions. Each figure is a small family of sweeps
// (one per curve family, e.g. one per AP density); grids are artifact
// choices shipped with the tool, not taken from any external source.
struct FigureRun {
  std::string stem;  // output file stem, e.g. "fig1_lambda40"
  SystemConfig config;
  SweepSpec spec;
};

enum class FigureScale { kDesk, kPaper };

std::vector<FigureRun> figure_runs(const std::string& name, FigureScale scale,
                                   const SystemConfig& base);

}  // namespace cfsg
