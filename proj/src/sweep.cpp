#include "cfsg/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cfsg/closed_form.hpp"
#include "cfsg/downlink.hpp"
#include "cfsg/parallel.hpp"
#include "cfsg/rng.hpp"

namespace cfsg {

namespace {

constexpr const char* kParamNames[] = {"T", "lambda_ap", "K", "tau_tr",
                                       "alpha"};
constexpr const char* kMetricNames[] = {
    "coverage_analytical", "coverage_mc", "rate_analytical",
    "rate_mc",             "sc_rate_mc",  "sc_coverage_mc"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_value(const std::string& text, const std::string& key, int line) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError("sweep: non-numeric value '" + t + "' for " + key, line,
                      key);
  }
  return v;
}

bool is_integral(double v) { return v == std::floor(v); }

SystemConfig apply_param(const SystemConfig& base, SweptParam p, double v,
                         int line_hint = 0) {
  SystemConfig c = base;
  switch (p) {
    case SweptParam::kThresholdDb:
      c.coverage_threshold_db = v;
      break;
    case SweptParam::kLambdaAp:
      c.lambda_ap = v;
      break;
    case SweptParam::kNUsers:
      c.n_users = static_cast<int>(v);
      break;
    case SweptParam::kTauTr:
      c.tau_tr = static_cast<int>(v);
      break;
    case SweptParam::kAlpha:
      c.alpha = v;
      break;
  }
  const auto issues = validate(c);
  if (!issues.empty()) {
    throw ConfigError("sweep value " + std::to_string(v) + " for " +
                          param_name(p) + " violates '" + issues[0].key +
                          "': " + issues[0].message,
                      line_hint, issues[0].key);
  }
  return c;
}

bool wants(const SweepSpec& spec, Metric m) {
  return std::find(spec.metrics.begin(), spec.metrics.end(), m) !=
         spec.metrics.end();
}

struct TopoEval {
  double de_gamma0 = 0.0;  // deterministic-equivalent SINR of the typical user
  double sc_gamma0 = 0.0;  // small-cells SINR of the typical user
  double sc_rate0 = 0.0;   // small-cells spectral efficiency, bit/s/Hz
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

template <class Get>
MeanSe sample_mean(const std::vector<TopoEval>& s, Get&& get) {
  const std::size_t n = s.size();
  double acc = 0.0;
  for (const auto& e : s) acc += get(e);
  const double mean = acc / n;
  double var = 0.0;
  for (const auto& e : s) {
    const double d = get(e) - mean;
    var += d * d;
  }
  var = (n > 1) ? var / (n - 1) : 0.0;
  return {mean, std::sqrt(var / n)};
}

template <class Get>
MeanSe exceed_fraction(const std::vector<TopoEval>& s, double t_lin,
                       Get&& get) {
  const std::size_t n = s.size();
  std::size_t hits = 0;
  for (const auto& e : s) hits += (get(e) > t_lin) ? 1 : 0;
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace

const char* param_name(SweptParam p) {
  return kParamNames[static_cast<int>(p)];
}

const char* metric_name(Metric m) { return kMetricNames[static_cast<int>(m)]; }

SweepSpec parse_sweep(const std::string& text) {
  SweepSpec spec;
  spec.metrics.clear();
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::vector<std::pair<std::string, int>> seen;
  bool have_param = false, have_values = false, have_metrics = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto h = line.find('#'); h != std::string::npos) {
      line = line.substr(0, h);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("sweep: expected key = value", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (const auto& [k, l] : seen) {
      if (k == key) {
        throw ConfigError("sweep: duplicate key '" + key + "' (lines " +
                              std::to_string(l) + " and " +
                              std::to_string(line_no) + ")",
                          line_no, key);
      }
    }
    seen.emplace_back(key, line_no);

    if (key == "parameter") {
      bool found = false;
      for (int i = 0; i < 5 && !found; ++i) {
        if (value == kParamNames[i]) {
          spec.param = static_cast<SweptParam>(i);
          found = have_param = true;
        }
      }
      if (!found) {
        throw ConfigError("sweep: unknown parameter '" + value + "'", line_no,
                          key);
      }
    } else if (key == "values") {
      for (const auto& item : split_list(value)) {
        spec.values.push_back(parse_value(item, key, line_no));
      }
      have_values = true;
    } else if (key == "metrics") {
      for (const auto& item : split_list(value)) {
        bool found = false;
        for (int i = 0; i < 6 && !found; ++i) {
          if (item == kMetricNames[i]) {
            spec.metrics.push_back(static_cast<Metric>(i));
            found = true;
          }
        }
        if (!found) {
          throw ConfigError("sweep: unknown metric '" + item + "'", line_no,
                            key);
        }
      }
      have_metrics = true;
    } else if (key == "n_topologies") {
      const double v = parse_value(value, key, line_no);
      if (!is_integral(v) || v < 1) {
        throw ConfigError("sweep: n_topologies must be a positive integer",
                          line_no, key);
      }
      spec.n_topologies = static_cast<int>(v);
    } else if (key == "n_channel_draws") {
      const double v = parse_value(value, key, line_no);
      if (!is_integral(v) || v < 1) {
        throw ConfigError("sweep: n_channel_draws must be a positive integer",
                          line_no, key);
      }
      spec.n_channel_draws = static_cast<int>(v);
    } else {
      throw ConfigError("sweep: unknown key '" + key + "'", line_no, key);
    }
  }

  if (!have_param) throw ConfigError("sweep: missing 'parameter'");
  if (!have_values) throw ConfigError("sweep: missing 'values'");
  if (!have_metrics) throw ConfigError("sweep: missing 'metrics'");
  validate_sweep(spec);
  return spec;
}

SweepSpec load_sweep(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("sweep: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sweep(buf.str());
}

void validate_sweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw ConfigError("sweep: values must be non-empty");
  if (spec.values.size() > 1) {
    const bool inc = spec.values[1] > spec.values[0];
    for (std::size_t i = 1; i < spec.values.size(); ++i) {
      const bool step_inc = spec.values[i] > spec.values[i - 1];
      if (spec.values[i] == spec.values[i - 1] || step_inc != inc) {
        throw ConfigError("sweep: values must be strictly monotone");
      }
    }
  }
  if (spec.param == SweptParam::kNUsers || spec.param == SweptParam::kTauTr) {
    for (double v : spec.values) {
      if (!is_integral(v) || v < 1) {
        throw ConfigError(std::string("sweep: ") + param_name(spec.param) +
                          " values must be positive integers");
      }
    }
  }
  if (spec.metrics.empty()) {
    throw ConfigError("sweep: metrics must be non-empty");
  }
  for (std::size_t i = 0; i < spec.metrics.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.metrics.size(); ++j) {
      if (spec.metrics[i] == spec.metrics[j]) {
        throw ConfigError(std::string("sweep: duplicate metric '") +
                          metric_name(spec.metrics[i]) + "'");
      }
    }
  }
  if (spec.n_topologies < 1 || spec.n_channel_draws < 1) {
    throw ConfigError("sweep: replicate counts must be positive");
  }
}

SweepResult run_sweep(const SystemConfig& cfg, const SweepSpec& spec,
                      unsigned n_threads, long long budget) {
  validate_sweep(spec);
  SystemConfig base = cfg;
  resolve_powers(base);
  if (const auto issues = validate(base); !issues.empty()) {
    throw ConfigError("config: '" + issues[0].key + "': " + issues[0].message,
                      0, issues[0].key);
  }

  const auto t_start = std::chrono::steady_clock::now();
  SweepResult result;
  result.config = base;
  result.spec = spec;
  result.master_seed = base.seed;

  const bool needs_de = wants(spec, Metric::kCoverageMc) ||
                        wants(spec, Metric::kRateMc);
  const bool needs_sc = wants(spec, Metric::kScRateMc) ||
                        wants(spec, Metric::kScCoverageMc);
  const bool needs_topo = needs_de || needs_sc;
  const std::uint64_t topo_stream = derive_seed(base.seed, kStreamTopology);
  const std::uint64_t sc_stream = derive_seed(base.seed, kStreamSmallCell);
  const std::size_t n = static_cast<std::size_t>(spec.n_topologies);

  std::vector<TopoEval> samples;
  long long spent = 0;

  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    const SystemConfig c = apply_param(base, spec.param, spec.values[v]);

    // A threshold sweep never changes the SINR distribution, so one set of
    // per-topology samples serves the whole grid.
    const bool fresh =
        needs_topo && (v == 0 || spec.param != SweptParam::kThresholdDb);
    const long long cost =
        fresh ? static_cast<long long>(n) *
                    (1 + (needs_sc ? spec.n_channel_draws : 0))
              : 0;
    if (spent + cost > budget) {
      result.truncated = true;
      break;
    }
    spent += cost;

    if (fresh) {
      samples.assign(n, TopoEval{});
      const PilotBook book = pilot_book_for(c);
      parallel_for(n, n_threads, [&](std::size_t t) {
        auto topo_rng = make_engine(derive_seed(topo_stream, t));
        const auto net = sample_ppp(c.lambda_ap, c.area, c.n_users, c.alpha,
                                    topo_rng);
        TopoEval e;
        if (needs_de) {
          e.de_gamma0 =
              de_sinr(net, book, c.rho_tr, c.rho_d, c.n_antennas).gamma_bar[0];
        }
        if (needs_sc) {
          const auto stats = estimator_stats(net, book, c.rho_tr);
          auto sc_rng = make_engine(derive_seed(sc_stream, t));
          const auto rep = sc_baseline_sinr(net, book, stats, c,
                                            spec.n_channel_draws, sc_rng);
          e.sc_gamma0 = rep.gamma[0];
          e.sc_rate0 = rep.rate[0];
        }
        samples[t] = e;
      });
    }

    const double t_db = (spec.param == SweptParam::kThresholdDb)
                            ? spec.values[v]
                            : c.coverage_threshold_db;
    const double t_lin = std::pow(10.0, t_db / 10.0);
    const double mbps = c.bandwidth_hz / 1e6;  // bit/s/Hz -> Mbit/s
    const double prelog_cf = 1.0 - static_cast<double>(c.tau_tr) / c.tau_c;
    const PilotBook book = pilot_book_for(c);

    for (Metric m : spec.metrics) {
      SweepRow row;
      row.param_value = spec.values[v];
      row.metric = m;
      switch (m) {
        case Metric::kCoverageAnalytical: {
          row.mean = coverage_lower_bound(t_lin, c, book).p_cov;
          break;
        }
        case Metric::kCoverageMc: {
          const auto r = exceed_fraction(samples, t_lin,
                                         [](const TopoEval& e) {
                                           return e.de_gamma0;
                                         });
          row.mean = r.mean;
          row.std_err = r.se;
          break;
        }
        case Metric::kRateAnalytical: {
          row.mean = rate_lower_bound(c, book).throughput_bps / 1e6;
          break;
        }
        case Metric::kRateMc: {
          const auto r = sample_mean(samples, [&](const TopoEval& e) {
            return prelog_cf * std::log2(1.0 + e.de_gamma0) * mbps;
          });
          row.mean = r.mean;
          row.std_err = r.se;
          break;
        }
        case Metric::kScRateMc: {
          const auto r = sample_mean(samples, [&](const TopoEval& e) {
            return e.sc_rate0 * mbps;
          });
          row.mean = r.mean;
          row.std_err = r.se;
          break;
        }
        case Metric::kScCoverageMc: {
          const auto r = exceed_fraction(samples, t_lin,
                                         [](const TopoEval& e) {
                                           return e.sc_gamma0;
                                         });
          row.mean = r.mean;
          row.std_err = r.se;
          break;
        }
      }
      result.rows.push_back(row);
    }
  }

  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return result;
}

std::vector<FigureRun> figure_runs(const std::string& name, FigureScale scale,
                                   const SystemConfig& base) {
  const bool paper = scale == FigureScale::kPaper;
  const int topo = paper ? 10000 : 1000;
  const int draws = paper ? 10000 : 200;

  auto spec_of = [&](SweptParam p, std::vector<double> values,
                     std::vector<Metric> metrics) {
    SweepSpec s;
    s.param = p;
    s.values = std::move(values);
    s.metrics = std::move(metrics);
    s.n_topologies = topo;
    s.n_channel_draws = draws;
    return s;
  };
  const std::vector<double> t_grid = {-5.0, -2.5, 0.0,  2.5,  5.0, 7.5,
                                      10.0, 12.5, 15.0, 17.5, 20.0};
  const std::vector<double> lambda_grid = {20, 40, 60, 80, 100, 120};
  const std::vector<double> k_grid = {10, 20, 30, 40, 50};
  const std::vector<double> alpha_grid = {2.5, 3.0, 3.5, 4.0, 4.5};

  std::vector<FigureRun> runs;
  if (name == "fig1") {
    // Coverage against the threshold, one curve family per AP density,
    // with the small-cells baseline alongside.
    for (double lambda : {20.0, 40.0, 80.0}) {
      FigureRun r;
      r.stem = "fig1_lambda" + std::to_string(static_cast<int>(lambda));
      r.config = base;
      r.config.lambda_ap = lambda;
      r.spec = spec_of(SweptParam::kThresholdDb, t_grid,
                       {Metric::kCoverageAnalytical, Metric::kCoverageMc,
                        Metric::kScCoverageMc});
      runs.push_back(std::move(r));
    }
  } else if (name == "fig2") {
    // Coverage against the AP density at a small grid of thresholds.
    for (double t_db : {0.0, 5.0, 10.0}) {
      FigureRun r;
      r.stem = "fig2_T" + std::to_string(static_cast<int>(t_db)) + "dB";
      r.config = base;
      r.config.coverage_threshold_db = t_db;
      r.spec = spec_of(SweptParam::kLambdaAp, lambda_grid,
                       {Metric::kCoverageAnalytical, Metric::kCoverageMc});
      runs.push_back(std::move(r));
    }
  } else if (name == "fig3") {
    // Rate against the user count at a dense deployment, one family per
    // training length.
    for (int tau : {5, 10, 20}) {
      FigureRun r;
      r.stem = "fig3_tau" + std::to_string(tau);
      r.config = base;
      r.config.lambda_ap = 80.0;
      r.config.tau_tr = tau;
      r.spec = spec_of(SweptParam::kNUsers, k_grid,
                       {Metric::kRateAnalytical, Metric::kRateMc,
                        Metric::kScRateMc});
      runs.push_back(std::move(r));
    }
  } else if (name == "fig4") {
    // Rate against the AP density, one family per training length.
    for (int tau : {5, 10, 20}) {
      FigureRun r;
      r.stem = "fig4_tau" + std::to_string(tau);
      r.config = base;
      r.config.tau_tr = tau;
      r.spec = spec_of(SweptParam::kLambdaAp, lambda_grid,
                       {Metric::kRateAnalytical, Metric::kRateMc,
                        Metric::kScRateMc});
      runs.push_back(std::move(r));
    }
  } else if (name == "fig5a" || name == "fig5b") {
    // Rate against the path-loss exponent at one AP density per panel.
    FigureRun r;
    r.stem = name;
    r.config = base;
    r.config.lambda_ap = (name == "fig5a") ? 60.0 : 120.0;
    r.spec = spec_of(SweptParam::kAlpha, alpha_grid,
                     {Metric::kRateMc, Metric::kScRateMc});
    runs.push_back(std::move(r));
  } else {
    throw std::invalid_argument(
        "unknown figure '" + name +
        "' (expected fig1, fig2, fig3, fig4, fig5a or fig5b)");
  }
  return runs;
}

}  // namespace cfsg
