#include "cfsg/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cfsg/closed_form.hpp"

namespace cfsg {

void resolve_powers(SystemConfig& cfg) {
  const double n_p =
      noise_power(cfg.bandwidth_hz, cfg.noise_figure_db, cfg.noise_temp_k);
  if (cfg.rho_tr == 0.0) {
    cfg.rho_tr = normalize_power(cfg.p_tr_mw * 1e-3, n_p);
  }
  if (cfg.rho_d == 0.0) {
    cfg.rho_d = normalize_power(cfg.p_d_mw * 1e-3, n_p);
  }
}

SystemConfig default_config() {
  SystemConfig cfg;
  resolve_powers(cfg);
  return cfg;
}

std::vector<ConfigIssue> validate(const SystemConfig& cfg) {
  std::vector<ConfigIssue> out;
  auto bad = [&out](const char* key, const std::string& msg) {
    out.push_back({key, msg});
  };
  if (cfg.lambda_ap <= 0.0) bad("lambda_ap", "AP density must be positive");
  if (cfg.area.side_km <= 0.0) bad("side_km", "area side must be positive");
  if (cfg.n_users < 1) bad("n_users", "need at least one user");
  if (cfg.n_antennas < 1) bad("n_antennas", "need at least one antenna per AP");
  if (cfg.alpha <= 2.0) {
    bad("alpha", "path-loss exponent must exceed 2; spatial moments diverge");
  }
  if (cfg.tau_tr < 1) bad("tau_tr", "training length must be at least 1");
  if (cfg.tau_c < 1) bad("tau_c", "coherence block must be at least 1 sample");
  if (cfg.tau_tr > cfg.tau_c) {
    bad("tau_tr", "training cannot exceed the coherence block");
  }
  if (cfg.tau_d_sc < 0) bad("tau_d_sc", "downlink training must be >= 0");
  if (cfg.tau_tr + cfg.tau_d_sc > cfg.tau_c) {
    bad("tau_d_sc", "combined training exceeds the coherence block");
  }
  if (cfg.p_tr_mw <= 0.0) bad("p_tr_mW", "training power must be positive");
  if (cfg.p_d_mw <= 0.0) bad("p_d_mW", "downlink power must be positive");
  if (cfg.bandwidth_hz <= 0.0) bad("bandwidth_hz", "bandwidth must be positive");
  if (cfg.noise_temp_k <= 0.0) bad("noise_temp_k", "temperature must be positive");
  if (cfg.rho_tr < 0.0) bad("rho_tr", "normalized power cannot be negative");
  if (cfg.rho_d < 0.0) bad("rho_d", "normalized power cannot be negative");
  if (cfg.mc.n_topologies < 1) bad("n_topologies", "need at least one topology");
  if (cfg.mc.n_channel_draws < 1) bad("n_channel_draws", "need at least one draw");
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& value, const std::string& key, int line) {
  const std::string v = trim(value);
  if (v.empty()) throw ConfigError("empty value for '" + key + "'", line, key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size()) {
    throw ConfigError("non-numeric value '" + v + "' for '" + key + "'", line, key);
  }
  return x;
}

int parse_int(const std::string& value, const std::string& key, int line) {
  const double x = parse_number(value, key, line);
  if (x != std::floor(x) || std::fabs(x) > 2e9) {
    throw ConfigError("'" + key + "' must be an integer", line, key);
  }
  return static_cast<int>(x);
}

bool parse_bool(const std::string& value, const std::string& key, int line) {
  const std::string v = trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' must be true/false", line, key);
}

}  // namespace

SystemConfig parse_config(const std::string& text, const std::string& name) {
  SystemConfig cfg;
  std::map<std::string, int> seen;  // key -> line, for duplicates and errors

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(name + ": expected 'key = value' on line " +
                            std::to_string(line_no),
                        line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(name + ": missing key on line " + std::to_string(line_no),
                        line_no);
    }
    if (seen.count(key)) {
      throw ConfigError(name + ": duplicate key '" + key + "' on line " +
                            std::to_string(line_no) + " (first on line " +
                            std::to_string(seen[key]) + ")",
                        line_no, key);
    }
    seen[key] = line_no;

    if (key == "lambda_ap") cfg.lambda_ap = parse_number(value, key, line_no);
    else if (key == "side_km") cfg.area.side_km = parse_number(value, key, line_no);
    else if (key == "wrap") cfg.area.wrap = parse_bool(value, key, line_no);
    else if (key == "n_antennas") cfg.n_antennas = parse_int(value, key, line_no);
    else if (key == "n_users") cfg.n_users = parse_int(value, key, line_no);
    else if (key == "alpha") cfg.alpha = parse_number(value, key, line_no);
    else if (key == "tau_tr") cfg.tau_tr = parse_int(value, key, line_no);
    else if (key == "tau_c") cfg.tau_c = parse_int(value, key, line_no);
    else if (key == "tau_d_sc") cfg.tau_d_sc = parse_int(value, key, line_no);
    else if (key == "p_tr_mW") cfg.p_tr_mw = parse_number(value, key, line_no);
    else if (key == "p_d_mW") cfg.p_d_mw = parse_number(value, key, line_no);
    else if (key == "bandwidth_hz") cfg.bandwidth_hz = parse_number(value, key, line_no);
    else if (key == "noise_figure_db") cfg.noise_figure_db = parse_number(value, key, line_no);
    else if (key == "noise_temp_k") cfg.noise_temp_k = parse_number(value, key, line_no);
    else if (key == "rho_tr") cfg.rho_tr = parse_number(value, key, line_no);
    else if (key == "rho_d") cfg.rho_d = parse_number(value, key, line_no);
    else if (key == "coverage_threshold_db") cfg.coverage_threshold_db = parse_number(value, key, line_no);
    else if (key == "seed") {
      const double x = parse_number(value, key, line_no);
      if (x < 0 || x != std::floor(x)) {
        throw ConfigError("'seed' must be a non-negative integer", line_no, key);
      }
      cfg.seed = static_cast<std::uint64_t>(x);
    } else if (key == "n_topologies") cfg.mc.n_topologies = parse_int(value, key, line_no);
    else if (key == "n_channel_draws") cfg.mc.n_channel_draws = parse_int(value, key, line_no);
    else if (key == "pilot_assignment") {
      const std::string v = trim(value);
      if (v == "auto" || v == "orthogonal_if_fits") {
        cfg.pilot_assignment = PilotPolicy::kAuto;
      } else if (v == "round_robin") {
        cfg.pilot_assignment = PilotPolicy::kRoundRobin;
      } else {
        throw ConfigError("unknown pilot_assignment '" + v +
                              "' (use auto|orthogonal_if_fits|round_robin)",
                          line_no, key);
      }
    } else {
      throw ConfigError(name + ": unknown key '" + key + "' on line " +
                            std::to_string(line_no),
                        line_no, key);
    }
  }

  resolve_powers(cfg);
  const auto issues = validate(cfg);
  if (!issues.empty()) {
    const auto& first = issues.front();
    const int at = seen.count(first.key) ? seen[first.key] : 0;
    throw ConfigError(name + ": invalid '" + first.key + "': " + first.message +
                          (at ? " (line " + std::to_string(at) + ")" : ""),
                      at, first.key);
  }
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string format_config(const SystemConfig& cfg) {
  char buf[256];
  std::ostringstream out;
  auto num = [&out, &buf](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.12g\n", key, v);
    out << buf;
  };
  num("lambda_ap", cfg.lambda_ap);
  num("side_km", cfg.area.side_km);
  out << "wrap = " << (cfg.area.wrap ? "true" : "false") << "\n";
  num("n_antennas", cfg.n_antennas);
  num("n_users", cfg.n_users);
  num("alpha", cfg.alpha);
  num("tau_tr", cfg.tau_tr);
  num("tau_c", cfg.tau_c);
  num("tau_d_sc", cfg.tau_d_sc);
  num("p_tr_mW", cfg.p_tr_mw);
  num("p_d_mW", cfg.p_d_mw);
  num("bandwidth_hz", cfg.bandwidth_hz);
  num("noise_figure_db", cfg.noise_figure_db);
  num("noise_temp_k", cfg.noise_temp_k);
  num("rho_tr", cfg.rho_tr);
  num("rho_d", cfg.rho_d);
  out << "pilot_assignment = "
      << (cfg.pilot_assignment == PilotPolicy::kRoundRobin ? "round_robin"
                                                           : "auto")
      << "\n";
  out << "seed = " << cfg.seed << "\n";
  num("n_topologies", cfg.mc.n_topologies);
  num("n_channel_draws", cfg.mc.n_channel_draws);
  num("coverage_threshold_db", cfg.coverage_threshold_db);
  return out.str();
}

PilotBook pilot_book_for(const SystemConfig& cfg) {
  return make_pilot_book(cfg.n_users, cfg.tau_tr, cfg.pilot_assignment);
}

}  // namespace cfsg
