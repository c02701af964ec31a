#include "cfsg/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "cfsg/config.hpp"

namespace cfsg {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json config_json(const SystemConfig& c) {
  nlohmann::json j;
  j["lambda_ap"] = c.lambda_ap;
  j["side_km"] = c.area.side_km;
  j["wrap"] = c.area.wrap;
  j["n_antennas"] = c.n_antennas;
  j["n_users"] = c.n_users;
  j["alpha"] = c.alpha;
  j["tau_tr"] = c.tau_tr;
  j["tau_c"] = c.tau_c;
  j["tau_d_sc"] = c.tau_d_sc;
  j["p_tr_mW"] = c.p_tr_mw;
  j["p_d_mW"] = c.p_d_mw;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["noise_figure_db"] = c.noise_figure_db;
  j["noise_temp_k"] = c.noise_temp_k;
  j["rho_tr"] = c.rho_tr;
  j["rho_d"] = c.rho_d;
  j["pilot_assignment"] =
      c.pilot_assignment == PilotPolicy::kRoundRobin ? "round_robin" : "auto";
  j["seed"] = c.seed;
  j["n_topologies"] = c.mc.n_topologies;
  j["n_channel_draws"] = c.mc.n_channel_draws;
  j["coverage_threshold_db"] = c.coverage_threshold_db;
  return j;
}

nlohmann::json sweep_json(const SweepSpec& s) {
  nlohmann::json j;
  j["parameter"] = param_name(s.param);
  j["values"] = s.values;
  auto names = nlohmann::json::array();
  for (Metric m : s.metrics) names.push_back(metric_name(m));
  j["metrics"] = names;
  j["n_topologies"] = s.n_topologies;
  j["n_channel_draws"] = s.n_channel_draws;
  return j;
}

// Everything a rerun needs; wall time is deliberately absent so this block
// can be embedded in byte-stable artifacts.
nlohmann::json stable_meta(const SweepResult& r) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["master_seed"] = r.master_seed;
  j["config"] = config_json(r.config);
  j["sweep"] = sweep_json(r.spec);
  j["truncated"] = r.truncated;
  j["units"] = {{"coverage", "probability"}, {"rate", "Mbit/s"}};
  return j;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace

std::string format_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "param,metric,mean,stderr\n";
  for (const auto& row : r.rows) {
    out << num(row.param_value) << ',' << metric_name(row.metric) << ','
        << num(row.mean) << ',' << num(row.std_err) << '\n';
  }
  return out.str();
}

std::string format_meta_json(const SweepResult& r, const std::string& command) {
  nlohmann::json j = stable_meta(r);
  j["command"] = command;
  j["wall_time_s"] = r.wall_time_s;
  j["n_rows"] = r.rows.size();
  return j.dump(2) + "\n";
}

std::string format_svg(const SweepResult& r, const std::string& title) {
  constexpr double kW = 720, kH = 480;
  constexpr double kL = 70, kR = 640, kT = 46, kB = 420;  // plot box edges
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};

  // Series in metric order, points in row order.
  struct Pt {
    double x, y, e;
  };
  std::vector<std::pair<Metric, std::vector<Pt>>> series;
  for (Metric m : r.spec.metrics) {
    std::vector<Pt> pts;
    for (const auto& row : r.rows) {
      if (row.metric == m && std::isfinite(row.mean)) {
        pts.push_back({row.param_value, row.mean, row.std_err});
      }
    }
    if (!pts.empty()) series.emplace_back(m, std::move(pts));
  }

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& [m, pts] : series) {
    for (const auto& p : pts) {
      if (first) {
        xmin = xmax = p.x;
        ymin = ymax = p.y;
        first = false;
      }
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y - p.e);
      ymax = std::max(ymax, p.y + p.e);
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  const double pad = (ymax > ymin) ? 0.05 * (ymax - ymin) : 1.0;
  ymin = std::min(0.0, ymin);
  ymax += pad;
  if (ymax == ymin) ymax = ymin + 1;

  auto sx = [&](double x) { return kL + (x - xmin) / (xmax - xmin) * (kR - kL); };
  auto sy = [&](double y) { return kB - (y - ymin) / (ymax - ymin) * (kB - kT); };
  auto coord = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto tick_label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
         "width=\""
      << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
      << "\">\n";
  out << "<desc>" << xml_escape(stable_meta(r).dump()) << "</desc>\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (kL + kR) / 2 << "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\" text-anchor=\"middle\">"
      << xml_escape(title) << "</text>\n";

  // Axes with five ticks per side.
  out << "<g stroke=\"black\" fill=\"none\" stroke-width=\"1\">\n"
      << "<path d=\"M " << coord(kL) << ' ' << coord(kT) << " L " << coord(kL)
      << ' ' << coord(kB) << " L " << coord(kR) << ' ' << coord(kB)
      << "\"/>\n</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    out << "<line x1=\"" << coord(sx(xv)) << "\" y1=\"" << coord(kB)
        << "\" x2=\"" << coord(sx(xv)) << "\" y2=\"" << coord(kB + 5)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << coord(sx(xv)) << "\" y=\"" << coord(kB + 18)
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    out << "<line x1=\"" << coord(kL - 5) << "\" y1=\"" << coord(sy(yv))
        << "\" x2=\"" << coord(kL) << "\" y2=\"" << coord(sy(yv))
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << coord(kL - 8) << "\" y=\"" << coord(sy(yv) + 4)
        << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << (kL + kR) / 2 << "\" y=\"" << kB + 38
      << "\" text-anchor=\"middle\">" << param_name(r.spec.param)
      << "</text>\n";
  out << "</g>\n";

  // One polyline per metric, with point markers and error bars.
  int ci = 0;
  for (const auto& [m, pts] : series) {
    const char* color = kPalette[ci % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : pts) out << coord(sx(p.x)) << ',' << coord(sy(p.y)) << ' ';
    out << "\"/>\n";
    for (const auto& p : pts) {
      out << "<circle cx=\"" << coord(sx(p.x)) << "\" cy=\"" << coord(sy(p.y))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      if (p.e > 0) {
        out << "<line x1=\"" << coord(sx(p.x)) << "\" y1=\""
            << coord(sy(p.y - p.e)) << "\" x2=\"" << coord(sx(p.x))
            << "\" y2=\"" << coord(sy(p.y + p.e)) << "\" stroke=\"" << color
            << "\" stroke-width=\"1\"/>\n";
      }
    }
    // Legend entry.
    const double ly = kT + 16 + 16 * ci;
    out << "<line x1=\"" << kL + 12 << "\" y1=\"" << coord(ly) << "\" x2=\""
        << kL + 40 << "\" y2=\"" << coord(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << kL + 46 << "\" y=\"" << coord(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << metric_name(m) << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
  return out.str();
}

OutputPaths write_outputs(const SweepResult& r, const std::string& out_dir,
                          const std::string& stem, const std::string& command,
                          bool with_svg) {
  std::filesystem::create_directories(out_dir);
  OutputPaths paths;
  paths.csv = out_dir + "/" + stem + ".csv";
  paths.meta = out_dir + "/" + stem + ".meta.json";
  write_file(paths.csv, format_csv(r));
  write_file(paths.meta, format_meta_json(r, command));
  if (with_svg) {
    paths.svg = out_dir + "/" + stem + ".svg";
    write_file(paths.svg, format_svg(r, stem));
  }
  return paths;
}

}  // namespace cfsg
