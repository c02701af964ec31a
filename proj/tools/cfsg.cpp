#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfsg/config.hpp"
#include "cfsg/output.hpp"
#include "cfsg/parallel.hpp"
#include "cfsg/sweep.hpp"

namespace {

std::string stem_of(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base =
      (slash == std::string::npos) ? path : path.substr(slash + 1);
  if (auto dot = base.find_last_of('.');
      dot != std::string::npos && dot > 0) {
    base = base.substr(0, dot);
  }
  return base;
}

void report(const cfsg::SweepResult& result, const cfsg::OutputPaths& paths) {
  std::printf("wrote %s (%zu rows), %s", paths.csv.c_str(),
              result.rows.size(), paths.meta.c_str());
  if (!paths.svg.empty()) std::printf(", %s", paths.svg.c_str());
  std::printf("  [%.1fs]\n", result.wall_time_s);
  if (result.truncated) {
    std::printf("warning: evaluation budget exhausted, grid truncated after "
                "%zu rows\n",
                result.rows.size());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell-free massive MIMO downlink: Monte Carlo simulation and "
               "closed-form bounds"};
  app.require_subcommand(1);

  std::string config_path, sweep_path, out_dir, figure_name;
  std::string scale = "desk";
  long long seed_override = -1;
  int threads_flag = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_override, "override the config seed");
    cmd->add_option("--threads", threads_flag,
                    "worker threads (default: CFSG_THREADS, then all cores)");
  };

  CLI::App* run = app.add_subcommand("run", "run one parameter sweep");
  run->add_option("--config", config_path, "system config file")->required();
  run->add_option("--sweep", sweep_path, "sweep spec file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  add_common(run);

  CLI::App* figure =
      app.add_subcommand("figure", "reproduce a named figure's sweeps");
  figure->add_option("name", figure_name,
                     "fig1, fig2, fig3, fig4, fig5a or fig5b")
      ->required();
  figure->add_option("--scale", scale, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  figure->add_option("--out", out_dir, "output directory")->required();
  figure->add_option("--config", config_path,
                     "base config file (defaults otherwise)");
  add_common(figure);

  CLI::App* validate =
      app.add_subcommand("validate", "check a config file and echo it back");
  validate->add_option("--config", config_path, "system config file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const auto cfg = cfsg::load_config(config_path);
      std::fputs(cfsg::format_config(cfg).c_str(), stdout);
      return 0;
    }

    const unsigned threads = cfsg::resolve_threads(threads_flag);

    if (run->parsed()) {
      auto cfg = cfsg::load_config(config_path);
      if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
      const auto spec = cfsg::load_sweep(sweep_path);
      const auto result = cfsg::run_sweep(cfg, spec, threads);
      std::string command = std::string("cfsg run --config ") + config_path +
                            " --sweep " + sweep_path + " --out " + out_dir +
                            " --seed " + std::to_string(cfg.seed);
      const auto paths =
          cfsg::write_outputs(result, out_dir, stem_of(sweep_path), command);
      report(result, paths);
      return result.truncated ? 3 : 0;
    }

    if (figure->parsed()) {
      auto base = config_path.empty() ? cfsg::default_config()
                                      : cfsg::load_config(config_path);
      if (seed_override >= 0) base.seed = static_cast<std::uint64_t>(seed_override);
      const auto fig_scale = (scale == "paper") ? cfsg::FigureScale::kPaper
                                                : cfsg::FigureScale::kDesk;
      bool truncated = false;
      for (const auto& fr : cfsg::figure_runs(figure_name, fig_scale, base)) {
        const auto result = cfsg::run_sweep(fr.config, fr.spec, threads);
        std::string command = std::string("cfsg figure ") + figure_name +
                              " --scale " + scale + " --out " + out_dir +
                              " --seed " + std::to_string(base.seed);
        const auto paths =
            cfsg::write_outputs(result, out_dir, fr.stem, command);
        report(result, paths);
        truncated = truncated || result.truncated;
      }
      return truncated ? 3 : 0;
    }
  } catch (const cfsg::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
