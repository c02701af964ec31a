#pragma once

#include <string>

#include "cfsg/sweep.hpp"

namespace cfsg {

inline constexpr const char* kToolName = "cfsg";
inline constexpr const char* kToolVersion = "0.1.0";

// In-memory renderings of the three artifact formats. The CSV and SVG are
// pure functions of (config, seed, sweep, rows), so identically seeded runs
// produce identical bytes; volatile fields (wall time) live only in the
// JSON sidecar.
std::string format_csv(const SweepResult& r);
std::string format_meta_json(const SweepResult& r, const std::string& command);
std::string format_svg(const SweepResult& r, const std::string& title);

struct OutputPaths {
  std::string csv;
  std::string svg;
  std::string meta;
};

// Writes <stem>.csv, <stem>.svg and <stem>.meta.json under out_dir
// (created if missing). Files are written in binary mode with LF endings.
OutputPaths write_outputs(const SweepResult& r, const std::string& out_dir,
                          const std::string& stem, const std::string& command,
                          bool with_svg = true);

}  // namespace cfsg
