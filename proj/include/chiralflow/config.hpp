#pragma once

#include <map>
#include <optional>
#include <string>

#include "chiralflow/lattice.hpp"
#include "chiralflow/quantum.hpp"

namespace chiralflow {

enum class Engine { exact, zeno, floquet, near_zeno };

const char* to_string(Engine e);

struct RunConfig {
  LatticeSpec lattice;
  ScheduleKind schedule = ScheduleKind::standard;
  double period_t = 4.0 * M_PI;
  int n_meas = 1;
  int cycles = 10;
  Engine engine = Engine::zeno;
  std::string fill = "lower_half";  // lower_half | uniform[:d] | single_site:<id> | file:<path>
  std::optional<double> cut_x;      // default: between-cell cut near the middle
  std::string out = "out";

  bool operator==(const RunConfig&) const = default;

  // Flat key-value dump; parses back to an equal value.
  std::string dump() const;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses `key = value` lines ('#' comments). Unknown keys are errors.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Applies one key=value override (same keys as the file format).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

FillSpec parse_fill(const std::string& text);

// Engine-specific preconditions (near_zeno requires T = 4*pi, ...).
void check_config(const RunConfig& cfg);

}  // namespace chiralflow
