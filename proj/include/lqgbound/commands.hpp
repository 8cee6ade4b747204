#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lqgbound/hardness.hpp"
#include "lqgbound/instance_io.hpp"

namespace lqgbound {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNegative = 2;  // analysis finished, certificate negative / checks failed

struct RunConfig {
  std::string command;
  std::string instance_path;
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::vector<int> horizons = {50};
  int n_rollouts = 2000;
  double eps = 0.1;
  double alpha = 0.25;
  std::optional<double> delta;  // default 0.5 * sigma_min(Sigma_nu)
  std::string policy = "optimal";
  std::string sweep;
};

/// "optimal", "feedback:PATH" (JSON matrix or {"K": ...}) or "ce-dither:sigma0,beta".
PolicySpec parse_policy(const std::string& text, const LqgInstance& inst);

struct SweepRequest {
  SweepKind kind = SweepKind::kMarginalStability;
  std::vector<double> grid;
};

/// "{marginal,observability,unit-root}:start:stop:points", log-spaced grid.
SweepRequest parse_sweep(const std::string& text);

/// Deterministic, locale-independent number formatting for CSV/JSON output.
std::string format_number(double v);

std::string report_to_json(const HardnessReport& report, const LoadedInstance& loaded,
                           double eps);

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace lqgbound
