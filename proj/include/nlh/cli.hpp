#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "nlh/config.hpp"

namespace nlh {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_numerical = 3, exit_io = 4 };

struct AuditSummary {
  bool pass = true;
  std::vector<std::string> lines;
};

/// Ellipticity, superlinearity, regularity and (for sigma = 1) drift audits of a config.
AuditSummary run_audits(const RunConfig& config);

struct CliOptions {
  std::string command;
  std::string config_path;
  std::string out_dir;
  bool force = false;
  int threads = 1;
  // Overrides for `constants`.
  std::optional<double> n, sigma, m, b0, C0;
};

/// Executes one command; returns an ExitCode. Reports go to out, diagnostics to err.
int dispatch(const CliOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlh
