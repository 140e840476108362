// cli.hpp
//
// Command-line front end. Subcommands: env, solve-oracle, trial, exp1, exp2,
// diagnose. Exit codes are stable:
//   0  success
//   1  runtime failure (I/O, solver)
//   2  usage error (unknown subcommand or flag, malformed value)
//   3  validation error (value out of range, bad environment)
#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "elimtas/engine.hpp"

namespace elimtas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

// Writes the four plot panels of a diagnostics trace next to `prefix`:
//   <prefix>_active_set.csv   one row per elimination event
//   <prefix>_allocation.csv   empirical allocation per round
//   <prefix>_evidence.csv     min Z against the active set vs beta_elim
//   <prefix>_rate.csv         oracle, empirical and averaged-target rates
// Throws UsageError on an empty trace without touching the filesystem.
std::vector<std::filesystem::path> emit_plot_data(const DiagnosticsTrace& trace,
                                                  const std::filesystem::path& prefix);

}  // namespace elimtas::cli
