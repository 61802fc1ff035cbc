#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "jumpfcs/fcs.hpp"
#include "jumpfcs/model.hpp"

namespace jumpfcs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for --help; carries the formatted help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;  // scgf | sweep | traj | pk
  AtomParams params{1.0, 0.25, 0.0};
  GridSpec s_grid;
  GridSpec alpha_grid;
  double t = 10.0;
  double dt = 0.0;  // resolved from params when not given
  long long n_traj = 1000;
  int k_max = -1;  // -1: recommended_k_max at run time
  std::uint64_t master_seed = 42;
  std::string output_path;  // empty: standard output
  std::string init = "g";   // g | e | ss (stationary mixture)
  unsigned threads = 0;
  bool dump_config = false;

  bool operator==(const RunConfig&) const = default;
};

/// argv excludes the program name. Explicit flags override values from a
/// --config JSON file, which is a flat object keyed by flag names.
RunConfig parse_args(const std::vector<std::string>& args);

/// Flat JSON object that parse_args accepts back through --config.
std::string dump_config(const RunConfig& config);

/// Executes the configured command. Results go to `out` (or output_path),
/// warnings and diagnostics to `err`. Returns an exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with exit-code mapping, for the executable.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jumpfcs::cli
