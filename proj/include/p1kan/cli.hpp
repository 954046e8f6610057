#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "p1kan/trainer.hpp"

namespace p1kan {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int io = 2;
inline constexpr int diverged = 3;
}  // namespace exit_code

enum class Command { train, sweep_mlp, dump_grid };

struct CliRequest {
  Command command = Command::train;
  ExperimentConfig config;
  std::size_t grid_points = 201;
  std::optional<std::string> help_text;  // set when --help was requested
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// args[0] is the program name. Throws UsageError (message includes usage).
CliRequest parse_cli(const std::vector<std::string>& args);

// x1,x2,f over an n x n grid of [0,1]^2, x1 varying slowest.
std::string format_grid_csv(TargetKind function, std::size_t n);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace p1kan
