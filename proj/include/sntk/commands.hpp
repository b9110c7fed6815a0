#pragma once

#include <string>

#include "sntk/config.hpp"

namespace sntk {

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int io = 1;
inline constexpr int config = 2;
inline constexpr int divergence = 3;
inline constexpr int verdict = 4;
}  // namespace exit_code

int cmd_train(const ExperimentConfig& cfg);
int cmd_sparsity(const ExperimentConfig& cfg);
int cmd_ntk(const ExperimentConfig& cfg);
int cmd_bounds(const ExperimentConfig& cfg);
int cmd_verify(const ExperimentConfig& cfg);
int cmd_bench(const ExperimentConfig& cfg);

/// Dispatch by subcommand name and map exceptions onto the exit-code
/// contract (0 success, 1 I/O, 2 config, 3 divergence, 4 verdict failure).
int run_command(const std::string& name, const ExperimentConfig& cfg);

}  // namespace sntk
