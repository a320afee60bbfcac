#pragma once

// Implementations of the CLI commands. Each returns a process exit code and
// writes human-readable progress to `out` and one-line errors to `err`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace ms {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::string filter;         // verify only
  bool inject_fault = false;  // verify only, hidden
};

int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_train(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sample(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_audit(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// "steps_010" style tag for a sampling budget.
std::string step_tag(std::size_t num_steps);

}  // namespace ms
