#pragma once

// The property suite behind `verify`: operator algebra, spectral envelope,
// schedule and jump identities, Monte Carlo variance checks, the
// population-minimizer oracles, the surrogate energy bounds and the sampler
// reductions. Each named check returns one or more CheckResult lines.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "multistroke/oracles.hpp"

namespace ms {

struct VerifyOptions {
  std::string filter;         // substring of the check name; empty runs all
  std::uint64_t seed = 2024;  // base seed for every randomized check
  // Test hook: substitutes a stroke operator whose upsampling reads the
  // block one row down. The result is no longer self-adjoint.
  bool inject_fault = false;
};

struct NamedCheck {
  std::string name;
  std::function<std::vector<CheckResult>(const VerifyOptions&)> run;
};

const std::vector<NamedCheck>& verify_checks();

/// Runs every check whose name contains options.filter, printing one line
/// per result to `log` when given.
std::vector<CheckResult> run_verify(const VerifyOptions& options, std::ostream* log = nullptr);

/// The faulty operator used by the fault hook.
ImageTensor misaligned_stroke(const ImageTensor& x, const StrokeOperator& op);

}  // namespace ms
