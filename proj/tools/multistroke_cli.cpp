#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "multistroke/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"multistroke: stroke-controlled diffusion toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config, out;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config, "key=value run configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (must not exist)");
  app.add_option("--seed", seed, "override the configured seed");

  auto* verify = app.add_subcommand("verify", "run the property and oracle suite");
  std::string filter;
  bool fault = false;
  verify->add_option("--filter", filter, "only run checks whose name contains this substring");
  verify->add_flag("--inject-fault", fault)->group("");  // test hook, undocumented
  auto* train = app.add_subcommand("train", "train a denoiser (ddpm or multistroke loss)");
  auto* sample = app.add_subcommand("sample", "draw samples from a checkpoint for each step budget");
  auto* simulate = app.add_subcommand("simulate", "simulate the affine surrogate and check the energy bounds");
  auto* audit = app.add_subcommand("audit", "band SNR and one-class scores for sample sets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ms::kExitUsage;
  }

  ms::CommandOptions opts;
  if (!config.empty()) opts.config = config;
  opts.out = out;
  opts.seed = seed;
  opts.filter = filter;
  opts.inject_fault = fault;

  if (*verify) return ms::cmd_verify(opts, std::cout, std::cerr);
  if (*train) return ms::cmd_train(opts, std::cout, std::cerr);
  if (*sample) return ms::cmd_sample(opts, std::cout, std::cerr);
  if (*simulate) return ms::cmd_simulate(opts, std::cout, std::cerr);
  if (*audit) return ms::cmd_audit(opts, std::cout, std::cerr);
  return ms::kExitUsage;
}
