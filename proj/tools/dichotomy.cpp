#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dichotomy/cli.hpp"

namespace {

using namespace dichotomy;

struct Flags {
  std::string config;
  std::string model;
  std::optional<int> mesh_m;
  std::optional<int> window;
  std::optional<std::int64_t> seed;
  std::string out;
  std::string csv;
};

RunConfig resolve(const Flags& flags) {
  RunConfig config;
  if (!flags.config.empty()) {
    config = load_config(flags.config);
  } else if (!flags.model.empty()) {
    config.model.name = flags.model;
  } else {
    throw Error(ErrorKind::ParseError, "either --config or --model is required");
  }
  if (!flags.config.empty() && !flags.model.empty()) {
    config.model.name = flags.model;
    config.model.params.clear();
  }
  if (flags.mesh_m) config.mesh.M = *flags.mesh_m;
  if (flags.window) config.window = *flags.window;
  if (flags.seed) config.model.params["seed"] = static_cast<double>(*flags.seed);
  if (!flags.out.empty()) config.outputs.report = flags.out;
  if (!flags.csv.empty()) config.outputs.sweep_csv = flags.csv;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bifurcation certificates for parameter families of difference equations"};
  app.require_subcommand(1);

  Flags flags;
  auto add_run_flags = [&flags](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "RunConfig JSON file");
    cmd->add_option("--model", flags.model, "torus_example, counterexample_A5, random_asymptotic");
    cmd->add_option("--mesh-m", flags.mesh_m, "vertices per parameter loop");
    cmd->add_option("--window", flags.window, "half width M of the window [-M, M]");
    cmd->add_option("--seed", flags.seed, "seed for random_asymptotic");
    cmd->add_option("--out", flags.out, "report path (stdout if omitted)");
    cmd->add_option("--csv", flags.csv, "sweep CSV path");
  };

  std::string matrix;
  auto* spectral = app.add_subcommand("spectral", "stable/unstable splitting of a matrix");
  spectral->add_option("matrix", matrix, "file or inline text such as \"0.5 0; 0 2\"")->required();

  auto* certify = app.add_subcommand("certify", "assumption checks, w1 certificate and sweep");
  add_run_flags(certify);
  auto* sweep = app.add_subcommand("sweep", "sigma_min and kernel dimension at each mesh vertex");
  add_run_flags(sweep);

  std::string suite = "all";
  std::int64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "invariant suites on the random corpus");
  verify->add_option("suite", suite, "index, right_inverse, splice, adjoint, contour or all");
  verify->add_option("--seed", verify_seed, "first seed of the corpus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code::usage;
  }

  if (spectral->parsed()) return cmd_spectral(matrix, std::cout, std::cerr);
  if (verify->parsed()) {
    if (verify_seed < 0) {
      std::cerr << "error: --seed must be non-negative\n";
      return exit_code::usage;
    }
    return cmd_verify(suite, static_cast<std::uint64_t>(verify_seed), std::cout, std::cerr);
  }

  RunConfig config;
  try {
    config = resolve(flags);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::usage;
  }
  if (certify->parsed()) return cmd_certify(config, std::cout, std::cerr);
  return cmd_sweep(config, std::cout, std::cerr);
}
