#include <CLI11.hpp>

#include "fracreg/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = fracreg::cli;
  CLI::App app{"Dirichlet problems for the fractional p-Laplacian and boundary-regularity diagnostics"};
  app.set_version_flag("--version", std::string(fracreg::kVersion));
  cli::Arguments args;
  std::uint64_t seed = 0xF5AC;
  app.add_option("command", args.command, "solve | torsion | obstacle | barrier | diagnose | verify")
      ->required()
      ->check(CLI::IsMember(cli::commands()));
  app.add_option("--config", args.config, "TOML run configuration")->required();
  app.add_option("--out", args.out, "output directory (default: [run] out, else ./out)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized campaigns (default 0xF5AC)");
  app.add_option("--refine", args.refine, "halve the grid spacing k times")->check(CLI::Range(0, 6));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kConfigError;
  }
  if (*seed_opt) args.seed = seed;
  return cli::run(args);
}
