#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nlsn/cli.hpp"
#include "nlsn/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Normalized ground states of linearly coupled Schrodinger systems"};
  std::string config_path;
  std::string output_path;
  unsigned jobs = 1;
  std::int64_t seed = -1;
  bool show_defaults = false;
  app.add_option("--config", config_path, "run description (key = value lines)");
  app.add_option("--jobs", jobs, "worker threads for sweeps (0 = all cores)");
  app.add_option("--seed", seed, "seed of the initial state; overrides the config")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--show-defaults", show_defaults, "print every accepted key with its default");
  app.add_option("--output", output_path, "output file; overrides the config path");
  CLI11_PARSE(app, argc, argv);

  if (show_defaults) {
    std::cout << nlsn::cli::defaults_table();
    return nlsn::cli::kExitSuccess;
  }
  if (config_path.empty()) {
    std::cerr << "error: --config is required\n" << app.help();
    return nlsn::cli::kExitError;
  }
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << config_path << '\n';
    return nlsn::cli::kExitError;
  }
  std::ostringstream text;
  text << in.rdbuf();

  nlsn::cli::RunConfig config;
  try {
    config = nlsn::cli::parse_config(text.str());
  } catch (const nlsn::Error& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return nlsn::cli::kExitError;
  }
  if (seed >= 0) {
    config.seed = static_cast<std::uint64_t>(seed);
    config.solver.seed = config.seed;
  }
  if (!output_path.empty()) config.path = output_path;
  return nlsn::cli::run(config, jobs);
}
