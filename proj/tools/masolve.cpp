#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "masolve/cli.hpp"
#include "masolve/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monotone convex-envelope solver for Monge-Ampere type Dirichlet problems"};
  std::string command;
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("command", command, "solve, solve-weak, study or verify")
      ->required()
      ->check(CLI::IsMember({"solve", "solve-weak", "study", "verify"}));
  app.add_option("--config,-c", config, "JSON problem configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out,-o", out, "output directory");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--threads", threads, "worker threads (default: MASOLVE_THREADS or 1)")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : masolve::cli::kBadConfig;
  }
  if (threads == 0) {
    if (const char* env = std::getenv("MASOLVE_THREADS")) threads = std::atoi(env);
  }
  masolve::set_num_threads(threads > 0 ? threads : 1);
  return masolve::cli::run(command, config, out, seed, std::cerr);
}
