// flashsim: run experiments from JSON configs and verification suites.
//
// Exit codes: 0 success, 1 configuration error or failed checks,
// 2 numerical failure (a diagnostic file is written).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "app/config.hpp"
#include "app/experiments.hpp"
#include "app/output.hpp"
#include "app/verify.hpp"
#include "flashsim/hilbert.hpp"
#include "flashsim/parallel.hpp"

namespace fs = std::filesystem;
using namespace flashsim;

namespace {

int numerical_failure(const fs::path& dir, const std::string& context, const std::exception& e) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path file = dir / "diagnostic.txt";
  std::ofstream out(file);
  out << "context: " << context << "\nerror: " << e.what() << '\n';
  std::cerr << "numerical failure: " << e.what() << "\ndiagnostic written to " << file.string() << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Flash-ontology collapse simulations and checks"};
  cli.require_subcommand(1);
  cli.fallthrough();
  std::optional<unsigned> threads;
  cli.add_option("--threads", threads, "worker threads (default: FLASHSIM_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);

  auto* run = cli.add_subcommand("run", "run the experiment named in a config file");
  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  run->add_option("config", config_path, "JSON config")->required();
  run->add_option("-o,--output", out_dir, "output directory");
  run->add_option("--seed", seed, "master seed (overrides the config)");

  auto* verify = cli.add_subcommand("verify", "run verification suites");
  std::vector<std::string> suites;
  double scale = 1.0;
  std::string verify_dir = ".";
  verify->add_option("--suite", suites, "suite name (repeatable; default: all)")
      ->check(CLI::IsMember(app::suite_names()));
  verify->add_option("--tolerance-scale", scale, "multiplies error tolerances")->check(CLI::PositiveNumber);
  verify->add_option("-o,--output", verify_dir, "where a diagnostic file goes on numerical failure");

  cli.add_subcommand("list-experiments", "list experiment names");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 1;
  }
  const unsigned workers = resolve_threads(threads);

  if (cli.got_subcommand("list-experiments")) {
    for (const auto& e : app::experiments()) std::cout << e.name << "  (" << e.model << ")  " << e.description << '\n';
    return 0;
  }

  if (cli.got_subcommand("run")) {
    app::Config config;
    try {
      config = app::load_config(config_path);
      if (seed) config.seed = *seed;
      const app::RunResult r = app::run_experiment(config, workers);
      app::FigureStyle style;
      style.title = r.title;
      app::write_run(out_dir, r.flashes, r.space_dim, r.summary, style);
      std::cout << "wrote " << r.flashes.size() << " flashes to " << out_dir << '\n';
      return 0;
    } catch (const app::ConfigError& e) {
      std::cerr << "config error in " << e.what() << '\n';
      return 1;
    } catch (const NumericalError& e) {
      return numerical_failure(out_dir, "run " + config_path, e);
    } catch (const std::exception& e) {
      // invariant and dimension violations from a valid config are failures
      // of the computation, not of the input
      return numerical_failure(out_dir, "run " + config_path, e);
    }
  }

  if (suites.empty()) suites = app::suite_names();
  bool ok = true;
  for (const auto& s : suites) {
    try {
      const auto checks = app::run_suite(s, {workers, scale});
      app::print_checks(std::cout, checks);
      for (const auto& c : checks) ok = ok && c.passed;
    } catch (const std::exception& e) {
      return numerical_failure(verify_dir, "verify " + s, e);
    }
  }
  std::cout << (ok ? "all checks passed" : "some checks failed") << '\n';
  return ok ? 0 : 1;
}
