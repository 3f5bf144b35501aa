#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "synprime/error.hpp"
#include "synprime/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural priming experiments on neural and count-based language models"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  bool fresh = false;

  app.add_option("-c,--config", config_path, "JSON config file (defaults are used when omitted)");
  app.add_option("-o,--output-dir", output_dir, "Output directory (overrides config and SYNPRIME_OUTPUT_DIR)");
  app.add_option("-j,--workers", workers, "Worker threads for the grid (overrides config and SYNPRIME_WORKERS)");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--backend", backend, "Language model backend")->check(CLI::IsMember({"lstm", "kgram"}));

  auto* gen = app.add_subcommand("gen", "Generate experimental lists, training corpus and agreement pairs");
  auto* train = app.add_subcommand("train", "Train one model per grid point and slice, plus baselines");
  auto* run = app.add_subcommand("run", "Adapt every model on every list and record surprisals");
  run->add_flag("--fresh", fresh, "Ignore an existing records file instead of resuming");
  auto* analyze = app.add_subcommand("analyze", "Adaptation effects, matrices, distances and statistics");
  auto* report = app.add_subcommand("report", "Render SVG heatmaps, dendrogram and a text summary");
  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (selftest->parsed()) return synprime::cmd_selftest(std::cout) ? kOk : kNumerical;

    synprime::RunConfig config =
        config_path.empty() ? synprime::RunConfig{} : synprime::load_config(config_path);
    synprime::apply_environment(config);
    if (output_dir) config.output_dir = *output_dir;
    if (workers) config.workers = *workers;
    if (seed) config.seed = *seed;
    if (backend) config.backend = *backend;
    config.validate();

    if (gen->parsed()) synprime::cmd_gen(config, std::cout);
    if (train->parsed()) synprime::cmd_train(config, std::cout);
    if (run->parsed()) synprime::cmd_run(config, std::cout, fresh);
    if (analyze->parsed()) synprime::cmd_analyze(config, std::cout);
    if (report->parsed()) synprime::cmd_report(config, std::cout);
  } catch (const synprime::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const synprime::NumericalError& e) {
    std::cerr << "numerical check failed: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
