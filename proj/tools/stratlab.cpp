#include <CLI11.hpp>

#include <iostream>

#include "stratlab/core/error.hpp"
#include "stratlab/harness/config.hpp"
#include "stratlab/harness/experiments.hpp"

using namespace stratlab;

int main(int argc, char** argv) {
  CLI::App app{"Two-layer and stratified hydrostatic flow experiments"};
  app.require_subcommand(1, 1);

  std::string config_path, out;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  bool plots = false;
  for (const auto& id : harness::experiment_ids()) {
    CLI::App* sub = app.add_subcommand(id);
    sub->add_option("--config", config_path, "JSON configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "seed for randomised suites");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--plots", plots, "also write SVG plots");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string id = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();

  try {
    harness::ExperimentConfig c;
    if (!config_path.empty()) {
      c = harness::load_config(config_path);
    } else {
      c = harness::parse_config(nlohmann::json{{"schema", harness::kConfigSchema}});
    }
    if (!c.experiment.empty() && c.experiment != id) {
      throw ConfigError("config.experiment is '" + c.experiment + "' but the subcommand is '" + id + "'");
    }
    c.experiment = id;
    if (sub->count("--out")) c.output = out;
    if (sub->count("--seed")) c.seed = seed;
    if (sub->count("--threads")) c.threads = threads;
    if (plots) c.plots = true;

    const harness::ExperimentResult r = harness::run_experiment(c);
    if (id == "classify") {
      std::cout << r.details.dump(2) << '\n';
    } else {
      std::cout << id << ": " << harness::to_string(r.outcome) << " - " << r.detail << '\n';
      for (const auto& f : r.files) std::cout << "  " << f << '\n';
    }
    return r.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const BlowUpError& e) {
    std::cerr << "inconclusive: " << e.what() << " (t = " << e.time() << ")\n";
    return 3;
  }
}
