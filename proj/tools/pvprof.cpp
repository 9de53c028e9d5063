// pvprof command-line front end over the C API.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "pvprof/pvprof.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string models;
  bool verbose = false;
};

int report_failure(pvprof_status s) {
  std::fprintf(stderr, "pvprof: error: %s\n", pvprof_last_error());
  return static_cast<int>(s);
}

int run(const std::string& command, const Options& o) {
  pvprof_set_verbose(o.verbose ? 1 : 0);
  pvprof_config* cfg = nullptr;
  pvprof_status s = pvprof_config_load(o.config.c_str(), &cfg);
  if (s == PVPROF_OK && o.seed_set) s = pvprof_config_set_seed(cfg, o.seed);
  if (s == PVPROF_OK && !o.models.empty()) s = pvprof_config_set_models(cfg, o.models.c_str());
  if (s == PVPROF_OK && !o.out.empty()) s = pvprof_config_set_output(cfg, o.out.c_str());
  if (s == PVPROF_OK) {
    if (command == "synth")
      s = pvprof_cmd_synth(cfg);
    else if (command == "fit")
      s = pvprof_cmd_fit(cfg);
    else if (command == "predict")
      s = pvprof_cmd_predict(cfg);
    else if (command == "benchmark")
      s = pvprof_cmd_benchmark(cfg);
    else
      s = pvprof_cmd_report(cfg);
  }
  pvprof_config_free(cfg);
  return s == PVPROF_OK ? 0 : report_failure(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PV power forecasting with periodically refitted single-diode models"};
  app.set_version_flag("--version", pvprof_version());
  app.require_subcommand(1);

  Options o;
  const char* commands[][2] = {{"synth", "Generate a synthetic telemetry dataset with ground truth"},
                               {"fit", "Rolling single-diode parameter fits over telemetry"},
                               {"predict", "Forecast power from fitted parameters and weather"},
                               {"benchmark", "Day-ahead benchmark of the configured models"},
                               {"report", "Render SVG charts from a benchmark report"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Output directory (overrides data.output)");
    sub->add_option("--seed", o.seed, "Random seed (overrides seed)")->each([&o](const std::string&) { o.seed_set = true; });
    sub->add_option("--models", o.models, "Comma-separated model roster");
    sub->add_flag("--verbose", o.verbose, "Progress messages on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(app.get_subcommands().front()->get_name(), o);
}
