// mibwatch: simulate, train, detect and evaluate from the command line.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mibwatch/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace mibwatch;

  CLI::App app{"Network anomaly detection from SNMP interface counters"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::optional<std::string> manifest;
  app.add_option("--seed", seed, "Seed for simulation or weight initialization");
  app.add_flag("-q,--quiet", quiet, "Suppress reports on stdout");
  app.add_option("--manifest", manifest, "Write a JSON run manifest to this path");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a labeled cumulative-counter dataset");
  simulate->add_option("--preset", sim.preset, "Bundled scenario: paper-shape or smoke");
  simulate->add_option("--config", sim.config_path, "Scenario file");
  simulate->add_option("-o,--out", sim.out_path, "Output CSV")->required();

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "Train the NNARX predictor on Normal traffic");
  train->add_option("data", tr.data_path, "Dataset CSV")->required();
  train->add_option("-o,--model", tr.model_out, "Output model file")->required();
  train->add_option("--target", tr.target, "Variable to predict")->capture_default_str();
  train->add_option("--na", tr.na, "Autoregressive lags")->capture_default_str();
  train->add_option("--nb", tr.nb, "Exogenous lags")->capture_default_str();
  train->add_option("--nk", tr.nk, "Exogenous input delay")->capture_default_str();
  train->add_option("--exogenous", tr.exogenous, "Exogenous variable (required when nb > 0)");
  train->add_option("--iterations", tr.iterations, "Training epochs")->capture_default_str();
  train->add_option("--learning-rate", tr.learning_rate, "Gradient step")->capture_default_str();
  train->add_option("--momentum", tr.momentum, "Momentum in [0, 1)")->capture_default_str();
  train->add_option("--init-scale", tr.init_scale, "Initial weight range")->capture_default_str();
  train->add_option("--split", tr.split, "Chronological training fraction")->capture_default_str();
  train->add_option("--hidden", tr.hidden, "Hidden units")->capture_default_str();

  DetectOptions det;
  auto* detect = app.add_subcommand("detect", "Predict, chart residuals and flag windows");
  detect->add_option("data", det.data_path, "Dataset CSV")->required();
  detect->add_option("-m,--model", det.model_path, "Model file")->required();
  detect->add_option("--alarms", det.alarms_out, "Alarm CSV output")->required();
  detect->add_option("--flags", det.flags_out, "Per-window flag CSV output")->required();
  detect->add_option("--residuals", det.residuals_out, "Optional residual CSV output");
  detect->add_option("--k", det.k, "Control limit width in standard deviations")->capture_default_str();
  detect->add_option("--window-size", det.window_size, "Samples per window")->capture_default_str();
  detect->add_option("--baseline-update", det.baseline_update, "always or clean-only")->capture_default_str();
  detect->add_option("--sigma-floor", det.sigma_floor, "'model' or a number")->capture_default_str();
  bool open_loop = false;
  detect->add_flag("--open-loop", open_loop, "Always feed observations back into the predictor");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score window flags against dataset labels");
  evaluate->add_option("flags", ev.flags_path, "Per-window flag CSV")->required();
  evaluate->add_option("data", ev.data_path, "Labeled dataset CSV")->required();
  evaluate->add_option("--csv", ev.csv_out, "Write the metrics as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  RunContext ctx;
  ctx.seed = seed;
  ctx.quiet = quiet;
  ctx.manifest_path = manifest;
  ctx.argv.assign(argv, argv + argc);
  ctx.out = &std::cout;
  ctx.err = &std::cerr;

  if (*simulate) return cmd_simulate(sim, ctx);
  if (*train) return cmd_train(tr, ctx);
  if (*detect) {
    det.feedback = !open_loop;
    return cmd_detect(det, ctx);
  }
  return cmd_evaluate(ev, ctx);
}
