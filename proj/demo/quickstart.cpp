// Library walk-through: simulate the paper-shape scenario, train on its
// Normal traffic, run closed-loop detection and score the window flags.

#include <iostream>

#include "mibwatch/mibwatch.hpp"

int main() {
  using namespace mibwatch;

  const auto scenario = paper_shape_scenario();
  const auto deltas = gen_scenario(scenario);
  std::cout << "simulated " << deltas.size() << " intervals\n";

  auto [net, summary] = train_on_normal(deltas, Variable::IfInOctets, LagConfig{}, TrainConfig{}, 0.7);
  print_error_table(std::cout, summary);
  std::cout << "residual std " << net.residual_std.value_or(0.0) << "\n\n";

  WindowConfig cfg;
  cfg.sigma_floor = net.residual_std.value_or(cfg.sigma_floor);
  const auto run = run_detection(net, deltas, cfg);

  std::vector<FlagRow> flags;
  for (const auto& w : run.result.windows) flags.push_back({w.window_index, w.start_timestamp, w.end_timestamp, w.flag});
  print_evaluation(std::cout, evaluate_flags(flags, deltas));
}
