// Copyright 2026 The dpboost Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for experiment sweeps, the threshold toy, the
// sensitivity sweep and plotting.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dpboost/dpboost.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kPartial = 2;

int finish_sweep(const dpboost::ExperimentConfig& cfg,
                 const std::vector<dpboost::ResultRecord>& records) {
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (!r.ok()) {
      ++failed;
      std::cerr << "cell " << dpboost::to_string(r.algorithm) << " eps="
                << (r.epsilon ? dpboost::format_double(*r.epsilon) : "-") << " repeat=" << r.repeat
                << " failed: " << r.error << '\n';
    }
  }
  if (failed == records.size()) {
    std::cerr << "error: every cell failed\n";
    return kFatal;
  }
  dpboost::write_outputs(cfg, records);
  std::ifstream summary(std::filesystem::path(cfg.output_dir) / "summary.csv");
  std::cout << summary.rdbuf();
  return failed ? kPartial : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private boosting with random classifiers"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "Worker threads (default: DPBOOST_WORKERS or all cores)");

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run an experiment sweep from a JSON config");
  run->add_option("--config", run_config, "Experiment config")->required();

  std::string toy_config, toy_out = "toy_out";
  auto* toy = app.add_subcommand("toy", "Run the one-dimensional threshold toy sweep");
  toy->add_option("--config", toy_config, "Toy config")->required();
  toy->add_option("--out", toy_out, "Output directory");

  std::string base_config, base_algo;
  auto* baseline = app.add_subcommand("baseline", "Run one baseline over an experiment config");
  baseline->add_option("--algo", base_algo, "logreg | dp-logreg | pate | public-only")->required();
  baseline->add_option("--config", base_config, "Experiment config")->required();

  std::uint64_t sens_seed = 1;
  int sens_instances = 20;
  auto* sens = app.add_subcommand("sensitivity-check",
                                  "Brute-force the weighted-error sensitivity on small instances");
  sens->add_option("--seed", sens_seed, "Seed for the random instances");
  sens->add_option("--instances", sens_instances, "Instances per (n, k, c) cell");

  std::string plot_in, plot_out;
  auto* plot = app.add_subcommand("plot", "Render a summary CSV as an SVG chart");
  plot->add_option("--in", plot_in, "Summary CSV")->required();
  plot->add_option("--out", plot_out, "Output SVG")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = dpboost::load_experiment_config(run_config);
      return finish_sweep(cfg, dpboost::run_experiment(cfg, workers));
    }
    if (*baseline) {
      auto cfg = dpboost::load_experiment_config(base_config);
      const auto algo = dpboost::parse_algorithm(base_algo);
      if (dpboost::is_boosting(algo)) throw dpboost::Error("baseline: use 'run' for boosting");
      cfg.algorithms = {algo};
      cfg.output_dir = (std::filesystem::path(cfg.output_dir) / base_algo).string();
      return finish_sweep(cfg, dpboost::run_experiment(cfg, workers));
    }
    if (*toy) {
      std::ifstream in(toy_config);
      if (!in) throw dpboost::Error("cannot open config '" + toy_config + "'");
      nlohmann::json j;
      in >> j;
      std::vector<double> eps;
      const auto cfg = dpboost::toy_config_from_json(j, &eps);
      const auto report = dpboost::run_toy_sweep(cfg, eps);
      std::filesystem::create_directories(toy_out);
      std::ofstream csv(std::filesystem::path(toy_out) / "toy.csv", std::ios::binary);
      dpboost::write_toy_csv(report, csv);
      std::ofstream js(std::filesystem::path(toy_out) / "toy_traces.json", std::ios::binary);
      js << dpboost::toy_traces_json(report).dump() << '\n';
      for (std::size_t e = 0; e < eps.size(); ++e) {
        auto acc = report.accuracies(eps[e]);
        std::sort(acc.begin(), acc.end());
        std::cout << "epsilon=" << eps[e] << " rule_of_thumb=" << report.rule_of_thumb[e]
                  << " median_accuracy=" << acc[acc.size() / 2] << '\n';
      }
      return kOk;
    }
    if (*sens) {
      const auto rep = dpboost::run_sensitivity_grid(sens_seed, sens_instances);
      std::cout << "instances=" << rep.instances << " violations=" << rep.violations
                << " max_ratio=" << rep.max_ratio << '\n';
      return rep.violations == 0 ? kOk : kFatal;
    }
    if (*plot) {
      dpboost::emit_svg(dpboost::read_summary_csv(plot_in), plot_out);
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFatal;
  }
  return kFatal;
}
