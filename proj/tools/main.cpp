// Copyright 2026 The mbhqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "mbhqc/errors.hpp"

namespace {

using Driver = std::function<nlohmann::json(const nlohmann::json&, const mbhqc::cli::RunOptions&)>;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measurement-based holonomic quantum computation experiments"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Driver>> commands = {
      {"discrete-sweep", {"no-fault probability vs rotation increment (fig4.csv)", mbhqc::cli::discrete_sweep}},
      {"continuous-sweep", {"jump probability vs omega/kappa (fig5.csv)", mbhqc::cli::continuous_sweep}},
      {"detector-calib", {"CUSUM detector calibration and trace", mbhqc::cli::detector_calib}},
      {"qec-report", {"error-correction conditions for the builtin codes", mbhqc::cli::qec_report}},
      {"fokker-planck", {"stationary density and SDE comparison", mbhqc::cli::fokker_planck}},
      {"single-run", {"one discrete or continuous trajectory", mbhqc::cli::single_run}},
  };

  Flags flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", flags.config, "JSON config file")->required();
    sub->add_option("--seed", flags.seed, "master seed (overrides the config)");
    sub->add_option("--out", flags.out, "output directory (default: config \"out\" or .)");
    sub->add_option("--threads", flags.threads, "worker threads, 0 = hardware concurrency");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      const auto config = mbhqc::cli::load_config(flags.config);
      mbhqc::cli::RunOptions options;
      options.seed = flags.seed;
      if (flags.out) {
        options.out = *flags.out;
      } else if (config.contains("out")) {
        options.out = config["out"].get<std::string>();
      }
      if (flags.threads) {
        options.threads = *flags.threads;
      } else if (config.contains("threads")) {
        options.threads = config["threads"].get<unsigned>();
      }
      commands.at(name).second(config, options);
      std::cout << name << ": wrote " << options.out.string() << "\n";
      return 0;
    } catch (const mbhqc::cli::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const mbhqc::NumericalFailure& e) {
      std::cerr << "numerical failure: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
