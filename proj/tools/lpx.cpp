// Copyright 2026 The lpx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// lpx <generate|train|explain|evaluate|report> [--config PATH] [--seed N] [--out DIR]

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lpx/error.hpp"
#include "lpx/pipeline.hpp"
#include "lpx/version.hpp"

namespace {

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-prediction explainer evaluation pipeline", "lpx"};
  app.set_version_flag("--version", std::string(lpx::kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  const std::map<std::string, std::pair<std::string, std::function<void(const lpx::RunConfig&)>>> commands = {
      {"generate", {"Generate or load a dataset and its train/test split", lpx::run_generate}},
      {"train", {"Train the link predictor on the dataset", lpx::run_train}},
      {"explain", {"Explain every evaluable test edge", lpx::run_explain}},
      {"evaluate", {"Score attributions with the configured protocol", lpx::run_evaluate}},
      {"report", {"Write the summary table and SVG plots", lpx::run_report}},
  };
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Global seed (overrides the config)");
    sub->add_option("--out", out, "Output directory (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    lpx::Json j = config_path.empty() ? lpx::Json::object() : lpx::read_json_file(config_path);
    if (!j.is_object()) throw lpx::InvalidArgument("config: expected a JSON object in " + config_path);
    if (seed) j["seed"] = *seed;
    if (out) j["out_dir"] = *out;
    const lpx::RunConfig cfg = lpx::parse_run_config(j);
    const std::string name = app.get_subcommands().front()->get_name();
    commands.at(name).second(cfg);
  } catch (const std::exception& e) {
    std::cerr << "lpx: error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
