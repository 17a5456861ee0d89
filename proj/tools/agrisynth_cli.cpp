// Copyright 2026 The AgriSynth Authors. All Rights Reserved.
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

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agrisynth/config.hpp"
#include "agrisynth/pipeline.hpp"
#include "agrisynth/toy_data.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommandOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  bool emit_config = false;
};

int run_pipeline_command(agrisynth::Command command, const CommandOptions& opts) {
  agrisynth::PipelineConfig config;
  try {
    agrisynth::KeyValueConfig user = agrisynth::KeyValueConfig::load(opts.config_path);
    for (const auto& assignment : opts.overrides) user.set_assignment(assignment);
    config = agrisynth::PipelineConfig::resolve(user);
    if (opts.emit_config) {
      std::cout << config.resolved.dump();
      return 0;
    }
    agrisynth::check_prerequisites(command, config);
  } catch (const std::exception& e) {
    std::cerr << "agrisynth " << agrisynth::to_string(command) << ": invalid configuration: " << e.what()
              << "\n";
    return kExitValidation;
  }
  try {
    agrisynth::run_command(command, config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "agrisynth " << agrisynth::to_string(command) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape-and-style data augmentation for crop/weed segmentation"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"prepare", "split the dataset and cache training patches"},
      {"train-shape", "train the crop silhouette GAN"},
      {"train-style", "train the mask-conditioned texture GAN"},
      {"compose", "build semi-artificial datasets"},
      {"augment-baseline", "build basic and texture augmented datasets"},
      {"eval", "train segmentation models per variant and write the comparison table"},
      {"report", "print the last comparison table"},
  };
  std::vector<CommandOptions> options(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, commands[i].second);
    sub->add_option("-c,--config", options[i].config_path, "pipeline configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--set", options[i].overrides, "override a key, e.g. --set shape_gan.steps=10");
    sub->add_flag("--emit-config", options[i].emit_config, "print the resolved configuration and exit");
    subs.push_back(sub);
  }

  std::string toy_out;
  int toy_count = 20;
  std::int64_t toy_seed = 0;
  agrisynth::ToySceneOptions toy_options;
  CLI::App* toy = app.add_subcommand("toy-data", "write a procedural toy dataset");
  toy->add_option("-o,--out", toy_out, "dataset root to create")->required();
  toy->add_option("-n,--count", toy_count, "number of scenes")->check(CLI::PositiveNumber);
  toy->add_option("-s,--seed", toy_seed, "generator seed")->check(CLI::NonNegativeNumber);
  toy->add_option("--rows", toy_options.rows, "scene height");
  toy->add_option("--cols", toy_options.cols, "scene width");
  toy->add_option("--anchor-window", toy_options.anchor_window,
                  "window size the first crop of each scene is centred in");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  if (toy->parsed()) {
    try {
      const auto ids = agrisynth::write_toy_dataset(toy_out, toy_count, static_cast<std::uint64_t>(toy_seed),
                                                    toy_options);
      std::cout << "toy-data: wrote " << ids.size() << " scenes to " << toy_out << "\n";
    } catch (const std::invalid_argument& e) {
      std::cerr << "agrisynth toy-data: " << e.what() << "\n";
      return kExitValidation;
    } catch (const std::exception& e) {
      std::cerr << "agrisynth toy-data: " << e.what() << "\n";
      return kExitRuntime;
    }
    return 0;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) {
      return run_pipeline_command(agrisynth::parse_command(commands[i].first), options[i]);
    }
  }
  return kExitValidation;
}
