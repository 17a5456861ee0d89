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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "agrisynth/config.hpp"
#include "agrisynth/dataset.hpp"
#include "agrisynth/segmentation.hpp"
#include "agrisynth/shape_gan.hpp"
#include "agrisynth/split.hpp"
#include "agrisynth/style_gan.hpp"

namespace agrisynth {

/// Resolved pipeline settings. Built from a dotted key-value file; every key
/// is checked against the known set so typos fail before any work starts.
///
/// Required keys: dataset.root, dataset.split_counts, dataset.seed, output.dir.
/// Section seeds (shape_gan.seed, style_gan.seed, composer.seed, eval.seed)
/// default to dataset.seed.
struct PipelineConfig {
  KeyValueConfig resolved;

  std::filesystem::path dataset_root;
  SplitCounts split_counts;
  std::uint64_t dataset_seed = 0;
  int patch_size = kDefaultPatchSize;
  int image_size = 0;  // 0 keeps scene sizes
  Interpolation resize_interpolation = Interpolation::area;
  int blur_kernel = 15;
  double blur_sigma = 0.0;

  ShapeGanConfig shape;
  std::int64_t shape_steps = 0;
  std::uint64_t shape_seed = 0;
  double shape_threshold = 0.0;
  int shape_augment_copies = 0;
  std::int64_t shape_checkpoint_every = 0;
  bool shape_resume = false;

  StyleGanConfig style;
  std::int64_t style_steps = 0;
  std::uint64_t style_seed = 0;
  std::int64_t style_checkpoint_every = 0;
  bool style_resume = false;

  double composer_fraction = 0.5;
  std::uint64_t composer_seed = 0;
  bool composer_feathered = false;

  std::vector<InputChannels> eval_channels;
  std::vector<std::string> eval_variants;
  SegConfig segmentation;
  std::uint64_t eval_seed = 0;

  std::filesystem::path output_dir;
  bool deterministic = true;
  int workers = 1;

  /// Every accepted key with its default; required keys map to "".
  static KeyValueConfig defaults();
  /// Throws ArgumentError / FormatError naming the offending key.
  static PipelineConfig resolve(const KeyValueConfig& user);
};

enum class Command { prepare, train_shape, train_style, compose, augment_baseline, eval, report };

Command parse_command(const std::string& name);
std::string to_string(Command command);

/// Known dataset variant keys: original, synthetic_crop, basic, texture,
/// style, shape_style.
std::string variant_display_name(const std::string& key);

/// Output locations under output.dir.
struct PipelinePaths {
  std::filesystem::path root;
  std::filesystem::path manifest() const { return root / "manifest.txt"; }
  std::filesystem::path dataset(const std::string& variant) const { return root / "datasets" / variant; }
  std::filesystem::path shape_cache() const { return root / "patches" / "shape_patches.pt"; }
  std::filesystem::path style_cache() const { return root / "patches" / "style_pairs.pt"; }
  std::filesystem::path patch_index() const { return root / "patches" / "index.txt"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path shape_loss_csv() const { return root / "logs" / "shape_gan_loss.csv"; }
  std::filesystem::path style_loss_csv() const { return root / "logs" / "style_gan_loss.csv"; }
  std::filesystem::path reports() const { return root / "reports"; }
};

/// Highest-step checkpoint named `<prefix><N>.ckpt` in `dir`, or empty.
std::filesystem::path latest_checkpoint(const std::filesystem::path& dir, const std::string& prefix);

/// Checks that inputs of `command` exist. Throws ArgumentError otherwise.
void check_prerequisites(Command command, const PipelineConfig& config);

/// Runs one command; progress goes to `log`.
void run_command(Command command, const PipelineConfig& config, std::ostream& log);

}  // namespace agrisynth
