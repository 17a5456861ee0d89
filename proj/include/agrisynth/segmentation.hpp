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
#include <map>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/torch.h>

#include "agrisynth/config.hpp"
#include "agrisynth/dataset.hpp"
#include "agrisynth/split.hpp"

namespace agrisynth {

/// C×C pixel counts, rows = ground truth, columns = prediction.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(int num_classes = kNumSceneClasses);

  /// Masks must be CV_8UC1 of equal size with values < C.
  void update(const cv::Mat& gt, const cv::Mat& pred);
  void merge(const ConfusionAccumulator& other);

  int num_classes() const { return num_classes_; }
  std::int64_t at(int gt, int pred) const { return counts_[gt * num_classes_ + pred]; }
  std::int64_t total() const;
  const std::vector<std::int64_t>& counts() const { return counts_; }
  bool operator==(const ConfusionAccumulator&) const = default;

 private:
  int num_classes_;
  std::vector<std::int64_t> counts_;
};

enum class InputChannels { rgb, rgb_nir };

InputChannels parse_input_channels(const std::string& name);
std::string to_string(InputChannels channels);
int input_arity(InputChannels channels);

struct IoUReport {
  /// Classes whose union is empty are absent.
  std::map<int, double> per_class;
  double miou = 0.0;
  std::string variant;
  InputChannels channels = InputChannels::rgb;
  int num_classes = kNumSceneClasses;
};

/// Throws ArgumentError when nothing has been accumulated.
IoUReport iou_from_confusion(const ConfusionAccumulator& acc);

/// Normalized network input [3 or 4, H, W] for a scene.
torch::Tensor scene_input(const MultispectralScene& scene, InputChannels channels);

/// U-shaped encoder-decoder: four pooling stages down, four transposed
/// convolutions up, skip connections at every level. Inputs are zero padded to
/// a multiple of 16 and the logits cropped back.
class SegNetImpl : public torch::nn::Module {
 public:
  SegNetImpl(int in_channels, int num_classes, int base_channels);
  torch::Tensor forward(const torch::Tensor& x);
  int in_channels() const { return in_channels_; }

 private:
  int in_channels_;
  std::vector<torch::nn::Sequential> down_;
  std::vector<torch::nn::ConvTranspose2d> up_;
  std::vector<torch::nn::Sequential> merge_;
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(SegNet);

struct SegConfig {
  int num_classes = kNumSceneClasses;
  int base_channels = 16;
  int epochs = 50;
  int batch_size = 4;  // scenes per optimizer step (gradient accumulation)
  double learning_rate = 1e-3;
  int patience = 10;  // epochs without validation improvement
  bool class_weighting = true;
  double max_class_weight = 10.0;

  void validate() const;
  KeyValueConfig to_kv() const;
  static SegConfig from_kv(const KeyValueConfig& kv);
};

struct SegModel {
  SegConfig config;
  InputChannels channels = InputChannels::rgb;
  SegNet net{nullptr};
  std::uint64_t seed = 0;
  int epochs_trained = 0;
  double best_val_miou = -1.0;

  static SegModel initialize(const SegConfig& config, InputChannels channels, std::uint64_t seed);
};

struct SegEpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_miou = 0.0;
};

struct SegTrainingResult {
  SegModel model;
  std::vector<SegEpochRecord> history;
};

/// Per-pixel weighted cross-entropy; the returned model holds the weights of
/// the best validation epoch (the last epoch when there is no validation split).
SegTrainingResult train_segmentation(const SplitManifest& manifest,
                                     const std::filesystem::path& root, InputChannels channels,
                                     const SegConfig& config, std::uint64_t seed);

/// Inverse pixel frequency per class, scaled so the most frequent class gets 1
/// and clipped at `max_weight`; absent classes get `max_weight`.
std::vector<double> class_weights(const std::vector<std::int64_t>& pixel_counts, double max_weight);

cv::Mat predict(SegModel& model, const MultispectralScene& scene);

/// Throws ArgumentError when `channels` differs from the model's input head
/// or `scene_ids` is empty.
IoUReport evaluate(SegModel& model, const std::vector<std::string>& scene_ids,
                   const std::filesystem::path& root, InputChannels channels);

void save_segmentation(const SegModel& model, const std::filesystem::path& path);
SegModel load_segmentation(const std::filesystem::path& path);

struct StrategyVariant {
  std::string name;
  SplitManifest manifest;
  std::filesystem::path root;
};

/// Trains one model per variant with the same config and seed and evaluates
/// all of them on the first variant's test split. Failures are rethrown with
/// the variant name prefixed. Checkpoints go to `checkpoint_dir` when set.
std::vector<IoUReport> compare_strategies(const std::vector<StrategyVariant>& variants,
                                          InputChannels channels, const SegConfig& config,
                                          std::uint64_t seed,
                                          const std::filesystem::path& checkpoint_dir = {});

/// Aligned text table: Augmentation Strategy | mIoU | Crop | Weed.
std::string format_comparison_table(const std::vector<IoUReport>& reports);
/// `variant,miou,iou_soil,iou_crop,iou_weed`; absent classes are empty fields.
std::string format_comparison_csv(const std::vector<IoUReport>& reports);

}  // namespace agrisynth
