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
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/torch.h>

#include "agrisynth/config.hpp"

namespace agrisynth {

/// Unconditional DCGAN for crop silhouettes.
///
/// The generator maps a latent vector through a dense layer to a
/// base_resolution² feature map, then doubles the resolution with
/// upsample → 3×3 conv → batch norm → ReLU blocks until target_resolution is
/// reached, and finishes with two 3×3 convs and tanh. The discriminator adds
/// Gaussian instance noise to its input, applies a stride-2 conv, then
/// repeats conv → LeakyReLU → dropout → batch norm down to 4×4 before a dense
/// sigmoid head.
struct ShapeGanConfig {
  int latent_size = 100;
  int base_resolution = 4;
  int target_resolution = 256;
  /// 0 = derive from the resolutions; a non-zero value must agree.
  int up_blocks = 0;
  int down_blocks = 0;
  int generator_channels = 512;  // at base_resolution, halved per up block
  int min_generator_channels = 16;
  int discriminator_channels = 16;  // after the input conv, doubled per down block
  int max_discriminator_channels = 512;
  double input_noise_sigma = 0.1;
  double dropout_rate = 0.25;
  double leaky_slope = 0.2;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch_size = 16;

  /// Throws ArgumentError unless base·2^up == target and the discriminator
  /// reaches 4×4 after its input conv and down_blocks halvings.
  void validate() const;
  int derived_up_blocks() const;
  int derived_down_blocks() const;

  KeyValueConfig to_kv() const;
  /// Unset keys keep their defaults.
  static ShapeGanConfig from_kv(const KeyValueConfig& kv);
};

class ShapeGeneratorImpl : public torch::nn::Module {
 public:
  explicit ShapeGeneratorImpl(const ShapeGanConfig& config);

  /// z: [latent] or [N, latent] -> [N, 1, R, R] in [-1, 1].
  torch::Tensor forward(const torch::Tensor& z);

  const ShapeGanConfig& config() const { return config_; }

 private:
  ShapeGanConfig config_;
  int base_channels_;
  torch::nn::Linear dense_{nullptr};
  torch::nn::BatchNorm2d input_norm_{nullptr};
  torch::nn::Sequential blocks_{nullptr};
  torch::nn::Sequential head_{nullptr};
};
TORCH_MODULE(ShapeGenerator);

class ShapeDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit ShapeDiscriminatorImpl(const ShapeGanConfig& config);

  /// x: [N, 1, R, R] (or [R, R]) -> pre-sigmoid logits [N, 1]. Noise and
  /// dropout draw from the module's private generator; dropout is active
  /// only in training mode.
  torch::Tensor logits(const torch::Tensor& x, double noise_sigma);
  /// sigmoid(logits) in (0, 1).
  torch::Tensor forward(const torch::Tensor& x, double noise_sigma);

  void reseed(std::uint64_t seed);

 private:
  torch::Tensor dropout(const torch::Tensor& x);

  ShapeGanConfig config_;
  torch::nn::Conv2d input_conv_{nullptr};
  std::vector<torch::nn::Conv2d> down_convs_;
  std::vector<torch::nn::BatchNorm2d> down_norms_;
  torch::nn::Linear head_{nullptr};
  at::Generator gen_;
};
TORCH_MODULE(ShapeDiscriminator);

/// Generator + discriminator with their provenance; the checkpoint unit.
struct ShapeGan {
  ShapeGanConfig config;
  ShapeGenerator generator{nullptr};
  ShapeDiscriminator discriminator{nullptr};
  std::int64_t step = 0;
  std::uint64_t seed = 0;

  /// Freshly initialized networks; weights are a pure function of
  /// (config, seed).
  static ShapeGan initialize(const ShapeGanConfig& config, std::uint64_t seed);
};

/// Single latent vector -> [R, R] raster in [-1, 1].
torch::Tensor shape_generator_forward(ShapeGenerator& generator, const torch::Tensor& z);

/// Single [R, R] raster -> probability in (0, 1).
double shape_discriminator_forward(ShapeDiscriminator& discriminator, const torch::Tensor& x,
                                   double noise_sigma);

struct ShapeLossRecord {
  std::int64_t step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
};

/// Alternating BCE updates against valid (1) / fake (0) labels.
///
/// Batches, latent draws, instance noise and dropout at step t derive from
/// (seed, t) only, so a trainer rebuilt from a checkpoint continues exactly
/// where the original run would have.
class ShapeGanTrainer {
 public:
  /// patches: soft masks in [-1, 1], each [R, R] or [1, R, R].
  ShapeGanTrainer(ShapeGan& gan, std::vector<torch::Tensor> patches);

  /// One discriminator update on a real batch and a fake batch; returns L_D.
  double discriminator_step();
  /// One generator update through the (fixed) discriminator; returns L_G.
  double generator_step();
  /// Both updates, then advances the step counter. Throws TrainingError on a
  /// non-finite loss.
  ShapeLossRecord step();

  const std::vector<ShapeLossRecord>& history() const { return history_; }

  void save(const std::filesystem::path& path) const;
  /// Restores optimizer moments saved by `save`.
  void load_optimizer_state(const std::filesystem::path& path);

 private:
  torch::Tensor real_batch(std::uint64_t stream);
  torch::Tensor latent_batch(std::uint64_t stream);

  ShapeGan& gan_;
  torch::Tensor data_;  // [M, 1, R, R]
  torch::optim::Adam g_opt_;
  torch::optim::Adam d_opt_;
  std::vector<ShapeLossRecord> history_;
};

struct ShapeGanTrainingResult {
  ShapeGan gan;
  std::vector<ShapeLossRecord> history;
};

/// Initializes from (config, seed) and runs `steps` updates.
ShapeGanTrainingResult train_shape_gan(const std::vector<torch::Tensor>& patches,
                                       const ShapeGanConfig& config, std::int64_t steps,
                                       std::uint64_t seed);

/// Continues training a loaded checkpoint for `steps` further updates.
ShapeGanTrainingResult resume_shape_gan(const std::filesystem::path& checkpoint,
                                        const std::vector<torch::Tensor>& patches,
                                        std::int64_t steps);

/// Thresholded silhouette. values is CV_8UC1 in {0,1}; soft_source keeps the
/// generator output mapped to [0,1] (CV_32F) when available.
struct BinaryShape {
  cv::Mat values;
  std::optional<cv::Mat> soft_source;

  int size() const { return values.rows; }
};

/// Draws n latents from N(0, I) with `seed`, runs the generator in eval mode
/// and keeps pixels with output > threshold.
std::vector<BinaryShape> sample_shapes(ShapeGan& gan, int n, double threshold,
                                       std::uint64_t seed);

std::string shape_checkpoint_name(std::int64_t step);
void save_shape_gan(const ShapeGan& gan, const std::filesystem::path& path);
ShapeGan load_shape_gan(const std::filesystem::path& path);

/// `append` keeps existing rows (resumed runs) and writes the header only
/// for a new file.
void write_shape_loss_csv(const std::filesystem::path& path,
                          const std::vector<ShapeLossRecord>& history, bool append = false);

}  // namespace agrisynth
