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
#include <memory>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/torch.h>

#include "agrisynth/config.hpp"
#include "agrisynth/shape_gan.hpp"
#include "agrisynth/style_losses.hpp"

namespace agrisynth {

// Mask-conditioned texture synthesis for joint RGB+NIR patches.
//
// Images are [4, R, R] tensors in [-1, 1] with planes R, G, B, NIR. Condition
// masks are one-hot [2, R, R] tensors: plane 0 background, plane 1 crop.

struct StyleGanConfig {
  int resolution = 256;
  int label_channels = 2;
  int image_channels = 4;
  int style_dim = 256;
  int generator_channels = 256;  // at 4×4, halved after every residual block
  int min_generator_channels = 16;
  int spade_hidden = 64;
  int encoder_channels = 32;  // first stride-2 conv, doubled per layer
  int max_encoder_channels = 256;
  int discriminator_channels = 64;
  int max_discriminator_channels = 512;
  int discriminator_layers = 3;  // stride-2 convs; taps per scale = layers + 1
  int num_scales = 2;
  int perceptual_width_divisor = 1;
  std::int64_t perceptual_seed = 19;
  std::string perceptual_weights;  // optional archive of PerceptualNet weights
  double lambda_fm = 10.0;
  double lambda_vgg = 10.0;
  double lambda_kl = 0.05;
  double generator_lr = 1e-4;
  double discriminator_lr = 4e-4;
  double beta1 = 0.0;
  double beta2 = 0.999;
  int batch_size = 1;

  /// SPADE residual blocks, each followed by 2× upsampling: log2(R / 4).
  int residual_blocks() const;
  void validate() const;

  KeyValueConfig to_kv() const;
  static StyleGanConfig from_kv(const KeyValueConfig& kv);
};

/// Spatially-adaptive normalization: parameter-free instance norm whose
/// per-pixel scale and bias are predicted from the (resized) condition mask.
class SpadeImpl : public torch::nn::Module {
 public:
  SpadeImpl(int channels, int label_channels, int hidden);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& condition);

 private:
  torch::nn::Conv2d shared_{nullptr};
  torch::nn::Conv2d gamma_{nullptr};
  torch::nn::Conv2d beta_{nullptr};
};
TORCH_MODULE(Spade);

class SpadeResBlockImpl : public torch::nn::Module {
 public:
  SpadeResBlockImpl(int in_channels, int out_channels, int label_channels, int hidden);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& condition);

 private:
  bool learned_shortcut_;
  Spade norm0_{nullptr}, norm1_{nullptr}, norm_s_{nullptr};
  torch::nn::Conv2d conv0_{nullptr}, conv1_{nullptr}, conv_s_{nullptr};
};
TORCH_MODULE(SpadeResBlock);

class SpadeGeneratorImpl : public torch::nn::Module {
 public:
  explicit SpadeGeneratorImpl(const StyleGanConfig& config);
  /// condition [N, 2, R, R], z [N, style_dim] -> [N, 4, R, R] in [-1, 1].
  torch::Tensor forward(const torch::Tensor& condition, const torch::Tensor& z);

 private:
  StyleGanConfig config_;
  torch::nn::Linear fc_{nullptr};
  std::vector<SpadeResBlock> blocks_;
  torch::nn::Conv2d out_conv_{nullptr};
};
TORCH_MODULE(SpadeGenerator);

/// Stride-2 convolutions down to 4×4 followed by two linear heads (mu and
/// logvar).
class StyleEncoderImpl : public torch::nn::Module {
 public:
  explicit StyleEncoderImpl(const StyleGanConfig& config);
  /// [N, 4, R, R] -> ([N, style_dim], [N, style_dim]).
  StyleCode forward(const torch::Tensor& image);

 private:
  StyleGanConfig config_;
  torch::nn::Sequential convs_{nullptr};
  torch::nn::Linear fc_mu_{nullptr};
  torch::nn::Linear fc_logvar_{nullptr};
};
TORCH_MODULE(StyleEncoder);

/// Patch discriminator for one scale. Returns the logit map and the
/// activations of every layer before it.
class PatchDiscriminatorImpl : public torch::nn::Module {
 public:
  PatchDiscriminatorImpl(int in_channels, int base_channels, int max_channels, int layers);
  std::pair<torch::Tensor, std::vector<torch::Tensor>> forward(const torch::Tensor& input);

 private:
  std::vector<torch::nn::Conv2d> convs_;
  std::vector<torch::nn::InstanceNorm2d> norms_;  // null for the first layer
  torch::nn::Conv2d out_{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

struct DiscriminatorOutput {
  std::vector<torch::Tensor> logits;  // one patch-logit map per scale, fine first
  FeatureStack features;
};

class MultiscaleDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit MultiscaleDiscriminatorImpl(const StyleGanConfig& config);
  /// Scale k sees (condition, image) average-pooled k times by 2.
  DiscriminatorOutput forward(const torch::Tensor& condition, const torch::Tensor& image);

 private:
  StyleGanConfig config_;
  std::vector<PatchDiscriminator> scales_;
};
TORCH_MODULE(MultiscaleDiscriminator);

/// VGG19 convolutional topology up to relu5_1, tapping relu1_1, relu2_1,
/// relu3_1, relu4_1 and relu5_1. Channel widths are divided by
/// `width_divisor`. Parameters never require gradients.
class PerceptualNetImpl : public torch::nn::Module, public PerceptualExtractor {
 public:
  PerceptualNetImpl(int width_divisor, std::uint64_t seed);
  std::vector<torch::Tensor> extract(const torch::Tensor& rgb) override;
  void load_weights(const std::filesystem::path& path);

 private:
  std::vector<torch::nn::Conv2d> convs_;
  std::vector<int> stage_of_conv_;
};
TORCH_MODULE(PerceptualNet);

struct StyleGan {
  StyleGanConfig config;
  SpadeGenerator generator{nullptr};
  StyleEncoder encoder{nullptr};
  MultiscaleDiscriminator discriminator{nullptr};
  PerceptualNet perceptual{nullptr};
  std::int64_t step = 0;
  std::uint64_t seed = 0;

  static StyleGan initialize(const StyleGanConfig& config, std::uint64_t seed);
};

/// Binary 0/1 raster -> one-hot [2, R, R] condition.
torch::Tensor condition_from_mask(const cv::Mat& binary);
/// Throws ArgumentError unless `condition` is a [2, R, R] one-hot raster.
void validate_condition(const torch::Tensor& condition, int resolution);

StyleCode encode_style(StyleGan& gan, const torch::Tensor& patch);
torch::Tensor spade_generator_forward(StyleGan& gan, const torch::Tensor& condition,
                                      const torch::Tensor& z);
DiscriminatorOutput multiscale_discriminator_forward(StyleGan& gan, const torch::Tensor& condition,
                                                     const torch::Tensor& image);

/// Random crop style: z ~ N(0, I) drawn from `seed`.
torch::Tensor generate_crop_style(StyleGan& gan, const BinaryShape& shape, std::uint64_t seed);

/// Soil style guided by a real background patch through the style encoder.
torch::Tensor generate_soil_guided(StyleGan& gan, const BinaryShape& shape,
                                   const torch::Tensor& real_background,
                                   const torch::Tensor& epsilon);

struct StylePair {
  torch::Tensor condition;  // [2, R, R]
  torch::Tensor image;      // [4, R, R]
};

struct StyleLossRecord {
  std::int64_t step = 0;
  double d_loss = 0.0;
  double g_adv = 0.0;
  double g_fm = 0.0;
  double g_vgg = 0.0;
  double g_kld = 0.0;
};

/// Alternating hinge-GAN training of generator + encoder against the
/// multiscale discriminator. The generator objective is
/// L_G + λ_FM·L_FM + λ_VGG·L_VGG + λ_KL·L_KLD. Randomness at step t derives
/// from (seed, t).
class StyleGanTrainer {
 public:
  StyleGanTrainer(StyleGan& gan, std::vector<StylePair> pairs);

  double discriminator_step();
  StyleLossRecord generator_step();
  StyleLossRecord step();

  /// Mean |G(s, mu(x)) - x| over all training pairs.
  double reconstruction_error();

  const std::vector<StyleLossRecord>& history() const { return history_; }

  void save(const std::filesystem::path& path) const;
  void load_optimizer_state(const std::filesystem::path& path);

 private:
  std::pair<torch::Tensor, torch::Tensor> batch(std::uint64_t stream);
  torch::Tensor epsilon(std::uint64_t stream, std::int64_t n);

  StyleGan& gan_;
  torch::Tensor conditions_;  // [M, 2, R, R]
  torch::Tensor images_;      // [M, 4, R, R]
  torch::optim::Adam g_opt_;
  torch::optim::Adam d_opt_;
  std::vector<StyleLossRecord> history_;
};

struct StyleGanTrainingResult {
  StyleGan gan;
  std::vector<StyleLossRecord> history;
};

StyleGanTrainingResult train_style_gan(const std::vector<StylePair>& pairs,
                                       const StyleGanConfig& config, std::int64_t steps,
                                       std::uint64_t seed);
StyleGanTrainingResult resume_style_gan(const std::filesystem::path& checkpoint,
                                        const std::vector<StylePair>& pairs, std::int64_t steps);

std::string style_checkpoint_name(std::int64_t step);
void save_style_gan(const StyleGan& gan, const std::filesystem::path& path);
StyleGan load_style_gan(const std::filesystem::path& path);

void write_style_loss_csv(const std::filesystem::path& path,
                          const std::vector<StyleLossRecord>& history, bool append = false);

}  // namespace agrisynth
