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

#include "agrisynth/style_gan.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

#include "agrisynth/errors.hpp"
#include "agrisynth/nn_util.hpp"
#include "agrisynth/seeding.hpp"

namespace agrisynth {
namespace F = torch::nn::functional;
namespace fs = std::filesystem;
namespace {

constexpr double kSlope = 0.2;

torch::Tensor lrelu(const torch::Tensor& x) {
  return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(kSlope));
}

torch::nn::Conv2d conv(int in, int out, int k, int stride, int pad, bool bias = true) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, k).stride(stride).padding(pad).bias(bias));
}

torch::Tensor batched(const torch::Tensor& t, int dims) {
  return t.dim() == dims - 1 ? t.unsqueeze(0) : t;
}

constexpr std::uint64_t kStreamBatch = 1;
constexpr std::uint64_t kStreamEpsD = 2;
constexpr std::uint64_t kStreamEpsG = 3;

}  // namespace

// ---------------------------------------------------------------------------
// Config

int StyleGanConfig::residual_blocks() const {
  if (resolution < 4 || resolution % 4 != 0) return -1;
  const auto ratio = static_cast<unsigned>(resolution / 4);
  return std::has_single_bit(ratio) ? std::countr_zero(ratio) : -1;
}

void StyleGanConfig::validate() const {
  if (residual_blocks() < 1) {
    throw ArgumentError("style_gan resolution must be 4 * 2^k with k >= 1, got " +
                        std::to_string(resolution));
  }
  if (label_channels != 2) throw ArgumentError("style_gan label_channels must be 2 (background, crop)");
  if (image_channels != 4) throw ArgumentError("style_gan image_channels must be 4 (R, G, B, NIR)");
  if (style_dim < 1 || generator_channels < 1 || min_generator_channels < 1 || spade_hidden < 1 ||
      encoder_channels < 1 || max_encoder_channels < 1 || discriminator_channels < 1 ||
      max_discriminator_channels < 1) {
    throw ArgumentError("style_gan widths must be positive");
  }
  if (discriminator_layers < 1) throw ArgumentError("style_gan discriminator_layers must be >= 1");
  if (num_scales < 1) throw ArgumentError("style_gan num_scales must be >= 1");
  if (perceptual_width_divisor < 1) throw ArgumentError("style_gan perceptual_width_divisor must be >= 1");
  if (lambda_fm < 0 || lambda_vgg < 0 || lambda_kl < 0) throw ArgumentError("style_gan loss weights must be >= 0");
  if (generator_lr <= 0 || discriminator_lr <= 0) throw ArgumentError("style_gan learning rates must be positive");
  if (batch_size < 1) throw ArgumentError("style_gan batch_size must be >= 1");
}

KeyValueConfig StyleGanConfig::to_kv() const {
  KeyValueConfig kv;
  kv.set("resolution", std::to_string(resolution));
  kv.set("label_channels", std::to_string(label_channels));
  kv.set("image_channels", std::to_string(image_channels));
  kv.set("style_dim", std::to_string(style_dim));
  kv.set("generator_channels", std::to_string(generator_channels));
  kv.set("min_generator_channels", std::to_string(min_generator_channels));
  kv.set("spade_hidden", std::to_string(spade_hidden));
  kv.set("encoder_channels", std::to_string(encoder_channels));
  kv.set("max_encoder_channels", std::to_string(max_encoder_channels));
  kv.set("discriminator_channels", std::to_string(discriminator_channels));
  kv.set("max_discriminator_channels", std::to_string(max_discriminator_channels));
  kv.set("discriminator_layers", std::to_string(discriminator_layers));
  kv.set("num_scales", std::to_string(num_scales));
  kv.set("perceptual_width_divisor", std::to_string(perceptual_width_divisor));
  kv.set("perceptual_seed", std::to_string(perceptual_seed));
  kv.set("perceptual_weights", perceptual_weights);
  kv.set("lambda_fm", format_double(lambda_fm));
  kv.set("lambda_vgg", format_double(lambda_vgg));
  kv.set("lambda_kl", format_double(lambda_kl));
  kv.set("generator_lr", format_double(generator_lr));
  kv.set("discriminator_lr", format_double(discriminator_lr));
  kv.set("beta1", format_double(beta1));
  kv.set("beta2", format_double(beta2));
  kv.set("batch_size", std::to_string(batch_size));
  return kv;
}

StyleGanConfig StyleGanConfig::from_kv(const KeyValueConfig& kv) {
  StyleGanConfig c;
  auto get = [&kv](const char* key, int fallback) { return static_cast<int>(kv.get_int(key, fallback)); };
  c.resolution = get("resolution", c.resolution);
  c.label_channels = get("label_channels", c.label_channels);
  c.image_channels = get("image_channels", c.image_channels);
  c.style_dim = get("style_dim", c.style_dim);
  c.generator_channels = get("generator_channels", c.generator_channels);
  c.min_generator_channels = get("min_generator_channels", c.min_generator_channels);
  c.spade_hidden = get("spade_hidden", c.spade_hidden);
  c.encoder_channels = get("encoder_channels", c.encoder_channels);
  c.max_encoder_channels = get("max_encoder_channels", c.max_encoder_channels);
  c.discriminator_channels = get("discriminator_channels", c.discriminator_channels);
  c.max_discriminator_channels = get("max_discriminator_channels", c.max_discriminator_channels);
  c.discriminator_layers = get("discriminator_layers", c.discriminator_layers);
  c.num_scales = get("num_scales", c.num_scales);
  c.perceptual_width_divisor = get("perceptual_width_divisor", c.perceptual_width_divisor);
  c.perceptual_seed = kv.get_int("perceptual_seed", c.perceptual_seed);
  c.perceptual_weights = kv.get_string("perceptual_weights", c.perceptual_weights);
  c.lambda_fm = kv.get_double("lambda_fm", c.lambda_fm);
  c.lambda_vgg = kv.get_double("lambda_vgg", c.lambda_vgg);
  c.lambda_kl = kv.get_double("lambda_kl", c.lambda_kl);
  c.generator_lr = kv.get_double("generator_lr", c.generator_lr);
  c.discriminator_lr = kv.get_double("discriminator_lr", c.discriminator_lr);
  c.beta1 = kv.get_double("beta1", c.beta1);
  c.beta2 = kv.get_double("beta2", c.beta2);
  c.batch_size = get("batch_size", c.batch_size);
  return c;
}

// ---------------------------------------------------------------------------
// Generator

SpadeImpl::SpadeImpl(int channels, int label_channels, int hidden) {
  shared_ = register_module("shared", conv(label_channels, hidden, 3, 1, 1));
  gamma_ = register_module("gamma", conv(hidden, channels, 3, 1, 1));
  beta_ = register_module("beta", conv(hidden, channels, 3, 1, 1));
}

torch::Tensor SpadeImpl::forward(const torch::Tensor& x, const torch::Tensor& condition) {
  const auto normalized = F::instance_norm(x, F::InstanceNormFuncOptions().eps(1e-5));
  const auto seg = F::interpolate(
      condition, F::InterpolateFuncOptions()
                     .size(std::vector<int64_t>{x.size(2), x.size(3)})
                     .mode(torch::kNearest));
  const auto actv = torch::relu(shared_->forward(seg));
  return normalized * (1.0 + gamma_->forward(actv)) + beta_->forward(actv);
}

SpadeResBlockImpl::SpadeResBlockImpl(int in_channels, int out_channels, int label_channels, int hidden)
    : learned_shortcut_(in_channels != out_channels) {
  const int middle = std::min(in_channels, out_channels);
  norm0_ = register_module("norm0", Spade(in_channels, label_channels, hidden));
  conv0_ = register_module("conv0", conv(in_channels, middle, 3, 1, 1));
  norm1_ = register_module("norm1", Spade(middle, label_channels, hidden));
  conv1_ = register_module("conv1", conv(middle, out_channels, 3, 1, 1));
  if (learned_shortcut_) {
    norm_s_ = register_module("norm_s", Spade(in_channels, label_channels, hidden));
    conv_s_ = register_module("conv_s", conv(in_channels, out_channels, 1, 1, 0, false));
  }
}

torch::Tensor SpadeResBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& condition) {
  const auto shortcut = learned_shortcut_ ? conv_s_->forward(norm_s_->forward(x, condition)) : x;
  auto dx = conv0_->forward(lrelu(norm0_->forward(x, condition)));
  dx = conv1_->forward(lrelu(norm1_->forward(dx, condition)));
  return shortcut + dx;
}

SpadeGeneratorImpl::SpadeGeneratorImpl(const StyleGanConfig& config) : config_(config) {
  config_.validate();
  const int c0 = config_.generator_channels;
  fc_ = register_module("fc", torch::nn::Linear(config_.style_dim, c0 * 16));
  auto width = [&](int i) { return std::max(config_.min_generator_channels, c0 >> i); };
  for (int i = 0; i < config_.residual_blocks(); ++i) {
    blocks_.push_back(register_module(
        "block" + std::to_string(i),
        SpadeResBlock(width(i), width(i + 1), config_.label_channels, config_.spade_hidden)));
  }
  out_conv_ = register_module("out_conv", conv(width(config_.residual_blocks()), config_.image_channels, 3, 1, 1));
}

torch::Tensor SpadeGeneratorImpl::forward(const torch::Tensor& condition, const torch::Tensor& z) {
  const int r = config_.resolution;
  if (condition.dim() != 4 || condition.size(1) != config_.label_channels || condition.size(2) != r ||
      condition.size(3) != r) {
    throw ArgumentError("SPADE generator expects condition [N,2," + std::to_string(r) + "," +
                        std::to_string(r) + "], got " + c10::str(condition.sizes()));
  }
  if (z.dim() != 2 || z.size(1) != config_.style_dim || z.size(0) != condition.size(0)) {
    throw ArgumentError("SPADE generator expects z [N," + std::to_string(config_.style_dim) +
                        "], got " + c10::str(z.sizes()));
  }
  auto x = fc_->forward(z).view({z.size(0), config_.generator_channels, 4, 4});
  for (auto& block : blocks_) {
    x = block->forward(x, condition);
    x = F::interpolate(x, F::InterpolateFuncOptions()
                              .scale_factor(std::vector<double>{2.0, 2.0})
                              .mode(torch::kNearest));
  }
  return torch::tanh(out_conv_->forward(lrelu(x)));
}

// ---------------------------------------------------------------------------
// Encoder

StyleEncoderImpl::StyleEncoderImpl(const StyleGanConfig& config) : config_(config) {
  config_.validate();
  convs_ = torch::nn::Sequential();
  int in = config_.image_channels;
  int ch = config_.encoder_channels;
  for (int i = 0; i < config_.residual_blocks(); ++i) {
    convs_->push_back(conv(in, ch, 3, 2, 1));
    convs_->push_back(torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(ch).affine(true)));
    convs_->push_back(torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(kSlope)));
    in = ch;
    ch = std::min(config_.max_encoder_channels, ch * 2);
  }
  register_module("convs", convs_);
  fc_mu_ = register_module("fc_mu", torch::nn::Linear(in * 16, config_.style_dim));
  fc_logvar_ = register_module("fc_logvar", torch::nn::Linear(in * 16, config_.style_dim));
}

StyleCode StyleEncoderImpl::forward(const torch::Tensor& image) {
  const int r = config_.resolution;
  if (image.dim() != 4 || image.size(1) != config_.image_channels || image.size(2) != r ||
      image.size(3) != r) {
    throw ArgumentError("style encoder expects [N,4," + std::to_string(r) + "," + std::to_string(r) +
                        "], got " + c10::str(image.sizes()));
  }
  const auto h = convs_->forward(image).flatten(1);
  return {fc_mu_->forward(h), fc_logvar_->forward(h)};
}

// ---------------------------------------------------------------------------
// Discriminator

PatchDiscriminatorImpl::PatchDiscriminatorImpl(int in_channels, int base_channels, int max_channels,
                                               int layers) {
  int in = in_channels, ch = base_channels;
  for (int i = 0; i <= layers; ++i) {
    const int stride = i < layers ? 2 : 1;
    convs_.push_back(register_module("conv" + std::to_string(i), conv(in, ch, 4, stride, 2)));
    if (i == 0) {
      norms_.emplace_back(nullptr);
    } else {
      norms_.push_back(register_module("norm" + std::to_string(i),
                                       torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(ch))));
    }
    in = ch;
    ch = std::min(max_channels, ch * 2);
  }
  out_ = register_module("out", conv(in, 1, 4, 1, 2));
}

std::pair<torch::Tensor, std::vector<torch::Tensor>> PatchDiscriminatorImpl::forward(
    const torch::Tensor& input) {
  std::vector<torch::Tensor> taps;
  torch::Tensor x = input;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    x = convs_[i]->forward(x);
    if (!norms_[i].is_empty()) x = norms_[i]->forward(x);
    x = lrelu(x);
    taps.push_back(x);
  }
  return {out_->forward(x), std::move(taps)};
}

MultiscaleDiscriminatorImpl::MultiscaleDiscriminatorImpl(const StyleGanConfig& config) : config_(config) {
  config_.validate();
  for (int k = 0; k < config_.num_scales; ++k) {
    scales_.push_back(register_module(
        "scale" + std::to_string(k),
        PatchDiscriminator(config_.label_channels + config_.image_channels, config_.discriminator_channels,
                           config_.max_discriminator_channels, config_.discriminator_layers)));
  }
}

DiscriminatorOutput MultiscaleDiscriminatorImpl::forward(const torch::Tensor& condition,
                                                         const torch::Tensor& image) {
  const int r = config_.resolution;
  if (condition.dim() != 4 || image.dim() != 4 || condition.size(1) != config_.label_channels ||
      image.size(1) != config_.image_channels || condition.size(0) != image.size(0) ||
      condition.size(2) != r || condition.size(3) != r || image.size(2) != r || image.size(3) != r) {
    throw ArgumentError("multiscale discriminator expects condition [N,2,R,R] and image [N,4,R,R] with R=" +
                        std::to_string(r) + ", got " + c10::str(condition.sizes()) + " and " +
                        c10::str(image.sizes()));
  }
  DiscriminatorOutput out;
  torch::Tensor x = torch::cat({condition, image}, 1);
  for (std::size_t k = 0; k < scales_.size(); ++k) {
    if (k > 0) {
      x = F::avg_pool2d(x, F::AvgPool2dFuncOptions(3).stride(2).padding(1).count_include_pad(false));
    }
    auto [logits, taps] = scales_[k]->forward(x);
    out.logits.push_back(std::move(logits));
    out.features.push_back(std::move(taps));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perceptual network

PerceptualNetImpl::PerceptualNetImpl(int width_divisor, std::uint64_t seed) {
  if (width_divisor < 1) throw ArgumentError("perceptual width divisor must be >= 1");
  // (stage, width) for conv1_1 ... conv5_1
  const std::vector<std::pair<int, int>> layout = {{0, 64},  {0, 64},  {1, 128}, {1, 128}, {2, 256},
                                                   {2, 256}, {2, 256}, {2, 256}, {3, 512}, {3, 512},
                                                   {3, 512}, {3, 512}, {4, 512}};
  int in = 3;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const int out = std::max(1, layout[i].second / width_divisor);
    convs_.push_back(register_module("conv" + std::to_string(i), conv(in, out, 3, 1, 1)));
    stage_of_conv_.push_back(layout[i].first);
    in = out;
  }
  at::Generator gen = make_generator(seed);
  initialize_parameters(*this, InitScheme::he_normal, gen);
  for (auto& p : parameters()) p.set_requires_grad(false);
  eval();
}

void PerceptualNetImpl::load_weights(const fs::path& path) {
  torch::serialize::InputArchive archive;
  load_archive(archive, path.string());
  load(archive);
  for (auto& p : parameters()) p.set_requires_grad(false);
}

std::vector<torch::Tensor> PerceptualNetImpl::extract(const torch::Tensor& rgb) {
  if (rgb.dim() != 4 || rgb.size(1) != 3) {
    throw ArgumentError("perceptual network expects [N,3,H,W], got " + c10::str(rgb.sizes()));
  }
  const auto mean = torch::tensor({0.485, 0.456, 0.406}, rgb.options()).view({1, 3, 1, 1});
  const auto stdev = torch::tensor({0.229, 0.224, 0.225}, rgb.options()).view({1, 3, 1, 1});
  torch::Tensor x = ((rgb + 1.0) * 0.5 - mean) / stdev;
  std::vector<torch::Tensor> taps;
  int stage = 0;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    if (stage_of_conv_[i] != stage) {
      x = F::max_pool2d(x, F::MaxPool2dFuncOptions(2).stride(2));
      stage = stage_of_conv_[i];
    }
    x = torch::relu(convs_[i]->forward(x));
    if (i == 0 || stage_of_conv_[i] != stage_of_conv_[i - 1]) taps.push_back(x);
  }
  return taps;
}

// ---------------------------------------------------------------------------

StyleGan StyleGan::initialize(const StyleGanConfig& config, std::uint64_t seed) {
  config.validate();
  StyleGan gan;
  gan.config = config;
  gan.seed = seed;
  gan.generator = SpadeGenerator(config);
  gan.encoder = StyleEncoder(config);
  gan.discriminator = MultiscaleDiscriminator(config);
  at::Generator g = make_generator(derive_seed(seed, {0x9e7}));
  initialize_parameters(*gan.generator, InitScheme::gan_normal, g);
  at::Generator e = make_generator(derive_seed(seed, {0xe2c}));
  initialize_parameters(*gan.encoder, InitScheme::gan_normal, e);
  at::Generator d = make_generator(derive_seed(seed, {0xd15c}));
  initialize_parameters(*gan.discriminator, InitScheme::gan_normal, d);
  gan.perceptual = PerceptualNet(config.perceptual_width_divisor,
                                 static_cast<std::uint64_t>(config.perceptual_seed));
  if (!config.perceptual_weights.empty()) gan.perceptual->load_weights(config.perceptual_weights);
  return gan;
}

torch::Tensor condition_from_mask(const cv::Mat& binary) {
  CV_Assert(binary.type() == CV_8UC1);
  cv::Mat f;
  binary.convertTo(f, CV_32F);
  cv::Mat crop = (f > 0.0f) / 255;
  crop.convertTo(crop, CV_32F);
  const auto c = mat_to_chw(crop);
  return torch::cat({1.0 - c, c}, 0);
}

void validate_condition(const torch::Tensor& condition, int resolution) {
  if (condition.dim() != 3 || condition.size(0) != 2 || condition.size(1) != resolution ||
      condition.size(2) != resolution) {
    throw ArgumentError("condition mask must be [2," + std::to_string(resolution) + "," +
                        std::to_string(resolution) + "], got " + c10::str(condition.sizes()));
  }
  const bool binary = ((condition == 0) | (condition == 1)).all().item<bool>();
  const bool one_hot = (condition.sum(0) == 1).all().item<bool>();
  if (!binary || !one_hot) throw ArgumentError("condition mask planes must be one-hot");
}

StyleCode encode_style(StyleGan& gan, const torch::Tensor& patch) {
  const int r = gan.config.resolution;
  if (patch.dim() != 3 || patch.size(0) != 4 || patch.size(1) != r || patch.size(2) != r) {
    throw ArgumentError("style encoder expects a [4," + std::to_string(r) + "," + std::to_string(r) +
                        "] patch, got " + c10::str(patch.sizes()));
  }
  torch::NoGradGuard no_grad;
  auto code = gan.encoder->forward(patch.unsqueeze(0).to(torch::kFloat32));
  return {code.mu.squeeze(0), code.logvar.squeeze(0)};
}

torch::Tensor spade_generator_forward(StyleGan& gan, const torch::Tensor& condition,
                                      const torch::Tensor& z) {
  validate_condition(condition, gan.config.resolution);
  if (z.dim() != 1 || z.size(0) != gan.config.style_dim) {
    throw ArgumentError("latent must have length " + std::to_string(gan.config.style_dim) + ", got " +
                        c10::str(z.sizes()));
  }
  torch::NoGradGuard no_grad;
  return gan.generator->forward(condition.unsqueeze(0), z.unsqueeze(0)).squeeze(0);
}

DiscriminatorOutput multiscale_discriminator_forward(StyleGan& gan, const torch::Tensor& condition,
                                                     const torch::Tensor& image) {
  torch::NoGradGuard no_grad;
  return gan.discriminator->forward(batched(condition, 4), batched(image, 4));
}

torch::Tensor generate_crop_style(StyleGan& gan, const BinaryShape& shape, std::uint64_t seed) {
  at::Generator g = make_generator(seed);
  const auto z = torch::randn({gan.config.style_dim}, g);
  return spade_generator_forward(gan, condition_from_mask(shape.values), z);
}

torch::Tensor generate_soil_guided(StyleGan& gan, const BinaryShape& shape,
                                   const torch::Tensor& real_background,
                                   const torch::Tensor& epsilon) {
  const StyleCode code = encode_style(gan, real_background);
  return spade_generator_forward(gan, condition_from_mask(shape.values),
                                 reparameterize(code, epsilon.to(torch::kFloat32)));
}

// ---------------------------------------------------------------------------
// Training

StyleGanTrainer::StyleGanTrainer(StyleGan& gan, std::vector<StylePair> pairs)
    : gan_(gan),
      g_opt_([&] {
        auto params = gan.generator->parameters();
        for (auto& p : gan.encoder->parameters()) params.push_back(p);
        return params;
      }(),
             torch::optim::AdamOptions(gan.config.generator_lr).betas({gan.config.beta1, gan.config.beta2})),
      d_opt_(gan.discriminator->parameters(),
             torch::optim::AdamOptions(gan.config.discriminator_lr)
                 .betas({gan.config.beta1, gan.config.beta2})) {
  if (pairs.empty()) throw ArgumentError("style GAN training needs at least one pair");
  std::vector<torch::Tensor> conds, images;
  const int r = gan.config.resolution;
  for (const auto& p : pairs) {
    validate_condition(p.condition, r);
    if (p.image.dim() != 3 || p.image.size(0) != 4 || p.image.size(1) != r || p.image.size(2) != r) {
      throw ArgumentError("style training image must be [4," + std::to_string(r) + "," +
                          std::to_string(r) + "], got " + c10::str(p.image.sizes()));
    }
    conds.push_back(p.condition.to(torch::kFloat32).unsqueeze(0));
    images.push_back(p.image.to(torch::kFloat32).unsqueeze(0));
  }
  conditions_ = torch::cat(conds, 0);
  images_ = torch::cat(images, 0);
}

std::pair<torch::Tensor, torch::Tensor> StyleGanTrainer::batch(std::uint64_t stream) {
  at::Generator g = make_generator(derive_seed(gan_.seed, {static_cast<std::uint64_t>(gan_.step), stream}));
  const auto idx = torch::randint(images_.size(0), {gan_.config.batch_size}, g, torch::kLong);
  return {conditions_.index_select(0, idx), images_.index_select(0, idx)};
}

torch::Tensor StyleGanTrainer::epsilon(std::uint64_t stream, std::int64_t n) {
  at::Generator g = make_generator(derive_seed(gan_.seed, {static_cast<std::uint64_t>(gan_.step), stream}));
  return torch::randn({n, gan_.config.style_dim}, g);
}

double StyleGanTrainer::discriminator_step() {
  const auto [cond, real] = batch(kStreamBatch);
  torch::Tensor fake;
  {
    torch::NoGradGuard no_grad;
    const StyleCode code = gan_.encoder->forward(real);
    fake = gan_.generator->forward(cond, reparameterize(code, epsilon(kStreamEpsD, real.size(0))));
  }
  d_opt_.zero_grad();
  const auto real_out = gan_.discriminator->forward(cond, real);
  const auto fake_out = gan_.discriminator->forward(cond, fake);
  const auto loss = loss_adversarial(real_out.logits, fake_out.logits, AdversarialSide::discriminator);
  if (!all_finite(loss)) throw TrainingError("d_loss", gan_.step);
  loss.backward();
  d_opt_.step();
  return loss.item<double>();
}

StyleLossRecord StyleGanTrainer::generator_step() {
  const auto [cond, real] = batch(kStreamBatch);
  g_opt_.zero_grad();
  const StyleCode code = gan_.encoder->forward(real);
  const auto fake = gan_.generator->forward(cond, reparameterize(code, epsilon(kStreamEpsG, real.size(0))));
  const auto fake_out = gan_.discriminator->forward(cond, fake);
  DiscriminatorOutput real_out;
  {
    torch::NoGradGuard no_grad;
    real_out = gan_.discriminator->forward(cond, real);
  }
  const auto& cfg = gan_.config;
  const auto adv = loss_adversarial({}, fake_out.logits, AdversarialSide::generator);
  const auto fm = loss_feature_matching(real_out.features, fake_out.features);
  const auto vgg = cfg.lambda_vgg > 0.0 ? loss_vgg(real, fake, *gan_.perceptual) : torch::zeros({});
  const auto kld = loss_kl(code);

  StyleLossRecord rec;
  rec.step = gan_.step + 1;
  const std::pair<const char*, const torch::Tensor*> parts[] = {
      {"g_adv", &adv}, {"g_fm", &fm}, {"g_vgg", &vgg}, {"g_kld", &kld}};
  for (const auto& [name, t] : parts) {
    if (!all_finite(*t)) throw TrainingError(name, gan_.step);
  }
  const auto total = adv + cfg.lambda_fm * fm + cfg.lambda_vgg * vgg + cfg.lambda_kl * kld;
  total.backward();
  g_opt_.step();
  rec.g_adv = adv.item<double>();
  rec.g_fm = fm.item<double>();
  rec.g_vgg = vgg.item<double>();
  rec.g_kld = kld.item<double>();
  return rec;
}

StyleLossRecord StyleGanTrainer::step() {
  const double d = discriminator_step();
  StyleLossRecord rec = generator_step();
  rec.d_loss = d;
  ++gan_.step;
  history_.push_back(rec);
  return rec;
}

double StyleGanTrainer::reconstruction_error() {
  torch::NoGradGuard no_grad;
  const StyleCode code = gan_.encoder->forward(images_);
  const auto recon = gan_.generator->forward(conditions_, code.mu);
  return (recon - images_).abs().mean().item<double>();
}

namespace {

void write_gan(torch::serialize::OutputArchive& archive, const StyleGan& gan) {
  torch::serialize::OutputArchive g, e, d;
  gan.generator->save(g);
  gan.encoder->save(e);
  gan.discriminator->save(d);
  archive.write("generator", g);
  archive.write("encoder", e);
  archive.write("discriminator", d);
  archive_write(archive, "config", gan.config.to_kv().dump());
  archive_write(archive, "step", gan.step);
  archive_write(archive, "seed", std::bit_cast<std::int64_t>(gan.seed));
  archive_write(archive, "kind", std::string("style_gan"));
}

}  // namespace

void StyleGanTrainer::save(const fs::path& path) const {
  torch::serialize::OutputArchive archive;
  write_gan(archive, gan_);
  torch::serialize::OutputArchive g_opt, d_opt;
  g_opt_.save(g_opt);
  d_opt_.save(d_opt);
  archive.write("generator_optimizer", g_opt);
  archive.write("discriminator_optimizer", d_opt);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  archive.save_to(path.string());
}

void StyleGanTrainer::load_optimizer_state(const fs::path& path) {
  torch::serialize::InputArchive archive;
  load_archive(archive, path.string());
  torch::serialize::InputArchive g_opt, d_opt;
  if (archive.try_read("generator_optimizer", g_opt)) g_opt_.load(g_opt);
  if (archive.try_read("discriminator_optimizer", d_opt)) d_opt_.load(d_opt);
}

StyleGanTrainingResult train_style_gan(const std::vector<StylePair>& pairs, const StyleGanConfig& config,
                                       std::int64_t steps, std::uint64_t seed) {
  if (pairs.empty()) throw ArgumentError("style GAN training needs at least one pair");
  if (steps < 0) throw ArgumentError("steps must be >= 0");
  StyleGanTrainingResult result{StyleGan::initialize(config, seed), {}};
  StyleGanTrainer trainer(result.gan, pairs);
  for (std::int64_t i = 0; i < steps; ++i) trainer.step();
  result.history = trainer.history();
  return result;
}

StyleGanTrainingResult resume_style_gan(const fs::path& checkpoint, const std::vector<StylePair>& pairs,
                                        std::int64_t steps) {
  StyleGanTrainingResult result{load_style_gan(checkpoint), {}};
  StyleGanTrainer trainer(result.gan, pairs);
  trainer.load_optimizer_state(checkpoint);
  for (std::int64_t i = 0; i < steps; ++i) trainer.step();
  result.history = trainer.history();
  return result;
}

std::string style_checkpoint_name(std::int64_t step) {
  return "style_gan_step" + std::to_string(step) + ".ckpt";
}

void save_style_gan(const StyleGan& gan, const fs::path& path) {
  torch::serialize::OutputArchive archive;
  write_gan(archive, gan);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  archive.save_to(path.string());
}

StyleGan load_style_gan(const fs::path& path) {
  torch::serialize::InputArchive archive;
  load_archive(archive, path.string());
  if (archive_read_string(archive, "kind") != "style_gan") {
    throw FormatError(path.string() + " is not a style GAN checkpoint");
  }
  const auto config = StyleGanConfig::from_kv(KeyValueConfig::parse(archive_read_string(archive, "config")));
  StyleGan gan = StyleGan::initialize(config, std::bit_cast<std::uint64_t>(archive_read_int(archive, "seed")));
  gan.step = archive_read_int(archive, "step");
  torch::serialize::InputArchive g, e, d;
  if (!archive.try_read("generator", g) || !archive.try_read("encoder", e) ||
      !archive.try_read("discriminator", d)) {
    throw FormatError(path.string() + " lacks network weights");
  }
  gan.generator->load(g);
  gan.encoder->load(e);
  gan.discriminator->load(d);
  return gan;
}

void write_style_loss_csv(const fs::path& path, const std::vector<StyleLossRecord>& history, bool append) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const bool header = !append || !fs::exists(path);
  std::ofstream out(path, append ? std::ios::binary | std::ios::app : std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (header) out << "step,d_loss,g_adv,g_fm,g_vgg,g_kld\n";
  char line[256];
  for (const auto& r : history) {
    std::snprintf(line, sizeof(line), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g\n", static_cast<long long>(r.step),
                  r.d_loss, r.g_adv, r.g_fm, r.g_vgg, r.g_kld);
    out << line;
  }
}

}  // namespace agrisynth
