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

#include "agrisynth/shape_gan.hpp"

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

int exact_log2(int v) {
  if (v <= 0 || !std::has_single_bit(static_cast<unsigned>(v))) return -1;
  return std::countr_zero(static_cast<unsigned>(v));
}

constexpr std::uint64_t kStreamReal = 1;
constexpr std::uint64_t kStreamFakeD = 2;
constexpr std::uint64_t kStreamFakeG = 3;
constexpr std::uint64_t kStreamDiscD = 4;
constexpr std::uint64_t kStreamDiscG = 5;

}  // namespace

int ShapeGanConfig::derived_up_blocks() const {
  if (base_resolution <= 0 || target_resolution % base_resolution != 0) return -1;
  return exact_log2(target_resolution / base_resolution);
}

int ShapeGanConfig::derived_down_blocks() const {
  // input conv halves once, each block halves again, ending at 4×4
  if (target_resolution < 8 || target_resolution % 8 != 0) return -1;
  return exact_log2(target_resolution / 8);
}

void ShapeGanConfig::validate() const {
  if (latent_size < 1) throw ArgumentError("shape_gan latent_size must be >= 1");
  const int up = derived_up_blocks();
  if (up < 0) {
    throw ArgumentError("shape_gan: target_resolution " + std::to_string(target_resolution) +
                        " is not base_resolution " + std::to_string(base_resolution) +
                        " times a power of two");
  }
  if (up_blocks != 0 && up_blocks != up) {
    throw ArgumentError("shape_gan: base_resolution * 2^up_blocks = " +
                        std::to_string(base_resolution << up_blocks) + " != target_resolution " +
                        std::to_string(target_resolution));
  }
  const int down = derived_down_blocks();
  if (down < 0) {
    throw ArgumentError("shape_gan: target_resolution must be a power of two >= 8");
  }
  if (down_blocks != 0 && down_blocks != down) {
    throw ArgumentError("shape_gan: down_blocks " + std::to_string(down_blocks) +
                        " does not reach 4x4 from " + std::to_string(target_resolution));
  }
  if (generator_channels < 1 || discriminator_channels < 1 || min_generator_channels < 1 ||
      max_discriminator_channels < 1) {
    throw ArgumentError("shape_gan channel widths must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ArgumentError("shape_gan dropout_rate must lie in [0,1)");
  if (input_noise_sigma < 0.0) throw ArgumentError("shape_gan input_noise_sigma must be >= 0");
  if (batch_size < 1) throw ArgumentError("shape_gan batch_size must be >= 1");
  if (learning_rate <= 0.0) throw ArgumentError("shape_gan learning_rate must be positive");
}

KeyValueConfig ShapeGanConfig::to_kv() const {
  KeyValueConfig kv;
  kv.set("latent_size", std::to_string(latent_size));
  kv.set("base_resolution", std::to_string(base_resolution));
  kv.set("target_resolution", std::to_string(target_resolution));
  kv.set("up_blocks", std::to_string(up_blocks));
  kv.set("down_blocks", std::to_string(down_blocks));
  kv.set("generator_channels", std::to_string(generator_channels));
  kv.set("min_generator_channels", std::to_string(min_generator_channels));
  kv.set("discriminator_channels", std::to_string(discriminator_channels));
  kv.set("max_discriminator_channels", std::to_string(max_discriminator_channels));
  kv.set("input_noise_sigma", format_double(input_noise_sigma));
  kv.set("dropout_rate", format_double(dropout_rate));
  kv.set("leaky_slope", format_double(leaky_slope));
  kv.set("learning_rate", format_double(learning_rate));
  kv.set("beta1", format_double(beta1));
  kv.set("beta2", format_double(beta2));
  kv.set("batch_size", std::to_string(batch_size));
  return kv;
}

ShapeGanConfig ShapeGanConfig::from_kv(const KeyValueConfig& kv) {
  ShapeGanConfig c;
  c.latent_size = static_cast<int>(kv.get_int("latent_size", c.latent_size));
  c.base_resolution = static_cast<int>(kv.get_int("base_resolution", c.base_resolution));
  c.target_resolution = static_cast<int>(kv.get_int("target_resolution", c.target_resolution));
  c.up_blocks = static_cast<int>(kv.get_int("up_blocks", c.up_blocks));
  c.down_blocks = static_cast<int>(kv.get_int("down_blocks", c.down_blocks));
  c.generator_channels = static_cast<int>(kv.get_int("generator_channels", c.generator_channels));
  c.min_generator_channels =
      static_cast<int>(kv.get_int("min_generator_channels", c.min_generator_channels));
  c.discriminator_channels =
      static_cast<int>(kv.get_int("discriminator_channels", c.discriminator_channels));
  c.max_discriminator_channels =
      static_cast<int>(kv.get_int("max_discriminator_channels", c.max_discriminator_channels));
  c.input_noise_sigma = kv.get_double("input_noise_sigma", c.input_noise_sigma);
  c.dropout_rate = kv.get_double("dropout_rate", c.dropout_rate);
  c.leaky_slope = kv.get_double("leaky_slope", c.leaky_slope);
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.beta1 = kv.get_double("beta1", c.beta1);
  c.beta2 = kv.get_double("beta2", c.beta2);
  c.batch_size = static_cast<int>(kv.get_int("batch_size", c.batch_size));
  return c;
}

// ---------------------------------------------------------------------------
// Generator

ShapeGeneratorImpl::ShapeGeneratorImpl(const ShapeGanConfig& config) : config_(config) {
  config_.validate();
  const int b = config_.base_resolution;
  base_channels_ = config_.generator_channels;
  dense_ = register_module("dense", torch::nn::Linear(config_.latent_size, base_channels_ * b * b));
  input_norm_ = register_module("input_norm", torch::nn::BatchNorm2d(base_channels_));

  blocks_ = torch::nn::Sequential();
  int ch = base_channels_;
  for (int i = 0; i < config_.derived_up_blocks(); ++i) {
    const int out = std::max(config_.min_generator_channels, base_channels_ >> (i + 1));
    blocks_->push_back(torch::nn::Upsample(
        torch::nn::UpsampleOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest)));
    blocks_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, out, 3).padding(1)));
    blocks_->push_back(torch::nn::BatchNorm2d(out));
    blocks_->push_back(torch::nn::ReLU());
    ch = out;
  }
  register_module("blocks", blocks_);

  head_ = torch::nn::Sequential(torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, ch, 3).padding(1)),
                                torch::nn::ReLU(),
                                torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, 1, 3).padding(1)),
                                torch::nn::Tanh());
  register_module("head", head_);
}

torch::Tensor ShapeGeneratorImpl::forward(const torch::Tensor& z) {
  torch::Tensor x = z.dim() == 1 ? z.unsqueeze(0) : z;
  if (x.dim() != 2 || x.size(1) != config_.latent_size) {
    throw ArgumentError("shape generator expects latent length " +
                        std::to_string(config_.latent_size) + ", got tensor of shape " +
                        c10::str(z.sizes()));
  }
  const int b = config_.base_resolution;
  x = dense_->forward(x.to(dense_->weight.dtype())).view({-1, base_channels_, b, b});
  x = torch::relu(input_norm_->forward(x));
  x = blocks_->forward(x);
  return head_->forward(x);
}

// ---------------------------------------------------------------------------
// Discriminator

ShapeDiscriminatorImpl::ShapeDiscriminatorImpl(const ShapeGanConfig& config)
    : config_(config), gen_(make_generator(0)) {
  config_.validate();
  int ch = config_.discriminator_channels;
  input_conv_ = register_module(
      "input_conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(1, ch, 3).stride(2).padding(1)));
  for (int i = 0; i < config_.derived_down_blocks(); ++i) {
    const int out = std::min(config_.max_discriminator_channels, ch * 2);
    down_convs_.push_back(register_module(
        "down_conv" + std::to_string(i),
        torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, out, 3).stride(2).padding(1))));
    down_norms_.push_back(
        register_module("down_norm" + std::to_string(i), torch::nn::BatchNorm2d(out)));
    ch = out;
  }
  head_ = register_module("head", torch::nn::Linear(ch * 4 * 4, 1));
}

void ShapeDiscriminatorImpl::reseed(std::uint64_t seed) { gen_ = make_generator(seed); }

torch::Tensor ShapeDiscriminatorImpl::dropout(const torch::Tensor& x) {
  const double p = config_.dropout_rate;
  if (!is_training() || p <= 0.0) return x;
  torch::Tensor keep;
  {
    torch::NoGradGuard no_grad;
    keep = torch::empty_like(x).bernoulli_(1.0 - p, gen_) / (1.0 - p);
  }
  return x * keep;
}

torch::Tensor ShapeDiscriminatorImpl::logits(const torch::Tensor& input, double noise_sigma) {
  torch::Tensor x = input;
  if (x.dim() == 2) x = x.unsqueeze(0).unsqueeze(0);
  if (x.dim() == 3) x = x.unsqueeze(0);
  const int r = config_.target_resolution;
  if (x.dim() != 4 || x.size(1) != 1 || x.size(2) != r || x.size(3) != r) {
    throw ArgumentError("shape discriminator expects [N,1," + std::to_string(r) + "," +
                        std::to_string(r) + "], got " + c10::str(input.sizes()));
  }
  x = x.to(input_conv_->weight.dtype());
  if (noise_sigma > 0.0) {
    torch::Tensor noise;
    {
      torch::NoGradGuard no_grad;
      noise = torch::randn(x.sizes(), gen_, x.options()) * noise_sigma;
    }
    x = x + noise;
  }
  const double slope = config_.leaky_slope;
  x = dropout(F::leaky_relu(input_conv_->forward(x), F::LeakyReLUFuncOptions().negative_slope(slope)));
  for (std::size_t i = 0; i < down_convs_.size(); ++i) {
    x = F::leaky_relu(down_convs_[i]->forward(x), F::LeakyReLUFuncOptions().negative_slope(slope));
    x = down_norms_[i]->forward(dropout(x));
  }
  return head_->forward(x.flatten(1));
}

torch::Tensor ShapeDiscriminatorImpl::forward(const torch::Tensor& x, double noise_sigma) {
  return torch::sigmoid(logits(x, noise_sigma));
}

ShapeGan ShapeGan::initialize(const ShapeGanConfig& config, std::uint64_t seed) {
  config.validate();
  ShapeGan gan;
  gan.config = config;
  gan.seed = seed;
  gan.generator = ShapeGenerator(config);
  gan.discriminator = ShapeDiscriminator(config);
  at::Generator g = make_generator(derive_seed(seed, {0x9e7}));
  initialize_parameters(*gan.generator, InitScheme::gan_normal, g);
  at::Generator d = make_generator(derive_seed(seed, {0xd15c}));
  initialize_parameters(*gan.discriminator, InitScheme::gan_normal, d);
  return gan;
}

torch::Tensor shape_generator_forward(ShapeGenerator& generator, const torch::Tensor& z) {
  if (z.dim() != 1) throw ArgumentError("expected a single latent vector");
  return generator->forward(z).squeeze(0).squeeze(0);
}

double shape_discriminator_forward(ShapeDiscriminator& discriminator, const torch::Tensor& x,
                                   double noise_sigma) {
  torch::NoGradGuard no_grad;
  return discriminator->forward(x, noise_sigma).item<double>();
}

// ---------------------------------------------------------------------------
// Training

ShapeGanTrainer::ShapeGanTrainer(ShapeGan& gan, std::vector<torch::Tensor> patches)
    : gan_(gan),
      g_opt_(gan.generator->parameters(),
             torch::optim::AdamOptions(gan.config.learning_rate)
                 .betas({gan.config.beta1, gan.config.beta2})),
      d_opt_(gan.discriminator->parameters(),
             torch::optim::AdamOptions(gan.config.learning_rate)
                 .betas({gan.config.beta1, gan.config.beta2})) {
  if (patches.empty()) throw ArgumentError("shape GAN training needs at least one patch");
  const int r = gan.config.target_resolution;
  for (auto& p : patches) {
    p = p.reshape({1, 1, p.size(-2), p.size(-1)});
    if (p.size(2) != r || p.size(3) != r) {
      throw ArgumentError("shape patch of size " + c10::str(p.sizes()) +
                          " does not match target resolution " + std::to_string(r));
    }
  }
  data_ = torch::cat(patches, 0).to(torch::kFloat32);
}

torch::Tensor ShapeGanTrainer::real_batch(std::uint64_t stream) {
  at::Generator g = make_generator(derive_seed(gan_.seed, {static_cast<std::uint64_t>(gan_.step), stream}));
  const auto idx = torch::randint(data_.size(0), {gan_.config.batch_size}, g, torch::kLong);
  return data_.index_select(0, idx);
}

torch::Tensor ShapeGanTrainer::latent_batch(std::uint64_t stream) {
  at::Generator g = make_generator(derive_seed(gan_.seed, {static_cast<std::uint64_t>(gan_.step), stream}));
  return torch::randn({gan_.config.batch_size, gan_.config.latent_size}, g);
}

double ShapeGanTrainer::discriminator_step() {
  gan_.generator->train();
  gan_.discriminator->train();
  gan_.discriminator->reseed(derive_seed(gan_.seed, {static_cast<std::uint64_t>(gan_.step), kStreamDiscD}));
  const double sigma = gan_.config.input_noise_sigma;

  const torch::Tensor real = real_batch(kStreamReal);
  torch::Tensor fake;
  {
    torch::NoGradGuard no_grad;
    fake = gan_.generator->forward(latent_batch(kStreamFakeD));
  }
  d_opt_.zero_grad();
  const auto real_logits = gan_.discriminator->logits(real, sigma);
  const auto fake_logits = gan_.discriminator->logits(fake, sigma);
  const auto loss =
      0.5 * (F::binary_cross_entropy_with_logits(real_logits, torch::ones_like(real_logits)) +
             F::binary_cross_entropy_with_logits(fake_logits, torch::zeros_like(fake_logits)));
  if (!all_finite(loss)) throw TrainingError("discriminator", gan_.step);
  loss.backward();
  d_opt_.step();
  return loss.item<double>();
}

double ShapeGanTrainer::generator_step() {
  gan_.generator->train();
  gan_.discriminator->train();
  gan_.discriminator->reseed(derive_seed(gan_.seed, {static_cast<std::uint64_t>(gan_.step), kStreamDiscG}));
  g_opt_.zero_grad();
  const auto fake = gan_.generator->forward(latent_batch(kStreamFakeG));
  const auto logits = gan_.discriminator->logits(fake, gan_.config.input_noise_sigma);
  const auto loss = F::binary_cross_entropy_with_logits(logits, torch::ones_like(logits));
  if (!all_finite(loss)) throw TrainingError("generator", gan_.step);
  loss.backward();
  g_opt_.step();
  return loss.item<double>();
}

ShapeLossRecord ShapeGanTrainer::step() {
  ShapeLossRecord rec;
  rec.step = gan_.step + 1;
  rec.d_loss = discriminator_step();
  rec.g_loss = generator_step();
  ++gan_.step;
  history_.push_back(rec);
  return rec;
}

namespace {

void write_gan(torch::serialize::OutputArchive& archive, const ShapeGan& gan) {
  torch::serialize::OutputArchive g, d;
  gan.generator->save(g);
  gan.discriminator->save(d);
  archive.write("generator", g);
  archive.write("discriminator", d);
  archive_write(archive, "config", gan.config.to_kv().dump());
  archive_write(archive, "step", gan.step);
  archive_write(archive, "seed", std::bit_cast<std::int64_t>(gan.seed));
  archive_write(archive, "kind", std::string("shape_gan"));
}

}  // namespace

void ShapeGanTrainer::save(const fs::path& path) const {
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

void ShapeGanTrainer::load_optimizer_state(const fs::path& path) {
  torch::serialize::InputArchive archive;
  load_archive(archive, path.string());
  torch::serialize::InputArchive g_opt, d_opt;
  if (archive.try_read("generator_optimizer", g_opt)) g_opt_.load(g_opt);
  if (archive.try_read("discriminator_optimizer", d_opt)) d_opt_.load(d_opt);
}

ShapeGanTrainingResult train_shape_gan(const std::vector<torch::Tensor>& patches,
                                       const ShapeGanConfig& config, std::int64_t steps,
                                       std::uint64_t seed) {
  if (patches.empty()) throw ArgumentError("shape GAN training needs at least one patch");
  if (steps < 0) throw ArgumentError("steps must be >= 0");
  ShapeGanTrainingResult result{ShapeGan::initialize(config, seed), {}};
  ShapeGanTrainer trainer(result.gan, patches);
  for (std::int64_t i = 0; i < steps; ++i) trainer.step();
  result.history = trainer.history();
  return result;
}

ShapeGanTrainingResult resume_shape_gan(const fs::path& checkpoint,
                                        const std::vector<torch::Tensor>& patches,
                                        std::int64_t steps) {
  ShapeGanTrainingResult result{load_shape_gan(checkpoint), {}};
  ShapeGanTrainer trainer(result.gan, patches);
  trainer.load_optimizer_state(checkpoint);
  for (std::int64_t i = 0; i < steps; ++i) trainer.step();
  result.history = trainer.history();
  return result;
}

std::vector<BinaryShape> sample_shapes(ShapeGan& gan, int n, double threshold,
                                       std::uint64_t seed) {
  if (n < 1) throw ArgumentError("sample count must be >= 1");
  if (!(threshold > -1.0 && threshold < 1.0)) throw ArgumentError("threshold must lie in (-1,1)");
  const bool was_training = gan.generator->is_training();
  gan.generator->eval();
  torch::Tensor out;
  {
    torch::NoGradGuard no_grad;
    at::Generator g = make_generator(seed);
    const auto z = torch::randn({n, gan.config.latent_size}, g);
    out = gan.generator->forward(z).to(torch::kFloat32);
  }
  gan.generator->train(was_training);

  std::vector<BinaryShape> shapes;
  for (int i = 0; i < n; ++i) {
    const torch::Tensor raster = out[i][0];
    BinaryShape s;
    s.values = chw_to_mat((raster > threshold).to(torch::kFloat32));
    s.values.convertTo(s.values, CV_8U);
    s.soft_source = chw_to_mat((raster + 1.0) * 0.5);
    shapes.push_back(std::move(s));
  }
  return shapes;
}

std::string shape_checkpoint_name(std::int64_t step) {
  return "shape_gan_step" + std::to_string(step) + ".ckpt";
}

void save_shape_gan(const ShapeGan& gan, const fs::path& path) {
  torch::serialize::OutputArchive archive;
  write_gan(archive, gan);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  archive.save_to(path.string());
}

ShapeGan load_shape_gan(const fs::path& path) {
  torch::serialize::InputArchive archive;
  load_archive(archive, path.string());
  if (archive_read_string(archive, "kind") != "shape_gan") {
    throw FormatError(path.string() + " is not a shape GAN checkpoint");
  }
  const auto config = ShapeGanConfig::from_kv(KeyValueConfig::parse(archive_read_string(archive, "config")));
  ShapeGan gan = ShapeGan::initialize(config, std::bit_cast<std::uint64_t>(archive_read_int(archive, "seed")));
  gan.step = archive_read_int(archive, "step");
  torch::serialize::InputArchive g, d;
  if (!archive.try_read("generator", g) || !archive.try_read("discriminator", d)) {
    throw FormatError(path.string() + " lacks network weights");
  }
  gan.generator->load(g);
  gan.discriminator->load(d);
  return gan;
}

void write_shape_loss_csv(const fs::path& path, const std::vector<ShapeLossRecord>& history,
                          bool append) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const bool header = !append || !fs::exists(path);
  std::ofstream out(path, append ? std::ios::binary | std::ios::app : std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (header) out << "step,d_loss,g_loss\n";
  char line[128];
  for (const auto& r : history) {
    std::snprintf(line, sizeof(line), "%lld,%.9g,%.9g\n", static_cast<long long>(r.step), r.d_loss,
                  r.g_loss);
    out << line;
  }
}

}  // namespace agrisynth
