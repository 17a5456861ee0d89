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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Usage: agrisynth_acceptance --cli <path> [AC1 ...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "agrisynth/augment.hpp"
#include "agrisynth/composer.hpp"
#include "agrisynth/dataset.hpp"
#include "agrisynth/nn_util.hpp"
#include "agrisynth/segmentation.hpp"
#include "agrisynth/shape_gan.hpp"
#include "agrisynth/style_gan.hpp"
#include "agrisynth/style_losses.hpp"
#include "agrisynth/toy_data.hpp"
#include "composer_fixtures.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace agrisynth;
using testing::fixture;

namespace {

std::string g_cli;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double value(const torch::Tensor& t) { return t.item<double>(); }

// ---------------------------------------------------------------------------

Outcome ac1_loss_oracles() {
  Outcome o;
  std::mt19937_64 rng(101);
  int kl = 0, adv = 0, fm = 0, vgg = 0;
  auto near = [&](double a, double b, const std::string& what) {
    o.require(std::abs(a - b) <= 1e-6, what + ": " + std::to_string(a) + " vs " + std::to_string(b));
  };

  // KL: closed forms, then random fixtures against the loop oracle.
  for (double c : {0.0, 0.5, -1.5}) {
    const StyleCode code{torch::full({2, 8}, c, torch::kFloat64), torch::zeros({2, 8}, torch::kFloat64)};
    near(value(loss_kl(code)), 0.5 * 8 * c * c, "kl mean-only");
    ++kl;
  }
  for (double l : {-1.0, 2.0}) {
    const StyleCode code{torch::zeros({6}, torch::kFloat64), torch::full({6}, l, torch::kFloat64)};
    near(value(loss_kl(code)), 0.5 * 6 * (std::exp(l) - 1 - l), "kl variance-only");
    ++kl;
  }
  for (int i = 0; i < 7; ++i) {
    const StyleCode code{fixture(rng, {1 + i % 3, 5 + i}), fixture(rng, {1 + i % 3, 5 + i}, -3, 2)};
    near(value(loss_kl(code)), testing::kl_oracle(code.mu, code.logvar), "kl random");
    ++kl;
  }

  // Hinge: constant logit maps have the closed form max(0,1-r) + max(0,1+f).
  for (auto [r, f] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {2.0, -3.0}, {0.25, 0.5}, {-1.0, 1.0}}) {
    const std::vector<torch::Tensor> real{torch::full({1, 1, 4, 4}, r, torch::kFloat64),
                                          torch::full({1, 1, 2, 2}, r, torch::kFloat64)};
    const std::vector<torch::Tensor> fake{torch::full({1, 1, 4, 4}, f, torch::kFloat64),
                                          torch::full({1, 1, 2, 2}, f, torch::kFloat64)};
    near(value(loss_adversarial(real, fake, AdversarialSide::discriminator)),
         std::max(0.0, 1 - r) + std::max(0.0, 1 + f), "hinge d const");
    near(value(loss_adversarial(real, fake, AdversarialSide::generator)), -f, "hinge g const");
    ++adv;
  }
  for (int i = 0; i < 8; ++i) {
    std::vector<torch::Tensor> real, fake;
    for (int k = 0; k < 1 + i % 3; ++k) {
      real.push_back(fixture(rng, {2, 1, 8 >> k, 8 >> k}));
      fake.push_back(fixture(rng, {2, 1, 8 >> k, 8 >> k}));
    }
    near(value(loss_adversarial(real, fake, AdversarialSide::discriminator)), testing::hinge_d_oracle(real, fake),
         "hinge d random");
    near(value(loss_adversarial({}, fake, AdversarialSide::generator)), testing::hinge_g_oracle(fake),
         "hinge g random");
    ++adv;
  }

  // Feature matching: constant maps differ by |a - b| per tap.
  for (auto [a, b] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {1.0, -1.0}, {0.3, 0.8}}) {
    const FeatureStack real{{torch::full({1, 2, 4, 4}, a, torch::kFloat64), torch::full({1, 3, 2, 2}, a, torch::kFloat64)},
                            {torch::full({1, 2, 2, 2}, a, torch::kFloat64)}};
    const FeatureStack fake{{torch::full({1, 2, 4, 4}, b, torch::kFloat64), torch::full({1, 3, 2, 2}, b, torch::kFloat64)},
                            {torch::full({1, 2, 2, 2}, b, torch::kFloat64)}};
    near(value(loss_feature_matching(real, fake)), 3 * std::abs(a - b), "fm const");
    ++fm;
  }
  for (int i = 0; i < 8; ++i) {
    const auto real = testing::feature_fixture(rng, 1 + i % 2, 2 + i % 3, 16);
    const auto fake = testing::feature_fixture(rng, 1 + i % 2, 2 + i % 3, 16);
    near(value(loss_feature_matching(real, fake)), testing::fm_oracle(real, fake), "fm random");
    ++fm;
  }

  // Perceptual loss with the stub extractor: constant images give
  // sum_i 2^-i |tanh(i b) - tanh(i a)|.
  testing::StubExtractor stub;
  for (auto [a, b] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {-0.5, 0.5}, {0.2, 0.9}}) {
    const auto real = torch::full({1, 4, 16, 16}, a, torch::kFloat64);
    const auto fake = torch::full({1, 4, 16, 16}, b, torch::kFloat64);
    double expected = 0;
    for (int i = 1; i <= 5; ++i) expected += std::ldexp(1.0, -i) * std::abs(std::tanh(i * b) - std::tanh(i * a));
    near(value(loss_vgg(real, fake, stub)), expected, "vgg const");
    ++vgg;
  }
  for (int i = 0; i < 8; ++i) {
    const auto real = fixture(rng, {1 + i % 2, 4, 16, 16}, -1, 1);
    const auto fake = fixture(rng, {1 + i % 2, 4, 16, 16}, -1, 1);
    near(value(loss_vgg(real, fake, stub)), testing::vgg_stub_oracle(real, fake), "vgg random");
    ++vgg;
  }
  o.require(kl >= 10 && adv >= 10 && fm >= 10 && vgg >= 10, "fewer than 10 fixtures");
  if (o.pass) {
    o.detail = "fixtures kl=" + std::to_string(kl) + " adv=" + std::to_string(adv) + " fm=" + std::to_string(fm) +
               " vgg=" + std::to_string(vgg) + ", tol 1e-6";
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome ac2_gradient_checks() {
  Outcome o;
  std::mt19937_64 rng(202);
  double worst = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = fixture(rng, {2, 6}), lv = fixture(rng, {2, 6});
    const double a = testing::gradient_agreement(
        [](const std::vector<torch::Tensor>& in) { return loss_kl({in[0], in[1]}); }, {mu, lv}, 1e-4, 1e-4);

    const auto r0 = fixture(rng, {2, 1, 4, 4}), r1 = fixture(rng, {2, 1, 2, 2});
    const auto f0 = fixture(rng, {2, 1, 4, 4}), f1 = fixture(rng, {2, 1, 2, 2});
    const double b = testing::gradient_agreement(
        [](const std::vector<torch::Tensor>& in) {
          return loss_adversarial({in[0], in[1]}, {in[2], in[3]}, AdversarialSide::discriminator);
        },
        {r0, r1, f0, f1}, 1e-4, 1e-4);
    const double g = testing::gradient_agreement(
        [](const std::vector<torch::Tensor>& in) {
          return loss_adversarial({}, {in[0], in[1]}, AdversarialSide::generator);
        },
        {f0, f1}, 1e-4, 1e-4);

    const auto real = testing::feature_fixture(rng, 2, 2, 4);
    const auto fake = testing::feature_fixture(rng, 2, 2, 4);
    const double c = testing::gradient_agreement(
        [&real](const std::vector<torch::Tensor>& in) {
          return loss_feature_matching(real, {{in[0], in[1]}, {in[2], in[3]}});
        },
        {fake[0][0], fake[0][1], fake[1][0], fake[1][1]}, 1e-4, 1e-4);

    for (double v : {a, b, g, c}) worst = std::min(worst, v);
    o.require(a >= 0.95, "kl agreement " + std::to_string(a) + " in trial " + std::to_string(trial));
    o.require(b >= 0.95 && g >= 0.95, "adversarial agreement in trial " + std::to_string(trial));
    o.require(c >= 0.95, "feature matching agreement " + std::to_string(c) + " in trial " + std::to_string(trial));
  }
  if (o.pass) o.detail = "20 trials, h=1e-4, min agreement " + std::to_string(worst);
  return o;
}

// ---------------------------------------------------------------------------

Outcome ac3_iou_oracle() {
  Outcome o;
  std::mt19937_64 rng(303);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const cv::Mat gt = testing::random_labels(rng, 16, 16, 3);
    const cv::Mat pred = testing::random_labels(rng, 16, 16, 3);
    ConfusionAccumulator acc(3);
    acc.update(gt, pred);
    const IoUReport report = iou_from_confusion(acc);
    const auto oracle = testing::brute_force_iou(gt, pred, 3);
    double sum = 0;
    int n = 0;
    for (int k = 0; k < 3; ++k) {
      o.require(oracle[k].has_value() == (report.per_class.count(k) == 1), "class presence differs");
      if (!oracle[k] || !report.per_class.count(k)) continue;
      worst = std::max(worst, std::abs(report.per_class.at(k) - *oracle[k]));
      sum += *oracle[k];
      ++n;
    }
    worst = std::max(worst, std::abs(report.miou - sum / n));
  }
  o.require(worst <= 1e-12, "max deviation " + std::to_string(worst));
  if (o.pass) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "100 pairs, max deviation %.3g", worst);
    o.detail = buf;
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome ac4_composition() {
  Outcome o;
  testing::StubSynthesizer synth(testing::kFixturePatch);
  testing::TempDir root("acc_comp");
  SplitManifest manifest;
  int replaced = 0;
  for (int i = 0; i < 20; ++i) {
    const MultispectralScene scene = testing::composition_scene(i);
    const auto instances = find_replaceable_instances(scene, testing::kFixturePatch);
    const auto a = compose_scene(scene, instances, synth, 500 + i);
    const auto b = compose_scene(scene, instances, synth, 500 + i);
    replaced += static_cast<int>(a.provenance.size());
    const auto check = testing::check_composition(scene, a, synth);
    o.require(check.outside_identical, scene.scene_id + ": pixels outside windows changed");
    o.require(check.crop_support_equal, scene.scene_id + ": crop labels differ from shape support");
    o.require(check.weed_erased, scene.scene_id + ": weed label inside synthetic crop");
    o.require(check.mask_valid, scene.scene_id + ": invalid mask value");
    o.require(testing::mats_equal(a.scene.rgb, b.scene.rgb) && testing::mats_equal(a.scene.nir, b.scene.nir) &&
                  testing::mats_equal(a.scene.mask, b.scene.mask),
              scene.scene_id + ": same seed, different output");
    save_scene(root.path(), scene);
    (i < 14 ? manifest.train : i < 17 ? manifest.val : manifest.test).push_back(scene.scene_id);
  }
  o.require(replaced > 0, "no instance replaced");

  testing::TempDir zero("acc_zero"), one("acc_one"), two("acc_two");
  build_synthetic_dataset(manifest, root.path(), synth, zero.path(), 0.0, 7);
  o.require(testing::tree_bytes(zero.path()) == testing::tree_bytes(root.path()), "fraction=0 output differs");
  build_synthetic_dataset(manifest, root.path(), synth, one.path(), 0.5, 7, {}, 1);
  build_synthetic_dataset(manifest, root.path(), synth, two.path(), 0.5, 7, {}, 3);
  o.require(testing::tree_bytes(one.path()) == testing::tree_bytes(two.path()), "seeded dataset not byte-identical");
  if (o.pass) o.detail = "20 scenes, " + std::to_string(replaced) + " instances replaced";
  return o;
}

// ---------------------------------------------------------------------------

ShapeGanConfig ac5_config() {
  ShapeGanConfig c;
  c.target_resolution = 64;
  c.generator_channels = 128;
  c.discriminator_channels = 16;
  return c;
}

Outcome ac5_shape_gan() {
  Outcome o;
  std::vector<torch::Tensor> patches;
  SplitMixRng rng(505);
  for (int i = 0; i < 16; ++i) {
    const cv::Mat m = ellipse_mask(64, 32 + rng.uniform(-4, 4), 32 + rng.uniform(-4, 4), rng.uniform(10, 24),
                                   rng.uniform(10, 24), rng.uniform(0, 180));
    patches.push_back(mat_to_chw(blur_mask(m, 15))[0] * 2.0 - 1.0);
  }
  auto a = train_shape_gan(patches, ac5_config(), 200, 55);
  auto b = train_shape_gan(patches, ac5_config(), 200, 55);
  o.require(a.history.size() == 200, "expected 200 log rows");
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    o.require(std::isfinite(a.history[i].d_loss) && std::isfinite(a.history[i].g_loss),
              "non-finite loss at step " + std::to_string(i + 1));
    o.require(a.history[i].d_loss == b.history[i].d_loss && a.history[i].g_loss == b.history[i].g_loss,
              "seeded runs diverge at step " + std::to_string(i + 1));
  }
  double min_std = 1e9;
  for (const auto& s : sample_shapes(a.gan, 16, 0.0, 5)) {
    cv::Scalar mean, stddev;
    cv::meanStdDev(*s.soft_source, mean, stddev);
    min_std = std::min(min_std, stddev[0]);
  }
  o.require(min_std > 0.01, "collapsed sample, std " + std::to_string(min_std));
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "final d=%.4f g=%.4f, min sample std %.4f, runs identical",
                  a.history.back().d_loss, a.history.back().g_loss, min_std);
    o.detail = buf;
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome ac6_style_gan() {
  Outcome o;
  ToySceneOptions opts;
  opts.rows = 96;
  opts.cols = 96;
  const MultispectralScene scene = make_toy_scene("pair", 606, opts);
  const auto patches = extract_crop_patches(scene, 64);
  if (patches.empty()) {
    o.require(false, "toy scene has no framed crop");
    return o;
  }
  const Patch& p = patches.front();
  StylePair pair{condition_from_mask(cv::Mat(p.mask == kCrop) / 255), four_channel_from(p.rgb, p.nir)};

  StyleGanConfig c;
  c.resolution = 64;
  c.style_dim = 64;
  c.generator_channels = 128;
  c.spade_hidden = 32;
  c.encoder_channels = 16;
  c.discriminator_channels = 32;
  c.perceptual_width_divisor = 4;
  StyleGan gan = StyleGan::initialize(c, 66);
  const auto perceptual_before = snapshot_parameters(*gan.perceptual);
  StyleGanTrainer trainer(gan, {pair});
  double at10 = 0, at300 = 0;
  for (int step = 1; step <= 300; ++step) {
    const auto rec = trainer.step();
    if (!(std::isfinite(rec.d_loss) && std::isfinite(rec.g_adv))) {
      o.require(false, "non-finite loss at step " + std::to_string(step));
      return o;
    }
    if (step == 10) at10 = trainer.reconstruction_error();
  }
  at300 = trainer.reconstruction_error();
  o.require(at300 <= 0.7 * at10, "reconstruction error " + std::to_string(at300) + " vs step-10 " + std::to_string(at10));
  o.require(parameters_equal(*gan.perceptual, perceptual_before), "perceptual parameters changed");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "recon error step10=%.4f step300=%.4f (-%.0f%%), perceptual frozen", at10, at300,
                  100.0 * (1.0 - at300 / at10));
    o.detail = buf;
  }
  return o;
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " >> \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string f;
  while (std::getline(s, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Outcome ac7_end_to_end() {
  Outcome o;
  if (g_cli.empty() || !fs::exists(g_cli)) {
    o.require(false, "CLI binary not found (pass --cli)");
    return o;
  }
  testing::TempDir work("acc_e2e");
  const fs::path data = work / "toy", out = work / "run", log = work / "log.txt";
  const fs::path cfg = work / "toy.cfg";
  {
    std::ofstream f(cfg);
    f << "dataset.root = " << data.string() << "\n"
      << "dataset.split_counts = 12,4,4\n"
      << "dataset.seed = 1\n"
      << "dataset.patch_size = 64\n"
      << "shape_gan.steps = 200\n"
      << "shape_gan.generator_channels = 128\n"
      << "shape_gan.discriminator_channels = 16\n"
      << "shape_gan.augment_copies = 1\n"
      << "style_gan.steps = 300\n"
      << "style_gan.style_dim = 64\n"
      << "style_gan.generator_channels = 128\n"
      << "style_gan.spade_hidden = 32\n"
      << "style_gan.encoder_channels = 16\n"
      << "style_gan.discriminator_channels = 32\n"
      << "style_gan.perceptual_width_divisor = 4\n"
      << "composer.fraction = 0.5\n"
      << "eval.variants = original,basic,shape_style\n"
      << "eval.channels = rgb\n"
      << "eval.base_channels = 8\n"
      << "eval.epochs = 20\n"
      << "eval.batch_size = 2\n"
      << "output.dir = " << out.string() << "\n";
  }
  const int toy = run_cli("toy-data --out \"" + data.string() + "\" --count 20 --seed 1", log);
  o.require(toy == 0, "toy-data exited " + std::to_string(toy));
  for (const char* cmd : {"prepare", "train-shape", "train-style", "compose", "augment-baseline", "eval"}) {
    if (!o.pass) break;
    const int code = run_cli(std::string(cmd) + " -c \"" + cfg.string() + "\"", log);
    o.require(code == 0, std::string(cmd) + " exited " + std::to_string(code) + ": " + testing::read_bytes(log));
  }
  if (!o.pass) return o;

  const fs::path csv_path = out / "reports" / "comparison.csv";
  const fs::path table_path = out / "reports" / "comparison.txt";
  o.require(fs::exists(csv_path) && fs::exists(table_path), "comparison report missing");
  if (!o.pass) return o;
  const std::string table = testing::read_bytes(table_path);
  for (const char* col : {"mIoU", "Crop", "Weed"}) {
    o.require(table.find(col) != std::string::npos, std::string("table lacks column ") + col);
  }
  std::istringstream csv(testing::read_bytes(csv_path));
  std::string line;
  std::getline(csv, line);
  o.require(line == "variant,miou,iou_soil,iou_crop,iou_weed", "unexpected CSV header " + line);
  std::map<std::string, std::vector<std::string>> rows;
  while (std::getline(csv, line)) {
    const auto f = split_csv(line);
    if (!f.empty()) rows[f[0]] = f;
  }
  std::string summary;
  for (const char* name : {"Original", "Basic augmentation", "Shape and Style augmentation"}) {
    o.require(rows.count(name) == 1, std::string("missing row ") + name);
    if (!rows.count(name)) continue;
    const auto& f = rows[name];
    o.require(f.size() == 5, std::string("malformed row ") + name);
    for (std::size_t i = 1; i < f.size(); ++i) {
      if (f[i].empty()) continue;
      const double v = std::stod(f[i]);
      o.require(v >= 0.0 && v <= 1.0, std::string("IoU out of range in ") + name);
    }
    o.require(!f[1].empty() && !f[3].empty() && !f[4].empty(), std::string("missing mIoU/Crop/Weed in ") + name);
    summary += std::string(summary.empty() ? "" : ", ") + name + " mIoU " + f[1];
  }
  if (o.pass) o.detail = summary;
  return o;
}

// ---------------------------------------------------------------------------

Outcome ac8_data_ops() {
  Outcome o;
  for (int v : {0, 1}) {
    const cv::Mat m(40, 40, CV_8UC1, cv::Scalar(v));
    const cv::Mat b = blur_mask(m, 15);
    double lo, hi;
    cv::minMaxLoc(b, &lo, &hi);
    o.require(lo == v && hi == v, "blur_mask changed constant " + std::to_string(v));
  }
  cv::Mat endpoints(1, 2, CV_8UC1);
  endpoints.at<std::uint8_t>(0, 0) = 0;
  endpoints.at<std::uint8_t>(0, 1) = 255;
  const cv::Mat n = normalize(endpoints);
  o.require(n.at<float>(0, 0) == -1.0f && n.at<float>(0, 1) == 1.0f, "normalize endpoints");

  for (int i = 0; i < 5; ++i) {
    ToySceneOptions opts;
    opts.rows = 48 + 8 * i;
    opts.cols = 64;
    opts.anchor_window = 32;
    const MultispectralScene s = make_toy_scene("ops" + std::to_string(i), 800 + i, opts);
    auto same = [](const MultispectralScene& a, const MultispectralScene& b) {
      return testing::mats_equal(a.rgb, b.rgb) && testing::mats_equal(a.nir, b.nir) && testing::mats_equal(a.mask, b.mask);
    };
    for (FlipAxis axis : {FlipAxis::horizontal, FlipAxis::vertical}) {
      GeometricParams p;
      p.flip_axis = axis;
      o.require(same(basic_augment(basic_augment(s, GeometricOp::flip, p), GeometricOp::flip, p), s),
                "flip is not an involution");
    }
    GeometricParams zero;
    zero.angle_degrees = 0.0;
    o.require(same(basic_augment(s, GeometricOp::rotate, zero), s), "rotate 0 is not the identity");
    for (TextureOp op : {TextureOp::gaussian_blur, TextureOp::median_blur, TextureOp::noise, TextureOp::contrast,
                         TextureOp::brightness}) {
      TextureParams p;
      p.kernel_size = 5;
      p.noise_sigma = 12.0;
      p.contrast = 1.4;
      p.brightness = 25.0;
      o.require(testing::mats_equal(texture_augment(s, op, p).mask, s.mask), "texture op altered the mask");
    }
  }
  if (o.pass) o.detail = "blur, normalize, flip, rotate-0, texture mask checks exact";
  return o;
}

struct Criterion {
  std::string id;
  std::string title;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else {
      selected.push_back(arg);
    }
  }
  set_deterministic(true);

  const std::vector<Criterion> criteria{
      {"AC1", "loss oracles", 10, ac1_loss_oracles},
      {"AC2", "gradient checks", 60, ac2_gradient_checks},
      {"AC3", "IoU oracle equivalence", 5, ac3_iou_oracle},
      {"AC4", "composition invariants", 30, ac4_composition},
      {"AC5", "shape GAN smoke", 600, ac5_shape_gan},
      {"AC6", "style GAN overfit", 900, ac6_style_gan},
      {"AC7", "end-to-end pipeline", 2700, ac7_end_to_end},
      {"AC8", "data ops", 5, ac8_data_ops},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > c.limit_seconds) {
      o.pass = false;
      o.detail = "exceeded time limit of " + std::to_string(static_cast<int>(c.limit_seconds)) + " s";
    }
    char timing[64];
    std::snprintf(timing, sizeof(timing), "%.1fs/%.0fs", secs, c.limit_seconds);
    std::cout << c.id << " " << (o.pass ? "PASS" : "FAIL") << " [" << c.title << "] (" << timing << ") " << o.detail
              << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
