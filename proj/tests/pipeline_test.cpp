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

#include <gtest/gtest.h>

#include <sstream>

#include "agrisynth/errors.hpp"
#include "agrisynth/pipeline.hpp"
#include "test_support.hpp"

namespace agrisynth {
namespace {

namespace fs = std::filesystem;
using testing::Disc;

KeyValueConfig base_config(const fs::path& data, const fs::path& out) {
  KeyValueConfig kv;
  kv.set("dataset.root", data.string());
  kv.set("dataset.split_counts", "4,2,2");
  kv.set("dataset.seed", "3");
  kv.set("dataset.patch_size", "16");
  kv.set("dataset.blur_kernel", "3");
  kv.set("output.dir", out.string());
  return kv;
}

// Scene i has (i % 3) + 1 crops with a fully framed 16×16 window plus one crop
// at the top border that has none.
int write_disc_dataset(const fs::path& root, std::map<std::string, int>& framed) {
  const std::vector<Disc> inside{{12, 12, 3}, {40, 30, 3}, {20, 36, 2}};
  for (int i = 0; i < 8; ++i) {
    std::vector<Disc> crops(inside.begin(), inside.begin() + (i % 3) + 1);
    crops.push_back({2, 24, 2});
    const std::string id = "d" + std::to_string(i);
    save_scene(root, testing::disc_scene(id, 48, 48, crops, {{30, 8, 3}}, 50 + i));
    framed[id] = (i % 3) + 1;
  }
  return 8;
}

TEST(PipelineConfig, DefaultsListEveryKeyAndRequiredKeysAreEnforced) {
  const auto d = PipelineConfig::defaults();
  for (const char* key : {"dataset.root", "dataset.split_counts", "dataset.seed", "output.dir",
                          "shape_gan.steps", "style_gan.steps", "composer.fraction", "eval.variants"}) {
    EXPECT_TRUE(d.contains(key)) << key;
  }
  testing::TempDir t("cfg");
  auto kv = base_config(t / "data", t / "out");
  EXPECT_NO_THROW(PipelineConfig::resolve(kv));
  for (const char* key : {"dataset.root", "dataset.seed", "output.dir"}) {
    auto missing = KeyValueConfig();
    for (const auto& [k, v] : kv.entries()) {
      if (k != key) missing.set(k, v);
    }
    try {
      PipelineConfig::resolve(missing);
      FAIL() << key;
    } catch (const ArgumentError& e) {
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
    }
  }
}

TEST(PipelineConfig, UnknownKeyAndBadValuesAreRejected) {
  testing::TempDir t("cfg2");
  auto kv = base_config(t / "data", t / "out");
  kv.set("shape_gan.learnig_rate", "0.1");
  try {
    PipelineConfig::resolve(kv);
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("shape_gan.learnig_rate"), std::string::npos);
  }
  kv = base_config(t / "data", t / "out");
  kv.set("composer.fraction", "1.5");
  EXPECT_THROW(PipelineConfig::resolve(kv), ArgumentError);
  kv = base_config(t / "data", t / "out");
  kv.set("eval.variants", "original,fancy");
  EXPECT_THROW(PipelineConfig::resolve(kv), ArgumentError);
  kv = base_config(t / "data", t / "out");
  kv.set("dataset.seed", "abc");
  EXPECT_THROW(PipelineConfig::resolve(kv), FormatError);
}

TEST(PipelineConfig, SectionSeedsDefaultToDatasetSeedAndResolutionsFollowPatchSize) {
  testing::TempDir t("cfg3");
  auto kv = base_config(t / "data", t / "out");
  kv.set("style_gan.seed", "99");
  const auto c = PipelineConfig::resolve(kv);
  EXPECT_EQ(c.shape_seed, 3u);
  EXPECT_EQ(c.style_seed, 99u);
  EXPECT_EQ(c.composer_seed, 3u);
  EXPECT_EQ(c.eval_seed, 3u);
  EXPECT_EQ(c.shape.target_resolution, 16);
  EXPECT_EQ(c.style.resolution, 16);
  // The resolved dump resolves to itself.
  EXPECT_EQ(PipelineConfig::resolve(c.resolved).resolved.dump(), c.resolved.dump());
}

TEST(PipelineCommands, NamesAndVariants) {
  for (const char* name : {"prepare", "train-shape", "train-style", "compose", "augment-baseline", "eval", "report"}) {
    EXPECT_EQ(to_string(parse_command(name)), name);
  }
  EXPECT_THROW(parse_command("train"), ArgumentError);
  EXPECT_EQ(variant_display_name("original"), "Original");
  EXPECT_EQ(variant_display_name("basic"), "Basic augmentation");
  EXPECT_EQ(variant_display_name("shape_style"), "Shape and Style augmentation");
  EXPECT_THROW(variant_display_name("nope"), ArgumentError);
}

TEST(PipelineCommands, LatestCheckpointPicksHighestStep) {
  testing::TempDir t("ckpt");
  EXPECT_TRUE(latest_checkpoint(t.path(), "shape_gan_step").empty());
  for (const char* f : {"shape_gan_step5.ckpt", "shape_gan_step40.ckpt", "shape_gan_step7.ckpt", "style_gan_step90.ckpt"}) {
    std::ofstream(t / f) << "x";
  }
  EXPECT_EQ(latest_checkpoint(t.path(), "shape_gan_step").filename(), "shape_gan_step40.ckpt");
  EXPECT_TRUE(latest_checkpoint(t / "absent", "shape_gan_step").empty());
}

TEST(PipelineCommands, PrerequisitesNameTheProducingCommand) {
  testing::TempDir t("prereq");
  const auto c = PipelineConfig::resolve(base_config(t / "data", t / "out"));
  const std::pair<Command, const char*> cases[] = {{Command::train_shape, "prepare"},
                                                   {Command::train_style, "prepare"},
                                                   {Command::compose, "prepare"},
                                                   {Command::eval, "prepare"},
                                                   {Command::report, "eval"}};
  for (const auto& [cmd, producer] : cases) {
    try {
      check_prerequisites(cmd, c);
      FAIL() << to_string(cmd);
    } catch (const ArgumentError& e) {
      EXPECT_NE(std::string(e.what()).find(producer), std::string::npos) << e.what();
    }
  }
}

TEST(PipelinePrepare, PatchCountMatchesFramedComponentsAndIsDeterministic) {
  testing::TempDir data("prep_data"), out_a("prep_a"), out_b("prep_b");
  std::map<std::string, int> framed;
  write_disc_dataset(data.path(), framed);
  std::ostringstream log;
  run_command(Command::prepare, PipelineConfig::resolve(base_config(data.path(), out_a.path())), log);
  run_command(Command::prepare, PipelineConfig::resolve(base_config(data.path(), out_b.path())), log);

  const PipelinePaths paths{out_a.path()};
  const SplitManifest m = read_manifest(paths.manifest());
  int expected = 0;
  for (const auto& id : m.train) expected += framed.at(id);
  const std::string index = testing::read_bytes(paths.patch_index());
  EXPECT_EQ(std::count(index.begin(), index.end(), '\n'), expected);

  const auto a = testing::tree_bytes(out_a.path());
  EXPECT_EQ(a, testing::tree_bytes(out_b.path()));
  EXPECT_EQ(testing::tree_bytes(paths.dataset("original")).size(), 8u * 3u + 1u);
}

TEST(PipelinePrepare, EmptyDatasetIsARuntimeError) {
  testing::TempDir data("empty"), out("empty_out");
  for (const char* sub : {"rgb", "nir", "mask"}) fs::create_directories(data / sub);
  std::ostringstream log;
  try {
    run_command(Command::prepare, PipelineConfig::resolve(base_config(data.path(), out.path())), log);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("0 patches"), std::string::npos);
  }
}

TEST(PipelineRun, AllCommandsOnATinyDataset) {
  testing::TempDir data("run_data"), out("run_out");
  std::map<std::string, int> framed;
  write_disc_dataset(data.path(), framed);
  auto kv = base_config(data.path(), out.path());
  kv.set("shape_gan.steps", "4");
  kv.set("shape_gan.checkpoint_every", "2");
  kv.set("shape_gan.generator_channels", "16");
  kv.set("shape_gan.batch_size", "2");
  kv.set("style_gan.steps", "2");
  kv.set("style_gan.style_dim", "4");
  kv.set("style_gan.generator_channels", "16");
  kv.set("style_gan.spade_hidden", "4");
  kv.set("style_gan.encoder_channels", "4");
  kv.set("style_gan.discriminator_channels", "4");
  kv.set("style_gan.perceptual_width_divisor", "16");
  kv.set("eval.variants", "original,basic,shape_style");
  kv.set("eval.epochs", "1");
  kv.set("eval.base_channels", "4");
  const auto c = PipelineConfig::resolve(kv);
  std::ostringstream log;
  for (Command cmd : {Command::prepare, Command::train_shape, Command::train_style, Command::compose,
                      Command::augment_baseline, Command::eval}) {
    ASSERT_NO_THROW(run_command(cmd, c, log)) << to_string(cmd) << "\n" << log.str();
  }
  const PipelinePaths paths{out.path()};
  EXPECT_TRUE(fs::exists(paths.checkpoints() / shape_checkpoint_name(2)));
  EXPECT_TRUE(fs::exists(paths.checkpoints() / shape_checkpoint_name(4)));
  EXPECT_TRUE(fs::exists(paths.checkpoints() / style_checkpoint_name(2)));
  const std::string shape_log = testing::read_bytes(paths.shape_loss_csv());
  EXPECT_EQ(std::count(shape_log.begin(), shape_log.end(), '\n'), 5);
  EXPECT_TRUE(fs::exists(paths.dataset("shape_style") / "manifest.txt"));
  const std::string csv = testing::read_bytes(paths.reports() / "comparison.csv");
  EXPECT_NE(csv.find("Original,"), std::string::npos);
  EXPECT_NE(csv.find("Basic augmentation,"), std::string::npos);
  EXPECT_NE(csv.find("Shape and Style augmentation,"), std::string::npos);

  // Resuming continues from the last checkpoint and keeps one row per step.
  kv.set("shape_gan.steps", "6");
  kv.set("shape_gan.resume", "true");
  run_command(Command::train_shape, PipelineConfig::resolve(kv), log);
  const std::string resumed = testing::read_bytes(paths.shape_loss_csv());
  EXPECT_EQ(std::count(resumed.begin(), resumed.end(), '\n'), 7);
  EXPECT_EQ(resumed.substr(0, shape_log.size()), shape_log);
  EXPECT_TRUE(fs::exists(paths.checkpoints() / shape_checkpoint_name(6)));

  std::ostringstream report;
  run_command(Command::report, c, report);
  EXPECT_NE(report.str().find("Augmentation Strategy"), std::string::npos);
}

}  // namespace
}  // namespace agrisynth
