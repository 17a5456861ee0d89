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

#include "agrisynth/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

#include "agrisynth/augment.hpp"
#include "agrisynth/composer.hpp"
#include "agrisynth/errors.hpp"
#include "agrisynth/nn_util.hpp"
#include "agrisynth/seeding.hpp"

namespace agrisynth {
namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<std::string, std::string>>& variant_table() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"original", "Original"},
      {"synthetic_crop", "Synthetic Crop"},
      {"basic", "Basic augmentation"},
      {"texture", "Texture augmentation"},
      {"style", "Style augmentation"},
      {"shape_style", "Shape and Style augmentation"},
  };
  return table;
}

void add_section(KeyValueConfig& kv, const std::string& prefix, const KeyValueConfig& section,
                 const std::vector<std::string>& skip = {}) {
  for (const auto& [k, v] : section.entries()) {
    if (std::find(skip.begin(), skip.end(), k) == skip.end()) kv.set(prefix + "." + k, v);
  }
}

std::uint64_t seed_value(const KeyValueConfig& kv, const std::string& key) {
  const std::int64_t v = kv.get_int(key);
  if (v < 0) throw ArgumentError(key + " must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

std::string variant_display_name(const std::string& key) {
  for (const auto& [k, name] : variant_table()) {
    if (k == key) return name;
  }
  throw ArgumentError("unknown dataset variant '" + key +
                      "' (expected original, synthetic_crop, basic, texture, style or shape_style)");
}

KeyValueConfig PipelineConfig::defaults() {
  KeyValueConfig kv;
  kv.set("dataset.root", "");
  kv.set("dataset.split_counts", "");
  kv.set("dataset.seed", "");
  kv.set("dataset.patch_size", std::to_string(kDefaultPatchSize));
  kv.set("dataset.image_size", "0");
  kv.set("dataset.resize_interpolation", "area");
  kv.set("dataset.blur_kernel", "15");
  kv.set("dataset.blur_sigma", "0");

  add_section(kv, "shape_gan", ShapeGanConfig{}.to_kv(), {"target_resolution"});
  kv.set("shape_gan.steps", "1000");
  kv.set("shape_gan.seed", "");
  kv.set("shape_gan.threshold", "0");
  kv.set("shape_gan.augment_copies", "0");
  kv.set("shape_gan.checkpoint_every", "0");
  kv.set("shape_gan.resume", "false");

  add_section(kv, "style_gan", StyleGanConfig{}.to_kv(), {"resolution"});
  kv.set("style_gan.steps", "1000");
  kv.set("style_gan.seed", "");
  kv.set("style_gan.checkpoint_every", "0");
  kv.set("style_gan.resume", "false");

  kv.set("composer.fraction", "0.5");
  kv.set("composer.seed", "");
  kv.set("composer.feathered", "false");

  kv.set("eval.channels", "rgb");
  kv.set("eval.variants", "original,basic,shape_style");
  kv.set("eval.seed", "");
  add_section(kv, "eval", SegConfig{}.to_kv());

  kv.set("output.dir", "");
  kv.set("deterministic", "true");
  kv.set("workers", "1");
  return kv;
}

PipelineConfig PipelineConfig::resolve(const KeyValueConfig& user) {
  KeyValueConfig kv = defaults();
  for (const auto& [key, value] : user.entries()) {
    if (!kv.contains(key)) throw ArgumentError("unknown configuration key '" + key + "'");
    kv.set(key, value);
  }
  for (const char* key : {"dataset.root", "dataset.split_counts", "dataset.seed", "output.dir"}) {
    if (kv.get_string(key).empty()) throw ArgumentError("missing required key '" + std::string(key) + "'");
  }
  for (const char* key : {"shape_gan.seed", "style_gan.seed", "composer.seed", "eval.seed"}) {
    if (kv.get_string(key).empty()) kv.set(key, kv.get_string("dataset.seed"));
  }

  PipelineConfig c;
  c.resolved = kv;
  c.dataset_root = kv.get_string("dataset.root");
  const auto counts = kv.get_int_list("dataset.split_counts");
  if (counts.size() != 3 || std::any_of(counts.begin(), counts.end(), [](auto v) { return v < 0; })) {
    throw ArgumentError("dataset.split_counts must be three non-negative integers train,val,test");
  }
  c.split_counts = {static_cast<std::size_t>(counts[0]), static_cast<std::size_t>(counts[1]),
                    static_cast<std::size_t>(counts[2])};
  c.dataset_seed = seed_value(kv, "dataset.seed");
  c.patch_size = static_cast<int>(kv.get_int("dataset.patch_size"));
  if (c.patch_size < 8) throw ArgumentError("dataset.patch_size must be >= 8");
  c.image_size = static_cast<int>(kv.get_int("dataset.image_size"));
  if (c.image_size < 0) throw ArgumentError("dataset.image_size must be >= 0");
  if (c.image_size > 0 && c.image_size < c.patch_size) {
    throw ArgumentError("dataset.image_size must be 0 or at least dataset.patch_size");
  }
  c.resize_interpolation = parse_interpolation(kv.get_string("dataset.resize_interpolation"));
  c.blur_kernel = static_cast<int>(kv.get_int("dataset.blur_kernel"));
  if (c.blur_kernel < 1 || c.blur_kernel % 2 == 0) throw ArgumentError("dataset.blur_kernel must be odd and >= 1");
  c.blur_sigma = kv.get_double("dataset.blur_sigma");

  c.shape = ShapeGanConfig::from_kv(kv.section("shape_gan"));
  c.shape.target_resolution = c.patch_size;
  c.shape.validate();
  c.shape_steps = kv.get_int("shape_gan.steps");
  c.shape_seed = seed_value(kv, "shape_gan.seed");
  c.shape_threshold = kv.get_double("shape_gan.threshold");
  if (!(c.shape_threshold > -1.0 && c.shape_threshold < 1.0)) {
    throw ArgumentError("shape_gan.threshold must lie in (-1,1)");
  }
  c.shape_augment_copies = static_cast<int>(kv.get_int("shape_gan.augment_copies"));
  c.shape_checkpoint_every = kv.get_int("shape_gan.checkpoint_every");
  c.shape_resume = kv.get_bool("shape_gan.resume");
  if (c.shape_steps < 0 || c.shape_augment_copies < 0 || c.shape_checkpoint_every < 0) {
    throw ArgumentError("shape_gan.steps, augment_copies and checkpoint_every must be >= 0");
  }

  c.style = StyleGanConfig::from_kv(kv.section("style_gan"));
  c.style.resolution = c.patch_size;
  c.style.validate();
  c.style_steps = kv.get_int("style_gan.steps");
  c.style_seed = seed_value(kv, "style_gan.seed");
  c.style_checkpoint_every = kv.get_int("style_gan.checkpoint_every");
  c.style_resume = kv.get_bool("style_gan.resume");
  if (c.style_steps < 0 || c.style_checkpoint_every < 0) {
    throw ArgumentError("style_gan.steps and checkpoint_every must be >= 0");
  }
  if (!c.style.perceptual_weights.empty() && !fs::exists(c.style.perceptual_weights)) {
    throw ArgumentError("style_gan.perceptual_weights does not exist: " + c.style.perceptual_weights);
  }

  c.composer_fraction = kv.get_double("composer.fraction");
  if (!(c.composer_fraction >= 0.0 && c.composer_fraction <= 1.0)) {
    throw ArgumentError("composer.fraction must lie in [0,1]");
  }
  c.composer_seed = seed_value(kv, "composer.seed");
  c.composer_feathered = kv.get_bool("composer.feathered");

  for (const auto& name : kv.get_string_list("eval.channels")) c.eval_channels.push_back(parse_input_channels(name));
  if (c.eval_channels.empty()) throw ArgumentError("eval.channels must name at least one input set");
  c.eval_variants = kv.get_string_list("eval.variants");
  if (c.eval_variants.empty()) throw ArgumentError("eval.variants must name at least one variant");
  for (const auto& v : c.eval_variants) variant_display_name(v);
  c.segmentation = SegConfig::from_kv(kv.section("eval"));
  c.segmentation.validate();
  c.eval_seed = seed_value(kv, "eval.seed");

  c.output_dir = kv.get_string("output.dir");
  c.deterministic = kv.get_bool("deterministic");
  c.workers = static_cast<int>(kv.get_int("workers"));
  if (c.workers < 1) throw ArgumentError("workers must be >= 1");
  return c;
}

Command parse_command(const std::string& name) {
  static const std::map<std::string, Command> table = {
      {"prepare", Command::prepare},         {"train-shape", Command::train_shape},
      {"train-style", Command::train_style}, {"compose", Command::compose},
      {"augment-baseline", Command::augment_baseline}, {"eval", Command::eval},
      {"report", Command::report}};
  const auto it = table.find(name);
  if (it == table.end()) throw ArgumentError("unknown command '" + name + "'");
  return it->second;
}

std::string to_string(Command command) {
  switch (command) {
    case Command::prepare: return "prepare";
    case Command::train_shape: return "train-shape";
    case Command::train_style: return "train-style";
    case Command::compose: return "compose";
    case Command::augment_baseline: return "augment-baseline";
    case Command::eval: return "eval";
    case Command::report: return "report";
  }
  return "?";
}

fs::path latest_checkpoint(const fs::path& dir, const std::string& prefix) {
  if (!fs::is_directory(dir)) return {};
  const std::regex pattern(prefix + "([0-9]+)\\.ckpt");
  fs::path best;
  long long best_step = -1;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) {
      const long long step = std::stoll(m[1].str());
      if (step > best_step) {
        best_step = step;
        best = entry.path();
      }
    }
  }
  return best;
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ArgumentError(message);
}

void require_file(const fs::path& path, const std::string& producer) {
  require(fs::exists(path), "missing " + path.string() + " (run '" + producer + "' first)");
}

}  // namespace

void check_prerequisites(Command command, const PipelineConfig& c) {
  const PipelinePaths paths{c.output_dir};
  switch (command) {
    case Command::prepare:
      require(fs::is_directory(c.dataset_root), "dataset.root is not a directory: " + c.dataset_root.string());
      require(fs::is_directory(c.dataset_root / "rgb"),
              "dataset.root lacks an rgb/ directory: " + c.dataset_root.string());
      break;
    case Command::train_shape:
      require_file(paths.shape_cache(), "prepare");
      break;
    case Command::train_style:
      require_file(paths.style_cache(), "prepare");
      break;
    case Command::compose:
      require_file(paths.dataset("original") / "manifest.txt", "prepare");
      require(!latest_checkpoint(paths.checkpoints(), "shape_gan_step").empty(),
              "no shape GAN checkpoint in " + paths.checkpoints().string() + " (run 'train-shape' first)");
      require(!latest_checkpoint(paths.checkpoints(), "style_gan_step").empty(),
              "no style GAN checkpoint in " + paths.checkpoints().string() + " (run 'train-style' first)");
      break;
    case Command::augment_baseline:
      require_file(paths.dataset("original") / "manifest.txt", "prepare");
      break;
    case Command::eval:
      for (const auto& v : c.eval_variants) {
        const std::string producer = v == "original"                 ? "prepare"
                                     : v == "basic" || v == "texture" ? "augment-baseline"
                                                                      : "compose";
        require_file(paths.dataset(v) / "manifest.txt", producer);
      }
      break;
    case Command::report:
      require_file(paths.reports() / "comparison.txt", "eval");
      break;
  }
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void reset_directory(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
}

void save_tensors(const fs::path& path, const std::vector<std::pair<std::string, torch::Tensor>>& items) {
  torch::serialize::OutputArchive archive;
  for (const auto& [key, t] : items) archive.write(key, t);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  archive.save_to(path.string());
}

torch::Tensor load_tensor(const fs::path& path, const std::string& key) {
  torch::serialize::InputArchive archive;
  load_archive(archive, path.string());
  torch::Tensor t;
  if (!archive.try_read(key, t)) throw FormatError(path.string() + " lacks '" + key + "'");
  return t;
}

/// Drops rows after `max_step` from a loss CSV so a resumed run can append.
void truncate_loss_csv(const fs::path& path, std::int64_t max_step) {
  if (!fs::exists(path)) return;
  std::istringstream in(read_text(path));
  std::string line, kept;
  bool header = true;
  while (std::getline(in, line)) {
    if (header || std::stoll(line.substr(0, line.find(','))) <= max_step) kept += line + "\n";
    header = false;
  }
  write_text(path, kept);
}

void remove_checkpoints(const fs::path& dir, const std::string& prefix) {
  while (true) {
    const fs::path p = latest_checkpoint(dir, prefix);
    if (p.empty()) return;
    fs::remove(p);
  }
}

MultispectralScene resize_scene(const MultispectralScene& s, int size, Interpolation interp) {
  MultispectralScene out;
  out.scene_id = s.scene_id;
  out.rgb = resize_square(s.rgb, size, interp);
  out.nir = resize_square(s.nir, size, interp);
  out.mask = resize_square(s.mask, size, Interpolation::nearest);
  return out;
}

void cmd_prepare(const PipelineConfig& c, std::ostream& log) {
  const PipelinePaths paths{c.output_dir};
  const std::vector<std::string> ids = list_scene_ids(c.dataset_root);
  if (ids.empty()) {
    throw std::runtime_error("0 patches: no scenes found under " + (c.dataset_root / "rgb").string());
  }
  const SplitManifest manifest = build_split(ids, c.split_counts, c.dataset_seed);
  fs::create_directories(paths.root);
  write_manifest(paths.manifest(), manifest);

  const fs::path original = paths.dataset("original");
  reset_directory(original);
  std::vector<std::string> all = manifest.train;
  all.insert(all.end(), manifest.val.begin(), manifest.val.end());
  all.insert(all.end(), manifest.test.begin(), manifest.test.end());
  for (const auto& id : all) {
    if (c.image_size == 0) {
      load_scene(c.dataset_root, id);  // layout check with file paths
      copy_scene_files(c.dataset_root, original, id);
    } else {
      save_scene(original, resize_scene(load_scene(c.dataset_root, id), c.image_size, c.resize_interpolation));
    }
  }
  write_manifest(original / "manifest.txt", manifest);

  std::vector<torch::Tensor> masks, conditions, images;
  std::string index;
  for (const auto& id : manifest.train) {
    const MultispectralScene scene = load_scene(original, id);
    if (c.patch_size > std::min(scene.rows(), scene.cols())) {
      throw ArgumentError("dataset.patch_size " + std::to_string(c.patch_size) + " exceeds scene " + id);
    }
    for (const Patch& p : extract_crop_patches(scene, c.patch_size)) {
      masks.push_back(mat_to_chw(blur_mask(p.instance_mask, c.blur_kernel, c.blur_sigma))[0] * 2.0 - 1.0);
      conditions.push_back(condition_from_mask(cv::Mat(p.mask == kCrop) / 255));
      images.push_back(four_channel_from(p.rgb, p.nir));
      index += id + " " + std::to_string(p.component_id) + " " + std::to_string(p.origin.row) + " " +
               std::to_string(p.origin.col) + "\n";
    }
  }
  if (masks.empty()) {
    throw std::runtime_error("0 patches: no crop component of the training scenes admits a " +
                             std::to_string(c.patch_size) + "x" + std::to_string(c.patch_size) + " window");
  }
  save_tensors(paths.shape_cache(), {{"masks", torch::stack(masks)}});
  save_tensors(paths.style_cache(), {{"conditions", torch::stack(conditions)}, {"images", torch::stack(images)}});
  write_text(paths.patch_index(), index);
  log << "prepare: " << manifest.train.size() << " train, " << manifest.val.size() << " val, "
      << manifest.test.size() << " test scenes; " << masks.size() << " patches\n";
}

std::vector<torch::Tensor> shape_training_set(const PipelineConfig& c) {
  const torch::Tensor masks = load_tensor(PipelinePaths{c.output_dir}.shape_cache(), "masks");
  std::vector<torch::Tensor> out;
  SplitMixRng rng(derive_seed(c.shape_seed, {0xa06}));
  for (int64_t i = 0; i < masks.size(0); ++i) {
    out.push_back(masks[i]);
    for (int k = 0; k < c.shape_augment_copies; ++k) {
      torch::Tensor t = torch::rot90(masks[i], static_cast<int64_t>(rng.below(4)), {0, 1});
      if (rng.below(2) == 1) t = torch::flip(t, {1});
      out.push_back(t.contiguous());
    }
  }
  return out;
}

template <typename Gan, typename Trainer, typename Record, typename WriteCsv>
void run_training(Gan& gan, Trainer& trainer, std::int64_t steps, std::int64_t every,
                  const fs::path& ckpt_dir, const std::string& prefix, const fs::path& csv,
                  bool append, WriteCsv write_csv) {
  std::size_t flushed = 0;
  auto flush = [&] {
    const auto& h = trainer.history();
    std::vector<Record> rows(h.begin() + static_cast<std::ptrdiff_t>(flushed), h.end());
    write_csv(csv, rows, append || flushed > 0);
    flushed = h.size();
  };
  while (gan.step < steps) {
    trainer.step();
    if (every > 0 && gan.step % every == 0 && gan.step < steps) {
      trainer.save(ckpt_dir / (prefix + std::to_string(gan.step) + ".ckpt"));
      flush();
    }
  }
  trainer.save(ckpt_dir / (prefix + std::to_string(gan.step) + ".ckpt"));
  flush();
}

void cmd_train_shape(const PipelineConfig& c, std::ostream& log) {
  const PipelinePaths paths{c.output_dir};
  const std::vector<torch::Tensor> patches = shape_training_set(c);
  const fs::path latest = latest_checkpoint(paths.checkpoints(), "shape_gan_step");
  const bool resume = c.shape_resume && !latest.empty();
  ShapeGan gan = resume ? load_shape_gan(latest) : ShapeGan::initialize(c.shape, c.shape_seed);
  ShapeGanTrainer trainer(gan, patches);
  if (resume) {
    trainer.load_optimizer_state(latest);
    truncate_loss_csv(paths.shape_loss_csv(), gan.step);
    log << "train-shape: resuming " << latest.filename().string() << " at step " << gan.step << "\n";
  } else {
    remove_checkpoints(paths.checkpoints(), "shape_gan_step");
  }
  run_training<ShapeGan, ShapeGanTrainer, ShapeLossRecord>(
      gan, trainer, c.shape_steps, c.shape_checkpoint_every, paths.checkpoints(), "shape_gan_step",
      paths.shape_loss_csv(), resume,
      [](const fs::path& p, const std::vector<ShapeLossRecord>& rows, bool app) {
        write_shape_loss_csv(p, rows, app);
      });
  log << "train-shape: " << patches.size() << " patches, step " << gan.step;
  if (!trainer.history().empty()) {
    log << ", d_loss " << trainer.history().back().d_loss << ", g_loss " << trainer.history().back().g_loss;
  }
  log << "\n";
}

void cmd_train_style(const PipelineConfig& c, std::ostream& log) {
  const PipelinePaths paths{c.output_dir};
  const torch::Tensor conditions = load_tensor(paths.style_cache(), "conditions");
  const torch::Tensor images = load_tensor(paths.style_cache(), "images");
  std::vector<StylePair> pairs;
  for (int64_t i = 0; i < conditions.size(0); ++i) pairs.push_back({conditions[i], images[i]});

  const fs::path latest = latest_checkpoint(paths.checkpoints(), "style_gan_step");
  const bool resume = c.style_resume && !latest.empty();
  StyleGan gan = resume ? load_style_gan(latest) : StyleGan::initialize(c.style, c.style_seed);
  StyleGanTrainer trainer(gan, pairs);
  if (resume) {
    trainer.load_optimizer_state(latest);
    truncate_loss_csv(paths.style_loss_csv(), gan.step);
    log << "train-style: resuming " << latest.filename().string() << " at step " << gan.step << "\n";
  } else {
    remove_checkpoints(paths.checkpoints(), "style_gan_step");
  }
  run_training<StyleGan, StyleGanTrainer, StyleLossRecord>(
      gan, trainer, c.style_steps, c.style_checkpoint_every, paths.checkpoints(), "style_gan_step",
      paths.style_loss_csv(), resume,
      [](const fs::path& p, const std::vector<StyleLossRecord>& rows, bool app) {
        write_style_loss_csv(p, rows, app);
      });
  log << "train-style: " << pairs.size() << " pairs, step " << gan.step << ", reconstruction error "
      << trainer.reconstruction_error() << "\n";
}

void cmd_compose(const PipelineConfig& c, std::ostream& log) {
  const PipelinePaths paths{c.output_dir};
  const fs::path original = paths.dataset("original");
  const SplitManifest manifest = read_manifest(original / "manifest.txt");
  ShapeGan shape = load_shape_gan(latest_checkpoint(paths.checkpoints(), "shape_gan_step"));
  StyleGan style = load_style_gan(latest_checkpoint(paths.checkpoints(), "style_gan_step"));
  GanPatchSynthesizer synthesizer(shape, style, style, c.shape_threshold);

  struct Job {
    std::string key;
    double fraction;
    bool keep_real_shape;
  };
  std::vector<Job> jobs = {{"shape_style", c.composer_fraction, false}};
  auto wanted = [&](const std::string& k) {
    return std::find(c.eval_variants.begin(), c.eval_variants.end(), k) != c.eval_variants.end();
  };
  if (wanted("synthetic_crop")) jobs.push_back({"synthetic_crop", 1.0, false});
  if (wanted("style")) jobs.push_back({"style", c.composer_fraction, true});

  for (const auto& job : jobs) {
    const fs::path out = paths.dataset(job.key);
    reset_directory(out);
    ComposeOptions options;
    options.feathered = c.composer_feathered;
    options.keep_real_shape = job.keep_real_shape;
    const SplitManifest result = build_synthetic_dataset(manifest, original, synthesizer, out, job.fraction,
                                                         c.composer_seed, options, c.workers);
    write_manifest(out / "manifest.txt", result);
    std::size_t scenes = 0, instances = 0;
    for (const auto& entry : fs::directory_iterator(out / "provenance")) {
      ++scenes;
      const std::string text = read_text(entry.path());
      instances += static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    }
    log << "compose: " << job.key << ": " << scenes << " scenes composed, " << instances
        << " instances replaced\n";
  }
}

void cmd_augment_baseline(const PipelineConfig& c, std::ostream& log) {
  const PipelinePaths paths{c.output_dir};
  const fs::path original = paths.dataset("original");
  const SplitManifest manifest = read_manifest(original / "manifest.txt");
  for (const auto& [key, family] : {std::pair{"basic", AugmentFamily::basic}, std::pair{"texture", AugmentFamily::texture}}) {
    const fs::path out = paths.dataset(key);
    reset_directory(out);
    const SplitManifest result =
        build_augmented_dataset(manifest, original, out, family, c.composer_fraction, c.composer_seed);
    write_manifest(out / "manifest.txt", result);
    log << "augment-baseline: " << key << ": "
        << select_fraction(manifest.train, c.composer_fraction, c.composer_seed).size()
        << " scenes augmented\n";
  }
}

void cmd_eval(const PipelineConfig& c, std::ostream& log) {
  const PipelinePaths paths{c.output_dir};
  std::vector<IoUReport> reports;
  for (const InputChannels ch : c.eval_channels) {
    std::vector<StrategyVariant> variants;
    for (const auto& key : c.eval_variants) {
      std::string name = variant_display_name(key);
      if (c.eval_channels.size() > 1) name += ch == InputChannels::rgb ? " (RGB)" : " (RGB+NIR)";
      variants.push_back({name, read_manifest(paths.dataset(key) / "manifest.txt"), paths.dataset(key)});
    }
    for (auto& r : compare_strategies(variants, ch, c.segmentation, c.eval_seed, paths.reports() / "models")) {
      reports.push_back(std::move(r));
    }
  }
  const std::string table = format_comparison_table(reports);
  write_text(paths.reports() / "comparison.csv", format_comparison_csv(reports));
  write_text(paths.reports() / "comparison.txt", table);
  log << table;
}

void cmd_report(const PipelineConfig& c, std::ostream& log) {
  const PipelinePaths paths{c.output_dir};
  log << read_text(paths.reports() / "comparison.txt");
}

}  // namespace

void run_command(Command command, const PipelineConfig& config, std::ostream& log) {
  set_deterministic(config.deterministic);
  switch (command) {
    case Command::prepare: return cmd_prepare(config, log);
    case Command::train_shape: return cmd_train_shape(config, log);
    case Command::train_style: return cmd_train_style(config, log);
    case Command::compose: return cmd_compose(config, log);
    case Command::augment_baseline: return cmd_augment_baseline(config, log);
    case Command::eval: return cmd_eval(config, log);
    case Command::report: return cmd_report(config, log);
  }
}

}  // namespace agrisynth
