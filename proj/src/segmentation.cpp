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

#include "agrisynth/segmentation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "agrisynth/errors.hpp"
#include "agrisynth/nn_util.hpp"
#include "agrisynth/seeding.hpp"

namespace agrisynth {
namespace F = torch::nn::functional;
namespace fs = std::filesystem;

ConfusionAccumulator::ConfusionAccumulator(int num_classes) : num_classes_(num_classes) {
  if (num_classes < 2 || num_classes > 255) {
    throw ArgumentError("number of classes must lie in [2,255], got " + std::to_string(num_classes));
  }
  counts_.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
}

void ConfusionAccumulator::update(const cv::Mat& gt, const cv::Mat& pred) {
  if (gt.empty() && pred.empty()) return;
  if (gt.type() != CV_8UC1 || pred.type() != CV_8UC1 || gt.size() != pred.size()) {
    throw ArgumentError("confusion update needs two CV_8UC1 masks of equal size");
  }
  std::vector<std::int64_t> local(counts_.size(), 0);
  for (int r = 0; r < gt.rows; ++r) {
    const auto* g = gt.ptr<std::uint8_t>(r);
    const auto* p = pred.ptr<std::uint8_t>(r);
    for (int c = 0; c < gt.cols; ++c) {
      if (g[c] >= num_classes_ || p[c] >= num_classes_) {
        throw ArgumentError("class value " + std::to_string(std::max(g[c], p[c])) + " at (" +
                            std::to_string(r) + "," + std::to_string(c) + ") is outside [0," +
                            std::to_string(num_classes_) + ")");
      }
      ++local[g[c] * num_classes_ + p[c]];
    }
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += local[i];
}

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
  if (other.num_classes_ != num_classes_) throw ArgumentError("cannot merge confusions of different size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t ConfusionAccumulator::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

InputChannels parse_input_channels(const std::string& name) {
  if (name == "rgb") return InputChannels::rgb;
  if (name == "rgb_nir" || name == "rgbn") return InputChannels::rgb_nir;
  throw ArgumentError("unknown input channels '" + name + "' (expected rgb or rgb_nir)");
}

std::string to_string(InputChannels channels) {
  return channels == InputChannels::rgb ? "rgb" : "rgb_nir";
}

int input_arity(InputChannels channels) { return channels == InputChannels::rgb ? 3 : 4; }

IoUReport iou_from_confusion(const ConfusionAccumulator& acc) {
  if (acc.total() == 0) throw ArgumentError("IoU needs at least one accumulated pixel");
  const int n = acc.num_classes();
  IoUReport report;
  report.num_classes = n;
  double sum = 0.0;
  for (int c = 0; c < n; ++c) {
    std::int64_t row = 0, col = 0;
    for (int k = 0; k < n; ++k) {
      row += acc.at(c, k);
      col += acc.at(k, c);
    }
    const std::int64_t inter = acc.at(c, c);
    const std::int64_t uni = row + col - inter;
    if (uni == 0) continue;
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    report.per_class[c] = iou;
    sum += iou;
  }
  report.miou = sum / static_cast<double>(report.per_class.size());
  return report;
}

torch::Tensor scene_input(const MultispectralScene& scene, InputChannels channels) {
  if (channels == InputChannels::rgb_nir) return four_channel_from(scene.rgb, scene.nir);
  return mat_to_chw(normalize(scene.rgb));
}

// ---------------------------------------------------------------------------

namespace {

torch::nn::Sequential double_conv(int in, int out) {
  auto conv = [](int i, int o) {
    return torch::nn::Conv2d(torch::nn::Conv2dOptions(i, o, 3).padding(1).bias(false));
  };
  return torch::nn::Sequential(conv(in, out), torch::nn::BatchNorm2d(out), torch::nn::ReLU(),
                               conv(out, out), torch::nn::BatchNorm2d(out), torch::nn::ReLU());
}

constexpr int kLevels = 4;

}  // namespace

SegNetImpl::SegNetImpl(int in_channels, int num_classes, int base_channels)
    : in_channels_(in_channels) {
  int ch = base_channels;
  down_.push_back(register_module("down0", double_conv(in_channels, ch)));
  for (int i = 1; i <= kLevels; ++i) {
    down_.push_back(register_module("down" + std::to_string(i), double_conv(ch, ch * 2)));
    ch *= 2;
  }
  for (int i = kLevels - 1; i >= 0; --i) {
    up_.push_back(register_module("up" + std::to_string(i),
                                  torch::nn::ConvTranspose2d(
                                      torch::nn::ConvTranspose2dOptions(ch, ch / 2, 2).stride(2))));
    merge_.push_back(register_module("merge" + std::to_string(i), double_conv(ch, ch / 2)));
    ch /= 2;
  }
  head_ = register_module("head", torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, num_classes, 1)));
}

torch::Tensor SegNetImpl::forward(const torch::Tensor& input) {
  if (input.dim() != 4 || input.size(1) != in_channels_) {
    throw ArgumentError("segmentation network expects [N," + std::to_string(in_channels_) +
                        ",H,W] input, got " + c10::str(input.sizes()));
  }
  const int64_t h = input.size(2), w = input.size(3);
  constexpr int64_t m = 1 << kLevels;
  const int64_t ph = (m - h % m) % m, pw = (m - w % m) % m;
  torch::Tensor x = (ph || pw) ? F::pad(input, F::PadFuncOptions({0, pw, 0, ph})) : input;

  std::vector<torch::Tensor> skips;
  x = down_[0]->forward(x);
  for (int i = 1; i <= kLevels; ++i) {
    skips.push_back(x);
    x = down_[i]->forward(F::max_pool2d(x, F::MaxPool2dFuncOptions(2)));
  }
  for (int i = 0; i < kLevels; ++i) {
    x = up_[i]->forward(x);
    x = merge_[i]->forward(torch::cat({skips[kLevels - 1 - i], x}, 1));
  }
  return head_->forward(x).slice(2, 0, h).slice(3, 0, w);
}

// ---------------------------------------------------------------------------

void SegConfig::validate() const {
  if (num_classes < 2) throw ArgumentError("segmentation num_classes must be >= 2");
  if (base_channels < 1) throw ArgumentError("segmentation base_channels must be >= 1");
  if (epochs < 0) throw ArgumentError("segmentation epochs must be >= 0");
  if (batch_size < 1) throw ArgumentError("segmentation batch_size must be >= 1");
  if (!(learning_rate > 0)) throw ArgumentError("segmentation learning_rate must be positive");
  if (patience < 1) throw ArgumentError("segmentation patience must be >= 1");
  if (!(max_class_weight >= 1.0)) throw ArgumentError("segmentation max_class_weight must be >= 1");
}

KeyValueConfig SegConfig::to_kv() const {
  KeyValueConfig kv;
  kv.set("num_classes", std::to_string(num_classes));
  kv.set("base_channels", std::to_string(base_channels));
  kv.set("epochs", std::to_string(epochs));
  kv.set("batch_size", std::to_string(batch_size));
  kv.set("learning_rate", format_double(learning_rate));
  kv.set("patience", std::to_string(patience));
  kv.set("class_weighting", class_weighting ? "true" : "false");
  kv.set("max_class_weight", format_double(max_class_weight));
  return kv;
}

SegConfig SegConfig::from_kv(const KeyValueConfig& kv) {
  SegConfig c;
  c.num_classes = static_cast<int>(kv.get_int("num_classes", c.num_classes));
  c.base_channels = static_cast<int>(kv.get_int("base_channels", c.base_channels));
  c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
  c.batch_size = static_cast<int>(kv.get_int("batch_size", c.batch_size));
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.patience = static_cast<int>(kv.get_int("patience", c.patience));
  c.class_weighting = kv.get_bool("class_weighting", c.class_weighting);
  c.max_class_weight = kv.get_double("max_class_weight", c.max_class_weight);
  return c;
}

SegModel SegModel::initialize(const SegConfig& config, InputChannels channels, std::uint64_t seed) {
  config.validate();
  SegModel model;
  model.config = config;
  model.channels = channels;
  model.seed = seed;
  model.net = SegNet(input_arity(channels), config.num_classes, config.base_channels);
  at::Generator g = make_generator(derive_seed(seed, {0x5e6}));
  initialize_parameters(*model.net, InitScheme::he_normal, g);
  return model;
}

std::vector<double> class_weights(const std::vector<std::int64_t>& pixel_counts, double max_weight) {
  const std::int64_t most = pixel_counts.empty()
                                ? 0
                                : *std::max_element(pixel_counts.begin(), pixel_counts.end());
  std::vector<double> w;
  for (const auto n : pixel_counts) {
    w.push_back(n == 0 ? max_weight
                       : std::min(max_weight, static_cast<double>(most) / static_cast<double>(n)));
  }
  return w;
}

namespace {

struct Sample {
  torch::Tensor input;   // [C,H,W]
  torch::Tensor target;  // [H,W] int64
};

torch::Tensor mask_tensor(const cv::Mat& mask) {
  return torch::from_blob(mask.data, {mask.rows, mask.cols}, torch::kUInt8)
      .clone()
      .to(torch::kLong);
}

cv::Mat argmax_mask(const torch::Tensor& logits) {
  const auto arg = logits.argmax(0).to(torch::kUInt8).contiguous();
  cv::Mat out(static_cast<int>(arg.size(0)), static_cast<int>(arg.size(1)), CV_8UC1);
  std::memcpy(out.data, arg.data_ptr<std::uint8_t>(), arg.numel());
  return out;
}

void check_scene_classes(const MultispectralScene& scene, int num_classes) {
  double hi = 0;
  cv::minMaxLoc(scene.mask, nullptr, &hi);
  if (hi >= num_classes) {
    throw ArgumentError("scene " + scene.scene_id + " has class " + std::to_string(static_cast<int>(hi)) +
                        " but the model has " + std::to_string(num_classes) + " classes");
  }
}

double miou_on(SegModel& model, const std::vector<Sample>& samples) {
  const bool was_training = model.net->is_training();
  model.net->eval();
  ConfusionAccumulator acc(model.config.num_classes);
  {
    torch::NoGradGuard no_grad;
    for (const auto& s : samples) {
      const auto logits = model.net->forward(s.input.unsqueeze(0)).squeeze(0);
      const auto gt = s.target.to(torch::kUInt8).contiguous();
      cv::Mat g(static_cast<int>(gt.size(0)), static_cast<int>(gt.size(1)), CV_8UC1, gt.data_ptr());
      acc.update(g, argmax_mask(logits));
    }
  }
  model.net->train(was_training);
  return iou_from_confusion(acc).miou;
}

std::vector<Sample> load_samples(const std::vector<std::string>& ids, const fs::path& root,
                                 InputChannels channels, int num_classes) {
  std::vector<Sample> out;
  for (const auto& id : ids) {
    const MultispectralScene scene = load_scene(root, id);
    check_scene_classes(scene, num_classes);
    out.push_back({scene_input(scene, channels), mask_tensor(scene.mask)});
  }
  return out;
}

std::vector<torch::Tensor> snapshot_state(const torch::nn::Module& module) {
  std::vector<torch::Tensor> state;
  for (const auto& p : module.parameters()) state.push_back(p.detach().clone());
  for (const auto& b : module.buffers()) state.push_back(b.detach().clone());
  return state;
}

void restore_state(torch::nn::Module& module, const std::vector<torch::Tensor>& state) {
  torch::NoGradGuard no_grad;
  std::size_t i = 0;
  for (auto& p : module.parameters()) p.copy_(state[i++]);
  for (auto& b : module.buffers()) b.copy_(state[i++]);
}

}  // namespace

SegTrainingResult train_segmentation(const SplitManifest& manifest, const fs::path& root,
                                     InputChannels channels, const SegConfig& config,
                                     std::uint64_t seed) {
  config.validate();
  manifest.validate();
  SegTrainingResult result{SegModel::initialize(config, channels, seed), {}};
  if (config.epochs == 0) return result;
  if (manifest.train.empty()) throw ArgumentError("segmentation training needs a non-empty train split");

  const std::vector<Sample> train = load_samples(manifest.train, root, channels, config.num_classes);
  const std::vector<Sample> val = load_samples(manifest.val, root, channels, config.num_classes);

  torch::Tensor weight;
  if (config.class_weighting) {
    std::vector<std::int64_t> counts(config.num_classes, 0);
    for (const auto& s : train) {
      const auto bc = torch::bincount(s.target.flatten(), {}, config.num_classes);
      for (int c = 0; c < config.num_classes; ++c) counts[c] += bc[c].item<std::int64_t>();
    }
    const auto w = class_weights(counts, config.max_class_weight);
    weight = torch::tensor(w, torch::kFloat32);
  }

  SegModel& model = result.model;
  model.net->train();
  torch::optim::Adam opt(model.net->parameters(), torch::optim::AdamOptions(config.learning_rate));
  std::vector<torch::Tensor> best;
  int stale = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMixRng rng(derive_seed(seed, {static_cast<std::uint64_t>(epoch), 0x5e9}));
    rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      opt.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = train[order[k]];
        const auto logits = model.net->forward(s.input.unsqueeze(0));
        auto opts = F::CrossEntropyFuncOptions();
        if (weight.defined()) opts = opts.weight(weight);
        const auto loss = F::cross_entropy(logits, s.target.unsqueeze(0), opts);
        if (!all_finite(loss)) throw TrainingError("segmentation", epoch);
        (loss / static_cast<double>(end - start)).backward();
        epoch_loss += loss.item<double>();
      }
      opt.step();
    }
    model.epochs_trained = epoch;

    SegEpochRecord rec{epoch, epoch_loss / static_cast<double>(train.size()), 0.0};
    if (!val.empty()) {
      rec.val_miou = miou_on(model, val);
      if (rec.val_miou > model.best_val_miou) {
        model.best_val_miou = rec.val_miou;
        best = snapshot_state(*model.net);
        stale = 0;
      } else if (++stale >= config.patience) {
        result.history.push_back(rec);
        break;
      }
    }
    result.history.push_back(rec);
  }
  if (!best.empty()) restore_state(*model.net, best);
  model.net->eval();
  return result;
}

cv::Mat predict(SegModel& model, const MultispectralScene& scene) {
  scene.validate();
  const bool was_training = model.net->is_training();
  model.net->eval();
  torch::Tensor logits;
  {
    torch::NoGradGuard no_grad;
    logits = model.net->forward(scene_input(scene, model.channels).unsqueeze(0)).squeeze(0);
  }
  model.net->train(was_training);
  return argmax_mask(logits);
}

IoUReport evaluate(SegModel& model, const std::vector<std::string>& scene_ids, const fs::path& root,
                   InputChannels channels) {
  if (channels != model.channels) {
    throw ArgumentError("model expects " + to_string(model.channels) + " input, evaluation asked for " +
                        to_string(channels));
  }
  if (scene_ids.empty()) throw ArgumentError("evaluation needs at least one scene");
  ConfusionAccumulator acc(model.config.num_classes);
  for (const auto& id : scene_ids) {
    const MultispectralScene scene = load_scene(root, id);
    check_scene_classes(scene, model.config.num_classes);
    acc.update(scene.mask, predict(model, scene));
  }
  IoUReport report = iou_from_confusion(acc);
  report.channels = channels;
  return report;
}

void save_segmentation(const SegModel& model, const fs::path& path) {
  torch::serialize::OutputArchive archive, net;
  model.net->save(net);
  archive.write("net", net);
  archive_write(archive, "config", model.config.to_kv().dump());
  archive_write(archive, "channels", to_string(model.channels));
  archive_write(archive, "seed", std::bit_cast<std::int64_t>(model.seed));
  archive_write(archive, "epochs_trained", static_cast<std::int64_t>(model.epochs_trained));
  archive_write(archive, "best_val_miou", format_double(model.best_val_miou));
  archive_write(archive, "kind", std::string("segmentation"));
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  archive.save_to(path.string());
}

SegModel load_segmentation(const fs::path& path) {
  torch::serialize::InputArchive archive;
  load_archive(archive, path.string());
  if (archive_read_string(archive, "kind") != "segmentation") {
    throw FormatError(path.string() + " is not a segmentation checkpoint");
  }
  SegModel model = SegModel::initialize(
      SegConfig::from_kv(KeyValueConfig::parse(archive_read_string(archive, "config"))),
      parse_input_channels(archive_read_string(archive, "channels")),
      std::bit_cast<std::uint64_t>(archive_read_int(archive, "seed")));
  model.epochs_trained = static_cast<int>(archive_read_int(archive, "epochs_trained"));
  model.best_val_miou = std::stod(archive_read_string(archive, "best_val_miou"));
  torch::serialize::InputArchive net;
  if (!archive.try_read("net", net)) throw FormatError(path.string() + " lacks network weights");
  model.net->load(net);
  model.net->eval();
  return model;
}

std::vector<IoUReport> compare_strategies(const std::vector<StrategyVariant>& variants,
                                          InputChannels channels, const SegConfig& config,
                                          std::uint64_t seed, const fs::path& checkpoint_dir) {
  if (variants.empty()) throw ArgumentError("comparison needs at least one variant");
  config.validate();
  const auto& test_ids = variants.front().manifest.test;
  const fs::path& test_root = variants.front().root;
  for (const auto& v : variants) {
    if (v.manifest.test != test_ids) {
      throw ArgumentError("variant " + v.name + " has a different test split");
    }
  }
  std::vector<IoUReport> reports;
  for (const auto& v : variants) {
    const std::string prefix = "variant " + v.name + ": ";
    try {
      SegTrainingResult trained = train_segmentation(v.manifest, v.root, channels, config, seed);
      if (!checkpoint_dir.empty()) {
        std::string file = v.name;
        for (char& c : file) {
          if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
        }
        save_segmentation(trained.model, checkpoint_dir / (file + "_" + to_string(channels) + ".ckpt"));
      }
      IoUReport report = evaluate(trained.model, test_ids, test_root, channels);
      report.variant = v.name;
      reports.push_back(std::move(report));
    } catch (const ArgumentError& e) {
      throw ArgumentError(prefix + e.what());
    } catch (const IoError& e) {
      throw IoError(prefix + e.what());
    } catch (const FormatError& e) {
      throw FormatError(prefix + e.what());
    } catch (const TrainingError& e) {
      throw TrainingError(v.name + " " + e.component(), e.step());
    }
  }
  return reports;
}

namespace {

std::string cell(const IoUReport& r, int cls) {
  const auto it = r.per_class.find(cls);
  if (it == r.per_class.end()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", it->second);
  return buf;
}

std::string csv_cell(const IoUReport& r, int cls) {
  const auto it = r.per_class.find(cls);
  return it == r.per_class.end() ? std::string() : format_double(it->second);
}

}  // namespace

std::string format_comparison_table(const std::vector<IoUReport>& reports) {
  std::size_t width = std::string("Augmentation Strategy").size();
  for (const auto& r : reports) width = std::max(width, r.variant.size());
  auto pad = [](std::string s, std::size_t n) {
    s.resize(std::max(n, s.size()), ' ');
    return s;
  };
  std::string out = pad("Augmentation Strategy", width) + " | mIoU   | Crop   | Weed  \n";
  out += std::string(width, '-') + "-|--------|--------|-------\n";
  for (const auto& r : reports) {
    char miou[32];
    std::snprintf(miou, sizeof(miou), "%.4f", r.miou);
    out += pad(r.variant, width) + " | " + pad(miou, 6) + " | " + pad(cell(r, kCrop), 6) + " | " +
           cell(r, kWeed) + "\n";
  }
  return out;
}

std::string format_comparison_csv(const std::vector<IoUReport>& reports) {
  std::string out = "variant,miou,iou_soil,iou_crop,iou_weed\n";
  for (const auto& r : reports) {
    out += r.variant + "," + format_double(r.miou) + "," + csv_cell(r, kSoil) + "," +
           csv_cell(r, kCrop) + "," + csv_cell(r, kWeed) + "\n";
  }
  return out;
}

}  // namespace agrisynth
