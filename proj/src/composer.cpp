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

#include "agrisynth/composer.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "agrisynth/errors.hpp"
#include "agrisynth/nn_util.hpp"
#include "agrisynth/seeding.hpp"

namespace agrisynth {
namespace fs = std::filesystem;

std::vector<ReplaceableInstance> find_replaceable_instances(const MultispectralScene& scene,
                                                            int patch_size) {
  scene.validate();
  if (patch_size < 1) throw ArgumentError("patch size must be positive");
  const ComponentLabels labels = label_crop_components(scene.mask);
  std::vector<ReplaceableInstance> out;
  for (const auto& comp : labels.components) {
    const auto origin = centered_window(comp, patch_size, scene.rows(), scene.cols());
    if (!origin) continue;
    out.push_back({comp.component_id, comp.centroid_row, comp.centroid_col, comp.bbox, *origin});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::pair(a.centroid_row, a.centroid_col) < std::pair(b.centroid_row, b.centroid_col);
  });
  return out;
}

GanPatchSynthesizer::GanPatchSynthesizer(ShapeGan& shape, StyleGan& crop_style,
                                         StyleGan& soil_style, double threshold)
    : shape_(shape), crop_(crop_style), soil_(soil_style), threshold_(threshold) {
  const int size = shape_.config.target_resolution;
  if (crop_.config.resolution != size || soil_.config.resolution != size) {
    throw ArgumentError("shape GAN size " + std::to_string(size) +
                        " does not match style GAN resolutions " +
                        std::to_string(crop_.config.resolution) + "/" +
                        std::to_string(soil_.config.resolution));
  }
  shape_.generator->eval();
  crop_.generator->eval();
  crop_.encoder->eval();
  soil_.generator->eval();
  soil_.encoder->eval();
}

int GanPatchSynthesizer::patch_size() const { return shape_.config.target_resolution; }

BinaryShape GanPatchSynthesizer::sample_shape(std::uint64_t seed) {
  std::lock_guard lock(mutex_);
  return sample_shapes(shape_, 1, threshold_, seed).front();
}

torch::Tensor GanPatchSynthesizer::crop_style(const BinaryShape& shape, std::uint64_t seed) {
  std::lock_guard lock(mutex_);
  return generate_crop_style(crop_, shape, seed);
}

torch::Tensor GanPatchSynthesizer::soil_style(const BinaryShape& shape,
                                              const torch::Tensor& background, std::uint64_t seed) {
  std::lock_guard lock(mutex_);
  at::Generator g = make_generator(seed);
  const auto eps = torch::randn({soil_.config.style_dim}, g);
  return generate_soil_guided(soil_, shape, background, eps);
}

namespace {

BinaryShape real_shape(const cv::Mat& labels, int component_id, const cv::Rect& roi) {
  BinaryShape shape;
  shape.values = cv::Mat(labels(roi) == component_id) / 255;
  return shape;
}

void check_texture(const torch::Tensor& t, int size, const char* what) {
  if (t.dim() != 3 || t.size(0) != 4 || t.size(1) != size || t.size(2) != size) {
    throw ArgumentError(std::string(what) + " texture must be [4," + std::to_string(size) + "," +
                        std::to_string(size) + "], got " + c10::str(t.sizes()));
  }
}

}  // namespace

SemiArtificialScene compose_scene(const MultispectralScene& scene,
                                  const std::vector<ReplaceableInstance>& instances,
                                  PatchSynthesizer& synthesizer, std::uint64_t seed,
                                  const ComposeOptions& options) {
  scene.validate();
  SemiArtificialScene out{scene.clone(), {}};
  if (instances.empty()) return out;

  const int size = synthesizer.patch_size();
  cv::Mat labels;
  if (options.keep_real_shape) labels = label_crop_components(scene.mask).labels;

  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const PixelCoord o = inst.patch_origin;
    if (o.row < 0 || o.col < 0 || o.row + size > scene.rows() || o.col + size > scene.cols()) {
      throw ArgumentError("instance " + std::to_string(inst.component_id) + " window at (" +
                          std::to_string(o.row) + "," + std::to_string(o.col) + ") size " +
                          std::to_string(size) + " leaves scene " + scene.scene_id);
    }
    const cv::Rect roi(o.col, o.row, size, size);
    ProvenanceEntry entry{inst, derive_seed(seed, {i, 1}), derive_seed(seed, {i, 2})};

    const BinaryShape shape = options.keep_real_shape
                                  ? real_shape(labels, inst.component_id, roi)
                                  : synthesizer.sample_shape(entry.shape_seed);
    if (shape.values.rows != size || shape.values.cols != size || shape.values.type() != CV_8UC1) {
      throw ArgumentError("synthetic shape does not match the window size " + std::to_string(size));
    }
    // Background is read from the current output so overlapping windows
    // compose on top of each other.
    const torch::Tensor background = four_channel_from(out.scene.rgb(roi), out.scene.nir(roi));
    const torch::Tensor crop = synthesizer.crop_style(shape, entry.style_seed);
    const torch::Tensor soil =
        synthesizer.soil_style(shape, background, derive_seed(entry.style_seed, {1}));
    check_texture(crop, size, "crop");
    check_texture(soil, size, "soil");

    torch::Tensor alpha;
    if (options.feathered && shape.soft_source) {
      alpha = mat_to_chw(*shape.soft_source).clamp(0.0, 1.0);
    } else {
      cv::Mat f;
      shape.values.convertTo(f, CV_32F);
      alpha = mat_to_chw(f).gt(0.0f).to(torch::kFloat32);
    }
    const torch::Tensor blended = alpha * crop.to(torch::kFloat32) + (1.0 - alpha) * soil.to(torch::kFloat32);
    cv::Mat rgb, nir;
    four_channel_to(blended.clamp(-1.0, 1.0), rgb, nir);
    rgb.copyTo(out.scene.rgb(roi));
    nir.copyTo(out.scene.nir(roi));

    cv::Mat window = out.scene.mask(roi);
    for (int r = 0; r < size; ++r) {
      const auto* s = shape.values.ptr<std::uint8_t>(r);
      auto* m = window.ptr<std::uint8_t>(r);
      for (int c = 0; c < size; ++c) {
        if (s[c]) {
          m[c] = kCrop;
        } else if (m[c] == kCrop) {
          m[c] = kSoil;
        }
      }
    }
    out.provenance.push_back(entry);
  }
  return out;
}

std::string format_provenance(const std::vector<ProvenanceEntry>& provenance) {
  std::string text;
  for (const auto& p : provenance) {
    text += std::to_string(p.instance.component_id) + " " + std::to_string(p.shape_seed) + " " +
            std::to_string(p.style_seed) + " " + std::to_string(p.instance.patch_origin.row) + " " +
            std::to_string(p.instance.patch_origin.col) + "\n";
  }
  return text;
}

SplitManifest build_synthetic_dataset(const SplitManifest& manifest, const fs::path& root,
                                      PatchSynthesizer& synthesizer, const fs::path& out_root,
                                      double fraction, std::uint64_t seed,
                                      const ComposeOptions& options, int workers) {
  manifest.validate();
  if (workers < 1) throw ArgumentError("workers must be >= 1");
  const std::vector<std::string> chosen = select_fraction(manifest.train, fraction, seed);

  SplitManifest out = manifest;
  out.train.clear();
  std::size_t next = 0;
  for (const auto& id : manifest.train) {
    if (next < chosen.size() && chosen[next] == id) {
      ++next;
      out.train.push_back(id + "_syn");
    } else {
      copy_scene_files(root, out_root, id);
      out.train.push_back(id);
    }
  }
  for (const auto* list : {&manifest.val, &manifest.test}) {
    for (const auto& id : *list) copy_scene_files(root, out_root, id);
  }

  fs::create_directories(out_root / "provenance");
  std::atomic<std::size_t> cursor{0};
  std::vector<std::exception_ptr> errors(chosen.size());
  auto work = [&] {
    for (std::size_t i = cursor++; i < chosen.size(); i = cursor++) {
      try {
        const std::string& id = chosen[i];
        const MultispectralScene scene = load_scene(root, id);
        const auto instances = find_replaceable_instances(scene, synthesizer.patch_size());
        SemiArtificialScene composed =
            compose_scene(scene, instances, synthesizer, derive_seed(seed, id), options);
        composed.scene.scene_id = id + "_syn";
        save_scene(out_root, composed.scene);
        const fs::path prov = out_root / "provenance" / (composed.scene.scene_id + ".txt");
        std::ofstream f(prov, std::ios::binary);
        if (!f) throw IoError("cannot write " + prov.string());
        f << format_provenance(composed.provenance);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min<int>(workers, static_cast<int>(chosen.size())); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace agrisynth
