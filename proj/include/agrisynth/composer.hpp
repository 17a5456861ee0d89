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
#include <mutex>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "agrisynth/dataset.hpp"
#include "agrisynth/shape_gan.hpp"
#include "agrisynth/split.hpp"
#include "agrisynth/style_gan.hpp"

namespace agrisynth {

/// A crop component whose centred window fits inside the scene.
struct ReplaceableInstance {
  int component_id = 0;
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  BoundingBox bbox;
  PixelCoord patch_origin;
};

/// Components in ascending (centroid row, centroid col) order.
std::vector<ReplaceableInstance> find_replaceable_instances(const MultispectralScene& scene,
                                                            int patch_size = kDefaultPatchSize);

/// Source of synthetic shapes and textures for one window size. Textures are
/// [4,P,P] tensors in [-1,1]. Implementations must be deterministic in the
/// seeds and safe to call from several threads.
class PatchSynthesizer {
 public:
  virtual ~PatchSynthesizer() = default;
  virtual int patch_size() const = 0;
  virtual BinaryShape sample_shape(std::uint64_t seed) = 0;
  virtual torch::Tensor crop_style(const BinaryShape& shape, std::uint64_t seed) = 0;
  /// `background` is the real [4,P,P] window the soil style is encoded from.
  virtual torch::Tensor soil_style(const BinaryShape& shape, const torch::Tensor& background,
                                   std::uint64_t seed) = 0;
};

/// Shape GAN + style GAN(s). With one style model, pass it twice.
class GanPatchSynthesizer : public PatchSynthesizer {
 public:
  GanPatchSynthesizer(ShapeGan& shape, StyleGan& crop_style, StyleGan& soil_style,
                      double threshold = 0.0);

  int patch_size() const override;
  BinaryShape sample_shape(std::uint64_t seed) override;
  torch::Tensor crop_style(const BinaryShape& shape, std::uint64_t seed) override;
  torch::Tensor soil_style(const BinaryShape& shape, const torch::Tensor& background,
                           std::uint64_t seed) override;

 private:
  ShapeGan& shape_;
  StyleGan& crop_;
  StyleGan& soil_;
  double threshold_;
  std::mutex mutex_;
};

struct ProvenanceEntry {
  ReplaceableInstance instance;
  std::uint64_t shape_seed = 0;
  std::uint64_t style_seed = 0;
};

struct SemiArtificialScene {
  MultispectralScene scene;
  std::vector<ProvenanceEntry> provenance;
};

struct ComposeOptions {
  /// Alpha-blend crop over soil with the shape's soft mask instead of a hard cut.
  bool feathered = false;
  /// Keep each instance's real crop pixels as the shape; only the textures are
  /// synthetic.
  bool keep_real_shape = false;
};

/// Replaces every listed instance, in list order; later windows overwrite
/// earlier ones where they overlap. Throws ArgumentError for an instance whose
/// window leaves the scene or does not match the synthesizer's patch size.
SemiArtificialScene compose_scene(const MultispectralScene& scene,
                                  const std::vector<ReplaceableInstance>& instances,
                                  PatchSynthesizer& synthesizer, std::uint64_t seed,
                                  const ComposeOptions& options = {});

/// One `component_id shape_seed style_seed origin_row origin_col` line per entry.
std::string format_provenance(const std::vector<ProvenanceEntry>& provenance);

/// Composes floor(fraction * |train|) training scenes (stored as `<id>_syn`)
/// and byte-copies everything else into `out_root`. Per-scene seeds come from
/// (seed, scene id), so the output does not depend on `workers`.
SplitManifest build_synthetic_dataset(const SplitManifest& manifest,
                                      const std::filesystem::path& root,
                                      PatchSynthesizer& synthesizer,
                                      const std::filesystem::path& out_root, double fraction,
                                      std::uint64_t seed, const ComposeOptions& options = {},
                                      int workers = 1);

}  // namespace agrisynth
