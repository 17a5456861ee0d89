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
#include <string>
#include <string_view>

#include "agrisynth/dataset.hpp"
#include "agrisynth/split.hpp"

namespace agrisynth {

// Classical augmentation baselines. Geometric ops move all three rasters with
// one map (mask resampled nearest-neighbour, uncovered pixels become soil);
// photometric ops touch rgb and nir only.

enum class GeometricOp { rotate, shift, flip, zoom, crop };
enum class FlipAxis { horizontal, vertical };

struct GeometricParams {
  double angle_degrees = 0.0;  // counter-clockwise
  int shift_rows = 0;
  int shift_cols = 0;
  FlipAxis flip_axis = FlipAxis::horizontal;
  double zoom_factor = 1.0;  // > 1 magnifies about the centre
  BoundingBox crop_box;      // cut out, then resized back to the scene size
};

GeometricOp parse_geometric_op(std::string_view name);

MultispectralScene basic_augment(const MultispectralScene& scene, GeometricOp op,
                                 const GeometricParams& params);
MultispectralScene basic_augment(const MultispectralScene& scene, std::string_view op_name,
                                 const GeometricParams& params);

enum class TextureOp { gaussian_blur, median_blur, noise, contrast, brightness };

struct TextureParams {
  int kernel_size = 3;       // gaussian_blur / median_blur, odd
  double blur_sigma = 0.0;   // gaussian_blur; <= 0 derives from kernel_size
  double noise_sigma = 0.0;  // noise, in 8-bit units
  std::uint64_t noise_seed = 0;
  double contrast = 1.0;     // gain about mid-grey 127.5
  double brightness = 0.0;   // additive offset, 8-bit units
};

TextureOp parse_texture_op(std::string_view name);

MultispectralScene texture_augment(const MultispectralScene& scene, TextureOp op,
                                   const TextureParams& params);
MultispectralScene texture_augment(const MultispectralScene& scene, std::string_view op_name,
                                   const TextureParams& params);

enum class AugmentFamily { basic, texture };

/// One random op of the family with randomly drawn parameters.
MultispectralScene random_augment(const MultispectralScene& scene, AugmentFamily family,
                                  std::uint64_t seed);

/// Writes a baseline-augmented copy of a dataset.
///
/// floor(fraction * |train|) training scenes are replaced by an augmented
/// version stored as `<id>_basic` or `<id>_texture`; every other scene of the
/// manifest is copied byte-for-byte. Returns the manifest of the new tree.
SplitManifest build_augmented_dataset(const SplitManifest& manifest,
                                      const std::filesystem::path& root,
                                      const std::filesystem::path& out_root,
                                      AugmentFamily family, double fraction, std::uint64_t seed);

}  // namespace agrisynth
