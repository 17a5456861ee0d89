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
#include <vector>

#include "agrisynth/dataset.hpp"

namespace agrisynth {

/// Procedural field scenes: textured soil, rosette-shaped crops with high NIR
/// response and smaller, yellower weeds with intermediate NIR.
struct ToySceneOptions {
  int rows = 128;
  int cols = 128;
  int min_crops = 1;
  int max_crops = 3;
  int min_weeds = 1;
  int max_weeds = 4;
  /// The first crop of every scene is placed so that a window of this size
  /// centred on it fits in the scene.
  int anchor_window = 64;
  int crop_radius = 14;
  int weed_radius = 5;
};

MultispectralScene make_toy_scene(const std::string& scene_id, std::uint64_t seed,
                                  const ToySceneOptions& options = {});

/// Writes `count` scenes named scene_000, scene_001, ... under `root`.
std::vector<std::string> write_toy_dataset(const std::filesystem::path& root, int count,
                                           std::uint64_t seed,
                                           const ToySceneOptions& options = {});

/// Filled ellipse of ones on a zero CV_8UC1 raster.
cv::Mat ellipse_mask(int size, double centre_row, double centre_col, double radius_rows,
                     double radius_cols, double angle_degrees);

}  // namespace agrisynth
