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

// Hand-built scenes and invariant checks for scene composition.

#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "agrisynth/composer.hpp"
#include "test_support.hpp"

namespace agrisynth::testing {

inline constexpr int kFixturePatch = 32;

/// 96×96 scene with one or two replaceable crops whose windows do not
/// overlap, a weed blob overlapping the first window and a crop at the
/// border that cannot be replaced.
inline MultispectralScene composition_scene(int index) {
  SplitMixRng rng(derive_seed(77, {static_cast<std::uint64_t>(index)}));
  const int r0 = 22 + static_cast<int>(rng.below(5)), c0 = 22 + static_cast<int>(rng.below(5));
  std::vector<Disc> crops{{r0, c0, 5 + static_cast<int>(rng.below(4))}, {3, 90, 3}};
  if (index % 2 == 0) crops.push_back({68 + static_cast<int>(rng.below(5)), 66 + static_cast<int>(rng.below(5)),
                                       4 + static_cast<int>(rng.below(4))});
  std::vector<Disc> weeds{{r0 + 2 + static_cast<int>(rng.below(4)), c0 + 6 + static_cast<int>(rng.below(3)), 3},
                          {80, 10, 4}};
  return disc_scene("comp_" + std::to_string(index), 96, 96, crops, weeds, rng.next());
}

struct CompositionCheck {
  bool outside_identical = true;
  bool crop_support_equal = true;
  bool weed_erased = true;
  bool mask_valid = true;

  bool all() const { return outside_identical && crop_support_equal && weed_erased && mask_valid; }
};

/// Checks the composition contract, re-sampling each instance's shape from
/// its recorded seed.
inline CompositionCheck check_composition(const MultispectralScene& input, const SemiArtificialScene& output,
                                          PatchSynthesizer& synthesizer) {
  CompositionCheck check;
  const int p = synthesizer.patch_size();
  cv::Mat outside(input.rows(), input.cols(), CV_8UC1, cv::Scalar(1));
  for (const auto& e : output.provenance) {
    outside(cv::Rect(e.instance.patch_origin.col, e.instance.patch_origin.row, p, p)) = 0;
  }
  for (int r = 0; r < input.rows(); ++r) {
    for (int c = 0; c < input.cols(); ++c) {
      if (output.scene.mask.at<std::uint8_t>(r, c) > kWeed) check.mask_valid = false;
      if (!outside.at<std::uint8_t>(r, c)) continue;
      if (input.rgb.at<cv::Vec3b>(r, c) != output.scene.rgb.at<cv::Vec3b>(r, c) ||
          input.nir.at<std::uint8_t>(r, c) != output.scene.nir.at<std::uint8_t>(r, c) ||
          input.mask.at<std::uint8_t>(r, c) != output.scene.mask.at<std::uint8_t>(r, c)) {
        check.outside_identical = false;
      }
    }
  }
  for (const auto& e : output.provenance) {
    const BinaryShape shape = synthesizer.sample_shape(e.shape_seed);
    const cv::Mat window = output.scene.mask(cv::Rect(e.instance.patch_origin.col, e.instance.patch_origin.row, p, p));
    for (int r = 0; r < p; ++r) {
      for (int c = 0; c < p; ++c) {
        const bool support = shape.values.at<std::uint8_t>(r, c) != 0;
        const std::uint8_t label = window.at<std::uint8_t>(r, c);
        if (support != (label == kCrop)) check.crop_support_equal = false;
        if (support && label == kWeed) check.weed_erased = false;
      }
    }
  }
  return check;
}

}  // namespace agrisynth::testing
