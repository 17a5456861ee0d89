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
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace agrisynth {

// Class ids stored literally in 8-bit mask rasters.
inline constexpr std::uint8_t kSoil = 0;
inline constexpr std::uint8_t kCrop = 1;
inline constexpr std::uint8_t kWeed = 2;
inline constexpr int kNumSceneClasses = 3;

inline constexpr int kDefaultPatchSize = 256;

struct PixelCoord {
  int row = 0;
  int col = 0;
  bool operator==(const PixelCoord&) const = default;
};

struct BoundingBox {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
  bool operator==(const BoundingBox&) const = default;
};

/// Registered RGB + NIR capture of one field scene with its class mask.
///
/// rgb is CV_8UC3 in R,G,B channel order (not OpenCV's BGR), nir and mask are
/// CV_8UC1. All three share one pixel grid.
struct MultispectralScene {
  cv::Mat rgb;
  cv::Mat nir;
  cv::Mat mask;
  std::string scene_id;

  int rows() const { return mask.rows; }
  int cols() const { return mask.cols; }

  /// Throws FormatError if the rasters disagree in size or type, or if the
  /// mask holds a value outside {0,1,2}.
  void validate() const;
  MultispectralScene clone() const;
};

/// Reads `root/{rgb,nir,mask}/<scene_id>.png`.
MultispectralScene load_scene(const std::filesystem::path& root, const std::string& scene_id);

/// Writes the three rasters in the standard layout, creating directories.
void save_scene(const std::filesystem::path& root, const MultispectralScene& scene);

/// Scene ids present under `root/rgb`, sorted.
std::vector<std::string> list_scene_ids(const std::filesystem::path& root);

/// One 8-connected component of crop pixels.
struct CropComponent {
  int component_id = 0;  // 1-based label in raster-scan discovery order
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  BoundingBox bbox;
  int area = 0;

  /// Centroid rounded half-up to the pixel grid; the stem estimate.
  PixelCoord stem() const;
};

struct ComponentLabels {
  cv::Mat labels;  // CV_32S, 0 = not crop
  std::vector<CropComponent> components;
};

ComponentLabels label_crop_components(const cv::Mat& mask);

/// Top-left corner of the size×size window centred on the component's stem,
/// or nullopt when that window leaves the raster.
std::optional<PixelCoord> centered_window(const CropComponent& component, int size, int rows,
                                          int cols);

/// Training patch cut from a scene around one crop instance.
struct Patch {
  cv::Mat rgb;
  cv::Mat nir;
  cv::Mat mask;
  cv::Mat instance_mask;  // CV_8UC1 0/1, pixels of the centred component only
  PixelCoord origin;
  std::string scene_id;
  int component_id = 0;

  int size() const { return mask.rows; }
};

/// One patch per crop component whose stem admits a fully in-bounds window.
std::vector<Patch> extract_crop_patches(const MultispectralScene& scene,
                                        int size = kDefaultPatchSize);

/// Normalized 1-D Gaussian weights; sigma <= 0 selects kernel_size / 6.
std::vector<double> gaussian_kernel(int kernel_size, double sigma = 0.0);

/// Gaussian-smooths a 0/1 (or 0/255) mask into a CV_32F soft mask in [0,1].
/// Borders replicate. kernel_size must be odd; 1 is the identity.
cv::Mat blur_mask(const cv::Mat& mask, int kernel_size = 15, double sigma = 0.0);

/// v ↦ v/127.5 − 1 for an 8-bit raster; output is CV_32F with the same
/// channel count.
cv::Mat normalize(const cv::Mat& image);

/// Inverse of normalize with round-half-up and saturation to 0–255.
cv::Mat denormalize(const cv::Mat& image);

enum class Interpolation { nearest, linear, area, cubic };

Interpolation parse_interpolation(const std::string& name);
std::string to_string(Interpolation interp);

/// Resizes to size×size. Masks should use Interpolation::nearest.
cv::Mat resize_square(const cv::Mat& image, int size, Interpolation interp);

}  // namespace agrisynth
