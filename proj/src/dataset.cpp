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

#include "agrisynth/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "agrisynth/errors.hpp"

namespace agrisynth {
namespace fs = std::filesystem;
namespace {

cv::Mat read_png(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing file: " + path.string());
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty()) throw IoError("cannot decode image: " + path.string());
  if (img.depth() != CV_8U) throw FormatError("expected 8-bit image: " + path.string());
  return img;
}

void write_png(const fs::path& path, const cv::Mat& img) {
  fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), img)) throw IoError("cannot write image: " + path.string());
}

std::string size_str(const cv::Mat& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

}  // namespace

void MultispectralScene::validate() const {
  if (rgb.type() != CV_8UC3) throw FormatError(scene_id + ": rgb must be 8-bit 3-channel");
  if (nir.type() != CV_8UC1) throw FormatError(scene_id + ": nir must be 8-bit 1-channel");
  if (mask.type() != CV_8UC1) throw FormatError(scene_id + ": mask must be 8-bit 1-channel");
  if (rgb.size() != mask.size() || nir.size() != mask.size()) {
    throw FormatError(scene_id + ": raster shape mismatch (rgb " + size_str(rgb) + ", nir " +
                      size_str(nir) + ", mask " + size_str(mask) + ")");
  }
  std::array<bool, 256> seen{};
  for (int r = 0; r < mask.rows; ++r) {
    const auto* row = mask.ptr<std::uint8_t>(r);
    for (int c = 0; c < mask.cols; ++c) seen[row[c]] = true;
  }
  std::string bad;
  for (int v = kNumSceneClasses; v < 256; ++v) {
    if (seen[v]) bad += (bad.empty() ? "" : ", ") + std::to_string(v);
  }
  if (!bad.empty()) throw FormatError(scene_id + ": unknown mask value(s) " + bad);
}

MultispectralScene MultispectralScene::clone() const {
  return {rgb.clone(), nir.clone(), mask.clone(), scene_id};
}

MultispectralScene load_scene(const fs::path& root, const std::string& scene_id) {
  const std::string file = scene_id + ".png";
  const cv::Mat bgr = read_png(root / "rgb" / file);
  const cv::Mat nir = read_png(root / "nir" / file);
  const cv::Mat mask = read_png(root / "mask" / file);
  if (bgr.channels() != 3) {
    throw FormatError("expected 3-channel rgb: " + (root / "rgb" / file).string());
  }
  if (nir.channels() != 1) {
    throw FormatError("expected 1-channel nir: " + (root / "nir" / file).string());
  }
  if (mask.channels() != 1) {
    throw FormatError("expected 1-channel mask: " + (root / "mask" / file).string());
  }
  MultispectralScene scene;
  cv::cvtColor(bgr, scene.rgb, cv::COLOR_BGR2RGB);
  scene.nir = nir;
  scene.mask = mask;
  scene.scene_id = scene_id;
  scene.validate();
  return scene;
}

void save_scene(const fs::path& root, const MultispectralScene& scene) {
  scene.validate();
  const std::string file = scene.scene_id + ".png";
  cv::Mat bgr;
  cv::cvtColor(scene.rgb, bgr, cv::COLOR_RGB2BGR);
  write_png(root / "rgb" / file, bgr);
  write_png(root / "nir" / file, scene.nir);
  write_png(root / "mask" / file, scene.mask);
}

std::vector<std::string> list_scene_ids(const fs::path& root) {
  const fs::path dir = root / "rgb";
  if (!fs::is_directory(dir)) throw IoError("missing directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

PixelCoord CropComponent::stem() const {
  return {static_cast<int>(std::floor(centroid_row + 0.5)),
          static_cast<int>(std::floor(centroid_col + 0.5))};
}

ComponentLabels label_crop_components(const cv::Mat& mask) {
  CV_Assert(mask.type() == CV_8UC1);
  cv::Mat binary = (mask == kCrop);
  cv::Mat cv_labels, stats, centroids;
  const int n = cv::connectedComponentsWithStats(binary, cv_labels, stats, centroids, 8, CV_32S);

  // Renumber by raster order of each component's first pixel so ids do not
  // depend on OpenCV's internal scan strategy.
  std::vector<int> remap(n, 0);
  int next = 1;
  for (int r = 0; r < cv_labels.rows; ++r) {
    const int* row = cv_labels.ptr<int>(r);
    for (int c = 0; c < cv_labels.cols; ++c) {
      if (row[c] != 0 && remap[row[c]] == 0) remap[row[c]] = next++;
    }
  }

  ComponentLabels out;
  out.labels = cv::Mat(cv_labels.size(), CV_32S);
  for (int r = 0; r < cv_labels.rows; ++r) {
    const int* src = cv_labels.ptr<int>(r);
    int* dst = out.labels.ptr<int>(r);
    for (int c = 0; c < cv_labels.cols; ++c) dst[c] = remap[src[c]];
  }
  out.components.resize(n > 0 ? n - 1 : 0);
  for (int l = 1; l < n; ++l) {
    CropComponent& comp = out.components[remap[l] - 1];
    comp.component_id = remap[l];
    comp.centroid_col = centroids.at<double>(l, 0);
    comp.centroid_row = centroids.at<double>(l, 1);
    comp.bbox = {stats.at<int>(l, cv::CC_STAT_TOP), stats.at<int>(l, cv::CC_STAT_LEFT),
                 stats.at<int>(l, cv::CC_STAT_HEIGHT), stats.at<int>(l, cv::CC_STAT_WIDTH)};
    comp.area = stats.at<int>(l, cv::CC_STAT_AREA);
  }
  return out;
}

std::optional<PixelCoord> centered_window(const CropComponent& component, int size, int rows,
                                          int cols) {
  const PixelCoord stem = component.stem();
  const PixelCoord origin{stem.row - size / 2, stem.col - size / 2};
  if (origin.row < 0 || origin.col < 0 || origin.row + size > rows || origin.col + size > cols) {
    return std::nullopt;
  }
  return origin;
}

std::vector<Patch> extract_crop_patches(const MultispectralScene& scene, int size) {
  scene.validate();
  if (size <= 0 || size > std::min(scene.rows(), scene.cols())) {
    throw ArgumentError("patch size " + std::to_string(size) + " does not fit scene " +
                        scene.scene_id);
  }
  const ComponentLabels labels = label_crop_components(scene.mask);
  std::vector<Patch> patches;
  for (const auto& comp : labels.components) {
    const auto origin = centered_window(comp, size, scene.rows(), scene.cols());
    if (!origin) continue;
    const cv::Rect roi(origin->col, origin->row, size, size);
    Patch p;
    p.rgb = scene.rgb(roi).clone();
    p.nir = scene.nir(roi).clone();
    p.mask = scene.mask(roi).clone();
    p.instance_mask = cv::Mat(size, size, CV_8UC1);
    const cv::Mat label_roi = labels.labels(roi);
    for (int r = 0; r < size; ++r) {
      const int* src = label_roi.ptr<int>(r);
      auto* dst = p.instance_mask.ptr<std::uint8_t>(r);
      for (int c = 0; c < size; ++c) dst[c] = src[c] == comp.component_id ? 1 : 0;
    }
    p.origin = *origin;
    p.scene_id = scene.scene_id;
    p.component_id = comp.component_id;
    patches.push_back(std::move(p));
  }
  return patches;
}

std::vector<double> gaussian_kernel(int kernel_size, double sigma) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw ArgumentError("kernel size must be odd and >= 1, got " + std::to_string(kernel_size));
  }
  if (sigma <= 0.0) sigma = kernel_size / 6.0;
  const int half = kernel_size / 2;
  std::vector<double> w(kernel_size);
  double total = 0.0;
  for (int i = -half; i <= half; ++i) {
    w[i + half] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += w[i + half];
  }
  for (double& v : w) v /= total;
  return w;
}

cv::Mat blur_mask(const cv::Mat& mask, int kernel_size, double sigma) {
  const std::vector<double> w = gaussian_kernel(kernel_size, sigma);
  CV_Assert(mask.channels() == 1);
  cv::Mat src;
  if (mask.depth() == CV_8U) {
    double max_v = 0.0;
    cv::minMaxLoc(mask, nullptr, &max_v);
    mask.convertTo(src, CV_64F, max_v > 1.0 ? 1.0 / 255.0 : 1.0);
  } else {
    mask.convertTo(src, CV_64F);
  }
  if (kernel_size == 1) {
    cv::Mat out;
    src.convertTo(out, CV_32F);
    return out;
  }
  const cv::Mat kernel(static_cast<int>(w.size()), 1, CV_64F, const_cast<double*>(w.data()));
  cv::Mat blurred;
  cv::sepFilter2D(src, blurred, CV_64F, kernel, kernel, cv::Point(-1, -1), 0.0,
                  cv::BORDER_REPLICATE);
  cv::Mat out;
  blurred.convertTo(out, CV_32F);
  cv::min(out, 1.0, out);
  cv::max(out, 0.0, out);
  return out;
}

cv::Mat normalize(const cv::Mat& image) {
  CV_Assert(image.depth() == CV_8U);
  std::array<float, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = static_cast<float>(v / 127.5 - 1.0);
  cv::Mat out(image.size(), CV_MAKETYPE(CV_32F, image.channels()));
  const int width = image.cols * image.channels();
  for (int r = 0; r < image.rows; ++r) {
    const auto* src = image.ptr<std::uint8_t>(r);
    auto* dst = out.ptr<float>(r);
    for (int c = 0; c < width; ++c) dst[c] = lut[src[c]];
  }
  return out;
}

cv::Mat denormalize(const cv::Mat& image) {
  CV_Assert(image.depth() == CV_32F);
  cv::Mat out(image.size(), CV_MAKETYPE(CV_8U, image.channels()));
  const int width = image.cols * image.channels();
  for (int r = 0; r < image.rows; ++r) {
    const auto* src = image.ptr<float>(r);
    auto* dst = out.ptr<std::uint8_t>(r);
    for (int c = 0; c < width; ++c) {
      const double v = std::floor((static_cast<double>(src[c]) + 1.0) * 127.5 + 0.5);
      dst[c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

Interpolation parse_interpolation(const std::string& name) {
  if (name == "nearest") return Interpolation::nearest;
  if (name == "linear") return Interpolation::linear;
  if (name == "area") return Interpolation::area;
  if (name == "cubic") return Interpolation::cubic;
  throw ArgumentError("unknown interpolation '" + name + "'");
}

std::string to_string(Interpolation interp) {
  switch (interp) {
    case Interpolation::nearest: return "nearest";
    case Interpolation::linear: return "linear";
    case Interpolation::area: return "area";
    case Interpolation::cubic: return "cubic";
  }
  return "nearest";
}

cv::Mat resize_square(const cv::Mat& image, int size, Interpolation interp) {
  if (image.rows == size && image.cols == size) return image.clone();
  int flag = cv::INTER_NEAREST;
  switch (interp) {
    case Interpolation::nearest: flag = cv::INTER_NEAREST; break;
    case Interpolation::linear: flag = cv::INTER_LINEAR; break;
    case Interpolation::area: flag = cv::INTER_AREA; break;
    case Interpolation::cubic: flag = cv::INTER_CUBIC; break;
  }
  cv::Mat out;
  cv::resize(image, out, cv::Size(size, size), 0, 0, flag);
  return out;
}

}  // namespace agrisynth
