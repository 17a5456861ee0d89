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

#include "agrisynth/toy_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <opencv2/imgproc.hpp>

#include "agrisynth/seeding.hpp"

namespace agrisynth {
namespace {

struct Colour {
  double r, g, b, nir;
};

void paint(MultispectralScene& scene, const cv::Mat& region, std::uint8_t cls, Colour colour,
           double jitter, SplitMixRng& rng) {
  for (int r = 0; r < scene.rows(); ++r) {
    const auto* on = region.ptr<std::uint8_t>(r);
    auto* rgb = scene.rgb.ptr<cv::Vec3b>(r);
    auto* nir = scene.nir.ptr<std::uint8_t>(r);
    auto* mask = scene.mask.ptr<std::uint8_t>(r);
    for (int c = 0; c < scene.cols(); ++c) {
      if (!on[c]) continue;
      const double n = rng.uniform(-jitter, jitter);
      rgb[c] = cv::Vec3b(cv::saturate_cast<std::uint8_t>(colour.r + n),
                         cv::saturate_cast<std::uint8_t>(colour.g + n),
                         cv::saturate_cast<std::uint8_t>(colour.b + n));
      nir[c] = cv::saturate_cast<std::uint8_t>(colour.nir + 1.5 * n);
      mask[c] = cls;
    }
  }
}

cv::Mat rosette(int rows, int cols, double cr, double cc, double radius, int leaves,
                double phase) {
  cv::Mat m = cv::Mat::zeros(rows, cols, CV_8UC1);
  for (int i = 0; i < leaves; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / leaves;
    const double lr = cr + 0.5 * radius * std::sin(a);
    const double lc = cc + 0.5 * radius * std::cos(a);
    cv::ellipse(m, cv::Point(static_cast<int>(std::lround(lc)), static_cast<int>(std::lround(lr))),
                cv::Size(std::max(1, static_cast<int>(radius * 0.55)),
                         std::max(1, static_cast<int>(radius * 0.3))),
                -a * 180.0 / std::numbers::pi, 0, 360, cv::Scalar(1), cv::FILLED, cv::LINE_8);
  }
  cv::circle(m, cv::Point(static_cast<int>(std::lround(cc)), static_cast<int>(std::lround(cr))),
             std::max(1, static_cast<int>(radius * 0.25)), cv::Scalar(1), cv::FILLED, cv::LINE_8);
  return m;
}

}  // namespace

cv::Mat ellipse_mask(int size, double centre_row, double centre_col, double radius_rows,
                     double radius_cols, double angle_degrees) {
  cv::Mat m = cv::Mat::zeros(size, size, CV_8UC1);
  const double t = angle_degrees * std::numbers::pi / 180.0;
  const double ct = std::cos(t), st = std::sin(t);
  for (int r = 0; r < size; ++r) {
    auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < size; ++c) {
      const double dr = r - centre_row, dc = c - centre_col;
      const double u = dc * ct + dr * st;
      const double v = -dc * st + dr * ct;
      if ((u * u) / (radius_cols * radius_cols) + (v * v) / (radius_rows * radius_rows) <= 1.0) {
        row[c] = 1;
      }
    }
  }
  return m;
}

MultispectralScene make_toy_scene(const std::string& scene_id, std::uint64_t seed,
                                  const ToySceneOptions& opt) {
  SplitMixRng rng(seed);
  MultispectralScene scene;
  scene.scene_id = scene_id;
  scene.rgb = cv::Mat(opt.rows, opt.cols, CV_8UC3);
  scene.nir = cv::Mat(opt.rows, opt.cols, CV_8UC1);
  scene.mask = cv::Mat::zeros(opt.rows, opt.cols, CV_8UC1);

  // Soil: per-scene base tone, a smooth gradient and per-pixel grain.
  const double base = rng.uniform(-15.0, 15.0);
  const double grad_r = rng.uniform(-0.15, 0.15), grad_c = rng.uniform(-0.15, 0.15);
  for (int r = 0; r < opt.rows; ++r) {
    auto* rgb = scene.rgb.ptr<cv::Vec3b>(r);
    auto* nir = scene.nir.ptr<std::uint8_t>(r);
    for (int c = 0; c < opt.cols; ++c) {
      const double shade = base + grad_r * r + grad_c * c + rng.uniform(-12.0, 12.0);
      rgb[c] = cv::Vec3b(cv::saturate_cast<std::uint8_t>(125 + shade),
                         cv::saturate_cast<std::uint8_t>(95 + shade),
                         cv::saturate_cast<std::uint8_t>(65 + shade));
      nir[c] = cv::saturate_cast<std::uint8_t>(60 + 0.6 * shade);
    }
  }

  const int half = opt.anchor_window / 2;
  const int n_weeds = opt.min_weeds + static_cast<int>(rng.below(opt.max_weeds - opt.min_weeds + 1));
  for (int i = 0; i < n_weeds; ++i) {
    const double cr = rng.uniform(4.0, opt.rows - 4.0), cc = rng.uniform(4.0, opt.cols - 4.0);
    const double rad = opt.weed_radius * rng.uniform(0.7, 1.3);
    cv::Mat weed = ellipse_mask(std::max(opt.rows, opt.cols), cr, cc, rad, rad * rng.uniform(0.5, 1.0),
                                rng.uniform(0.0, 180.0))(cv::Rect(0, 0, opt.cols, opt.rows));
    paint(scene, weed, kWeed, {150, 165, 45, 150}, 10.0, rng);
  }

  const int n_crops = opt.min_crops + static_cast<int>(rng.below(opt.max_crops - opt.min_crops + 1));
  for (int i = 0; i < n_crops; ++i) {
    double cr, cc;
    if (i == 0 && opt.rows > 2 * half + 4 && opt.cols > 2 * half + 4) {
      cr = rng.uniform(half + 2.0, opt.rows - half - 2.0);
      cc = rng.uniform(half + 2.0, opt.cols - half - 2.0);
    } else {
      cr = rng.uniform(6.0, opt.rows - 6.0);
      cc = rng.uniform(6.0, opt.cols - 6.0);
    }
    const double rad = opt.crop_radius * rng.uniform(0.75, 1.25);
    const int leaves = 4 + static_cast<int>(rng.below(3));
    const cv::Mat crop = rosette(opt.rows, opt.cols, cr, cc, rad, leaves, rng.uniform(0.0, 3.0));
    paint(scene, crop, kCrop, {45, 140, 40, 215}, 12.0, rng);
  }
  return scene;
}

std::vector<std::string> write_toy_dataset(const std::filesystem::path& root, int count,
                                           std::uint64_t seed, const ToySceneOptions& options) {
  std::vector<std::string> ids;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%03d", i);
    ids.emplace_back(name);
    save_scene(root, make_toy_scene(name, derive_seed(seed, {static_cast<std::uint64_t>(i)}), options));
  }
  return ids;
}

}  // namespace agrisynth
