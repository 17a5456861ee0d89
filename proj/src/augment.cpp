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

#include "agrisynth/augment.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "agrisynth/errors.hpp"
#include "agrisynth/seeding.hpp"

namespace agrisynth {
namespace {

MultispectralScene apply_affine(const MultispectralScene& scene, const cv::Mat& m) {
  MultispectralScene out;
  out.scene_id = scene.scene_id;
  const cv::Size size = scene.mask.size();
  cv::warpAffine(scene.rgb, out.rgb, m, size, cv::INTER_LINEAR, cv::BORDER_CONSTANT, cv::Scalar::all(0));
  cv::warpAffine(scene.nir, out.nir, m, size, cv::INTER_LINEAR, cv::BORDER_CONSTANT, cv::Scalar::all(0));
  cv::warpAffine(scene.mask, out.mask, m, size, cv::INTER_NEAREST, cv::BORDER_CONSTANT,
                 cv::Scalar::all(kSoil));
  return out;
}

MultispectralScene apply_exact(const MultispectralScene& scene, auto&& fn) {
  MultispectralScene out;
  out.scene_id = scene.scene_id;
  fn(scene.rgb, out.rgb);
  fn(scene.nir, out.nir);
  fn(scene.mask, out.mask);
  return out;
}

// Integer shift without interpolation.
cv::Mat shift_raster(const cv::Mat& src, int dr, int dc) {
  cv::Mat dst = cv::Mat::zeros(src.size(), src.type());
  const int rows = src.rows, cols = src.cols;
  const int r0 = std::max(0, dr), r1 = std::min(rows, rows + dr);
  const int c0 = std::max(0, dc), c1 = std::min(cols, cols + dc);
  if (r0 < r1 && c0 < c1) {
    src(cv::Rect(c0 - dc, r0 - dr, c1 - c0, r1 - r0)).copyTo(dst(cv::Rect(c0, r0, c1 - c0, r1 - r0)));
  }
  return dst;
}

}  // namespace

GeometricOp parse_geometric_op(std::string_view name) {
  if (name == "rotate") return GeometricOp::rotate;
  if (name == "shift") return GeometricOp::shift;
  if (name == "flip") return GeometricOp::flip;
  if (name == "zoom") return GeometricOp::zoom;
  if (name == "crop") return GeometricOp::crop;
  throw ArgumentError("unknown geometric op '" + std::string(name) + "'");
}

MultispectralScene basic_augment(const MultispectralScene& scene, GeometricOp op,
                                 const GeometricParams& params) {
  scene.validate();
  switch (op) {
    case GeometricOp::rotate: {
      const double a = params.angle_degrees;
      const double turns = a / 90.0;
      if (std::abs(turns - std::round(turns)) < 1e-12) {
        const int q = ((static_cast<int>(std::lround(turns)) % 4) + 4) % 4;
        if (q == 0) return scene.clone();
        const int code = q == 1 ? cv::ROTATE_90_COUNTERCLOCKWISE
                                : q == 2 ? cv::ROTATE_180 : cv::ROTATE_90_CLOCKWISE;
        return apply_exact(scene, [code](const cv::Mat& s, cv::Mat& d) { cv::rotate(s, d, code); });
      }
      const cv::Point2f centre((scene.cols() - 1) / 2.0f, (scene.rows() - 1) / 2.0f);
      return apply_affine(scene, cv::getRotationMatrix2D(centre, a, 1.0));
    }
    case GeometricOp::shift: {
      const int dr = params.shift_rows, dc = params.shift_cols;
      return apply_exact(scene, [dr, dc](const cv::Mat& s, cv::Mat& d) { d = shift_raster(s, dr, dc); });
    }
    case GeometricOp::flip: {
      const int code = params.flip_axis == FlipAxis::horizontal ? 1 : 0;
      return apply_exact(scene, [code](const cv::Mat& s, cv::Mat& d) { cv::flip(s, d, code); });
    }
    case GeometricOp::zoom: {
      if (!(params.zoom_factor > 0.0)) throw ArgumentError("zoom factor must be positive");
      if (params.zoom_factor == 1.0) return scene.clone();
      const cv::Point2f centre((scene.cols() - 1) / 2.0f, (scene.rows() - 1) / 2.0f);
      return apply_affine(scene, cv::getRotationMatrix2D(centre, 0.0, params.zoom_factor));
    }
    case GeometricOp::crop: {
      const BoundingBox& b = params.crop_box;
      if (b.height <= 0 || b.width <= 0 || b.top < 0 || b.left < 0 ||
          b.top + b.height > scene.rows() || b.left + b.width > scene.cols()) {
        throw ArgumentError("crop box outside scene " + scene.scene_id);
      }
      const cv::Rect roi(b.left, b.top, b.width, b.height);
      const cv::Size size = scene.mask.size();
      MultispectralScene out;
      out.scene_id = scene.scene_id;
      cv::resize(scene.rgb(roi), out.rgb, size, 0, 0, cv::INTER_LINEAR);
      cv::resize(scene.nir(roi), out.nir, size, 0, 0, cv::INTER_LINEAR);
      cv::resize(scene.mask(roi), out.mask, size, 0, 0, cv::INTER_NEAREST);
      return out;
    }
  }
  throw ArgumentError("unknown geometric op");
}

MultispectralScene basic_augment(const MultispectralScene& scene, std::string_view op_name,
                                 const GeometricParams& params) {
  return basic_augment(scene, parse_geometric_op(op_name), params);
}

TextureOp parse_texture_op(std::string_view name) {
  if (name == "gaussian_blur") return TextureOp::gaussian_blur;
  if (name == "median_blur") return TextureOp::median_blur;
  if (name == "noise") return TextureOp::noise;
  if (name == "contrast") return TextureOp::contrast;
  if (name == "brightness") return TextureOp::brightness;
  throw ArgumentError("unknown texture op '" + std::string(name) + "'");
}

MultispectralScene texture_augment(const MultispectralScene& scene, TextureOp op,
                                   const TextureParams& params) {
  scene.validate();
  MultispectralScene out;
  out.scene_id = scene.scene_id;
  out.mask = scene.mask.clone();
  auto each = [&](auto&& fn) {
    fn(scene.rgb, out.rgb);
    fn(scene.nir, out.nir);
  };
  const int k = params.kernel_size;
  switch (op) {
    case TextureOp::gaussian_blur:
      if (k < 1 || k % 2 == 0) throw ArgumentError("blur kernel size must be odd");
      each([&](const cv::Mat& s, cv::Mat& d) {
        cv::GaussianBlur(s, d, cv::Size(k, k), params.blur_sigma > 0 ? params.blur_sigma : k / 6.0,
                         0.0, cv::BORDER_REPLICATE);
      });
      break;
    case TextureOp::median_blur:
      if (k < 1 || k % 2 == 0) throw ArgumentError("median kernel size must be odd");
      each([&](const cv::Mat& s, cv::Mat& d) { cv::medianBlur(s, d, k); });
      break;
    case TextureOp::noise: {
      if (params.noise_sigma < 0.0) throw ArgumentError("noise sigma must be non-negative");
      cv::RNG rng(params.noise_seed);
      each([&](const cv::Mat& s, cv::Mat& d) {
        cv::Mat noise(s.size(), CV_MAKETYPE(CV_32F, s.channels()));
        rng.fill(noise, cv::RNG::NORMAL, 0.0, params.noise_sigma);
        cv::Mat f;
        s.convertTo(f, CV_32F);
        f += noise;
        f.convertTo(d, CV_8U);
      });
      break;
    }
    case TextureOp::contrast:
      if (params.contrast < 0.0) throw ArgumentError("contrast gain must be non-negative");
      each([&](const cv::Mat& s, cv::Mat& d) {
        s.convertTo(d, CV_8U, params.contrast, 127.5 * (1.0 - params.contrast));
      });
      break;
    case TextureOp::brightness:
      each([&](const cv::Mat& s, cv::Mat& d) { s.convertTo(d, CV_8U, 1.0, params.brightness); });
      break;
  }
  return out;
}

MultispectralScene texture_augment(const MultispectralScene& scene, std::string_view op_name,
                                   const TextureParams& params) {
  return texture_augment(scene, parse_texture_op(op_name), params);
}

MultispectralScene random_augment(const MultispectralScene& scene, AugmentFamily family,
                                  std::uint64_t seed) {
  SplitMixRng rng(seed);
  if (family == AugmentFamily::basic) {
    GeometricParams p;
    const auto op = static_cast<GeometricOp>(rng.below(5));
    switch (op) {
      case GeometricOp::rotate: p.angle_degrees = rng.uniform(-30.0, 30.0); break;
      case GeometricOp::shift:
        p.shift_rows = static_cast<int>(std::lround(rng.uniform(-0.1, 0.1) * scene.rows()));
        p.shift_cols = static_cast<int>(std::lround(rng.uniform(-0.1, 0.1) * scene.cols()));
        break;
      case GeometricOp::flip:
        p.flip_axis = rng.below(2) == 0 ? FlipAxis::horizontal : FlipAxis::vertical;
        break;
      case GeometricOp::zoom: p.zoom_factor = rng.uniform(1.1, 1.4); break;
      case GeometricOp::crop: {
        const double frac = rng.uniform(0.7, 0.9);
        p.crop_box.height = std::max(1, static_cast<int>(scene.rows() * frac));
        p.crop_box.width = std::max(1, static_cast<int>(scene.cols() * frac));
        p.crop_box.top = static_cast<int>(rng.below(scene.rows() - p.crop_box.height + 1));
        p.crop_box.left = static_cast<int>(rng.below(scene.cols() - p.crop_box.width + 1));
        break;
      }
    }
    return basic_augment(scene, op, p);
  }
  TextureParams p;
  const auto op = static_cast<TextureOp>(rng.below(5));
  switch (op) {
    case TextureOp::gaussian_blur: p.kernel_size = 3 + 2 * static_cast<int>(rng.below(3)); break;
    case TextureOp::median_blur: p.kernel_size = 3 + 2 * static_cast<int>(rng.below(2)); break;
    case TextureOp::noise:
      p.noise_sigma = rng.uniform(5.0, 20.0);
      p.noise_seed = rng.next();
      break;
    case TextureOp::contrast: p.contrast = rng.uniform(0.7, 1.3); break;
    case TextureOp::brightness: p.brightness = rng.uniform(-30.0, 30.0); break;
  }
  return texture_augment(scene, op, p);
}

SplitManifest build_augmented_dataset(const SplitManifest& manifest,
                                      const std::filesystem::path& root,
                                      const std::filesystem::path& out_root,
                                      AugmentFamily family, double fraction, std::uint64_t seed) {
  manifest.validate();
  const std::vector<std::string> chosen = select_fraction(manifest.train, fraction, seed);
  const std::string suffix = family == AugmentFamily::basic ? "_basic" : "_texture";
  SplitManifest out = manifest;
  out.train.clear();
  std::size_t next = 0;
  for (const auto& id : manifest.train) {
    if (next < chosen.size() && chosen[next] == id) {
      ++next;
      MultispectralScene scene = load_scene(root, id);
      MultispectralScene aug = random_augment(scene, family, derive_seed(seed, id));
      aug.scene_id = id + suffix;
      save_scene(out_root, aug);
      out.train.push_back(aug.scene_id);
    } else {
      copy_scene_files(root, out_root, id);
      out.train.push_back(id);
    }
  }
  for (const auto* list : {&manifest.val, &manifest.test}) {
    for (const auto& id : *list) copy_scene_files(root, out_root, id);
  }
  return out;
}

}  // namespace agrisynth
