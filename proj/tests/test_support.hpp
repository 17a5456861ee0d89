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

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "agrisynth/composer.hpp"
#include "agrisynth/dataset.hpp"
#include "agrisynth/nn_util.hpp"
#include "agrisynth/seeding.hpp"
#include "agrisynth/toy_data.hpp"

namespace agrisynth::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("agrisynth_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline cv::Mat random_labels(std::mt19937_64& rng, int rows, int cols, int classes) {
  std::uniform_int_distribution<int> dist(0, classes - 1);
  cv::Mat m(rows, cols, CV_8UC1);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m.at<std::uint8_t>(r, c) = static_cast<std::uint8_t>(dist(rng));
  }
  return m;
}

/// Per-class |A ∩ B| / |A ∪ B| from explicit pixel index sets; nullopt when
/// the union is empty.
inline std::vector<std::optional<double>> brute_force_iou(const cv::Mat& gt, const cv::Mat& pred,
                                                          int classes) {
  std::vector<std::optional<double>> out;
  for (int k = 0; k < classes; ++k) {
    std::set<int> a, b;
    for (int i = 0; i < gt.rows * gt.cols; ++i) {
      if (gt.data[i] == k) a.insert(i);
      if (pred.data[i] == k) b.insert(i);
    }
    std::set<int> uni = a;
    uni.insert(b.begin(), b.end());
    std::size_t inter = 0;
    for (int i : a) inter += b.count(i);
    if (uni.empty()) {
      out.emplace_back();
    } else {
      out.emplace_back(static_cast<double>(inter) / static_cast<double>(uni.size()));
    }
  }
  return out;
}

/// Fraction of coordinates whose autograd gradient agrees with a central
/// finite difference (step h) to relative error below `tol`. `f` maps the
/// (double) inputs to a scalar.
inline double gradient_agreement(const std::function<torch::Tensor(const std::vector<torch::Tensor>&)>& f,
                                 std::vector<torch::Tensor> inputs, double h = 1e-4,
                                 double tol = 1e-4) {
  for (auto& t : inputs) t = t.detach().to(torch::kFloat64).clone().set_requires_grad(true);
  f(inputs).backward();
  std::size_t total = 0, good = 0;
  for (auto& t : inputs) {
    const torch::Tensor analytic = t.grad().clone();
    auto flat = t.detach().view({-1});
    for (int64_t i = 0; i < flat.numel(); ++i) {
      const double orig = flat[i].item<double>();
      double fp, fm;
      {
        torch::NoGradGuard ng;
        flat[i].fill_(orig + h);
        fp = f(inputs).item<double>();
        flat[i].fill_(orig - h);
        fm = f(inputs).item<double>();
        flat[i].fill_(orig);
      }
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic.view({-1})[i].item<double>();
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double rel = scale < 1e-12 ? 0.0 : std::abs(a - numeric) / scale;
      ++total;
      if (rel < tol) ++good;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(good) / static_cast<double>(total);
}

/// Deterministic synthesizer for composer tests: ellipse shapes, flat crop
/// texture, soil texture = darkened background.
class StubSynthesizer : public PatchSynthesizer {
 public:
  explicit StubSynthesizer(int size) : size_(size) {}
  int patch_size() const override { return size_; }

  BinaryShape sample_shape(std::uint64_t seed) override {
    SplitMixRng rng(seed);
    const double half = size_ / 2.0;
    BinaryShape s;
    s.values = ellipse_mask(size_, half + rng.uniform(-2, 2), half + rng.uniform(-2, 2),
                            rng.uniform(size_ * 0.15, size_ * 0.4), rng.uniform(size_ * 0.15, size_ * 0.4),
                            rng.uniform(0, 180));
    cv::Mat soft;
    s.values.convertTo(soft, CV_32F);
    s.soft_source = soft;
    return s;
  }

  torch::Tensor crop_style(const BinaryShape&, std::uint64_t seed) override {
    SplitMixRng rng(seed);
    auto t = torch::empty({4, size_, size_});
    for (int c = 0; c < 4; ++c) t[c].fill_(rng.uniform(-1, 1));
    return t;
  }

  torch::Tensor soil_style(const BinaryShape&, const torch::Tensor& background, std::uint64_t seed) override {
    SplitMixRng rng(seed);
    return (background * 0.5 + rng.uniform(-0.4, 0.4)).clamp(-1, 1);
  }

 private:
  int size_;
};

/// Hand-built scene: soil with deterministic texture, given crop and weed discs.
struct Disc {
  int row, col, radius;
};

inline MultispectralScene disc_scene(const std::string& id, int rows, int cols, const std::vector<Disc>& crops,
                                     const std::vector<Disc>& weeds, std::uint64_t texture_seed = 1) {
  MultispectralScene s;
  s.scene_id = id;
  s.rgb = cv::Mat(rows, cols, CV_8UC3);
  s.nir = cv::Mat(rows, cols, CV_8UC1);
  s.mask = cv::Mat::zeros(rows, cols, CV_8UC1);
  SplitMixRng rng(texture_seed);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      s.rgb.at<cv::Vec3b>(r, c) = cv::Vec3b(static_cast<std::uint8_t>(100 + rng.below(40)),
                                            static_cast<std::uint8_t>(70 + rng.below(30)),
                                            static_cast<std::uint8_t>(40 + rng.below(20)));
      s.nir.at<std::uint8_t>(r, c) = static_cast<std::uint8_t>(60 + rng.below(30));
    }
  }
  for (const auto& d : crops) {
    cv::circle(s.mask, {d.col, d.row}, d.radius, cv::Scalar(kCrop), cv::FILLED);
    cv::circle(s.rgb, {d.col, d.row}, d.radius, cv::Scalar(40, 150, 40), cv::FILLED);
    cv::circle(s.nir, {d.col, d.row}, d.radius, cv::Scalar(220), cv::FILLED);
  }
  for (const auto& d : weeds) {
    cv::circle(s.mask, {d.col, d.row}, d.radius, cv::Scalar(kWeed), cv::FILLED);
    cv::circle(s.rgb, {d.col, d.row}, d.radius, cv::Scalar(150, 170, 50), cv::FILLED);
    cv::circle(s.nir, {d.col, d.row}, d.radius, cv::Scalar(150), cv::FILLED);
  }
  return s;
}

inline bool mats_equal(const cv::Mat& a, const cv::Mat& b) {
  if (a.size() != b.size() || a.type() != b.type()) return false;
  cv::Mat diff;
  cv::compare(a.reshape(1), b.reshape(1), diff, cv::CMP_NE);
  return cv::countNonZero(diff) == 0;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Relative path -> file bytes for every regular file below `root`.
inline std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = read_bytes(e.path());
  }
  return out;
}

}  // namespace agrisynth::testing
