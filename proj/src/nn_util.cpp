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

#include "agrisynth/nn_util.hpp"

#include <cmath>
#include <filesystem>

#include <ATen/CPUGeneratorImpl.h>

#include "agrisynth/dataset.hpp"
#include "agrisynth/errors.hpp"

namespace agrisynth {

at::Generator make_generator(std::uint64_t seed) {
  return at::make_generator<at::CPUGeneratorImpl>(seed & 0x7FFFFFFFFFFFFFFFULL);
}

void initialize_parameters(torch::nn::Module& module, InitScheme scheme, at::Generator& gen) {
  torch::NoGradGuard no_grad;
  auto init_weight = [&](torch::Tensor& w) {
    double std = 0.02;
    if (scheme == InitScheme::he_normal) {
      const double fan_in = static_cast<double>(w.numel() / w.size(0));
      std = std::sqrt(2.0 / fan_in);
    }
    w.normal_(0.0, std, gen);
  };
  // modules(include_self=true) needs a shared_ptr owner, which a module under
  // construction does not have yet.
  std::vector<torch::nn::Module*> all{&module};
  for (const auto& child : module.modules(/*include_self=*/false)) all.push_back(child.get());
  for (torch::nn::Module* m : all) {
    if (auto* conv = m->as<torch::nn::Conv2d>()) {
      init_weight(conv->weight);
      if (conv->bias.defined()) conv->bias.zero_();
    } else if (auto* deconv = m->as<torch::nn::ConvTranspose2d>()) {
      init_weight(deconv->weight);
      if (deconv->bias.defined()) deconv->bias.zero_();
    } else if (auto* lin = m->as<torch::nn::Linear>()) {
      init_weight(lin->weight);
      if (lin->bias.defined()) lin->bias.zero_();
    } else if (auto* bn = m->as<torch::nn::BatchNorm2d>()) {
      if (bn->weight.defined()) {
        if (scheme == InitScheme::gan_normal) {
          bn->weight.normal_(1.0, 0.02, gen);
        } else {
          bn->weight.fill_(1.0);
        }
      }
      if (bn->bias.defined()) bn->bias.zero_();
    } else if (auto* bn1 = m->as<torch::nn::BatchNorm1d>()) {
      if (bn1->weight.defined()) bn1->weight.fill_(1.0);
      if (bn1->bias.defined()) bn1->bias.zero_();
    }
  }
}

void set_deterministic(bool enabled) {
  at::globalContext().setDeterministicAlgorithms(enabled, /*warn_only=*/false);
  if (enabled) {
    at::set_num_threads(1);
  }
}

bool all_finite(const torch::Tensor& t) { return torch::isfinite(t).all().item<bool>(); }

std::vector<torch::Tensor> snapshot_parameters(const torch::nn::Module& module) {
  std::vector<torch::Tensor> out;
  for (const auto& p : module.parameters()) out.push_back(p.detach().clone());
  return out;
}

bool parameters_equal(const torch::nn::Module& module, const std::vector<torch::Tensor>& snapshot) {
  const auto params = module.parameters();
  if (params.size() != snapshot.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!torch::equal(params[i].detach(), snapshot[i])) return false;
  }
  return true;
}

torch::Tensor mat_to_chw(const cv::Mat& mat) {
  CV_Assert(mat.depth() == CV_32F);
  cv::Mat contiguous = mat.isContinuous() ? mat : mat.clone();
  auto t = torch::from_blob(contiguous.data, {contiguous.rows, contiguous.cols, contiguous.channels()},
                            torch::kFloat32);
  return t.permute({2, 0, 1}).contiguous().clone();
}

cv::Mat chw_to_mat(const torch::Tensor& tensor) {
  torch::Tensor t = tensor.detach().to(torch::kFloat32).cpu();
  if (t.dim() == 2) t = t.unsqueeze(0);
  TORCH_CHECK(t.dim() == 3, "expected [C,H,W] tensor");
  t = t.permute({1, 2, 0}).contiguous();
  const int rows = static_cast<int>(t.size(0)), cols = static_cast<int>(t.size(1));
  const int ch = static_cast<int>(t.size(2));
  cv::Mat out(rows, cols, CV_MAKETYPE(CV_32F, ch));
  std::memcpy(out.data, t.data_ptr<float>(), sizeof(float) * t.numel());
  return out;
}

torch::Tensor four_channel_from(const cv::Mat& rgb, const cv::Mat& nir) {
  CV_Assert(rgb.type() == CV_8UC3 && nir.type() == CV_8UC1 && rgb.size() == nir.size());
  return torch::cat({mat_to_chw(normalize(rgb)), mat_to_chw(normalize(nir))}, 0);
}

void four_channel_to(const torch::Tensor& image, cv::Mat& rgb, cv::Mat& nir) {
  TORCH_CHECK(image.dim() == 3 && image.size(0) == 4, "expected [4,H,W] image");
  rgb = denormalize(chw_to_mat(image.slice(0, 0, 3)));
  nir = denormalize(chw_to_mat(image.slice(0, 3, 4)));
}

void archive_write(torch::serialize::OutputArchive& archive, const std::string& key,
                   const std::string& value) {
  archive.write(key, c10::IValue(value));
}

void archive_write(torch::serialize::OutputArchive& archive, const std::string& key,
                   std::int64_t value) {
  archive.write(key, c10::IValue(value));
}

std::string archive_read_string(torch::serialize::InputArchive& archive, const std::string& key) {
  c10::IValue v;
  if (!archive.try_read(key, v) || !v.isString()) {
    throw FormatError("checkpoint is missing string entry '" + key + "'");
  }
  return v.toStringRef();
}

std::int64_t archive_read_int(torch::serialize::InputArchive& archive, const std::string& key) {
  c10::IValue v;
  if (!archive.try_read(key, v) || !v.isInt()) {
    throw FormatError("checkpoint is missing integer entry '" + key + "'");
  }
  return v.toInt();
}

void load_archive(torch::serialize::InputArchive& archive, const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("missing checkpoint: " + path);
  try {
    archive.load_from(path);
  } catch (const c10::Error& e) {
    throw FormatError("cannot read checkpoint " + path + ": " + e.what_without_backtrace());
  }
}

}  // namespace agrisynth
