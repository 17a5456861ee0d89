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
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <torch/torch.h>

namespace agrisynth {

/// Private CPU generator so results never depend on torch's global RNG.
at::Generator make_generator(std::uint64_t seed);

enum class InitScheme {
  gan_normal,  // N(0, 0.02) conv/linear weights, norm scales N(1, 0.02)
  he_normal,   // N(0, sqrt(2 / fan_in)) conv/linear weights, unit norm scales
};

/// Re-initializes every Conv2d, ConvTranspose2d, Linear and BatchNorm of `module` from `gen`.
/// Biases are zeroed.
void initialize_parameters(torch::nn::Module& module, InitScheme scheme, at::Generator& gen);

/// Single-threaded intra-op execution and deterministic kernels.
void set_deterministic(bool enabled);

bool all_finite(const torch::Tensor& t);

/// Deep copies of all parameters, in registration order.
std::vector<torch::Tensor> snapshot_parameters(const torch::nn::Module& module);

/// True when every parameter is bitwise equal to the snapshot.
bool parameters_equal(const torch::nn::Module& module, const std::vector<torch::Tensor>& snapshot);

/// CV_32F H×W×C raster -> float tensor [C,H,W].
torch::Tensor mat_to_chw(const cv::Mat& mat);

/// Float tensor [C,H,W] (or [H,W]) -> CV_32F H×W×C raster.
cv::Mat chw_to_mat(const torch::Tensor& tensor);

/// Normalized [4,H,W] tensor (R, G, B, NIR) from 8-bit rasters.
torch::Tensor four_channel_from(const cv::Mat& rgb, const cv::Mat& nir);

/// Splits a [4,H,W] tensor in [-1,1] back into 8-bit rgb and nir rasters.
void four_channel_to(const torch::Tensor& image, cv::Mat& rgb, cv::Mat& nir);

// Scalar metadata stored next to module weights in checkpoint archives.
void archive_write(torch::serialize::OutputArchive& archive, const std::string& key,
                   const std::string& value);
void archive_write(torch::serialize::OutputArchive& archive, const std::string& key,
                   std::int64_t value);
std::string archive_read_string(torch::serialize::InputArchive& archive, const std::string& key);
std::int64_t archive_read_int(torch::serialize::InputArchive& archive, const std::string& key);

/// Loads an archive, mapping torch's exceptions to IoError / FormatError.
void load_archive(torch::serialize::InputArchive& archive, const std::string& path);

}  // namespace agrisynth
