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

#include <vector>

#include <torch/torch.h>

namespace agrisynth {

/// Variational style posterior. Variance is stored as log-variance:
/// sigma^2 = exp(logvar). Tensors are [D] for one code or [N, D] for a batch.
struct StyleCode {
  torch::Tensor mu;
  torch::Tensor logvar;
};

/// z = mu + exp(logvar / 2) * epsilon.
torch::Tensor reparameterize(const StyleCode& code, const torch::Tensor& epsilon);

/// Intermediate discriminator activations, indexed [scale][tap].
using FeatureStack = std::vector<std::vector<torch::Tensor>>;

enum class AdversarialSide { discriminator, generator };

/// Multiscale hinge loss, averaged over scales and logit-map elements.
///
///   discriminator: mean_k( E[relu(1 - D_k(real))] + E[relu(1 + D_k(fake))] )
///   generator:     -mean_k( E[D_k(fake)] )
///
/// The generator side ignores `real_logits` (it may be empty).
torch::Tensor loss_adversarial(const std::vector<torch::Tensor>& real_logits,
                               const std::vector<torch::Tensor>& fake_logits,
                               AdversarialSide side);

/// Sum over scales and taps of the mean absolute difference of each map.
/// The real stack is detached, so gradients reach the fake stack only.
torch::Tensor loss_feature_matching(const FeatureStack& real, const FeatureStack& fake);

/// Source of the five perceptual feature maps consumed by loss_vgg.
class PerceptualExtractor {
 public:
  virtual ~PerceptualExtractor() = default;
  /// rgb: [N, 3, H, W] in [-1, 1]. Returns exactly five maps, shallow first.
  virtual std::vector<torch::Tensor> extract(const torch::Tensor& rgb) = 0;
};

/// sum_{i=1..5} 2^-i * mean|phi_i(real) - phi_i(fake)| over the RGB planes of
/// two 4-channel images ([4,H,W] or [N,4,H,W]). NIR is not seen by the
/// perceptual network. Real features are computed without gradient.
torch::Tensor loss_vgg(const torch::Tensor& x_real, const torch::Tensor& x_fake,
                       PerceptualExtractor& extractor);

/// KL(q(z|x) || N(0, I)) = 1/2 sum_j (mu_j^2 + exp(logvar_j) - 1 - logvar_j),
/// averaged over the batch for [N, D] codes.
torch::Tensor loss_kl(const StyleCode& code);

}  // namespace agrisynth
