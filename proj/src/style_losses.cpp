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

#include "agrisynth/style_losses.hpp"

#include <string>

#include "agrisynth/errors.hpp"

namespace agrisynth {

torch::Tensor reparameterize(const StyleCode& code, const torch::Tensor& epsilon) {
  if (!code.mu.sizes().equals(code.logvar.sizes())) {
    throw ArgumentError("style code mu and logvar differ in shape");
  }
  if (!epsilon.sizes().equals(code.mu.sizes())) {
    throw ArgumentError("epsilon shape " + c10::str(epsilon.sizes()) + " does not match mu shape " +
                        c10::str(code.mu.sizes()));
  }
  return code.mu + torch::exp(0.5 * code.logvar) * epsilon;
}

torch::Tensor loss_adversarial(const std::vector<torch::Tensor>& real_logits,
                               const std::vector<torch::Tensor>& fake_logits,
                               AdversarialSide side) {
  if (fake_logits.empty()) throw ArgumentError("adversarial loss needs fake logits");
  const double scales = static_cast<double>(fake_logits.size());
  if (side == AdversarialSide::generator) {
    torch::Tensor total = torch::zeros({}, fake_logits.front().options());
    for (const auto& f : fake_logits) total = total - f.mean();
    return total / scales;
  }
  if (real_logits.size() != fake_logits.size()) {
    throw ArgumentError("discriminator loss needs real logits for every scale");
  }
  torch::Tensor total = torch::zeros({}, fake_logits.front().options());
  for (std::size_t k = 0; k < fake_logits.size(); ++k) {
    total = total + torch::relu(1.0 - real_logits[k]).mean() + torch::relu(1.0 + fake_logits[k]).mean();
  }
  return total / scales;
}

torch::Tensor loss_feature_matching(const FeatureStack& real, const FeatureStack& fake) {
  if (real.size() != fake.size()) {
    throw ArgumentError("feature stacks have " + std::to_string(real.size()) + " vs " +
                        std::to_string(fake.size()) + " scales");
  }
  torch::Tensor total;
  for (std::size_t k = 0; k < real.size(); ++k) {
    if (real[k].size() != fake[k].size()) {
      throw ArgumentError("feature stacks differ in tap count at scale " + std::to_string(k));
    }
    for (std::size_t i = 0; i < real[k].size(); ++i) {
      if (!real[k][i].sizes().equals(fake[k][i].sizes())) {
        throw ArgumentError("feature map shape mismatch at scale " + std::to_string(k) + ", tap " +
                            std::to_string(i));
      }
      const auto term = (fake[k][i] - real[k][i].detach()).abs().mean();
      total = total.defined() ? total + term : term;
    }
  }
  if (!total.defined()) return torch::zeros({});
  return total;
}

torch::Tensor loss_vgg(const torch::Tensor& x_real, const torch::Tensor& x_fake,
                       PerceptualExtractor& extractor) {
  auto batched = [](const torch::Tensor& t) { return t.dim() == 3 ? t.unsqueeze(0) : t; };
  const torch::Tensor real = batched(x_real), fake = batched(x_fake);
  if (real.dim() != 4 || real.size(1) != 4 || !real.sizes().equals(fake.sizes())) {
    throw ArgumentError("loss_vgg expects two 4-channel images of equal shape, got " +
                        c10::str(x_real.sizes()) + " and " + c10::str(x_fake.sizes()));
  }
  std::vector<torch::Tensor> real_feats;
  {
    torch::NoGradGuard no_grad;
    real_feats = extractor.extract(real.slice(1, 0, 3));
  }
  const std::vector<torch::Tensor> fake_feats = extractor.extract(fake.slice(1, 0, 3));
  if (real_feats.size() != 5 || fake_feats.size() != 5) {
    throw ArgumentError("perceptual extractor must return five feature maps");
  }
  torch::Tensor total = torch::zeros({}, fake.options());
  double weight = 0.5;
  for (std::size_t i = 0; i < 5; ++i, weight *= 0.5) {
    total = total + weight * (fake_feats[i] - real_feats[i]).abs().mean();
  }
  return total;
}

torch::Tensor loss_kl(const StyleCode& code) {
  if (!code.mu.sizes().equals(code.logvar.sizes())) {
    throw ArgumentError("style code mu and logvar differ in shape");
  }
  const auto terms = code.mu.pow(2) + code.logvar.exp() - 1.0 - code.logvar;
  if (code.mu.dim() <= 1) return 0.5 * terms.sum();
  return 0.5 * terms.sum() / static_cast<double>(code.mu.size(0));
}

}  // namespace agrisynth
