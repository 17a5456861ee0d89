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
#include <stdexcept>
#include <string>

namespace agrisynth {

/// A file could not be read or written. The message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented format (raster shapes, mask values,
/// manifest syntax, checkpoint layout).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed an argument outside the operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A training loop produced a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::string component, std::int64_t step)
      : std::runtime_error("non-finite " + component + " loss at step " +
                           std::to_string(step)),
        component_(std::move(component)),
        step_(step) {}

  const std::string& component() const { return component_; }
  std::int64_t step() const { return step_; }

 private:
  std::string component_;
  std::int64_t step_;
};

}  // namespace agrisynth
