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
#include <string>
#include <vector>

namespace agrisynth {

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// Train/validation/test partition of scene ids.
///
/// Text form: header `seed=<int>` followed by one `<split>\t<scene_id>` line
/// per entry, splits written in train, val, test order.
struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  /// Throws FormatError if any id appears in more than one split.
  void validate() const;
  bool operator==(const SplitManifest&) const = default;
};

/// Shuffles the (sorted) ids with `seed` and cuts consecutive runs of the
/// requested sizes. Throws ArgumentError when there are not enough ids.
SplitManifest build_split(std::vector<std::string> scene_ids, SplitCounts counts,
                          std::uint64_t seed);

std::string format_manifest(const SplitManifest& manifest);
SplitManifest parse_manifest(const std::string& text);

void write_manifest(const std::filesystem::path& path, const SplitManifest& manifest);
SplitManifest read_manifest(const std::filesystem::path& path);

/// Deterministic choice of floor(fraction * ids.size()) ids, returned in the
/// order they appear in `ids`. fraction must lie in [0,1].
std::vector<std::string> select_fraction(const std::vector<std::string>& ids, double fraction,
                                         std::uint64_t seed);

/// Byte copy of the rgb/nir/mask files of one scene between dataset roots.
void copy_scene_files(const std::filesystem::path& from_root, const std::filesystem::path& to_root,
                      const std::string& scene_id);

}  // namespace agrisynth
