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

#include "agrisynth/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "agrisynth/errors.hpp"
#include "agrisynth/seeding.hpp"

namespace agrisynth {
namespace fs = std::filesystem;

void SplitManifest::validate() const {
  std::set<std::string> seen;
  for (const auto* list : {&train, &val, &test}) {
    for (const auto& id : *list) {
      if (!seen.insert(id).second) throw FormatError("scene id '" + id + "' appears twice in manifest");
    }
  }
}

SplitManifest build_split(std::vector<std::string> scene_ids, SplitCounts counts,
                          std::uint64_t seed) {
  std::sort(scene_ids.begin(), scene_ids.end());
  scene_ids.erase(std::unique(scene_ids.begin(), scene_ids.end()), scene_ids.end());
  const std::size_t needed = counts.train + counts.val + counts.test;
  if (needed > scene_ids.size()) {
    throw ArgumentError("split needs " + std::to_string(needed) + " scene ids, only " +
                        std::to_string(scene_ids.size()) + " available");
  }
  SplitMixRng rng(derive_seed(seed, {0x5b117}));
  rng.shuffle(scene_ids);
  SplitManifest m;
  m.seed = seed;
  auto it = scene_ids.begin();
  m.train.assign(it, it + counts.train);
  it += counts.train;
  m.val.assign(it, it + counts.val);
  it += counts.val;
  m.test.assign(it, it + counts.test);
  return m;
}

std::string format_manifest(const SplitManifest& manifest) {
  std::string out = "seed=" + std::to_string(manifest.seed) + "\n";
  for (const auto& id : manifest.train) out += "train\t" + id + "\n";
  for (const auto& id : manifest.val) out += "val\t" + id + "\n";
  for (const auto& id : manifest.test) out += "test\t" + id + "\n";
  return out;
}

SplitManifest parse_manifest(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line.rfind("seed=", 0) != 0) {
    throw FormatError("manifest must start with 'seed=<int>'");
  }
  SplitManifest m;
  try {
    m.seed = std::stoull(line.substr(5));
  } catch (const std::exception&) {
    throw FormatError("manifest seed is not an integer: '" + line + "'");
  }
  int lineno = 1;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": expected '<split>\\t<id>'");
    }
    const std::string split = line.substr(0, tab);
    std::string id = line.substr(tab + 1);
    if (split == "train") {
      m.train.push_back(std::move(id));
    } else if (split == "val") {
      m.val.push_back(std::move(id));
    } else if (split == "test") {
      m.test.push_back(std::move(id));
    } else {
      throw FormatError("manifest line " + std::to_string(lineno) + ": unknown split '" + split + "'");
    }
  }
  m.validate();
  return m;
}

void write_manifest(const fs::path& path, const SplitManifest& manifest) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << format_manifest(manifest);
  if (!out) throw IoError("cannot write manifest " + path.string());
}

SplitManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

std::vector<std::string> select_fraction(const std::vector<std::string>& ids, double fraction,
                                         std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ArgumentError("fraction must lie in [0,1]");
  }
  const auto n = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(ids.size())));
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMixRng rng(derive_seed(seed, {0xf4ac}));
  rng.shuffle(order);
  order.resize(n);
  std::sort(order.begin(), order.end());
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i : order) out.push_back(ids[i]);
  return out;
}

void copy_scene_files(const fs::path& from_root, const fs::path& to_root,
                      const std::string& scene_id) {
  for (const char* sub : {"rgb", "nir", "mask"}) {
    const fs::path src = from_root / sub / (scene_id + ".png");
    const fs::path dst = to_root / sub / (scene_id + ".png");
    if (!fs::exists(src)) throw IoError("missing file: " + src.string());
    fs::create_directories(dst.parent_path());
    std::error_code ec;
    fs::copy_file(src, dst, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot copy " + src.string() + " to " + dst.string() + ": " + ec.message());
  }
}

}  // namespace agrisynth
