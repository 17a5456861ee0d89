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

#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "agrisynth/config.hpp"
#include "agrisynth/errors.hpp"
#include "agrisynth/seeding.hpp"
#include "agrisynth/split.hpp"
#include "test_support.hpp"

namespace agrisynth {
namespace {

std::vector<std::string> numbered_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("id" + std::to_string(i));
  return ids;
}

TEST(SeedingTest, DeriveSeedSeparatesStreams) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  EXPECT_NE(derive_seed(7, "scene_001"), derive_seed(7, "scene_002"));
}

TEST(SeedingTest, BelowStaysInRangeAndShuffleIsAPermutation) {
  SplitMixRng rng(5);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(SplitTest, SameSeedGivesSameManifest) {
  const auto a = build_split(numbered_ids(10), {6, 2, 2}, 0);
  const auto b = build_split(numbered_ids(10), {6, 2, 2}, 0);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, build_split(numbered_ids(10), {6, 2, 2}, 1));
}

TEST(SplitTest, InsufficientIdsIsArgumentError) {
  EXPECT_THROW(build_split(numbered_ids(10), {8, 2, 2}, 0), ArgumentError);
}

TEST(SplitTest, FullScaleSizesAndDisjointness) {
  const auto m = build_split(numbered_ids(1600), {1000, 300, 300}, 42);
  EXPECT_EQ(m.train.size(), 1000u);
  EXPECT_EQ(m.val.size(), 300u);
  EXPECT_EQ(m.test.size(), 300u);
  EXPECT_NO_THROW(m.validate());
}

TEST(SplitTest, InputOrderDoesNotMatter) {
  auto ids = numbered_ids(20);
  const auto a = build_split(ids, {10, 5, 5}, 9);
  std::reverse(ids.begin(), ids.end());
  EXPECT_EQ(a, build_split(ids, {10, 5, 5}, 9));
}

TEST(ManifestTest, TextRoundTrip) {
  const auto m = build_split(numbered_ids(12), {6, 3, 3}, 77);
  const std::string text = format_manifest(m);
  EXPECT_EQ(text.substr(0, 8), "seed=77\n");
  EXPECT_NE(text.find("train\t"), std::string::npos);
  EXPECT_EQ(parse_manifest(text), m);
  testing::TempDir dir;
  write_manifest(dir / "m.txt", m);
  EXPECT_EQ(read_manifest(dir / "m.txt"), m);
}

TEST(ManifestTest, MalformedInputIsFormatError) {
  EXPECT_THROW(parse_manifest("train\ta\n"), FormatError);
  EXPECT_THROW(parse_manifest("seed=1\nbogus\ta\n"), FormatError);
  EXPECT_THROW(parse_manifest("seed=1\ntrain a\n"), FormatError);
  EXPECT_THROW(parse_manifest("seed=1\ntrain\ta\ntest\ta\n"), FormatError);
}

TEST(FractionTest, SelectsFloorOfFractionInOriginalOrder) {
  const auto ids = numbered_ids(1000);
  const auto half = select_fraction(ids, 0.5, 3);
  EXPECT_EQ(half.size(), 500u);
  EXPECT_TRUE(std::is_sorted(half.begin(), half.end(), [&](const auto& a, const auto& b) {
    return std::find(ids.begin(), ids.end(), a) < std::find(ids.begin(), ids.end(), b);
  }));
  EXPECT_TRUE(select_fraction(ids, 0.0, 3).empty());
  EXPECT_EQ(select_fraction(ids, 1.0, 3), ids);
  EXPECT_EQ(select_fraction(numbered_ids(7), 0.5, 1).size(), 3u);
  EXPECT_EQ(half, select_fraction(ids, 0.5, 3));
  EXPECT_THROW(select_fraction(ids, 1.5, 3), ArgumentError);
}

TEST(ConfigTest, ParseCommentsAndTypedAccess) {
  const auto kv = KeyValueConfig::parse(
      "# comment\n"
      "a.b = 3\n"
      "\n"
      "a.c=0.25  # trailing\n"
      "flag = true\n"
      "list = 1, 2,3\n"
      "names = rgb,rgb_nir\n");
  EXPECT_EQ(kv.get_int("a.b"), 3);
  EXPECT_DOUBLE_EQ(kv.get_double("a.c"), 0.25);
  EXPECT_TRUE(kv.get_bool("flag"));
  EXPECT_EQ(kv.get_int_list("list"), (std::vector<std::int64_t>{1, 2, 3}));
  EXPECT_EQ(kv.get_string_list("names"), (std::vector<std::string>{"rgb", "rgb_nir"}));
  EXPECT_EQ(kv.section("a").get_int("b"), 3);
  EXPECT_EQ(kv.get_int("missing", 5), 5);
}

TEST(ConfigTest, BadValuesNameTheKey) {
  const auto kv = KeyValueConfig::parse("n = abc\n");
  try {
    kv.get_int("n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("'n'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(KeyValueConfig::parse("no equals sign\n"), FormatError);
}

TEST(ConfigTest, DumpIsSortedAndRoundTrips) {
  KeyValueConfig kv;
  kv.set("z", "1");
  kv.set("a", "x y");
  kv.set_assignment("m.k=2.5");
  const std::string text = kv.dump();
  EXPECT_LT(text.find("a ="), text.find("z ="));
  EXPECT_EQ(KeyValueConfig::parse(text).dump(), text);
}

TEST(ConfigTest, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1e-4, 2.0 / 3.0, 1e300, -0.0, 4e-4}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

}  // namespace
}  // namespace agrisynth
