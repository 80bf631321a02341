#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "endoreloc/colorspace.hpp"
#include "endoreloc/descriptors.hpp"
#include "naive_descriptors.hpp"

using namespace endoreloc;

namespace {

RgbImage random_image(std::uint64_t seed, int w = 64, int h = 64) {
  std::mt19937_64 rng(seed);
  RgbImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

// Smooth image with a few distinct levels so that ties occur often.
RgbImage blocky_image(std::uint64_t seed, int w = 64, int h = 64) {
  std::mt19937_64 rng(seed);
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y)[c] = static_cast<std::uint8_t>(((x / 5 + y / 7 + c) % 4) * 60 + (rng() % 2));
  return img;
}

DescriptorConfig config(DescriptorFamily f, ColorSpace s, int levels, int grid) {
  DescriptorConfig cfg;
  cfg.family = f;
  cfg.space = s;
  cfg.pyramid_levels = levels;
  cfg.grid = grid;
  return cfg;
}

PlanarImage constant_plane(int w, int h, float v) {
  PlanarImage p(w, h, 1, ColorSpace::GS);
  for (auto& x : p.planes[0]) x = v;
  return p;
}

void expect_blocks_normalized(const DescriptorVector& v, const std::vector<std::size_t>& blocks) {
  std::size_t off = 0;
  for (std::size_t b : blocks) {
    double sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      EXPECT_GE(v.values[off + i], 0.0f);
      sum += v.values[off + i];
    }
    EXPECT_TRUE(std::abs(sum - 1.0) < 1e-6 || sum == 0.0) << "block sum " << sum;
    off += b;
  }
  EXPECT_EQ(off, v.length());
}

}  // namespace

TEST(LbpCode, TieRuleAndExtremes) {
  Patch3x3 flat;
  flat.fill(0.4f);
  EXPECT_EQ(lbp_code(flat), 255);
  Patch3x3 peak;
  peak.fill(0.0f);
  peak[4] = 1.0f;
  EXPECT_EQ(lbp_code(peak), 0);
}

TEST(LbpCode, MatchesBitEnumeration) {
  // Scan order: 1 2 3 / 4 5 6 / 7 8 9 with center 5.
  const Patch3x3 p = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  // Clockwise from top-left: 1,2,3,6,9,8,7,4 -> set for 6,9,8,7 (positions 3..6).
  const int expected = (1 << 3) | (1 << 4) | (1 << 5) | (1 << 6);
  EXPECT_EQ(lbp_code(p), expected);
  EXPECT_EQ(expected, 120);
}

TEST(LbpCode, ExhaustiveAgainstOrderedComparison) {
  std::mt19937 rng(5);
  const int ring[8] = {0, 1, 2, 5, 8, 7, 6, 3};
  for (int trial = 0; trial < 2000; ++trial) {
    Patch3x3 p;
    for (float& v : p) v = static_cast<float>(rng() % 5);
    int code = 0;
    for (int i = 0; i < 8; ++i) code += (p[ring[i]] >= p[4]) << i;
    ASSERT_EQ(lbp_code(p), code);
  }
}

TEST(VectorLength, ClosedForms) {
  EXPECT_EQ(vector_length(config(DescriptorFamily::MLBP, ColorSpace::GS, 3, 4), 1), 12288u);
  EXPECT_EQ(vector_length(config(DescriptorFamily::MLTP, ColorSpace::GS, 3, 4), 1), 24576u);
  EXPECT_EQ(vector_length(config(DescriptorFamily::MLIOP, ColorSpace::GS, 1, 1), 1), 24u);
  EXPECT_EQ(vector_length(config(DescriptorFamily::MHOG, ColorSpace::RGB, 3, 4), 3), 3u * 3 * 16 * 9);
  EXPECT_EQ(vector_length(config(DescriptorFamily::DSIFT, ColorSpace::GS, 2, 4), 1), 2u * 16 * 128);
  EXPECT_EQ(vector_length(config(DescriptorFamily::MLBPHOG, ColorSpace::GS, 3, 4), 1), 12288u + 3 * 16 * 9);
  EXPECT_THROW(vector_length(config(DescriptorFamily::SWMLBP, ColorSpace::GS, 3, 4), 1), Error);
  // 128 px: 3x3 windows of 64 at level 0, 3x3 of 32 on 64 px, 3x3 of 16 on 32 px.
  EXPECT_EQ(vector_length(config(DescriptorFamily::SWMLBP, ColorSpace::GS, 3, 4), 1, 128, 128), 27u * 256);
}

TEST(VectorLength, EqualsExtractOutput) {
  const RgbImage img = random_image(1, 160, 128);
  for (DescriptorFamily f : kAllFamilies)
    for (ColorSpace s : kAllColorSpaces) {
      const auto cfg = config(f, s, 3, 4);
      const auto v = describe(img, cfg);
      EXPECT_EQ(v.length(), vector_length(cfg, channel_count(s), 160, 128)) << cfg.label();
      EXPECT_EQ(v.config_fingerprint, cfg.fingerprint());
      expect_blocks_normalized(v, block_sizes(cfg, channel_count(s), 160, 128));
    }
}

TEST(Extract, ConstantImageMlbpIsPointMassOn255) {
  const auto v = extract(constant_plane(64, 64, 0.3f), config(DescriptorFamily::MLBP, ColorSpace::GS, 2, 4));
  for (std::size_t b = 0; b < v.length() / 256; ++b)
    for (int i = 0; i < 256; ++i) EXPECT_EQ(v.values[b * 256 + i], i == 255 ? 1.0f : 0.0f);
}

TEST(Extract, ConstantImageGradientFamiliesAreZero) {
  for (DescriptorFamily f : {DescriptorFamily::MHOG, DescriptorFamily::DSIFT}) {
    const auto v = extract(constant_plane(64, 64, 0.7f), config(f, ColorSpace::GS, 2, 4));
    for (float x : v.values) EXPECT_EQ(x, 0.0f);
  }
}

TEST(Extract, NaiveOracleSingleLevelMlbp) {
  const RgbImage img = random_image(9);
  const auto cfg = config(DescriptorFamily::MLBP, ColorSpace::GS, 1, 4);
  const auto v = describe(img, cfg);
  ASSERT_EQ(v.length(), 4096u);
  const auto ref = naive::describe(img, cfg);
  ASSERT_EQ(ref.size(), v.length());
  // Each 16x16 cell holds 256 pixels, so exact counts are v * 256.
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(v.values[i] * 256.0f, static_cast<float>(ref[i] * 256.0));
}

class NaiveOracle : public ::testing::TestWithParam<DescriptorFamily> {};

TEST_P(NaiveOracle, MatchesOnRandomAndTiedImages) {
  for (int seed = 0; seed < 3; ++seed) {
    for (const RgbImage& img : {random_image(100 + seed), blocky_image(200 + seed)}) {
      for (ColorSpace s : {ColorSpace::GS, ColorSpace::HSV, ColorSpace::OPP}) {
        for (auto [levels, grid] : {std::pair{2, 4}, std::pair{3, 2}}) {
          const auto cfg = config(GetParam(), s, levels, grid);
          const auto v = describe(img, cfg);
          const auto ref = naive::describe(img, cfg);
          ASSERT_EQ(v.length(), ref.size()) << cfg.label();
          for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(v.values[i], ref[i], 1e-6) << cfg.label() << " @" << i;
        }
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllFamilies, NaiveOracle, ::testing::ValuesIn(kAllFamilies),
                         [](const auto& info) { return to_string(info.param); });

TEST(Extract, Deterministic) {
  const RgbImage img = random_image(4);
  for (DescriptorFamily f : kAllFamilies) {
    const auto cfg = config(f, ColorSpace::HSV, 2, 4);
    EXPECT_EQ(describe(img, cfg).values, describe(img, cfg).values);
  }
}

TEST(Extract, LbpShiftInvariance) {
  std::mt19937 rng(2);
  PlanarImage a(64, 64, 1, ColorSpace::GS);
  for (auto& v : a.planes[0]) v = static_cast<float>(rng() % 128) / 256.0f;
  PlanarImage b = a;
  // Multiples of 1/256 keep every sum exact, so comparisons are unaffected.
  for (auto& v : b.planes[0]) v += 0.25f;
  const auto cfg = config(DescriptorFamily::MLBP, ColorSpace::GS, 3, 2);
  EXPECT_EQ(extract(a, cfg).values, extract(b, cfg).values);
}

TEST(Extract, LtpWithZeroThresholdUpperEqualsLbp) {
  const RgbImage img = random_image(21);
  auto ltp = config(DescriptorFamily::MLTP, ColorSpace::GS, 1, 4);
  ltp.ltp_threshold = 0.0;
  const auto t = describe(img, ltp);
  const auto l = describe(img, config(DescriptorFamily::MLBP, ColorSpace::GS, 1, 4));
  for (std::size_t cell = 0; cell < 16; ++cell)
    for (int i = 0; i < 256; ++i) EXPECT_EQ(t.values[cell * 512 + i], l.values[cell * 256 + i]);
}

TEST(Extract, TranslationLocality) {
  const RgbImage img = random_image(33);
  RgbImage changed = img;
  // Interior of cell (1,2) of a 4x4 grid on 64x64, far enough from its edges
  // for the widest (LIOP) neighborhood.
  for (int y = 37; y < 44; ++y)
    for (int x = 21; x < 28; ++x) changed.at(x, y)[0] = static_cast<std::uint8_t>(255 - changed.at(x, y)[0]);
  for (DescriptorFamily f : {DescriptorFamily::MLBP, DescriptorFamily::MLTP, DescriptorFamily::MHOG,
                             DescriptorFamily::DSIFT, DescriptorFamily::MLIOP}) {
    const auto cfg = config(f, ColorSpace::RGB, 1, 4);
    const auto a = describe(img, cfg), b = describe(changed, cfg);
    const auto blocks = block_sizes(cfg, 3, 64, 64);
    const std::size_t per_channel = blocks.size() / 3;
    std::size_t off = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const std::size_t channel = k / per_channel;
      const std::size_t blocks_per_cell = per_channel / 16;
      const std::size_t cell = (k % per_channel) / blocks_per_cell;
      bool same = true;
      for (std::size_t i = 0; i < blocks[k]; ++i) same &= a.values[off + i] == b.values[off + i];
      if (channel != 0 || cell != 2 * 4 + 1) {
        EXPECT_TRUE(same) << to_string(f) << " block " << k;
      }
      off += blocks[k];
    }
  }
}

TEST(Validate, RejectsSmallImages) {
  EXPECT_THROW(describe(random_image(1, 64, 64), config(DescriptorFamily::MLBP, ColorSpace::GS, 3, 4)), Error);
  EXPECT_NO_THROW(describe(random_image(1, 64, 64), config(DescriptorFamily::MLBP, ColorSpace::GS, 2, 4)));
  EXPECT_THROW(describe(random_image(1, 48, 48), config(DescriptorFamily::SWMLBP, ColorSpace::GS, 1, 4)), Error);
  auto bad = config(DescriptorFamily::MLIOP, ColorSpace::GS, 1, 1);
  bad.liop_neighbors = 9;
  EXPECT_THROW(describe(random_image(1, 64, 64), bad), Error);
}

TEST(Pyramid, BoxFilterHalvesDimensions) {
  PlanarImage p(5, 4, 1, ColorSpace::GS);
  for (int i = 0; i < 20; ++i) p.planes[0][i] = static_cast<float>(i);
  const auto pyr = build_pyramid(p, 2);
  ASSERT_EQ(pyr[1].width, 2);
  ASSERT_EQ(pyr[1].height, 2);
  EXPECT_FLOAT_EQ(pyr[1].at(0, 0, 0), (0 + 1 + 5 + 6) / 4.0f);
  EXPECT_FLOAT_EQ(pyr[1].at(0, 1, 1), (12 + 13 + 17 + 18) / 4.0f);
}

TEST(FamilyNames, RoundTripAndAliases) {
  for (DescriptorFamily f : kAllFamilies) EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_EQ(family_from_string("mLBP+mHOG"), DescriptorFamily::MLBPHOG);
  EXPECT_EQ(family_from_string("sw-mLBP"), DescriptorFamily::SWMLBP);
  EXPECT_EQ(family_from_string("dSIFT"), DescriptorFamily::DSIFT);
  EXPECT_THROW(family_from_string("surf"), Error);
}

TEST(Fingerprint, DistinguishesConfigs) {
  auto a = config(DescriptorFamily::MLBP, ColorSpace::GS, 3, 4);
  auto b = a;
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  b.grid = 2;
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  b = a;
  b.space = ColorSpace::HSV;
  EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(DescriptorCacheFile, RoundTrip) {
  DescriptorCacheFile c;
  c.fingerprint = 0x0123456789abcdefULL;
  c.length = 3;
  c.vectors[5] = {0.25f, 0.5f, 0.25f};
  c.vectors[-2] = {1.0f, 0.0f, 0.0f};
  const auto path = std::filesystem::path(::testing::TempDir()) / "cache_roundtrip.erdc";
  write_descriptor_cache(path, c);
  const auto back = read_descriptor_cache(path);
  EXPECT_EQ(back.fingerprint, c.fingerprint);
  EXPECT_EQ(back.length, c.length);
  EXPECT_EQ(back.vectors, c.vectors);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 2);
  EXPECT_THROW(read_descriptor_cache(path), Error);
}
