#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "endoreloc/dataset.hpp"

namespace testutil {

inline endoreloc::RgbImage random_image(std::uint64_t seed, int w = 64, int h = 64) {
  std::mt19937_64 rng(seed);
  endoreloc::RgbImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

/// Fresh, empty directory under the gtest temp root.
inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / ("endoreloc_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Frames along +z at the given depths, 0.1 s apart, random 32x32 images.
inline endoreloc::Intervention straight_intervention(const std::vector<double>& depths, const std::string& id = "iv") {
  endoreloc::Intervention iv;
  iv.intervention_id = id;
  iv.subject_id = "s";
  for (std::size_t i = 0; i < depths.size(); ++i) {
    endoreloc::Frame f;
    f.frame_id = static_cast<std::int64_t>(i);
    f.image = random_image(i + 1, 32, 32);
    f.pose.position = Eigen::Vector3d(0, 0, depths[i]);
    f.pose.timestamp = 0.1 * static_cast<double>(i);
    iv.frames.push_back(f);
  }
  return iv;
}

}  // namespace testutil

#define EXPECT_THROW_MSG(stmt, fragment)                                                    \
  do {                                                                                      \
    try {                                                                                   \
      stmt;                                                                                 \
      ADD_FAILURE() << "expected an exception containing \"" << (fragment) << "\"";        \
    } catch (const endoreloc::Error& e) {                                                   \
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();       \
    }                                                                                       \
  } while (0)
