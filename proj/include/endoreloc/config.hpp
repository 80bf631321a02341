#pragma once

#include <cstdint>
#include <filesystem>
#include <iterator>
#include <string>
#include <vector>

#include "endoreloc/descriptors.hpp"
#include "endoreloc/synthgen.hpp"
#include "endoreloc/uifilter.hpp"

namespace endoreloc {

/// Every tunable default of the pipeline. Loaded from a UTF-8 `key = value`
/// file; `#` starts a comment, lists are comma separated.
struct Settings {
  std::uint64_t seed = 42;

  DescriptorConfig descriptor{DescriptorFamily::MLBP, ColorSpace::HSV};
  bool correct_roll = true;

  double radius_mm = 20.0;
  std::vector<double> radii{10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0};
  int n_queries = 9;
  std::vector<DescriptorFamily> families{std::begin(kAllFamilies), std::end(kAllFamilies)};
  std::vector<ColorSpace> spaces{std::begin(kAllColorSpaces), std::end(kAllColorSpaces)};

  int n_frames = 100;
  double em_noise_sigma_mm = 5.0;
  int n_pairs = 10;  // synthetic pairs use seeds seed .. seed + n_pairs - 1
  GenerateOptions synth{};

  bool filter_enabled = true;
  int filter_interventions = 6;  // synthetic training interventions
  CvOptions cv{};  // cv.descriptor is the filter's feature descriptor
};

/// Applies one key. Throws on unknown keys or unparsable values.
void apply_setting(Settings& settings, const std::string& key, const std::string& value);

Settings load_settings(const std::filesystem::path& path);

/// Canonical `key = value` text covering every key; load_settings accepts it.
std::string dump_settings(const Settings& settings);

}  // namespace endoreloc
