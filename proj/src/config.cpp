#include "endoreloc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace endoreloc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw Error("config: bad value '" + text + "' for key '" + key + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw Error("config: bad boolean '" + text + "' for key '" + key + "'");
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<double>(key, item));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

struct Entry {
  const char* key;
  std::function<void(Settings&, const std::string&, const std::string&)> set;
  std::function<std::string(const Settings&)> get;
};

#define INT_ENTRY(name, member)                                                                         \
  Entry {                                                                                               \
    name, [](Settings& s, const std::string& k, const std::string& v) { s.member = parse_number<int>(k, v); }, \
        [](const Settings& s) { return std::to_string(s.member); }                                     \
  }
#define DOUBLE_ENTRY(name, member)                                                                          \
  Entry {                                                                                                   \
    name, [](Settings& s, const std::string& k, const std::string& v) { s.member = parse_number<double>(k, v); }, \
        [](const Settings& s) { return format_double(s.member); }                                          \
  }
#define BOOL_ENTRY(name, member)                                                                   \
  Entry {                                                                                          \
    name, [](Settings& s, const std::string& k, const std::string& v) { s.member = parse_bool(k, v); }, \
        [](const Settings& s) { return std::string(s.member ? "true" : "false"); }                \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"seed", [](Settings& s, const std::string& k, const std::string& v) { s.seed = parse_number<std::uint64_t>(k, v); },
            [](const Settings& s) { return std::to_string(s.seed); }},
      Entry{"descriptor.family",
            [](Settings& s, const std::string&, const std::string& v) { s.descriptor.family = family_from_string(v); },
            [](const Settings& s) { return to_string(s.descriptor.family); }},
      Entry{"descriptor.color_space",
            [](Settings& s, const std::string&, const std::string& v) { s.descriptor.space = color_space_from_string(v); },
            [](const Settings& s) { return to_string(s.descriptor.space); }},
      INT_ENTRY("descriptor.pyramid_levels", descriptor.pyramid_levels),
      INT_ENTRY("descriptor.grid", descriptor.grid),
      INT_ENTRY("descriptor.sw_window", descriptor.sw_window),
      INT_ENTRY("descriptor.sw_stride", descriptor.sw_stride),
      DOUBLE_ENTRY("descriptor.ltp_threshold", descriptor.ltp_threshold),
      INT_ENTRY("descriptor.liop_neighbors", descriptor.liop_neighbors),
      INT_ENTRY("descriptor.hog_bins", descriptor.hog_bins),
      BOOL_ENTRY("match.correct_roll", correct_roll),
      DOUBLE_ENTRY("search.radius_mm", radius_mm),
      Entry{"search.radii_mm",
            [](Settings& s, const std::string& k, const std::string& v) { s.radii = parse_doubles(k, v); },
            [](const Settings& s) { return join_doubles(s.radii); }},
      INT_ENTRY("eval.n_queries", n_queries),
      Entry{"eval.families",
            [](Settings& s, const std::string&, const std::string& v) {
              s.families.clear();
              for (const auto& item : split_list(v)) s.families.push_back(family_from_string(item));
            },
            [](const Settings& s) {
              std::string out;
              for (std::size_t i = 0; i < s.families.size(); ++i) out += (i ? "," : "") + to_string(s.families[i]);
              return out;
            }},
      Entry{"eval.color_spaces",
            [](Settings& s, const std::string&, const std::string& v) {
              s.spaces.clear();
              for (const auto& item : split_list(v)) s.spaces.push_back(color_space_from_string(item));
            },
            [](const Settings& s) {
              std::string out;
              for (std::size_t i = 0; i < s.spaces.size(); ++i) out += (i ? "," : "") + to_string(s.spaces[i]);
              return out;
            }},
      INT_ENTRY("synth.n_frames", n_frames),
      DOUBLE_ENTRY("synth.em_noise_sigma_mm", em_noise_sigma_mm),
      INT_ENTRY("synth.n_pairs", n_pairs),
      Entry{"synth.modality",
            [](Settings& s, const std::string&, const std::string& v) { s.synth.modality = modality_from_string(v); },
            [](const Settings& s) { return to_string(s.synth.modality); }},
      INT_ENTRY("synth.image_size", synth.render.size),
      DOUBLE_ENTRY("synth.focal_fraction", synth.render.focal_fraction),
      DOUBLE_ENTRY("synth.falloff_mm", synth.render.falloff_mm),
      INT_ENTRY("synth.supersample", synth.render.supersample),
      DOUBLE_ENTRY("synth.length_mm", synth.length_mm),
      DOUBLE_ENTRY("synth.radius_mm", synth.radius_mm),
      DOUBLE_ENTRY("synth.ui_fraction", synth.ui_fraction),
      DOUBLE_ENTRY("synth.depth_jitter", synth.depth_jitter),
      DOUBLE_ENTRY("synth.roll_drift_rad", synth.roll_drift),
      DOUBLE_ENTRY("synth.roll_jitter_rad", synth.roll_jitter),
      DOUBLE_ENTRY("synth.landmark_noise_mm", synth.landmark_noise_mm),
      DOUBLE_ENTRY("synth.frame_interval_s", synth.frame_interval_s),
      DOUBLE_ENTRY("score.lambda_mm_per_rad", synth.lambda_mm_per_rad),
      DOUBLE_ENTRY("score.partial_band_mm", synth.partial_band_mm),
      BOOL_ENTRY("filter.enabled", filter_enabled),
      INT_ENTRY("filter.train_interventions", filter_interventions),
      INT_ENTRY("filter.pyramid_levels", cv.descriptor.pyramid_levels),
      INT_ENTRY("filter.grid", cv.descriptor.grid),
      Entry{"filter.color_space",
            [](Settings& s, const std::string&, const std::string& v) { s.cv.descriptor.space = color_space_from_string(v); },
            [](const Settings& s) { return to_string(s.cv.descriptor.space); }},
      Entry{"filter.c_grid",
            [](Settings& s, const std::string& k, const std::string& v) { s.cv.c_grid = parse_doubles(k, v); },
            [](const Settings& s) { return join_doubles(s.cv.c_grid); }},
      Entry{"filter.gamma_grid",
            [](Settings& s, const std::string& k, const std::string& v) { s.cv.gamma_grid = parse_doubles(k, v); },
            [](const Settings& s) { return join_doubles(s.cv.gamma_grid); }},
      DOUBLE_ENTRY("filter.pca_variance", cv.train.pca.variance_fraction),
      INT_ENTRY("filter.pca_dimensions", cv.train.pca.dimensions),
      DOUBLE_ENTRY("filter.representative_fraction", cv.train.representative_fraction),
      BOOL_ENTRY("filter.select_representatives", cv.train.select_representatives),
      DOUBLE_ENTRY("filter.svm_tolerance", cv.train.svm_tolerance),
      BOOL_ENTRY("filter.balance_classes", cv.train.balance_classes),
      INT_ENTRY("filter.selection_repetitions", cv.selection_repetitions),
  };
  return table;
}

#undef INT_ENTRY
#undef DOUBLE_ENTRY
#undef BOOL_ENTRY

}  // namespace

void apply_setting(Settings& settings, const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      e.set(settings, key, value);
      return;
    }
  }
  throw Error("config: unknown key '" + key + "'");
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file: config '" + path.string() + "'");
  Settings s;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(s, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  s.cv.seed = s.seed;
  return s;
}

std::string dump_settings(const Settings& settings) {
  std::string out;
  for (const auto& e : entries()) out += std::string(e.key) + " = " + e.get(settings) + "\n";
  return out;
}

}  // namespace endoreloc
