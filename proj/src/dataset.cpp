#include "endoreloc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "endoreloc/png_io.hpp"

namespace endoreloc {

namespace {

constexpr const char* kFrameHeader = "frame_id,timestamp,image_file,x,y,z,qw,qx,qy,qz,label";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw Error("malformed manifest: bad number '" + s + "' for " + what);
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  std::int64_t v = 0;
  const auto t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw Error("malformed " + what + ": bad integer '" + s + "'");
  return v;
}

std::string label_text(const std::optional<FrameLabel>& label) {
  if (!label) return "";
  return *label == FrameLabel::Informative ? "informative" : "uninformative";
}

std::optional<FrameLabel> parse_label(const std::string& s) {
  const auto t = trim(s);
  if (t.empty() || t == "unlabeled") return std::nullopt;
  if (t == "informative") return FrameLabel::Informative;
  if (t == "uninformative") return FrameLabel::Uninformative;
  throw Error("malformed manifest: unknown label '" + s + "'");
}

}  // namespace

std::string to_string(Modality m) { return m == Modality::NBI ? "NBI" : "WL"; }

Modality modality_from_string(const std::string& s) {
  const auto t = trim(s);
  if (t == "NBI" || t == "nbi") return Modality::NBI;
  if (t == "WL" || t == "wl") return Modality::WL;
  throw Error("unknown modality '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::optional<std::size_t> Intervention::find(std::int64_t frame_id) const {
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (frames[i].frame_id == frame_id) return i;
  return std::nullopt;
}

const Frame& Intervention::frame(std::int64_t frame_id) const {
  const auto i = find(frame_id);
  if (!i) throw Error("frame " + std::to_string(frame_id) + " not in intervention " + intervention_id);
  return frames[*i];
}

void validate(const Intervention& intervention) {
  if (intervention.frames.empty()) throw Error("empty intervention");
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < intervention.frames.size(); ++i) {
    const Frame& f = intervention.frames[i];
    if (!ids.insert(f.frame_id).second) throw Error("duplicate frame id " + std::to_string(f.frame_id));
    if (f.image.width < 32 || f.image.height < 32)
      throw Error("frame " + std::to_string(f.frame_id) + " image smaller than 32x32");
    if (f.modality != intervention.modality)
      throw Error("frame " + std::to_string(f.frame_id) + " modality differs from intervention");
    if (!f.pose.position.allFinite())
      throw Error("frame " + std::to_string(f.frame_id) + " has a non-finite position");
    if (std::abs(f.pose.orientation.norm() - 1.0) > kQuaternionTolerance)
      throw Error("frame " + std::to_string(f.frame_id) + " has a non-unit quaternion");
    if (i > 0 && !(f.pose.timestamp > intervention.frames[i - 1].pose.timestamp))
      throw Error("non-monotone timestamps at frame " + std::to_string(f.frame_id));
  }
}

Intervention load_intervention(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("missing file: manifest '" + manifest_path.string() + "'");
  const auto dir = manifest_path.parent_path();

  Intervention result;
  bool have_id = false, have_modality = false, in_table = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto f = split_csv(t);
    if (!in_table) {
      if (t == kFrameHeader) {
        in_table = true;
        continue;
      }
      if (f[0] == "intervention_id" && f.size() == 2) {
        result.intervention_id = f[1];
        have_id = true;
      } else if (f[0] == "subject_id" && f.size() == 2) {
        result.subject_id = f[1];
      } else if (f[0] == "modality" && f.size() == 2) {
        result.modality = modality_from_string(f[1]);
        have_modality = true;
      } else if (f[0] == "landmark" && f.size() == 5) {
        result.landmarks.push_back({f[1], Eigen::Vector3d(parse_double(f[2], "landmark"),
                                                          parse_double(f[3], "landmark"),
                                                          parse_double(f[4], "landmark"))});
      } else {
        throw Error("malformed manifest: unexpected header line " + std::to_string(line_no));
      }
      continue;
    }
    if (f.size() != 11)
      throw Error("malformed manifest: frame row at line " + std::to_string(line_no) +
                  " has " + std::to_string(f.size()) + " columns");
    Frame frame;
    frame.frame_id = parse_int(f[0], "manifest");
    frame.pose.timestamp = parse_double(f[1], "timestamp");
    frame.image_file = f[2];
    frame.pose.position = {parse_double(f[3], "x"), parse_double(f[4], "y"), parse_double(f[5], "z")};
    frame.pose.orientation = Eigen::Quaterniond(parse_double(f[6], "qw"), parse_double(f[7], "qx"),
                                                parse_double(f[8], "qy"), parse_double(f[9], "qz"));
    frame.label = parse_label(f[10]);
    frame.modality = result.modality;
    const auto image_path = dir / frame.image_file;
    if (!std::filesystem::exists(image_path))
      throw Error("missing file: image '" + image_path.string() + "'");
    frame.image = read_png(image_path);
    result.frames.push_back(std::move(frame));
  }
  if (!have_id) throw Error("malformed manifest: missing intervention_id");
  if (!have_modality) throw Error("malformed manifest: missing modality");
  if (!in_table) throw Error("malformed manifest: missing frame table header");

  // Frame rows must already be in strictly increasing time order.
  validate(result);
  return result;
}

void save_intervention(const Intervention& intervention, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  std::ofstream out(directory / "manifest.csv");
  if (!out) throw Error("cannot write manifest in '" + directory.string() + "'");
  out << "intervention_id," << intervention.intervention_id << "\n";
  out << "subject_id," << intervention.subject_id << "\n";
  out << "modality," << to_string(intervention.modality) << "\n";
  for (const auto& lm : intervention.landmarks) {
    out << "landmark," << lm.name << "," << format_double(lm.position.x()) << ","
        << format_double(lm.position.y()) << "," << format_double(lm.position.z()) << "\n";
  }
  out << kFrameHeader << "\n";
  for (const Frame& f : intervention.frames) {
    const std::string file =
        f.image_file.empty() ? "frame_" + std::to_string(f.frame_id) + ".png" : f.image_file;
    const auto& p = f.pose.position;
    const auto& q = f.pose.orientation;
    out << f.frame_id << "," << format_double(f.pose.timestamp) << "," << file << ","
        << format_double(p.x()) << "," << format_double(p.y()) << "," << format_double(p.z()) << ","
        << format_double(q.w()) << "," << format_double(q.x()) << "," << format_double(q.y()) << ","
        << format_double(q.z()) << "," << label_text(f.label) << "\n";
    write_png(directory / file, f.image);
  }
  if (!out) throw Error("I/O failure writing manifest");
}

void save_results(std::span<const ResultRow> rows, const std::filesystem::path& out_path) {
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write results '" + out_path.string() + "'");
  out << kResultsHeader << "\n";
  for (const ResultRow& r : rows) {
    out << r.query.intervention_id << "," << r.query.frame_id << "," << r.match.intervention_id << ","
        << r.match.frame_id << "," << format_double(r.radius_mm) << "," << r.rank << ","
        << format_double(r.distance) << "," << (r.score ? std::to_string(*r.score) : "") << "\n";
  }
  if (!out) throw Error("I/O failure writing results");
}

std::vector<ResultRow> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file: results '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != kResultsHeader)
    throw Error("malformed results: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv(trim(line));
    if (f.size() != 8) throw Error("malformed results row: " + line);
    ResultRow r;
    r.query = {f[0], parse_int(f[1], "results")};
    r.match = {f[2], parse_int(f[3], "results")};
    r.radius_mm = parse_double(f[4], "radius_mm");
    r.rank = static_cast<int>(parse_int(f[5], "results"));
    r.distance = parse_double(f[6], "distance");
    if (!f[7].empty()) {
      const auto s = parse_int(f[7], "results");
      if (s < 0 || s > 2) throw Error("malformed results: score outside {0,1,2}");
      r.score = static_cast<int>(s);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ScoreRecord> to_score_records(std::span<const ResultRow> rows) {
  std::vector<ScoreRecord> out;
  for (const ResultRow& r : rows) {
    if (!r.score) throw Error("result row without a score");
    out.push_back({r.query, r.match, *r.score, r.radius_mm});
  }
  return out;
}

}  // namespace endoreloc
