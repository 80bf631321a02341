// Python bindings for the main pipeline operations.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "endoreloc/config.hpp"
#include "endoreloc/harness.hpp"
#include "endoreloc/localization.hpp"
#include "endoreloc/matching.hpp"
#include "endoreloc/pca.hpp"
#include "endoreloc/svm.hpp"
#include "endoreloc/synthgen.hpp"

namespace py = pybind11;
using namespace endoreloc;

namespace {

using ImageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RgbImage to_image(const ImageArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw Error("expected an H x W x 3 uint8 array");
  RgbImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.pixels.data(), a.data(), img.pixels.size());
  return img;
}

ImageArray to_array(const RgbImage& img) {
  ImageArray out({img.height, img.width, 3});
  std::memcpy(out.mutable_data(), img.pixels.data(), img.pixels.size());
  return out;
}

py::array_t<float> to_array(const std::vector<float>& v) {
  py::array_t<float> out(static_cast<py::ssize_t>(v.size()));
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(float));
  return out;
}

py::dict stats_dict(const ComboStats& s) {
  py::dict d;
  d["descriptor"] = s.descriptor;
  d["color_space"] = s.space;
  d["n"] = s.n;
  d["avg_score"] = s.avg_score;
  d["std_dev"] = s.std_dev;
  d["pct_zeros"] = s.pct_zeros;
  d["pct_ones"] = s.pct_ones;
  d["pct_twos"] = s.pct_twos;
  return d;
}

std::vector<EvaluationPair> load_pairs(const std::vector<std::filesystem::path>& dirs, int n_queries) {
  std::vector<EvaluationPair> pairs;
  for (const auto& d : dirs) {
    const LoadedPair p = load_pair(d);
    pairs.push_back(prepare_pair(p.a, p.b, p.truth, n_queries));
  }
  return pairs;
}

EvalOptions eval_options(const DescriptorConfig& cfg, bool correct_roll, bool filter_by_labels) {
  EvalOptions o;
  o.descriptor = cfg;
  o.correct_roll = correct_roll;
  if (filter_by_labels) o.filter = FilterMode::Labels;
  return o;
}

}  // namespace

PYBIND11_MODULE(_endoreloc, m) {
  m.doc() = "Endoscopic view-point relocalization";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::enum_<DescriptorFamily>(m, "DescriptorFamily")
      .value("MLBP", DescriptorFamily::MLBP)
      .value("MHOG", DescriptorFamily::MHOG)
      .value("SWMLBP", DescriptorFamily::SWMLBP)
      .value("MLTP", DescriptorFamily::MLTP)
      .value("MLBPHOG", DescriptorFamily::MLBPHOG)
      .value("DSIFT", DescriptorFamily::DSIFT)
      .value("MLIOP", DescriptorFamily::MLIOP);

  py::enum_<ColorSpace>(m, "ColorSpace")
      .value("RGB", ColorSpace::RGB)
      .value("HSV", ColorSpace::HSV)
      .value("GS", ColorSpace::GS)
      .value("NORM", ColorSpace::NORM)
      .value("LOG", ColorSpace::LOG)
      .value("OPP", ColorSpace::OPP);

  py::enum_<Modality>(m, "Modality").value("NBI", Modality::NBI).value("WL", Modality::WL);

  py::class_<DescriptorConfig>(m, "DescriptorConfig")
      .def(py::init([](DescriptorFamily family, ColorSpace space, int levels, int grid) {
             DescriptorConfig c;
             c.family = family;
             c.space = space;
             c.pyramid_levels = levels;
             c.grid = grid;
             return c;
           }),
           py::arg("family") = DescriptorFamily::MLBP, py::arg("space") = ColorSpace::GS,
           py::arg("pyramid_levels") = 3, py::arg("grid") = 4)
      .def_readwrite("family", &DescriptorConfig::family)
      .def_readwrite("space", &DescriptorConfig::space)
      .def_readwrite("pyramid_levels", &DescriptorConfig::pyramid_levels)
      .def_readwrite("grid", &DescriptorConfig::grid)
      .def_readwrite("sw_window", &DescriptorConfig::sw_window)
      .def_readwrite("sw_stride", &DescriptorConfig::sw_stride)
      .def_readwrite("ltp_threshold", &DescriptorConfig::ltp_threshold)
      .def_readwrite("liop_neighbors", &DescriptorConfig::liop_neighbors)
      .def_readwrite("hog_bins", &DescriptorConfig::hog_bins)
      .def("fingerprint", &DescriptorConfig::fingerprint)
      .def("label", &DescriptorConfig::label)
      .def("__repr__", [](const DescriptorConfig& c) { return "<DescriptorConfig " + c.canonical() + ">"; });

  m.def("describe", [](const ImageArray& image, const DescriptorConfig& cfg) {
    return to_array(describe(to_image(image), cfg).values);
  }, py::arg("image"), py::arg("config"), "Descriptor vector of an H x W x 3 uint8 image.");

  m.def("vector_length", [](const DescriptorConfig& cfg, int channels) { return vector_length(cfg, channels); },
        py::arg("config"), py::arg("channels"));

  m.def("chi_squared", [](const std::vector<float>& a, const std::vector<float>& b) {
    return chi_squared(std::span<const float>(a), std::span<const float>(b));
  }, py::arg("a"), py::arg("b"));

  m.def("register_landmarks", [](const Eigen::MatrixX3d& source, const Eigen::MatrixX3d& target) {
    std::vector<Eigen::Vector3d> s, t;
    for (Eigen::Index i = 0; i < source.rows(); ++i) s.push_back(source.row(i).transpose());
    for (Eigen::Index i = 0; i < target.rows(); ++i) t.push_back(target.row(i).transpose());
    const RigidTransform r = register_landmarks(s, t);
    return py::make_tuple(Eigen::Matrix3d(r.rotation.toRotationMatrix()), Eigen::Vector3d(r.translation));
  }, py::arg("source"), py::arg("target"), "Least-squares rigid fit; returns (R, t) with target ~ R @ source + t.");

  m.def("rotate_image", [](const ImageArray& image, double angle) {
    return to_array(rotate_image(to_image(image), angle));
  }, py::arg("image"), py::arg("angle"));

  m.def("render", [](std::uint64_t seed, Modality modality, double depth_mm, double roll, int size) {
    RenderOptions o;
    o.size = size;
    return to_array(render(TubeWorld(seed, modality), {depth_mm, roll}, o));
  }, py::arg("seed"), py::arg("modality") = Modality::NBI, py::arg("depth_mm") = 100.0, py::arg("roll") = 0.0,
        py::arg("size") = 128, "Frame of the synthetic tube seen from the given depth and roll.");

  m.def("generate_pair", [](const std::filesystem::path& dir, std::uint64_t seed, int n_frames, double sigma,
                            int image_size) {
    GenerateOptions o;
    o.render.size = image_size;
    const SyntheticPair p = generate_pair(seed, n_frames, sigma, o);
    write_pair(p, dir);
    return py::make_tuple(p.a.intervention_id, p.b.intervention_id);
  }, py::arg("directory"), py::arg("seed") = 42, py::arg("n_frames") = 100, py::arg("em_noise_sigma_mm") = 5.0,
        py::arg("image_size") = 128, "Writes a synthetic pair with ground truth; returns the intervention ids.");

  m.def("compute_stats", [](const std::vector<int>& scores) { return stats_dict(compute_stats(scores)); },
        py::arg("scores"));
  m.def("retrieval_rate", [](const std::vector<int>& scores) { return retrieval_rate(scores); }, py::arg("scores"));

  m.def("sweep_radius", [](const std::vector<std::filesystem::path>& pairs, const std::vector<double>& radii,
                           const DescriptorConfig& cfg, bool correct_roll, bool filter_by_labels, int n_queries) {
    py::list out;
    for (const auto& r : sweep_radius(load_pairs(pairs, n_queries), radii,
                                      eval_options(cfg, correct_roll, filter_by_labels))) {
      py::dict d = stats_dict(r.stats);
      d["radius_mm"] = r.radius_mm;
      d["method"] = r.method;
      d["mean_k"] = r.mean_k;
      out.append(d);
    }
    return out;
  }, py::arg("pairs"), py::arg("radii"), py::arg("config") = DescriptorConfig{DescriptorFamily::MLBP, ColorSpace::HSV},
        py::arg("correct_roll") = true, py::arg("filter_by_labels") = false, py::arg("n_queries") = 9);

  m.def("sweep_combos", [](const std::vector<std::filesystem::path>& pairs,
                           const std::vector<DescriptorFamily>& families, const std::vector<ColorSpace>& spaces,
                           double radius_mm, int pyramid_levels, bool filter_by_labels, int n_queries) {
    DescriptorConfig cfg;
    cfg.pyramid_levels = pyramid_levels;
    py::list out;
    for (const auto& s : sweep_combos(load_pairs(pairs, n_queries), families, spaces, radius_mm,
                                      eval_options(cfg, true, filter_by_labels)))
      out.append(stats_dict(s));
    return out;
  }, py::arg("pairs"), py::arg("families"), py::arg("spaces"), py::arg("radius_mm") = 20.0,
        py::arg("pyramid_levels") = 3, py::arg("filter_by_labels") = false, py::arg("n_queries") = 9);

  py::class_<SvmModel>(m, "SvmModel")
      .def_readonly("bias", &SvmModel::bias)
      .def_readonly("gamma", &SvmModel::gamma)
      .def_readonly("C", &SvmModel::C)
      .def_readonly("support_vectors", &SvmModel::support_vectors)
      .def_readonly("coefficients", &SvmModel::coefficients)
      .def("decision", &SvmModel::decision, py::arg("x"))
      .def("predict", &SvmModel::predict, py::arg("x"));

  m.def("train_svm", [](const Eigen::MatrixXd& x, const std::vector<int>& y, double C, double gamma,
                        double tolerance) {
    SvmParams p;
    p.C = C;
    p.gamma = gamma;
    p.tolerance = tolerance;
    p.balance_classes = false;
    return train_svm(x, y, p).model;
  }, py::arg("samples"), py::arg("labels"), py::arg("C") = 1.0, py::arg("gamma") = 0.1, py::arg("tolerance") = 1e-3,
        "RBF soft-margin SVM; labels are +1 / -1.");

  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("basis", &PcaModel::basis)
      .def_readonly("explained_variance", &PcaModel::explained_variance)
      .def("project", &PcaModel::project_rows, py::arg("rows"));

  m.def("fit_pca", [](const Eigen::MatrixXd& x, double variance_fraction, int dimensions) {
    return fit_pca(x, {variance_fraction, dimensions});
  }, py::arg("samples"), py::arg("variance_fraction") = 0.95, py::arg("dimensions") = 0);

  m.def("default_settings", [] { return dump_settings(Settings{}); }, "Canonical key = value settings text.");
}
