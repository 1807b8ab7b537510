#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "triage/blur_filter.hpp"
#include "triage/error.hpp"
#include "triage/imaging.hpp"
#include "triage/keyframes.hpp"
#include "triage/sfm.hpp"
#include "triage/tour.hpp"

namespace py = pybind11;
using namespace triage;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

imaging::Raster to_raster(const DoubleArray& array) {
  if (array.ndim() != 2) throw InvalidImage("expected a 2-D array");
  const auto h = static_cast<int>(array.shape(0));
  const auto w = static_cast<int>(array.shape(1));
  std::vector<double> samples(array.data(), array.data() + array.size());
  return imaging::Raster(w, h, std::move(samples));
}

imaging::GrayImage to_gray(const DoubleArray& array) { return imaging::GrayImage(to_raster(array)); }

DoubleArray to_array(const imaging::Raster& raster) {
  DoubleArray out({raster.height(), raster.width()});
  std::memcpy(out.mutable_data(), raster.samples().data(), raster.size() * sizeof(double));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frame triage, SfM pose handling and panorama tour generation";

  static py::exception<Error> triage_error(m, "TriageError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(triage_error, e.what());
    }
  });

  // imaging
  m.def(
      "to_grayscale",
      [](const ByteArray& rgb) {
        if (rgb.ndim() != 3 || rgb.shape(2) != 3) throw InvalidImage("expected an HxWx3 array");
        imaging::RgbImage image;
        image.height = static_cast<int>(rgb.shape(0));
        image.width = static_cast<int>(rgb.shape(1));
        image.pixels.assign(rgb.data(), rgb.data() + rgb.size());
        return to_array(imaging::to_grayscale(image).raster());
      },
      py::arg("rgb"), "BT.601 luminance of an HxWx3 uint8 array.");
  m.def(
      "convolve3x3",
      [](const DoubleArray& image, const DoubleArray& kernel) {
        if (kernel.size() != 9) throw InvalidImage("kernel must have 9 coefficients");
        std::array<double, 9> k{};
        std::copy(kernel.data(), kernel.data() + 9, k.begin());
        return to_array(imaging::convolve3x3(to_raster(image), imaging::Kernel3x3(k)));
      },
      py::arg("image"), py::arg("kernel"));
  m.def(
      "variance", [](const DoubleArray& a) { return imaging::variance({a.data(), std::size_t(a.size())}); },
      py::arg("samples"));
  m.def(
      "variance_of_laplacian",
      [](const DoubleArray& image) { return imaging::variance_of_laplacian(to_gray(image)); },
      py::arg("image"));
  m.def(
      "load_grayscale",
      [](const std::string& path, int downscale) {
        return to_array(imaging::load_grayscale(path, downscale).raster());
      },
      py::arg("path"), py::arg("downscale") = 1);

  // blur filter
  py::class_<blur::FilterVerdict>(m, "FilterVerdict")
      .def_readonly("frame_index", &blur::FilterVerdict::frame_index)
      .def_readonly("variance", &blur::FilterVerdict::variance)
      .def_readonly("threshold", &blur::FilterVerdict::threshold)
      .def_readonly("keep", &blur::FilterVerdict::keep)
      .def("__repr__", [](const blur::FilterVerdict& v) {
        return "FilterVerdict(frame_index=" + std::to_string(v.frame_index) +
               ", keep=" + (v.keep ? "True" : "False") + ")";
      });
  m.def(
      "compute_thresholds",
      [](std::vector<double> variances, int k) {
        blur::BlurSeries series{std::move(variances), k, {}, {}};
        series = blur::compute_thresholds(std::move(series));
        return py::make_tuple(series.thresholds, series.j_counts);
      },
      py::arg("variances"), py::arg("k") = blur::kDefaultWindow,
      "Returns (thresholds, j_counts) for the sliding-window mean threshold.");
  m.def(
      "classify",
      [](std::vector<double> variances, int k) {
        blur::BlurSeries series{std::move(variances), k, {}, {}};
        return blur::classify(blur::compute_thresholds(std::move(series)));
      },
      py::arg("variances"), py::arg("k") = blur::kDefaultWindow);

  // keyframes
  py::class_<keyframes::KeyframePolicy>(m, "KeyframePolicy")
      .def(py::init<>())
      .def_readwrite("similarity_threshold", &keyframes::KeyframePolicy::similarity_threshold)
      .def_readwrite("min_gap", &keyframes::KeyframePolicy::min_gap)
      .def_readwrite("thumb_width", &keyframes::KeyframePolicy::thumb_width)
      .def_readwrite("thumb_height", &keyframes::KeyframePolicy::thumb_height);
  m.def(
      "select_keyframes",
      [](const std::vector<DoubleArray>& frames, const keyframes::KeyframePolicy& policy) {
        std::vector<blur::FrameRecord> records(frames.size());
        for (std::size_t i = 0; i < frames.size(); ++i) {
          records[i].index = static_cast<int>(i);
          records[i].image = to_gray(frames[i]);
        }
        std::vector<int> indices;
        for (const auto& r : keyframes::select_keyframes(records, policy)) indices.push_back(r.index);
        return indices;
      },
      py::arg("frames"), py::arg("policy") = keyframes::KeyframePolicy{},
      "Indices of the selected keyframes.");

  // sfm
  m.def("axis_angle_to_matrix", &sfm::axis_angle_to_matrix, py::arg("rotation"));

  py::class_<sfm::Shot>(m, "Shot")
      .def_readonly("id", &sfm::Shot::id)
      .def_readonly("camera", &sfm::Shot::camera)
      .def_readonly("rotation", &sfm::Shot::rotation)
      .def_readonly("translation", &sfm::Shot::translation)
      .def_property_readonly("position", &sfm::Shot::position);
  py::class_<sfm::SparsePoint>(m, "SparsePoint")
      .def_readonly("id", &sfm::SparsePoint::id)
      .def_readonly("position", &sfm::SparsePoint::position)
      .def_readonly("color", &sfm::SparsePoint::color);
  py::class_<sfm::Reconstruction>(m, "Reconstruction")
      .def_readonly("shots", &sfm::Reconstruction::shots)
      .def_readonly("points", &sfm::Reconstruction::points)
      .def_property_readonly("camera_ids", [](const sfm::Reconstruction& r) {
        std::vector<std::string> ids;
        for (const auto& [id, camera] : r.cameras) ids.push_back(id);
        return ids;
      });
  m.def(
      "parse_reconstruction",
      [](const std::string& text, bool lenient) {
        return sfm::parse_reconstruction(text, {lenient}).model;
      },
      py::arg("document"), py::arg("lenient") = false);
  m.def("serialize_reconstruction", &sfm::serialize_reconstruction, py::arg("model"));
  m.def("export_ply", &sfm::export_ply, py::arg("model"), py::arg("include_shots") = true);

  // tour
  m.def(
      "bearing",
      [](const sfm::Vec3& from_position, const sfm::Vec3& from_rotation,
         const sfm::Vec3& to_position) {
        const auto b = tour::bearing({"from", "from", from_position, from_rotation, false},
                                     {"to", "to", to_position, sfm::Vec3::Zero(), false});
        return py::make_tuple(b.yaw_deg, b.pitch_deg);
      },
      py::arg("from_position"), py::arg("from_rotation"), py::arg("to_position"),
      "(yaw_deg, pitch_deg) of a target seen from a panorama.");
  m.def(
      "style",
      [](double distance, double d_min, double d_max, int min_size, int max_size) {
        const auto s = tour::style(distance, d_min, d_max, min_size, max_size);
        return py::make_tuple(s.color, s.size_px);
      },
      py::arg("distance"), py::arg("d_min"), py::arg("d_max"), py::arg("min_size") = 10,
      py::arg("max_size") = 30);
  m.def(
      "build_tour",
      [](const sfm::Reconstruction& model, int max_neighbors, std::optional<double> max_distance,
         std::optional<double> scale) {
        tour::GraphParams params;
        params.max_neighbors = max_neighbors;
        params.max_distance = max_distance;
        params.scale = scale;
        return tour::emit_tour(tour::build_graph(model, params));
      },
      py::arg("model"), py::arg("max_neighbors") = 4, py::arg("max_distance") = py::none(),
      py::arg("scale") = py::none(), "tour.json document for the reconstruction.");
}
