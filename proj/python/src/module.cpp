#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "robomesh/augmentation.hpp"
#include "robomesh/body_model.hpp"
#include "robomesh/camera.hpp"
#include "robomesh/contrastive.hpp"
#include "robomesh/harness.hpp"
#include "robomesh/localization.hpp"
#include "robomesh/metrics.hpp"
#include "robomesh/pixel_alignment.hpp"
#include "robomesh/rotation.hpp"

namespace py = pybind11;
using namespace robomesh;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> grid(const std::vector<double>& values, int height, int width) {
  py::array_t<double> out({height, width});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<int> label_grid(const std::vector<int>& values, int height, int width) {
  py::array_t<int> out({height, width});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<double> image_to_array(const Image& img) {
  py::array_t<double> out({img.height, img.width, 3});
  std::copy(img.data.begin(), img.data.end(), out.mutable_data());
  return out;
}

Image image_from_array(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ShapeError("image must be H x W x 3");
  Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

// Rows of a 2-D array become plain representations of one kind.
std::vector<Representation> rows_to_reps(const Array& a, RepresentationKind kind, std::size_t split) {
  if (a.ndim() != 2) throw ShapeError("representations must be a 2-D array");
  std::vector<Representation> reps(static_cast<std::size_t>(a.shape(0)));
  const auto d = static_cast<std::size_t>(a.shape(1));
  for (std::size_t i = 0; i < reps.size(); ++i) {
    reps[i].kind = kind;
    reps[i].split = split;
    reps[i].vector.assign(a.data() + i * d, a.data() + (i + 1) * d);
  }
  return reps;
}

nlohmann::json to_nlohmann(const py::dict& d) {
  nlohmann::json j = nlohmann::json::object();
  for (auto item : d) j[py::str(item.first).cast<std::string>()] = item.second.cast<double>();
  return j;
}

py::dict row_dict(const ReportRow& r) {
  py::dict d;
  d["kind"] = r.kind;
  d["magnitude"] = r.magnitude;
  d["metric"] = r.metric;
  d["value"] = r.value;
  d["n"] = r.n;
  return d;
}

}  // namespace

PYBIND11_MODULE(_robomesh, m) {
  m.doc() = "robomesh core bindings";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ArithmeticError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  // rotations
  m.def("rodrigues", &rodrigues, py::arg("axis_angle"));
  m.def("rotation_log", &rotation_log, py::arg("R"));
  m.def("rotmat_to_rot6d", &rotmat_to_rot6d);
  m.def("rot6d_to_rotmat", &rot6d_to_rotmat);

  // body model
  py::class_<BodyModelTemplate>(m, "BodyModelTemplate")
      .def_readonly("template_vertices", &BodyModelTemplate::template_vertices)
      .def_readonly("faces", &BodyModelTemplate::faces)
      .def_readonly("shape_blendshapes", &BodyModelTemplate::shape_blendshapes)
      .def_readonly("pose_blendshapes", &BodyModelTemplate::pose_blendshapes)
      .def_readonly("joint_regressor", &BodyModelTemplate::joint_regressor)
      .def_readonly("skinning_weights", &BodyModelTemplate::skinning_weights)
      .def_readonly("parents", &BodyModelTemplate::parents)
      .def_readonly("part_of_vertex", &BodyModelTemplate::part_of_vertex)
      .def_readonly("part_count", &BodyModelTemplate::part_count)
      .def_property_readonly("vertex_count", &BodyModelTemplate::vertex_count)
      .def_property_readonly("joint_count", &BodyModelTemplate::joint_count)
      .def_property_readonly("shape_count", &BodyModelTemplate::shape_count)
      .def("part_of_face", &BodyModelTemplate::part_of_face)
      .def("validate", &BodyModelTemplate::validate);

  m.def(
      "synthetic_template",
      [](int shape_count, std::uint64_t seed) {
        SyntheticTemplateOptions opt;
        opt.shape_count = shape_count;
        opt.seed = seed;
        return make_synthetic_template(opt);
      },
      py::arg("shape_count") = 4, py::arg("seed") = 7);
  m.def("load_template", &load_template, py::arg("path"));
  m.def("save_template", &save_template, py::arg("template"), py::arg("path"));

  py::class_<Camera>(m, "Camera")
      .def(py::init([](double s, const Vec2& t) { return Camera{s, t}; }), py::arg("s") = 1.0,
           py::arg("t") = Vec2::Zero())
      .def_readwrite("s", &Camera::s)
      .def_readwrite("t", &Camera::t)
      .def("__repr__", [](const Camera& c) {
        return "Camera(s=" + std::to_string(c.s) + ", t=[" + std::to_string(c.t.x()) + ", " +
               std::to_string(c.t.y()) + "])";
      });

  py::class_<BodyParams>(m, "BodyParams")
      .def_static("rest", &BodyParams::rest, py::arg("template"), py::arg("expression_dims") = 10)
      .def_readwrite("global_orient", &BodyParams::global_orient)
      .def_readwrite("pose", &BodyParams::pose)
      .def_readwrite("shape", &BodyParams::shape)
      .def_readwrite("expression", &BodyParams::expression)
      .def_readwrite("camera", &BodyParams::camera);

  m.def(
      "forward",
      [](const BodyModelTemplate& tmpl, const BodyParams& params) {
        auto r = forward(tmpl, params);
        return py::make_tuple(r.vertices, r.joints);
      },
      py::arg("template"), py::arg("params"), "Posed (vertices, joints) in meters.");

  // camera
  m.def(
      "project", [](const Points3& points, const Camera& cam) { return project(points, cam); }, py::arg("points"),
      py::arg("camera"));
  m.def("normalized_to_pixels", &normalized_to_pixels, py::arg("points"), py::arg("width"), py::arg("height"));

  py::class_<Bbox>(m, "Bbox")
      .def(py::init([](const Vec2& c, double w, double h) { return Bbox{c, w, h}; }), py::arg("center"),
           py::arg("w"), py::arg("h"))
      .def_readwrite("center", &Bbox::center)
      .def_readwrite("w", &Bbox::w)
      .def_readwrite("h", &Bbox::h);
  m.def("derive_part_bbox", &derive_part_bbox, py::arg("keypoints"), py::arg("pad") = 0.2,
        py::arg("square") = false);
  m.def("bbox_iou", &bbox_iou);

  // localization
  m.def(
      "soft_argmax3d",
      [](const Array& logits, double temperature) {
        if (logits.ndim() != 4) throw ShapeError("logits must be J x D x H x W");
        HeatVolume vol(static_cast<int>(logits.shape(0)), static_cast<int>(logits.shape(1)),
                       static_cast<int>(logits.shape(2)), static_cast<int>(logits.shape(3)));
        std::copy(logits.data(), logits.data() + logits.size(), vol.values.begin());
        return soft_argmax3d(vol, temperature);
      },
      py::arg("logits"), py::arg("temperature") = 1.0, "Expected voxel coordinate (z, y, x) per joint.");

  // pixel alignment
  m.def(
      "rasterize_parts",
      [](const Points2& verts2d, const std::vector<double>& depths, const Faces& faces,
         const std::vector<int>& part_of_face, int part_count, int width, int height) {
        auto rt = rasterize_parts(verts2d, depths, faces, part_of_face, part_count, width, height);
        return label_grid(rt.labels, rt.height, rt.width);
      },
      py::arg("verts2d"), py::arg("depths"), py::arg("faces"), py::arg("part_of_face"), py::arg("part_count"),
      py::arg("width"), py::arg("height"));
  m.def(
      "soft_silhouette",
      [](const Points2& verts2d, const Faces& faces, double sigma, int width, int height) {
        auto s = soft_silhouette(verts2d, faces, sigma, width, height);
        return grid(s.probability, s.height, s.width);
      },
      py::arg("verts2d"), py::arg("faces"), py::arg("sigma"), py::arg("width"), py::arg("height"));

  // metrics
  m.def(
      "procrustes_align",
      [](const Points3& source, const Points3& target) {
        auto r = procrustes_align(source, target);
        return py::make_tuple(r.scale, r.rotation, r.translation);
      },
      py::arg("source"), py::arg("target"), "(scale, rotation, translation)");
  m.def("mpjpe", &mpjpe, py::arg("pred"), py::arg("gt"), py::arg("root_index") = 0);
  m.def("pa_mpjpe", &pa_mpjpe, py::arg("pred"), py::arg("gt"));
  m.def("pve", &pve, py::arg("pred_vertices"), py::arg("gt_vertices"), py::arg("pred_root"), py::arg("gt_root"));
  m.def("pa_pve", &pa_pve, py::arg("pred_vertices"), py::arg("gt_vertices"));
  m.def(
      "f_score",
      [](const Points3& pred, const Points3& gt, const std::vector<double>& thresholds) {
        return f_score(pred, gt, thresholds);
      },
      py::arg("pred"), py::arg("gt"), py::arg("thresholds_mm") = std::vector<double>{5.0, 15.0});

  // contrastive
  m.def(
      "contrastive_loss",
      [](const Array& predicted, const Array& ground_truth, double tau_pos, std::optional<double> tau_neg,
         const std::string& metric) {
        ContrastiveConfig cfg;
        cfg.tau_pos = tau_pos;
        cfg.tau_neg = tau_neg;
        if (metric == "l1") cfg.metric = DistanceMetric::l1;
        else if (metric == "smooth_l1") cfg.metric = DistanceMetric::smooth_l1;
        else if (metric == "mse") cfg.metric = DistanceMetric::mse;
        else throw ParseError("unknown metric '" + metric + "'");
        auto z = rows_to_reps(predicted, RepresentationKind::pose_concat, 0);
        auto p = rows_to_reps(ground_truth, RepresentationKind::pose_concat, 0);
        if (z.size() % 2 != 0) throw ShapeError("batch must hold 2N rows");
        auto loss = contrastive_loss(z, p, Pairing::standard(z.size() / 2), cfg);
        return py::make_tuple(loss.total, loss.per_anchor);
      },
      py::arg("predicted"), py::arg("ground_truth"), py::arg("tau_pos") = 1.0, py::arg("tau_neg") = py::none(),
      py::arg("metric") = "l1", "Rows i and i+N are positives. Returns (total, per_anchor).");

  // augmentation
  m.def("augmentation_kinds", [] {
    std::vector<std::string> out;
    for (auto k : kAllAugmentationKinds) out.emplace_back(to_string(k));
    return out;
  });
  m.def("taxonomy", [](const std::string& kind) { return std::string(to_string(classify(parse_augmentation_kind(kind)))); });
  m.def(
      "sweep_grid",
      [](const std::string& kind, int steps) {
        std::vector<double> out;
        for (const auto& s : sweep_grid(parse_augmentation_kind(kind), steps)) out.push_back(s.magnitude);
        return out;
      },
      py::arg("kind"), py::arg("steps") = 7);
  m.def(
      "apply_image",
      [](const Array& image, const std::string& kind, double magnitude) {
        return image_to_array(apply_image(image_from_array(image), make_spec(parse_augmentation_kind(kind), magnitude)));
      },
      py::arg("image"), py::arg("kind"), py::arg("magnitude"));

  // harness
  m.def(
      "sweep",
      [](const std::string& estimator, int n, std::uint64_t seed, const std::vector<std::string>& kinds, int steps,
         const std::vector<std::string>& metrics, int jobs) {
        auto tmpl = make_synthetic_template();
        DatasetConfig cfg;
        cfg.n = n;
        cfg.seed = seed;
        auto data = gen_dataset(tmpl, cfg);
        std::vector<std::vector<AugmentationSpec>> grids;
        for (const auto& k : kinds) grids.push_back(sweep_grid(parse_augmentation_kind(k), steps));
        std::vector<MetricKind> mk;
        for (const auto& name : metrics) mk.push_back(parse_metric(name));
        SweepOptions opt;
        opt.jobs = jobs;
        opt.seed = seed;
        auto est = make_estimator(estimator);
        MetricReport rep;
        {
          py::gil_scoped_release release;
          rep = run_sweep(*est, tmpl, data, grids, mk, opt);
        }
        py::list rows;
        for (const auto& r : rep.rows) rows.append(row_dict(r));
        return py::make_tuple(rows, rep.failures);
      },
      py::arg("estimator") = "passthrough", py::arg("n") = 8, py::arg("seed") = 0,
      py::arg("kinds") = std::vector<std::string>{"translate_x", "scale", "rotation", "hue"}, py::arg("steps") = 7,
      py::arg("metrics") = std::vector<std::string>{"mpjpe", "pa_mpjpe", "pve", "pve2d", "iou"}, py::arg("jobs") = 1,
      "Synthetic dataset sweep. Returns (rows, failures).");

  m.def(
      "total_loss",
      [](const py::dict& components, const py::dict& weights) {
        auto t = total_loss(loss_components_from_json(to_nlohmann(components)),
                            loss_weights_from_json(to_nlohmann(weights)));
        py::dict weighted;
        for (const auto& [term, v] : t.weighted) weighted[py::str(std::string(to_string(term)))] = v;
        return py::make_tuple(t.total, weighted);
      },
      py::arg("components"), py::arg("weights") = py::dict());
}
