#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "invlr/grouprep.hpp"
#include "invlr/harness.hpp"
#include "invlr/matrix_io.hpp"
#include "invlr/ntk.hpp"
#include "invlr/solvers.hpp"
#include "invlr/trainer.hpp"

namespace py = pybind11;
using namespace invlr;

namespace {

std::vector<std::string> warning_names(const Warnings& w) {
  std::vector<std::string> out;
  for (Warning x : w) out.push_back(to_string(x));
  return out;
}

RegressionProblem make_problem(const Matrix& x, const Matrix& y, const GroupRep& rep, Eigen::Index r,
                               double lambda) {
  return RegressionProblem(x, y, rep, r, lambda);
}

}  // namespace

PYBIND11_MODULE(_invlr, m) {
  m.doc() = "Rank-bounded invariant linear regression";

  static py::exception<Error> error_type(m, "InvlrError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = error_type;
      py::object inst = err(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<GroupRep>(m, "GroupRep")
      .def(py::init<std::vector<Matrix>, std::vector<int>>(), py::arg("generators"), py::arg("orders"))
      .def_property_readonly("dim", &GroupRep::dim)
      .def_property_readonly("generators", &GroupRep::generators)
      .def_property_readonly("orders", &GroupRep::orders)
      .def("order", &GroupRep::order);

  m.def("rep_from_generator", &rep_from_generator, py::arg("gen"), py::arg("order"));
  m.def("c4_image_rotation", &c4_image_rotation, py::arg("p"));
  m.def("cyclic_permutation", &cyclic_permutation, py::arg("d0"), py::arg("k"));
  m.def("rotation2d", &rotation2d, py::arg("k"));
  m.def("group_elements", &elements, py::arg("rep"));
  m.def("group_average", &group_average, py::arg("rep"));
  m.def(
      "invariance_constraint", [](const GroupRep& rep) { return invariance_constraint(rep).entries; },
      py::arg("rep"));
  m.def(
      "invariant_basis", [](const GroupRep& rep) { return invariant_basis(invariance_constraint(rep)); },
      py::arg("rep"));

  py::class_<RankBoundedSolution>(m, "Solution")
      .def_readonly("W", &RankBoundedSolution::W)
      .def_readonly("loss", &RankBoundedSolution::loss)
      .def_readonly("rank", &RankBoundedSolution::rank)
      .def_readonly("invariance_residual", &RankBoundedSolution::invariance_residual)
      .def_readonly("spectrum", &RankBoundedSolution::spectrum)
      .def_property_readonly("warnings", [](const RankBoundedSolution& s) { return warning_names(s.warnings); });

  m.def(
      "solve",
      [](const Matrix& x, const Matrix& y, const GroupRep& rep, Eigen::Index r, const std::string& mode,
         double lambda) { return solve(make_problem(x, y, rep, r, lambda), parse_mode(mode)); },
      py::arg("x"), py::arg("y"), py::arg("rep"), py::arg("r"), py::arg("mode") = "constrained",
      py::arg("lam") = 0.0);

  m.def(
      "regularization_path",
      [](const Matrix& x, const Matrix& y, const GroupRep& rep, Eigen::Index r, const std::vector<double>& grid) {
        py::list rows;
        for (const PathSample& s : regularization_path(make_problem(x, y, rep, r, 0.0), grid)) {
          py::dict d;
          d["lambda"] = s.lambda;
          d["W"] = s.W;
          d["loss"] = s.loss;
          d["invariance_residual"] = s.invariance_residual;
          d["distance_to_inv"] = s.distance_to_inv;
          rows.append(d);
        }
        return rows;
      },
      py::arg("x"), py::arg("y"), py::arg("rep"), py::arg("r"), py::arg("lambdas"));

  m.def(
      "critical_points",
      [](const Matrix& x, const Matrix& y, const GroupRep& rep, Eigen::Index r, const std::string& mode,
         double lambda) {
        py::list rows;
        for (const CriticalPoint& cp : enumerate_critical_points(make_problem(x, y, rep, r, lambda), parse_mode(mode))) {
          py::dict d;
          d["W"] = cp.W;
          d["index_set"] = cp.index_set;
          d["loss"] = cp.loss;
          d["objective"] = cp.objective;
          d["is_global_min"] = cp.is_global_min;
          rows.append(d);
        }
        return rows;
      },
      py::arg("x"), py::arg("y"), py::arg("rep"), py::arg("r"), py::arg("mode") = "constrained",
      py::arg("lam") = 0.0);

  m.def(
      "train",
      [](const Matrix& x, const Matrix& y, const GroupRep& rep, std::vector<Eigen::Index> hidden,
         const std::string& mode, int epochs, double lr, double lambda, const std::string& loss,
         std::uint64_t seed) {
        TrainConfig cfg;
        cfg.mode = parse_train_mode(mode);
        cfg.hidden = std::move(hidden);
        cfg.epochs = epochs;
        cfg.adam.learning_rate = lr;
        cfg.lambda = lambda;
        cfg.loss = parse_loss(loss);
        cfg.seed = seed;
        TrainSetup setup;
        setup.rep = rep;
        const TrainLog log = train(cfg, x, y, setup);
        py::dict out;
        std::vector<double> obj, perp, ratio, acc;
        for (const EpochRecord& r : log.records) {
          obj.push_back(r.objective);
          perp.push_back(r.w_perp_frob);
          ratio.push_back(r.invariance_ratio);
          acc.push_back(r.accuracy);
        }
        out["objective"] = obj;
        out["w_perp_frob"] = perp;
        out["invariance_ratio"] = ratio;
        out["accuracy"] = acc;
        out["W"] = log.final_w;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("rep"), py::arg("hidden"), py::arg("mode") = "augmented",
      py::arg("epochs") = 1000, py::arg("lr") = 1e-3, py::arg("lam") = 0.0, py::arg("loss") = "mse",
      py::arg("seed") = 0);

  m.def(
      "relu_ntk", [](const Vector& x, const Vector& xp) { return relu_limiting_ntk(x, xp); }, py::arg("x"),
      py::arg("xp"));
  m.def(
      "augmented_relu_ntk",
      [](const GroupRep& rep, const Vector& x, const Vector& xp) {
        return augmented_kernel([](const Vector& a, const Vector& b) { return relu_limiting_ntk(a, b); }, rep, x, xp);
      },
      py::arg("rep"), py::arg("x"), py::arg("xp"));

  m.def(
      "make_synthetic",
      [](const GroupRep& rep, Eigen::Index dl, Eigen::Index n, double noise_sigma, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.dl = dl;
        spec.n = n;
        spec.noise_sigma = noise_sigma;
        spec.seed = seed;
        const SyntheticData d = make_synthetic(rep, spec);
        return py::make_tuple(d.x, d.y, d.w_true);
      },
      py::arg("rep"), py::arg("dl") = 4, py::arg("n") = 64, py::arg("noise_sigma") = 0.1, py::arg("seed") = 0);

  m.def("read_matrix", [](const std::string& p) { return read_matrix(p); }, py::arg("path"));
  m.def(
      "write_matrix", [](const std::string& p, const Matrix& a) { write_matrix(p, a); }, py::arg("path"),
      py::arg("matrix"));
}
