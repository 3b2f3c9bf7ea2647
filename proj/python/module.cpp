#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rwrange/capacity.hpp"
#include "rwrange/decomposition.hpp"
#include "rwrange/experiment.hpp"
#include "rwrange/stats.hpp"

namespace py = pybind11;
using namespace rwrange;

namespace {

ObservableKind kind_of(const std::string& s) { return parse_observable_kind(s); }

ResistanceSolveConfig solver(double tol) {
  ResistanceSolveConfig c;
  c.rel_tolerance = tol;
  return c;
}

SegmentView segment(const WalkPath& w, std::size_t a, std::optional<std::size_t> b) {
  return SegmentView(w, a, b.value_or(w.steps()));
}

py::array_t<std::int64_t> coords(const WalkPath& w) {
  const auto raw = w.raw();
  py::array_t<std::int64_t> out({static_cast<py::ssize_t>(w.steps() + 1),
                                 static_cast<py::ssize_t>(w.dim())});
  std::copy(raw.begin(), raw.end(), out.mutable_data());
  return out;
}

WalkPath from_array(py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected an (n+1, d) integer array");
  const auto* p = a.data();
  return WalkPath(static_cast<int>(a.shape(1)), std::vector<std::int64_t>(p, p + a.size()));
}

py::dict as_dict(const experiment::ExperimentConfig& c) {
  return py::module_::import("json").attr("loads")(experiment::to_json(c).dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random walk range observables: distance, cut points, effective resistance.";
  m.attr("__version__") = "0.1.0";

  py::register_exception<experiment::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<WalkPath>(m, "Walk")
      .def(py::init(&from_array), py::arg("coords"))
      .def_property_readonly("d", &WalkPath::dim)
      .def_property_readonly("steps", &WalkPath::steps)
      .def_property_readonly("seed", &WalkPath::seed)
      .def_property_readonly("stream", &WalkPath::stream)
      .def_property_readonly("coords", &coords)
      .def("__len__", [](const WalkPath& w) { return w.steps() + 1; })
      .def("__eq__", [](const WalkPath& a, const WalkPath& b) { return a == b; })
      .def("__repr__", [](const WalkPath& w) {
        std::ostringstream s;
        s << "Walk(d=" << w.dim() << ", steps=" << w.steps() << ")";
        return s.str();
      });

  m.def("simulate_walk", &simulate_walk, py::arg("d"), py::arg("n"), py::arg("seed"),
        py::arg("stream") = 0);
  m.def(
      "reverse_translate",
      [](const WalkPath& w, std::size_t a, std::optional<std::size_t> b) {
        return reverse_translate(segment(w, a, b));
      },
      py::arg("walk"), py::arg("a") = 0, py::arg("b") = py::none());

  m.def(
      "graph_distance",
      [](const WalkPath& w, std::size_t a, std::optional<std::size_t> b) {
        return graph_distance(RangeGraph::build(segment(w, a, b)));
      },
      py::arg("walk"), py::arg("a") = 0, py::arg("b") = py::none());
  m.def(
      "cut_points",
      [](const WalkPath& w, std::size_t a, std::optional<std::size_t> b) {
        return cut_point_count(segment(w, a, b));
      },
      py::arg("walk"), py::arg("a") = 0, py::arg("b") = py::none());
  m.def(
      "effective_resistance",
      [](const WalkPath& w, std::size_t a, std::optional<std::size_t> b, double tol) {
        return effective_resistance(RangeGraph::build(segment(w, a, b)), solver(tol));
      },
      py::arg("walk"), py::arg("a") = 0, py::arg("b") = py::none(),
      py::arg("rel_tolerance") = 1e-10);
  m.def(
      "observable",
      [](const WalkPath& w, const std::string& kind, std::size_t a, std::optional<std::size_t> b,
         double tol) { return observable(segment(w, a, b), kind_of(kind), solver(tol)); },
      py::arg("walk"), py::arg("kind"), py::arg("a") = 0, py::arg("b") = py::none(),
      py::arg("rel_tolerance") = 1e-10);
  m.def(
      "range_size",
      [](const WalkPath& w, std::size_t a, std::optional<std::size_t> b) {
        return range_point_set(segment(w, a, b)).size();
      },
      py::arg("walk"), py::arg("a") = 0, py::arg("b") = py::none());

  m.def(
      "cross_term",
      [](const WalkPath& w, const std::string& kind, std::size_t split,
         std::optional<std::size_t> end) {
        return cross_term(w, kind_of(kind), split, end.value_or(w.steps())).value;
      },
      py::arg("walk"), py::arg("kind"), py::arg("split"), py::arg("end") = py::none());
  m.def(
      "dyadic_decompose",
      [](const WalkPath& w, const std::string& kind, int levels) {
        const auto dd = dyadic_decompose(w, kind_of(kind), levels);
        py::dict out;
        out["total"] = dd.total;
        out["leaves"] = dd.leaves;
        out["errors"] = dd.errors;
        out["identity_residual"] = dd.identity_residual();
        return out;
      },
      py::arg("walk"), py::arg("kind"), py::arg("levels"));
  m.def(
      "cross_term_samples",
      [](int d, std::size_t n, const std::string& kind, std::size_t samples, std::uint64_t seed,
         unsigned threads) {
        return cross_term_tail_samples(d, n, kind_of(kind), samples, seed, {}, threads);
      },
      py::arg("d"), py::arg("n"), py::arg("kind"), py::arg("samples"), py::arg("seed"),
      py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  m.def(
      "capacity",
      [](const WalkPath& w, double factor, std::uint32_t trials, std::uint64_t seed,
         std::size_t sources, bool far_field, unsigned threads) {
        CapacityOptions o;
        o.escape_radius_factor = factor;
        o.trials_per_point = trials;
        o.seed = seed;
        o.source_points = sources;
        o.far_field = far_field;
        o.threads = threads;
        CapacityEstimate e;
        {
          py::gil_scoped_release release;
          e = capacity_estimate(range_point_set(SegmentView(w)), o);
        }
        py::dict out;
        out["estimate"] = e.estimate;
        out["std_error"] = e.std_error;
        out["set_size"] = e.set_size;
        out["escape_radius"] = e.escape_radius;
        out["sources"] = e.sources;
        return out;
      },
      py::arg("walk"), py::arg("radius_factor") = 16.0, py::arg("trials") = 200,
      py::arg("seed") = 0, py::arg("sources") = 0, py::arg("far_field") = true,
      py::arg("threads") = 1);

  m.def(
      "fit_tail_exponent",
      [](const std::vector<double>& xs, double l_min, double l_max) {
        const TailFit f = fit_tail_exponent(xs, l_min, l_max);
        py::dict out;
        out["slope"] = f.slope;
        out["intercept"] = f.intercept;
        out["r_squared"] = f.r_squared;
        out["n_points"] = f.n_points;
        return out;
      },
      py::arg("samples"), py::arg("l_min"), py::arg("l_max"));
  m.def(
      "variance_scan",
      [](const std::string& kind, int d, const std::vector<std::size_t>& n_grid,
         std::size_t samples, std::uint64_t seed, unsigned threads) {
        VarianceScan s;
        {
          py::gil_scoped_release release;
          s = variance_scan(kind_of(kind), d, n_grid, samples, seed, {}, threads);
        }
        py::dict out;
        py::list grid;
        for (const auto& p : s.grid) {
          py::dict g;
          g["n"] = p.n;
          g["mean"] = p.mean;
          g["variance"] = p.variance;
          g["std_error"] = p.std_error;
          grid.append(g);
        }
        out["grid"] = grid;
        out["slope"] = s.slope;
        out["slope_std_error"] = s.slope_std_error;
        out["best_law"] = std::string(to_string(s.best_law()));
        return out;
      },
      py::arg("kind"), py::arg("d"), py::arg("n_grid"), py::arg("samples"), py::arg("seed"),
      py::arg("threads") = 1);
  m.def(
      "clt_report",
      [](const std::vector<double>& xs) {
        const CltReport r = clt_report(xs);
        py::dict out;
        out["mean"] = r.mean;
        out["std_dev"] = r.std_dev;
        out["skewness"] = r.skewness;
        out["excess_kurtosis"] = r.excess_kurtosis;
        out["ks_distance"] = r.ks_distance;
        out["median_abs_standardized"] = r.median_abs_standardized;
        return out;
      },
      py::arg("samples"));

  m.def(
      "resolve_config",
      [](const py::dict& cfg) {
        const std::string text = py::str(py::module_::import("json").attr("dumps")(cfg));
        const auto c = experiment::config_from_json(nlohmann::json::parse(text));
        c.validate();
        return as_dict(c);
      },
      py::arg("config"));
  m.def(
      "run_experiment",
      [](const py::dict& cfg) {
        const std::string text = py::str(py::module_::import("json").attr("dumps")(cfg));
        auto c = experiment::config_from_json(nlohmann::json::parse(text));
        if (c.output_dir.empty()) c.output_dir = experiment::default_output_dir();
        std::ostringstream log;
        experiment::RunResult r;
        {
          py::gil_scoped_release release;
          r = experiment::run(c, log);
        }
        py::dict out;
        out["status"] = static_cast<int>(r.status);
        out["output_dir"] = r.output_dir.string();
        out["files"] = r.files;
        out["message"] = r.message;
        out["log"] = log.str();
        return out;
      },
      py::arg("config"));
  m.def("verify_manifest", &experiment::verify_manifest, py::arg("directory"));
}
