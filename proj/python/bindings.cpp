#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "gameopt/cli.hpp"
#include "gameopt/harness.hpp"
#include "gameopt/problems.hpp"
#include "gameopt/projections.hpp"
#include "gameopt/reductions.hpp"
#include "gameopt/solvers.hpp"

namespace py = pybind11;
using namespace gameopt;

namespace {

Algo parse_algo(const std::string& s) {
  if (s == "primal") return Algo::kPrimal;
  if (s == "dual") return Algo::kDual;
  if (s == "primal-dual" || s == "primal_dual") return Algo::kPrimalDual;
  throw Error(ErrorCode::kInvalidArgument, "unknown algorithm '" + s + "'");
}

LearnerKind parse_learner(const std::string& s) {
  if (s == "ogd") return LearnerKind::kOgd;
  if (s == "ons") return LearnerKind::kOns;
  if (s == "mw") return LearnerKind::kMw;
  throw Error(ErrorCode::kInvalidArgument, "unknown learner '" + s + "'");
}

VerifyMethod parse_method(const std::string& s) {
  if (s == "auto") return VerifyMethod::kAuto;
  if (s == "grid") return VerifyMethod::kGrid;
  if (s == "inner") return VerifyMethod::kInner;
  throw Error(ErrorCode::kInvalidArgument, "unknown verification method '" + s + "'");
}

py::dict params_dict(const ProblemParams& p) {
  py::dict d;
  d["G"] = p.G;
  d["H"] = p.H;
  d["omega"] = p.omega;
  d["D"] = p.D;
  d["G_inf"] = p.G_inf;
  d["alpha"] = p.alpha;
  return d;
}

py::dict report_dict(const VerifyReport& r) {
  py::dict d;
  d["ok"] = r.ok;
  d["method"] = r.method;
  d["detail"] = r.detail;
  d["violating_index"] = r.violating_index ? py::cast(*r.violating_index) : py::none();
  d["value"] = r.value;
  d["slack"] = r.slack;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Convex feasibility through online learning and zero-sum games";

  // Leaked on purpose: the translator may run during interpreter teardown.
  static PyObject* error_type =
      PyErr_NewExceptionWithDoc("gameopt._core.GameoptError", "Raised by the library; .code names the failure kind.",
                                PyExc_ValueError, nullptr);
  m.attr("GameoptError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type)(py::str(e.what()));
      inst.attr("code") = py::str(error_code_name(e.code()));
      PyErr_SetObject(error_type, inst.ptr());
    }
  });

  py::class_<Domain>(m, "Domain")
      .def_static("simplex", &Domain::simplex, py::arg("n"), py::arg("floor") = 0.0)
      .def_static("ball", py::overload_cast<int, double, const Vector&>(&Domain::ball), py::arg("n"),
                  py::arg("radius"), py::arg("center"))
      .def_static("unit_ball", py::overload_cast<int, double>(&Domain::ball), py::arg("n"), py::arg("radius") = 1.0)
      .def_static("box", &Domain::box, py::arg("lo"), py::arg("hi"))
      .def_property_readonly("dim", &Domain::dim)
      .def_property_readonly("diameter", &Domain::diameter)
      .def("start_point", &Domain::start_point)
      .def("contains", &Domain::contains, py::arg("x"), py::arg("tol") = 1e-9);

  py::class_<Problem>(m, "Problem")
      .def_property_readonly("m", &Problem::m)
      .def_property_readonly("n", &Problem::n)
      .def_property_readonly("domain", [](const Problem& p) { return p.domain; })
      .def_property_readonly("params", [](const Problem& p) { return params_dict(p.params); })
      .def("constraint_values", [](const Problem& p, const Vector& x) { return constraint_values(p, x); })
      .def("max_violation", [](const Problem& p, const Vector& x) { return max_violation(p, x); })
      .def("game_loss", [](const Problem& p, const Vector& x, const Vector& q) { return game_loss(p, x, q); })
      .def("to_json", [](const Problem& p) { return emit_problem(p); });

  m.def("parse_problem", &parse_problem_file, py::arg("text"), "Problem from a JSON document");
  m.def("load_problem", &load_problem_file, py::arg("path"));

  m.def(
      "generate",
      [](const std::string& family, int n, int m_, double H, bool feasible, double margin, double c, int T_days,
         std::optional<double> tau, std::uint64_t seed) {
        GeneratorSpec s;
        s.family = parse_generator_family(family);
        s.n = n;
        s.m = m_;
        s.H = H;
        s.feasible = feasible;
        s.margin = margin;
        s.c = c;
        s.T_days = T_days;
        s.tau = tau;
        s.seed = seed;
        return generate(s);
      },
      py::arg("family"), py::arg("n") = 3, py::arg("m") = 2, py::arg("H") = 1.0, py::arg("feasible") = true,
      py::arg("margin") = 0.05, py::arg("c") = 0.1, py::arg("T_days") = 20, py::arg("tau") = py::none(),
      py::arg("seed") = 1);

  m.def("project_simplex", py::overload_cast<const Vector&>(&project_simplex), py::arg("y"));
  m.def("project", &project, py::arg("y"), py::arg("domain"));
  m.def("generalized_project", py::overload_cast<const Vector&, const Matrix&, const Domain&, double>(&generalized_project),
        py::arg("y"), py::arg("A"), py::arg("domain"), py::arg("tol") = 1e-9);

  m.def(
      "regret_bound",
      [](const std::string& learner, long T, double G, double H, double D, double alpha, int n) {
        return regret_bound(RegretBoundSpec{parse_learner(learner), G, H, D, alpha, n}, T);
      },
      py::arg("learner"), py::arg("T"), py::arg("G") = 1.0, py::arg("H") = 1.0, py::arg("D") = 1.0,
      py::arg("alpha") = 1.0, py::arg("n") = 1);
  m.def(
      "stopping_threshold",
      [](const std::string& learner, double eps, double G, double H, double D, double alpha, int n) {
        return stopping_threshold(RegretBoundSpec{parse_learner(learner), G, H, D, alpha, n}, eps);
      },
      py::arg("learner"), py::arg("eps"), py::arg("G") = 1.0, py::arg("H") = 1.0, py::arg("D") = 1.0,
      py::arg("alpha") = 1.0, py::arg("n") = 1);

  py::class_<SolveResult>(m, "SolveResult")
      .def_property_readonly("status", [](const SolveResult& r) { return std::string(outcome_name(r.outcome)); })
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("threshold", &SolveResult::threshold)
      .def_readonly("guarantee", &SolveResult::guarantee)
      .def_property_readonly("x",
                             [](const SolveResult& r) -> py::object {
                               if (const auto* f = std::get_if<Feasible>(&r.outcome)) return py::cast(f->x);
                               if (const auto* e = std::get_if<Exhausted>(&r.outcome)) return py::cast(e->best_x);
                               return py::none();
                             })
      .def_property_readonly("residuals",
                             [](const SolveResult& r) -> py::object {
                               if (const auto* f = std::get_if<Feasible>(&r.outcome)) return py::cast(f->residuals);
                               return py::none();
                             })
      .def_property_readonly("p_bar", [](const SolveResult& r) -> py::object {
        if (const auto* i = std::get_if<Infeasible>(&r.outcome)) return py::cast(i->p_bar);
        if (const auto* e = std::get_if<EpsilonInfeasible>(&r.outcome)) return py::cast(e->p_bar);
        return py::none();
      });

  m.def(
      "solve",
      [](const Problem& p, const std::string& algo, std::optional<std::string> learner, double eps,
         std::optional<long> max_iters, std::optional<std::function<void(py::dict)>> trace) {
        const Algo a = parse_algo(algo);
        SolveOptions o;
        o.eps = eps;
        o.learner = parse_learner(learner.value_or(a == Algo::kDual ? "mw" : "ogd"));
        o.max_iters = max_iters;
        if (trace) {
          o.trace = [cb = *trace](const TraceRecord& r) {
            py::dict d;
            d["iter"] = r.iter;
            d["violated_index"] = r.violated_index ? py::cast(*r.violated_index) : py::none();
            d["violation"] = r.violation;
            d["game_loss"] = r.game_loss;
            d["regret_bound"] = r.regret_bound;
            d["elapsed_ns"] = r.elapsed_ns;
            cb(d);
          };
        }
        return solve(p, a, o);
      },
      py::arg("problem"), py::arg("algo") = "primal", py::arg("learner") = py::none(), py::arg("eps") = 0.1,
      py::arg("max_iters") = py::none(), py::arg("trace") = py::none());

  m.def(
      "verify",
      [](const Problem& p, const SolveResult& r, std::optional<double> eps, const std::string& method,
         double resolution) {
        return report_dict(verify_certificate(p, r.outcome, eps.value_or(r.guarantee), parse_method(method), resolution));
      },
      py::arg("problem"), py::arg("result"), py::arg("eps") = py::none(), py::arg("method") = "auto",
      py::arg("resolution") = kGridVerifyResolution);

  m.def("strictify", &strictify, py::arg("problem"), py::arg("delta"));
  m.def("log_transform", &log_transform, py::arg("problem"), py::arg("omega") = py::none());
  m.def("approx_translate", &approx_translate, py::arg("eps_log"), py::arg("omega"));

  m.def(
      "lambda_star",
      [](const Problem& p, double resolution) {
        const LambdaStar l = brute_force_lambda_star(p, resolution);
        py::dict d;
        d["value"] = l.value;
        d["argmin"] = l.argmin;
        d["slack"] = l.slack;
        d["points"] = l.points;
        return d;
      },
      py::arg("problem"), py::arg("resolution") = 1e-3);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "gameopt");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in process; returns (exit code, stdout, stderr)");
}
