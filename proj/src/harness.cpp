#include "gameopt/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "gameopt/grid.hpp"
#include "json.hpp"

namespace gameopt {

using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Reading helpers. Every error names the offending field.

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kParse, (path.empty() ? std::string("document") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  expect_object(j, path);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) parse_fail(join(path, key), "unknown field");
  }
}

const json& require(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) parse_fail(join(path, key), "missing field");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, join(path, key));
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) parse_fail(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    parse_fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) parse_fail(path, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) parse_fail(path, "expected a string");
  return j.get<std::string>();
}

Vector as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_number(j[i], index(path, i));
  return v;
}

Matrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const json& first = j[0];
  if (!first.is_array()) parse_fail(index(path, 0), "expected an array of numbers");
  const std::size_t cols = first.size();
  Matrix A(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Vector row = as_vector(j[r], index(path, r));
    if (static_cast<std::size_t>(row.size()) != cols) {
      throw Error(ErrorCode::kDimensionMismatch, index(path, r) + ": row length differs");
    }
    A.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return A;
}

template <typename F>
auto with_path(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Domain

Domain parse_domain(const json& j, const std::string& path) {
  expect_object(j, path);
  const std::string kind = as_string(require(j, "kind", path), join(path, "kind"));
  return with_path(path, [&] {
    if (kind == "simplex") {
      only_keys(j, path, {"kind", "n", "floor"});
      return Domain::simplex(as_int(require(j, "n", path), join(path, "n")),
                             number_or(j, "floor", path, 0.0));
    }
    if (kind == "ball") {
      only_keys(j, path, {"kind", "n", "radius", "center"});
      const int n = as_int(require(j, "n", path), join(path, "n"));
      const double r = as_number(require(j, "radius", path), join(path, "radius"));
      const auto it = j.find("center");
      if (it == j.end()) return Domain::ball(n, r);
      return Domain::ball(n, r, as_vector(*it, join(path, "center")));
    }
    if (kind == "box") {
      only_keys(j, path, {"kind", "lo", "hi"});
      return Domain::box(as_vector(require(j, "lo", path), join(path, "lo")),
                         as_vector(require(j, "hi", path), join(path, "hi")));
    }
    parse_fail(join(path, "kind"), "unknown domain kind '" + kind + "'");
  });
}

json emit_domain(const Domain& d) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimplexDomain>) {
          return {{"kind", "simplex"}, {"n", s.n}, {"floor", s.floor}};
        } else if constexpr (std::is_same_v<T, BallDomain>) {
          return {{"kind", "ball"}, {"n", s.center.size()}, {"radius", s.radius},
                  {"center", std::vector<double>(s.center.data(), s.center.data() + s.center.size())}};
        } else {
          return {{"kind", "box"},
                  {"lo", std::vector<double>(s.lo.data(), s.lo.data() + s.lo.size())},
                  {"hi", std::vector<double>(s.hi.data(), s.hi.data() + s.hi.size())}};
        }
      },
      d.shape());
}

// ---------------------------------------------------------------------------
// Constraints

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Matrix& A) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r) rows.push_back(vec_json(A.row(r).transpose()));
  return rows;
}

ConstraintFn parse_constraint(const json& j, const std::string& path) {
  expect_object(j, path);
  const std::string family = as_string(require(j, "family", path), join(path, "family"));
  if (family == "affine") {
    only_keys(j, path, {"family", "a", "b"});
    const Vector a = as_vector(require(j, "a", path), join(path, "a"));
    const double b = number_or(j, "b", path, 0.0);
    return with_path(path, [&] { return ConstraintFn(Affine{a, b}); });
  }
  if (family == "quadratic") {
    only_keys(j, path, {"family", "A", "b", "c"});
    const Matrix A = as_matrix(require(j, "A", path), join(path, "A"));
    const Vector b = as_vector(require(j, "b", path), join(path, "b"));
    const double c = number_or(j, "c", path, 0.0);
    if (A.rows() == A.cols()) {
      const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
      const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-9 * scale) {
        std::ostringstream os;
        os << "matrix is not symmetric (max |A - A'| = " << asym << ")";
        throw Error(ErrorCode::kInvalidArgument, join(path, "A") + ": " + os.str());
      }
    }
    return with_path(path, [&] { return ConstraintFn(Quadratic{A, b, c}); });
  }
  if (family == "log_affine_composite") {
    only_keys(j, path, {"family", "inner", "omega"});
    ConstraintPtr inner = share(parse_constraint(require(j, "inner", path), join(path, "inner")));
    const double omega = as_number(require(j, "omega", path), join(path, "omega"));
    return with_path(path, [&] { return ConstraintFn(LogAffineComposite{inner, omega}); });
  }
  if (family == "neg_entropy") {
    only_keys(j, path, {"family", "n"});
    const int n = as_int(require(j, "n", path), join(path, "n"));
    return with_path(path, [&] { return ConstraintFn(NegEntropy{n}); });
  }
  if (family == "norm_dist_sq") {
    only_keys(j, path, {"family", "center", "c"});
    const Vector center = as_vector(require(j, "center", path), join(path, "center"));
    const double c = number_or(j, "c", path, 0.0);
    return with_path(path, [&] { return ConstraintFn(NormDistSq{center, c}); });
  }
  if (family == "combination") {
    only_keys(j, path, {"family", "terms", "constant"});
    const json& terms = require(j, "terms", path);
    const std::string tpath = join(path, "terms");
    if (!terms.is_array()) parse_fail(tpath, "expected an array");
    Combination comb;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string p = index(tpath, i);
      only_keys(terms[i], p, {"weight", "fn"});
      const double w = number_or(terms[i], "weight", p, 1.0);
      comb.terms.push_back({w, share(parse_constraint(require(terms[i], "fn", p), join(p, "fn")))});
    }
    comb.constant = number_or(j, "constant", path, 0.0);
    return with_path(path, [&] { return ConstraintFn(std::move(comb)); });
  }
  parse_fail(join(path, "family"), "unknown constraint family '" + family + "'");
}

json emit_constraint(const ConstraintFn& f) {
  return std::visit(
      [](const auto& fam) -> json {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return {{"family", "affine"}, {"a", vec_json(fam.a)}, {"b", fam.b}};
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          return {{"family", "quadratic"}, {"A", mat_json(fam.A)}, {"b", vec_json(fam.b)}, {"c", fam.c}};
        } else if constexpr (std::is_same_v<T, LogAffineComposite>) {
          return {{"family", "log_affine_composite"}, {"inner", emit_constraint(*fam.inner)},
                  {"omega", fam.omega}};
        } else if constexpr (std::is_same_v<T, NegEntropy>) {
          return {{"family", "neg_entropy"}, {"n", fam.n}};
        } else if constexpr (std::is_same_v<T, NormDistSq>) {
          return {{"family", "norm_dist_sq"}, {"center", vec_json(fam.center)}, {"c", fam.c}};
        } else {
          json terms = json::array();
          for (const auto& t : fam.terms) terms.push_back({{"weight", t.weight}, {"fn", emit_constraint(*t.fn)}});
          return {{"family", "combination"}, {"terms", terms}, {"constant", fam.constant}};
        }
      },
      f.variant());
}

// ---------------------------------------------------------------------------
// Generator spec

GeneratorSpec parse_generator(const json& j, const std::string& path) {
  only_keys(j, path, {"family", "n", "m", "H", "feasible", "margin", "c", "T_days", "tau", "seed"});
  GeneratorSpec g;
  g.family = with_path(join(path, "family"), [&] {
    return parse_generator_family(as_string(require(j, "family", path), join(path, "family")));
  });
  if (j.contains("n")) g.n = as_int(j["n"], join(path, "n"));
  if (j.contains("m")) g.m = as_int(j["m"], join(path, "m"));
  if (j.contains("H")) g.H = as_number(j["H"], join(path, "H"));
  if (j.contains("feasible")) g.feasible = as_bool(j["feasible"], join(path, "feasible"));
  if (j.contains("margin")) g.margin = as_number(j["margin"], join(path, "margin"));
  if (j.contains("c")) g.c = as_number(j["c"], join(path, "c"));
  if (j.contains("T_days")) g.T_days = as_int(j["T_days"], join(path, "T_days"));
  if (j.contains("tau")) g.tau = as_number(j["tau"], join(path, "tau"));
  if (j.contains("seed")) g.seed = as_u64(j["seed"], join(path, "seed"));
  return g;
}

json emit_generator(const GeneratorSpec& g) {
  json j = {{"family", generator_family_name(g.family)}, {"n", g.n}, {"m", g.m},
            {"H", g.H}, {"feasible", g.feasible}, {"margin", g.margin}, {"c", g.c},
            {"T_days", g.T_days}, {"seed", g.seed}};
  if (g.tau) j["tau"] = *g.tau;
  return j;
}

// ---------------------------------------------------------------------------
// Params

json emit_params(const ProblemParams& p) {
  return {{"G", p.G}, {"H", p.H}, {"omega", p.omega}, {"D", p.D}, {"G_inf", p.G_inf}, {"alpha", p.alpha}};
}

Problem apply_params(std::vector<ConstraintFn> cons, const Domain& domain, const json* params,
                     const std::string& path) {
  static constexpr const char* kKeys[] = {"G", "H", "omega", "D", "G_inf", "alpha"};
  if (params == nullptr) {
    return with_path("constraints", [&] { return make_problem(std::move(cons), domain); });
  }
  only_keys(*params, path, {"G", "H", "omega", "D", "G_inf", "alpha"});
  bool complete = true;
  for (const char* k : kKeys) complete = complete && params->contains(k);
  ProblemParams p;
  if (!complete) {
    p = with_path("constraints", [&] { return make_problem(cons, domain).params; });
  }
  auto take = [&](const char* key, double& field) {
    if (params->contains(key)) field = as_number((*params)[key], join(path, key));
  };
  take("G", p.G);
  take("H", p.H);
  take("omega", p.omega);
  take("D", p.D);
  take("G_inf", p.G_inf);
  take("alpha", p.alpha);
  return with_path(path, [&] { return make_problem(std::move(cons), domain, p); });
}

json problem_json(const Problem& problem) {
  json cons = json::array();
  for (const auto& f : problem.constraints) cons.push_back(emit_constraint(f));
  return {{"version", kDocumentVersion},
          {"domain", emit_domain(problem.domain)},
          {"constraints", cons},
          {"params", emit_params(problem.params)}};
}

ProblemDocument problem_from_json(const json& j, const std::string& path) {
  only_keys(j, path, {"version", "domain", "constraints", "params", "generator"});
  if (j.contains("version")) {
    const int v = as_int(j["version"], join(path, "version"));
    if (v != kDocumentVersion) parse_fail(join(path, "version"), "unsupported version " + std::to_string(v));
  }
  const bool has_cons = j.contains("constraints");
  const bool has_gen = j.contains("generator");
  if (has_cons == has_gen) {
    parse_fail(path, "exactly one of 'constraints' and 'generator' must be present");
  }
  const json* params = j.contains("params") ? &j["params"] : nullptr;
  ProblemDocument doc;
  if (has_gen) {
    if (j.contains("domain")) parse_fail(join(path, "domain"), "the generator determines the domain");
    const GeneratorSpec spec = parse_generator(j["generator"], join(path, "generator"));
    Problem p = with_path(join(path, "generator"), [&] { return generate(spec); });
    if (params != nullptr) {
      p = apply_params(p.constraints, p.domain, params, join(path, "params"));
    }
    doc.problem = std::move(p);
    doc.generator = spec;
    return doc;
  }
  const Domain domain = parse_domain(require(j, "domain", path), join(path, "domain"));
  const json& cj = j["constraints"];
  const std::string cpath = join(path, "constraints");
  if (!cj.is_array() || cj.empty()) parse_fail(cpath, "expected a non-empty array");
  std::vector<ConstraintFn> cons;
  for (std::size_t i = 0; i < cj.size(); ++i) {
    const std::string p = index(cpath, i);
    ConstraintFn f = parse_constraint(cj[i], p);
    if (f.dim() != domain.dim()) {
      std::ostringstream os;
      os << "dimension " << f.dim() << " does not match the domain dimension " << domain.dim();
      throw Error(ErrorCode::kDimensionMismatch, p + ": " + os.str());
    }
    cons.push_back(std::move(f));
  }
  doc.problem = apply_params(std::move(cons), domain, params, join(path, "params"));
  return doc;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Convert the byte offset into a line and column.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": malformed JSON";
    throw Error(ErrorCode::kParse, os.str());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

// ---------------------------------------------------------------------------
// Problem documents

ProblemDocument parse_problem_document(const std::string& text) {
  return problem_from_json(parse_text(text), "");
}

Problem parse_problem_file(const std::string& text) { return parse_problem_document(text).problem; }

Problem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_file(ss.str());
}

std::string emit_problem(const Problem& problem) { return dump(problem_json(problem)); }

std::string emit_problem_document(const ProblemDocument& doc) {
  if (!doc.generator) return emit_problem(doc.problem);
  const json j = {{"version", kDocumentVersion}, {"generator", emit_generator(*doc.generator)}};
  return dump(j);
}

// ---------------------------------------------------------------------------
// Outcome documents

std::string emit_outcome(const OutcomeDocument& doc) {
  json j;
  j["version"] = kDocumentVersion;
  j["status"] = outcome_name(doc.result.outcome);
  j["algo"] = algo_name(doc.algo);
  j["learner"] = learner_name(doc.learner);
  j["eps"] = doc.eps;
  j["guarantee"] = doc.result.guarantee;
  j["iterations"] = doc.result.iterations;
  j["threshold"] = doc.result.threshold;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Feasible>) {
          j["x"] = vec_json(o.x);
          j["residuals"] = vec_json(o.residuals);
        } else if constexpr (std::is_same_v<T, Exhausted>) {
          j["best_x"] = vec_json(o.best_x);
          j["best_violation"] = o.best_violation;
        } else {
          j["p_bar"] = vec_json(o.p_bar);
        }
      },
      doc.result.outcome);
  j["problem"] = problem_json(doc.problem);
  if (doc.strictify_delta || doc.log_omega) {
    json t = json::object();
    if (doc.strictify_delta) t["strictify_delta"] = *doc.strictify_delta;
    if (doc.log_omega) t["log_omega"] = *doc.log_omega;
    j["transform"] = t;
  }
  if (doc.original) {
    j["original_problem"] = problem_json(*doc.original);
    if (const auto* f = std::get_if<Feasible>(&doc.result.outcome)) {
      j["original_residuals"] = vec_json(constraint_values(*doc.original, f->x));
    }
  }
  if (doc.original_guarantee) j["original_guarantee"] = *doc.original_guarantee;
  return dump(j);
}

namespace {

Algo parse_algo(const std::string& s, const std::string& path) {
  if (s == "primal") return Algo::kPrimal;
  if (s == "dual") return Algo::kDual;
  if (s == "primal-dual") return Algo::kPrimalDual;
  parse_fail(path, "unknown algorithm '" + s + "'");
}

LearnerKind parse_learner(const std::string& s, const std::string& path) {
  if (s == "ogd") return LearnerKind::kOgd;
  if (s == "ons") return LearnerKind::kOns;
  if (s == "mw") return LearnerKind::kMw;
  parse_fail(path, "unknown learner '" + s + "'");
}

}  // namespace

OutcomeDocument parse_outcome(const std::string& text) {
  const json j = parse_text(text);
  only_keys(j, "", {"version", "status", "algo", "learner", "eps", "guarantee", "iterations",
                    "threshold", "x", "residuals", "best_x", "best_violation", "p_bar",
                    "problem", "transform", "original_problem", "original_residuals",
                    "original_guarantee"});
  OutcomeDocument doc;
  doc.algo = parse_algo(as_string(require(j, "algo", ""), "algo"), "algo");
  doc.learner = parse_learner(as_string(require(j, "learner", ""), "learner"), "learner");
  doc.eps = as_number(require(j, "eps", ""), "eps");
  doc.result.guarantee = as_number(require(j, "guarantee", ""), "guarantee");
  doc.result.iterations = require(j, "iterations", "").get<long>();
  doc.result.threshold = require(j, "threshold", "").get<long>();
  doc.problem = problem_from_json(require(j, "problem", ""), "problem").problem;

  const std::string status = as_string(require(j, "status", ""), "status");
  if (status == "feasible") {
    doc.result.outcome = Feasible{as_vector(require(j, "x", ""), "x"),
                                  as_vector(require(j, "residuals", ""), "residuals")};
  } else if (status == "infeasible") {
    doc.result.outcome = Infeasible{as_vector(require(j, "p_bar", ""), "p_bar")};
  } else if (status == "epsilon_infeasible") {
    doc.result.outcome = EpsilonInfeasible{as_vector(require(j, "p_bar", ""), "p_bar")};
  } else if (status == "exhausted") {
    doc.result.outcome = Exhausted{as_vector(require(j, "best_x", ""), "best_x"),
                                   as_number(require(j, "best_violation", ""), "best_violation")};
  } else {
    parse_fail("status", "unknown status '" + status + "'");
  }
  if (j.contains("transform")) {
    const json& t = j["transform"];
    only_keys(t, "transform", {"strictify_delta", "log_omega"});
    if (t.contains("strictify_delta")) doc.strictify_delta = as_number(t["strictify_delta"], "transform.strictify_delta");
    if (t.contains("log_omega")) doc.log_omega = as_number(t["log_omega"], "transform.log_omega");
  }
  if (j.contains("original_problem")) {
    doc.original = problem_from_json(j["original_problem"], "original_problem").problem;
  }
  if (j.contains("original_guarantee")) {
    doc.original_guarantee = as_number(j["original_guarantee"], "original_guarantee");
  }
  return doc;
}

DocumentVerdict verify_outcome_document(const std::string& text) {
  const OutcomeDocument doc = parse_outcome(text);
  DocumentVerdict v;
  v.solved = verify_certificate(doc.problem, doc.result.outcome, doc.result.guarantee);
  v.ok = v.solved.ok;
  if (doc.original) {
    if (const auto* f = std::get_if<Feasible>(&doc.result.outcome)) {
      const double g = doc.original_guarantee.value_or(doc.result.guarantee);
      const Feasible orig{f->x, constraint_values(*doc.original, f->x)};
      v.original = verify_certificate(*doc.original, orig, g);
      v.ok = v.ok && v.original->ok;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Trace

std::string format_trace_row(const TraceRecord& r) {
  char buf[256];
  std::string idx = r.violated_index ? std::to_string(*r.violated_index) : "";
  std::snprintf(buf, sizeof(buf), "%ld,%s,%.17g,%.17g,%.17g,%lld", r.iter, idx.c_str(), r.violation,
                r.game_loss, r.regret_bound, static_cast<long long>(r.elapsed_ns));
  return buf;
}

TraceWriter::TraceWriter(std::ostream& out) : out_(&out) { *out_ << kTraceHeader << '\n'; }

void TraceWriter::operator()(const TraceRecord& record) {
  if (record.iter <= last_iter_) {
    throw Error(ErrorCode::kInvalidArgument, "trace iterations must increase");
  }
  last_iter_ = record.iter;
  *out_ << format_trace_row(record) << '\n';
}

// ---------------------------------------------------------------------------
// Grid game value

LambdaStar brute_force_lambda_star(const Problem& problem, double resolution) {
  const GridMinimum gm = grid_minimum(
      [&](const Vector& x) { return max_violation(problem, x); },
      [&](const Vector& x) {
        double g = 0.0;
        for (const auto& f : problem.constraints) g = std::max(g, gradient(f, x).norm());
        return g;
      },
      problem.domain, resolution);
  return {gm.value, gm.argmin, gm.slack, gm.points};
}

// ---------------------------------------------------------------------------
// Experiments

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "log-log fit needs two or more paired points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "log-log fit needs positive values");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
    sx += lx.back();
    sy += ly.back();
    sxx += lx.back() * lx.back();
    sxy += lx.back() * ly.back();
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error(ErrorCode::kInvalidArgument, "log-log fit needs distinct x");
  LogLogFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

const char* adversary_name(Adversary a) {
  return a == Adversary::kRandomSigns ? "signs" : "strongly_convex";
}

Adversary parse_adversary(const std::string& name) {
  if (name == "signs") return Adversary::kRandomSigns;
  if (name == "strongly_convex") return Adversary::kStronglyConvex;
  throw Error(ErrorCode::kInvalidArgument, "unknown adversary '" + name + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
// writes only its own output slot.
template <typename Body>
void parallel_for(int count, int workers, Body body) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct StreamSetup {
  Domain domain;
  RegretBoundSpec spec;
  OnlineLearner learner;
};

StreamSetup stream_setup(LearnerKind kind, Adversary adversary, long T, int n, double H) {
  if (adversary == Adversary::kRandomSigns) {
    if (kind != LearnerKind::kMw) {
      throw Error(ErrorCode::kInvalidArgument,
                  "the random-sign stream is linear; only multiplicative weights applies");
    }
    OnlineLearner l = OnlineLearner::mw(2, 1.0, T, Sense::kMinimize);
    return {Domain::simplex(2), l.bound_spec(), l};
  }
  if (!(H > 0.0)) throw Error(ErrorCode::kInvalidArgument, "strongly convex stream needs H > 0");
  const Domain d = Domain::simplex(n);
  const double G = H * d.diameter();
  switch (kind) {
    case LearnerKind::kOgd: {
      OnlineLearner l = OnlineLearner::ogd(d, H, G);
      return {d, l.bound_spec(), l};
    }
    case LearnerKind::kOns: {
      OnlineLearner l = OnlineLearner::ons(d, G, d.diameter(), H / (G * G), Sense::kMinimize);
      return {d, l.bound_spec(), l};
    }
    case LearnerKind::kMw: {
      OnlineLearner l = OnlineLearner::mw(n, H, T, Sense::kMinimize);
      return {d, l.bound_spec(), l};
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown learner");
}

}  // namespace

double regret_run(LearnerKind learner, Adversary adversary, long T, std::uint64_t seed,
                  int n, double H) {
  if (T < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  StreamSetup s = stream_setup(learner, adversary, T, n, H);
  std::mt19937_64 rng(seed);
  RegretTracker tracker(s.domain);
  if (adversary == Adversary::kRandomSigns) {
    std::bernoulli_distribution coin(0.5);
    Vector c(2);
    for (long t = 0; t < T; ++t) {
      const double r = coin(rng) ? 1.0 : -1.0;
      c << r, -r;
      tracker.add_linear(c, s.learner.point());
      s.learner.update(c);
    }
    return tracker.regret();
  }
  std::exponential_distribution<double> E(1.0);
  const int dim = s.domain.dim();
  const Matrix half_H = 0.5 * H * Matrix::Identity(dim, dim);
  Vector z(dim);
  for (long t = 0; t < T; ++t) {
    for (int i = 0; i < dim; ++i) z(i) = E(rng);
    z /= z.sum();
    const Vector& x = s.learner.point();
    tracker.add(ConstraintFn(Quadratic{half_H, -H * z, 0.5 * H * z.squaredNorm()}), x);
    s.learner.update(H * (x - z));
  }
  return tracker.regret();
}

ExperimentReport regret_experiment(const RegretExperimentOptions& o) {
  if (o.horizons.empty()) throw Error(ErrorCode::kInvalidArgument, "no horizons given");
  if (o.seeds < 1) throw Error(ErrorCode::kInvalidArgument, "seeds must be >= 1");
  for (long T : o.horizons) {
    if (T < 10) throw Error(ErrorCode::kInvalidArgument, "horizons must be >= 10");
  }
  const auto t0 = Clock::now();
  ExperimentReport rep;
  rep.kind = "regret";
  rep.learner = learner_name(o.learner);
  rep.source = adversary_name(o.adversary);
  std::vector<double> xs, ys;
  for (long T : o.horizons) {
    const auto t1 = Clock::now();
    std::vector<double> regrets(o.seeds);
    parallel_for(o.seeds, o.workers, [&](int s) {
      const std::uint64_t seed = o.base_seed + 1000003ULL * static_cast<std::uint64_t>(s) +
                                 static_cast<std::uint64_t>(T);
      regrets[s] = regret_run(o.learner, o.adversary, T, seed, o.n, o.H);
    });
    ExperimentRow row;
    row.x = static_cast<double>(T);
    row.iterations = T;
    double sum = 0.0;
    row.max = -std::numeric_limits<double>::infinity();
    for (double r : regrets) {
      sum += r;
      row.max = std::max(row.max, r);
    }
    row.mean = sum / o.seeds;
    row.bound = regret_bound(stream_setup(o.learner, o.adversary, T, o.n, o.H).spec, T);
    row.status = row.max <= row.bound ? "within_bound" : "above_bound";
    row.wall_seconds = seconds_since(t1);
    rep.rows.push_back(row);
    xs.push_back(row.x);
    // A zero or negative mean cannot enter a log fit; treat it as flat.
    ys.push_back(std::max(row.mean, 1e-12));
  }
  if (xs.size() >= 2) rep.fit = fit_loglog(xs, ys);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

ExperimentReport scaling_experiment(const ScalingExperimentOptions& o) {
  const auto& ladder = o.eps_ladder;
  if (ladder.size() < 3) throw Error(ErrorCode::kInvalidArgument, "eps ladder needs three or more values");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps values must be positive");
    if (i > 0 && std::abs(ladder[i] - ladder[i - 1] / 2.0) > 1e-12 * ladder[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "each eps must be half the previous one");
    }
  }
  const auto t0 = Clock::now();
  const Problem problem = generate(o.generator);
  ExperimentReport rep;
  rep.kind = "scaling";
  rep.algo = algo_name(o.algo);
  rep.learner = learner_name(o.algo == Algo::kDual ? LearnerKind::kMw : o.learner);
  rep.source = generator_family_name(o.generator.family);
  rep.rows.resize(ladder.size());
  parallel_for(static_cast<int>(ladder.size()), o.workers, [&](int i) {
    const auto t1 = Clock::now();
    SolveOptions so;
    so.eps = ladder[i];
    so.learner = o.learner;
    so.max_iters = o.max_iters;
    const SolveResult r = solve(problem, o.algo, so);
    ExperimentRow& row = rep.rows[i];
    row.eps = ladder[i];
    row.x = 1.0 / ladder[i];
    row.iterations = r.iterations;
    row.bound = static_cast<double>(r.threshold);
    row.status = outcome_name(r.outcome);
    row.wall_seconds = seconds_since(t1);
  });
  std::vector<double> xs, ys;
  for (const auto& row : rep.rows) {
    if (row.status == "exhausted") rep.complete = false;
    xs.push_back(row.x);
    ys.push_back(static_cast<double>(row.iterations));
  }
  rep.fit = fit_loglog(xs, ys);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

std::string emit_report(const ExperimentReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"x", row.x}, {"eps", row.eps}, {"iterations", row.iterations},
                    {"mean", row.mean}, {"max", row.max}, {"bound", row.bound},
                    {"status", row.status}, {"wall_seconds", row.wall_seconds}});
  }
  const json j = {{"kind", r.kind},
                  {"algo", r.algo},
                  {"learner", r.learner},
                  {"source", r.source},
                  {"rows", rows},
                  {"fit", {{"slope", r.fit.slope}, {"intercept", r.fit.intercept}, {"residual", r.fit.residual}}},
                  {"complete", r.complete},
                  {"wall_seconds", r.wall_seconds}};
  return dump(j);
}

}  // namespace gameopt
