#include "gameopt/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gameopt/harness.hpp"
#include "gameopt/reductions.hpp"

namespace gameopt {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  f << text;
}

const std::map<std::string, Algo> kAlgos = {
    {"primal", Algo::kPrimal}, {"dual", Algo::kDual}, {"primal-dual", Algo::kPrimalDual}};
const std::map<std::string, LearnerKind> kLearners = {
    {"ogd", LearnerKind::kOgd}, {"ons", LearnerKind::kOns}, {"mw", LearnerKind::kMw}};

LearnerKind default_learner(Algo algo) {
  return algo == Algo::kDual ? LearnerKind::kMw : LearnerKind::kOgd;
}

int exit_code_for(const Outcome& o) {
  if (std::holds_alternative<Feasible>(o)) return kExitFeasible;
  if (std::holds_alternative<Exhausted>(o)) return kExitExhausted;
  return kExitInfeasible;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw Error(ErrorCode::kInvalidArgument, "malformed number '" + item + "' in list");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty list");
  return out;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string problem;
  std::string algo = "primal";
  std::string learner;
  double eps = 0.1;
  std::string strictify;
  bool log_transform = false;
  long max_iters = 0;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const Algo algo = kAlgos.at(a.algo);
  const LearnerKind learner = a.learner.empty() ? default_learner(algo) : kLearners.at(a.learner);
  if (algo == Algo::kDual && learner != LearnerKind::kMw) {
    err << "error: the dual solver plays multiplicative weights; --learner must be mw\n";
    return kExitError;
  }

  ProblemDocument doc = parse_problem_document(read_file(a.problem));
  if (a.seed) {
    if (doc.generator) {
      doc.generator->seed = *a.seed;
      doc.problem = generate(*doc.generator);
    } else {
      err << "note: --seed ignored; the problem file has explicit constraints\n";
    }
  }

  OutcomeDocument od;
  od.algo = algo;
  od.learner = learner;
  od.eps = a.eps;
  Problem solved = doc.problem;
  double eps_solve = a.eps;
  if (!a.strictify.empty()) {
    double delta = 0.0;
    if (a.strictify == "auto") {
      delta = strictify_guarantee(a.eps).delta;
    } else {
      try {
        std::size_t used = 0;
        delta = std::stod(a.strictify, &used);
        if (used != a.strictify.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        err << "error: --strictify expects a number or 'auto'\n";
        return kExitError;
      }
    }
    solved = strictify(solved, delta);
    od.strictify_delta = delta;
  }
  if (a.log_transform) {
    const double omega = solved.params.omega;
    solved = log_transform(solved, omega);
    eps_solve = log_eps_for_target(a.eps, omega);
    od.log_omega = omega;
  }

  std::ofstream trace_file;
  SolveOptions so;
  so.eps = eps_solve;
  so.learner = learner;
  if (a.max_iters > 0) so.max_iters = a.max_iters;
  std::optional<TraceWriter> writer;
  if (!a.trace.empty()) {
    trace_file.open(a.trace);
    if (!trace_file) throw Error(ErrorCode::kInvalidArgument, "cannot write " + a.trace);
    writer.emplace(trace_file);
    so.trace = [&](const TraceRecord& r) { (*writer)(r); };
  }

  od.result = solve(solved, algo, so);
  od.problem = solved;
  if (od.strictify_delta || od.log_omega) {
    od.original = doc.problem;
    double g = od.result.guarantee;
    if (od.log_omega) g = approx_translate(g, *od.log_omega);
    if (od.strictify_delta) g += *od.strictify_delta;
    od.original_guarantee = g;
  }

  const std::string text = emit_outcome(od);
  write_output(a.out, text, out);
  if (!a.out.empty() && a.out != "-") {
    out << outcome_name(od.result.outcome) << " after " << od.result.iterations
        << " iterations (threshold " << od.result.threshold << ")\n";
  }
  return exit_code_for(od.result.outcome);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Convex feasibility through online learning games", "gameopt"};
  app.require_subcommand(1);

  // solve
  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a feasibility problem");
  solve_cmd->add_option("--problem", sa.problem, "Problem file (JSON)")->required();
  solve_cmd->add_option("--algo", sa.algo, "primal, dual or primal-dual")
      ->check(CLI::IsMember({"primal", "dual", "primal-dual"}));
  solve_cmd->add_option("--learner", sa.learner, "ogd, ons or mw (default: mw for dual, else ogd)")
      ->check(CLI::IsMember({"ogd", "ons", "mw"}));
  solve_cmd->add_option("--eps", sa.eps, "Target accuracy")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--strictify", sa.strictify, "Add DELTA(|x|^2 - 1) to every constraint; 'auto' uses eps");
  solve_cmd->add_flag("--log-transform", sa.log_transform, "Solve the 1-exp-concave log transform");
  solve_cmd->add_option("--max-iters", sa.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--trace", sa.trace, "Write the per-iteration trace (CSV)");
  solve_cmd->add_option("--seed", sa.seed, "Override the generator seed of the problem file");
  solve_cmd->add_option("--out", sa.out, "Outcome document (default: stdout)");

  // gen
  GeneratorSpec gs;
  std::string gen_family = "qp";
  std::string gen_out;
  bool gen_infeasible = false;
  bool gen_spec_only = false;
  double gen_tau = 0.0;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a problem file");
  gen_cmd->add_option("--family", gen_family, "qp, lp, portfolio, entropy or crp")
      ->check(CLI::IsMember({"qp", "lp", "portfolio", "entropy", "crp"}));
  gen_cmd->add_option("--n", gs.n, "Dimension")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--m", gs.m, "Number of constraints")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--H", gs.H, "qp: lower bound on the Hessian spectrum");
  gen_cmd->add_flag("--infeasible", gen_infeasible, "qp, lp: build an infeasible instance");
  gen_cmd->add_option("--margin", gs.margin, "lp: planted slack");
  gen_cmd->add_option("--c", gs.c, "entropy, crp: squared radius");
  gen_cmd->add_option("--T-days", gs.T_days, "crp: number of days");
  auto* tau_opt = gen_cmd->add_option("--tau", gen_tau, "entropy, crp: objective level");
  gen_cmd->add_option("--seed", gs.seed, "Random seed");
  gen_cmd->add_flag("--spec-only", gen_spec_only, "Write the generator spec instead of constraints");
  gen_cmd->add_option("--out", gen_out, "Output file (default: stdout)");

  // experiment
  std::string kind = "regret";
  std::string ex_learner;
  std::string ex_adversary = "signs";
  std::string ex_horizons = "100,1000,10000";
  std::string ex_eps = "0.1,0.05,0.025";
  std::string ex_algo = "primal";
  std::string ex_family = "qp";
  std::string ex_out;
  RegretExperimentOptions ro;
  GeneratorSpec es;
  es.n = 10;
  es.m = 20;
  es.feasible = false;
  bool ex_feasible = false;
  bool ex_infeasible = false;
  long ex_max_iters = 0;
  int workers = 1;
  auto* ex_cmd = app.add_subcommand("experiment", "Run a regret or scaling experiment");
  ex_cmd->add_option("--kind", kind, "regret or scaling")->check(CLI::IsMember({"regret", "scaling"}));
  ex_cmd->add_option("--learner", ex_learner, "ogd, ons or mw")->check(CLI::IsMember({"ogd", "ons", "mw"}));
  ex_cmd->add_option("--adversary", ex_adversary, "regret: signs or strongly_convex")
      ->check(CLI::IsMember({"signs", "strongly_convex"}));
  ex_cmd->add_option("--T", ex_horizons, "regret: comma-separated horizons");
  ex_cmd->add_option("--seeds", ro.seeds, "regret: runs per horizon")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--algo", ex_algo, "scaling: primal, dual or primal-dual")
      ->check(CLI::IsMember({"primal", "dual", "primal-dual"}));
  ex_cmd->add_option("--family", ex_family, "scaling: generator family")
      ->check(CLI::IsMember({"qp", "lp", "portfolio", "entropy", "crp"}));
  ex_cmd->add_option("--n", es.n, "Dimension")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--m", es.m, "scaling: number of constraints")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--H", es.H, "Curvature");
  ex_cmd->add_flag("--feasible", ex_feasible, "scaling: feasible instance");
  ex_cmd->add_flag("--infeasible", ex_infeasible, "scaling: infeasible instance");
  ex_cmd->add_option("--eps", ex_eps, "scaling: comma-separated eps ladder");
  ex_cmd->add_option("--max-iters", ex_max_iters, "scaling: iteration cap")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--seed", es.seed, "Base seed");
  ex_cmd->add_option("--workers", workers, "Parallel runs")->check(CLI::PositiveNumber);
  ex_cmd->add_option("--out", ex_out, "Report file (default: stdout)");

  // verify
  std::string outcome_path;
  auto* verify_cmd = app.add_subcommand("verify", "Re-verify an outcome document");
  verify_cmd->add_option("--outcome", outcome_path, "Outcome document")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(sa, out, err);

    if (gen_cmd->parsed()) {
      gs.family = parse_generator_family(gen_family);
      gs.feasible = !gen_infeasible;
      if (*tau_opt) gs.tau = gen_tau;
      ProblemDocument doc{generate(gs), std::nullopt};
      if (gen_spec_only) doc.generator = gs;
      write_output(gen_out, emit_problem_document(doc), out);
      return 0;
    }

    if (ex_cmd->parsed()) {
      ExperimentReport rep;
      if (kind == "regret") {
        ro.learner = ex_learner.empty() ? LearnerKind::kMw : kLearners.at(ex_learner);
        ro.adversary = parse_adversary(ex_adversary);
        ro.horizons.clear();
        for (double T : parse_list(ex_horizons)) ro.horizons.push_back(static_cast<long>(T));
        ro.base_seed = es.seed;
        ro.n = es.n;
        ro.H = es.H;
        ro.workers = workers;
        rep = regret_experiment(ro);
      } else {
        if (ex_feasible && ex_infeasible) {
          err << "error: --feasible and --infeasible conflict\n";
          return kExitError;
        }
        ScalingExperimentOptions so;
        es.family = parse_generator_family(ex_family);
        if (ex_feasible) es.feasible = true;
        if (ex_infeasible) es.feasible = false;
        so.generator = es;
        so.algo = kAlgos.at(ex_algo);
        so.learner = ex_learner.empty() ? default_learner(so.algo) : kLearners.at(ex_learner);
        so.eps_ladder = parse_list(ex_eps);
        if (ex_max_iters > 0) so.max_iters = ex_max_iters;
        so.workers = workers;
        rep = scaling_experiment(so);
      }
      write_output(ex_out, emit_report(rep), out);
      return 0;
    }

    if (verify_cmd->parsed()) {
      const DocumentVerdict v = verify_outcome_document(read_file(outcome_path));
      out << (v.ok ? "verified" : "NOT verified") << ": " << v.solved.detail << "\n";
      if (v.original) out << "original problem: " << v.original->detail << "\n";
      return v.ok ? 0 : kExitUnverified;
    }
  } catch (const Error& e) {
    err << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace gameopt
