#ifndef GAMEOPT_HARNESS_HPP
#define GAMEOPT_HARNESS_HPP

// Problem and outcome documents, trace output, grid oracles and experiments.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gameopt/core.hpp"
#include "gameopt/online.hpp"
#include "gameopt/problems.hpp"
#include "gameopt/solvers.hpp"

namespace gameopt {

inline constexpr int kDocumentVersion = 1;

// ---------------------------------------------------------------------------
// Problem documents (JSON)
//
//   {
//     "version": 1,
//     "domain": {"kind": "simplex", "n": 2, "floor": 0},
//     "constraints": [{"family": "affine", "a": [1, 0], "b": -0.5}],
//     "params": {"G": 1, ...}            optional, partial overrides
//   }
//
// or "generator": {"family": "qp", "n": 3, ...} in place of domain and
// constraints. Unknown fields are rejected with their path.

struct ProblemDocument {
  Problem problem;
  std::optional<GeneratorSpec> generator;
};

ProblemDocument parse_problem_document(const std::string& text);
Problem parse_problem_file(const std::string& text);
Problem load_problem_file(const std::string& path);

// Canonical text with explicit constraints and params (sorted keys).
std::string emit_problem(const Problem& problem);
// Keeps the generator form when present.
std::string emit_problem_document(const ProblemDocument& doc);

// ---------------------------------------------------------------------------
// Outcome documents. They embed the solved problem, so verification needs no
// other input.

struct OutcomeDocument {
  Algo algo = Algo::kPrimal;
  LearnerKind learner = LearnerKind::kOgd;
  double eps = 0.1;
  SolveResult result;
  Problem problem;
  // Present when the solved problem was derived from another one.
  std::optional<double> strictify_delta;
  std::optional<double> log_omega;
  std::optional<Problem> original;
  // Accuracy the returned point has on the original problem.
  std::optional<double> original_guarantee;
};

std::string emit_outcome(const OutcomeDocument& doc);
OutcomeDocument parse_outcome(const std::string& text);

struct DocumentVerdict {
  bool ok = false;
  VerifyReport solved;
  // Check of the returned point against the original problem, if any.
  std::optional<VerifyReport> original;
};

DocumentVerdict verify_outcome_document(const std::string& text);

// ---------------------------------------------------------------------------
// Trace output

inline constexpr const char* kTraceHeader =
    "iter,violated_index,violation,game_loss,regret_bound,elapsed_ns";

// One CSV row; reals printed with 17 significant digits, empty index for none.
std::string format_trace_row(const TraceRecord& record);

// Writes the header on construction and one row per record. Rejects
// non-increasing iteration numbers.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void operator()(const TraceRecord& record);

 private:
  std::ostream* out_;
  long last_iter_ = 0;
};

// ---------------------------------------------------------------------------
// Grid oracle for the game value

struct LambdaStar {
  double value = 0.0;
  Vector argmin;
  // resolution * max over the grid of max_j ||grad f_j||.
  double slack = 0.0;
  long points = 0;
};

// min over a grid of the domain of max_j f_j(x). n <= 3.
LambdaStar brute_force_lambda_star(const Problem& problem, double resolution);

// ---------------------------------------------------------------------------
// Experiments

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square in log space
};

// Least squares fit of log y against log x. Needs two or more positive points.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

enum class Adversary {
  kRandomSigns,      // f_t(x) = r_t (x_1 - x_2), r_t = +-1, on Simplex(2)
  kStronglyConvex,   // f_t(x) = (H/2) ||x - z_t||^2, z_t uniform on Simplex(n)
};

const char* adversary_name(Adversary a);
Adversary parse_adversary(const std::string& name);

struct RegretExperimentOptions {
  LearnerKind learner = LearnerKind::kMw;
  Adversary adversary = Adversary::kRandomSigns;
  std::vector<long> horizons = {100, 1000, 10000};
  int seeds = 20;
  std::uint64_t base_seed = 1;
  int n = 5;        // strongly convex stream only
  double H = 1.0;   // strongly convex stream only
  int workers = 1;
};

struct ExperimentRow {
  double x = 0.0;  // T for regret runs, 1/eps for scaling runs
  double eps = 0.0;
  long iterations = 0;
  double mean = 0.0;
  double max = 0.0;
  double bound = 0.0;
  std::string status;
  double wall_seconds = 0.0;
};

struct ExperimentReport {
  std::string kind;  // "regret" or "scaling"
  std::string algo;
  std::string learner;
  std::string source;  // adversary or generator family
  std::vector<ExperimentRow> rows;
  LogLogFit fit;
  bool complete = true;
  double wall_seconds = 0.0;
};

std::string emit_report(const ExperimentReport& report);

// Mean and max measured regret per horizon over seeds; fit of mean regret
// against T.
ExperimentReport regret_experiment(const RegretExperimentOptions& options);

// Measured regret of a single run. Exposed for tests.
double regret_run(LearnerKind learner, Adversary adversary, long T,
                  std::uint64_t seed, int n = 5, double H = 1.0);

struct ScalingExperimentOptions {
  GeneratorSpec generator;
  Algo algo = Algo::kPrimal;
  LearnerKind learner = LearnerKind::kOgd;
  std::vector<double> eps_ladder = {0.1, 0.05, 0.025};
  std::optional<long> max_iters;
  int workers = 1;
};

// Iterations per eps and the fit of iterations against 1/eps. The ladder must
// hold three or more values, each half the previous one. Any exhausted run
// marks the report incomplete.
ExperimentReport scaling_experiment(const ScalingExperimentOptions& options);

}  // namespace gameopt

#endif  // GAMEOPT_HARNESS_HPP
