#ifndef GAMEOPT_PROBLEMS_HPP
#define GAMEOPT_PROBLEMS_HPP

// Seeded generators for the application instances. Identical arguments give
// bit-identical problems on a given platform.

#include <cstdint>
#include <optional>
#include <string>

#include "gameopt/core.hpp"

namespace gameopt {

enum class GeneratorFamily { kQp, kLp, kPortfolio, kEntropy, kCrp };

const char* generator_family_name(GeneratorFamily family);
// "qp", "lp", "portfolio", "entropy" or "crp"; throws kInvalidArgument.
GeneratorFamily parse_generator_family(const std::string& name);

struct GeneratorSpec {
  GeneratorFamily family = GeneratorFamily::kQp;
  int n = 3;
  int m = 2;
  double H = 1.0;          // qp: lower bound on lambda_min(A_j)
  bool feasible = true;    // qp, lp
  double margin = 0.05;    // lp: planted slack
  double c = 0.1;          // entropy, crp: ball radius squared
  int T_days = 20;         // crp
  std::optional<double> tau;  // entropy, crp: objective level
  std::uint64_t seed = 1;

  bool operator==(const GeneratorSpec&) const = default;
};

// Quadratic bowls f_j(x) = (x - c_j)' A_j (x - c_j) - r_j on Simplex(n) with
// lambda_min(A_j) >= H_target. Feasible instances satisfy f_j(x*) <= -0.1 at
// a planted x*; infeasible ones contain two bowls around distinct vertices
// whose average is at least 0.5 everywhere (n >= 2, m >= 2).
Problem make_strict_qp(int n, int m, double H_target, bool feasible,
                       std::uint64_t seed, Vector* witness = nullptr);

// A_j x >= 0 with ||A_j|| = 1 on Simplex(n), stored as -A_j x <= 0. Feasible
// instances plant x* with A_j x* >= margin; infeasible ones contain the pair
// of rows +d and -d with d > 0 (m >= 2).
Problem make_perceptron_lp(int n, int m, double margin, bool feasible,
                           std::uint64_t seed, Vector* witness = nullptr);

// alpha + beta x' Sigma_j x - p_j' x <= 0 with beta = 1, spectra of Sigma_j in
// [0.1, 1] and alpha chosen so the uniform portfolio has slack 0.05.
// H = 2 beta min_j lambda_min(Sigma_j).
Problem make_portfolio_risk(int n, int m, std::uint64_t seed);

// sum_i p_i log p_i - tau <= 0 and ||A_i (p - p_ref)||^2 - c <= 0 on the
// simplex with floor 0.01/n. tau defaults to the negative entropy of p_ref.
// H = min{1, 2 min_i lambda_min(A_i' A_i)}.
Problem make_entropy_problem(int n, int m, double c, std::uint64_t seed,
                             std::optional<double> tau = std::nullopt);

// tau - sum_t log(p' r_t) - sum_i log p_i <= 0 and ||p - p_ref||^2 - c <= 0 on
// the simplex with floor 0.01/n; price relatives in [0.9, 1.1]. tau defaults
// to the objective at p_ref. H = 1.
Problem make_crp_problem(int n, int T_days, double c, std::uint64_t seed,
                         std::optional<double> tau = std::nullopt);

Problem generate(const GeneratorSpec& spec);

// Random orthogonal Q (QR of a Gaussian matrix) times diag(spectrum) times Q'.
Matrix random_spd(const Vector& spectrum, std::mt19937_64& rng);

}  // namespace gameopt

#endif  // GAMEOPT_PROBLEMS_HPP
