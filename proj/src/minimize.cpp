#include "gameopt/minimize.hpp"

#include <cmath>

#include "gameopt/projections.hpp"

namespace gameopt {

namespace {

struct Sample {
  Vector x;
  double f = 0.0;
  Vector g;
};

}  // namespace

Objective objective_of(const ConstraintFn& f) {
  return [&f](const Vector& x, Vector* grad) {
    if (grad != nullptr) *grad = gradient(f, x);
    return evaluate(f, x);
  };
}

MinimizeResult minimize_over_domain(const Objective& f, const Domain& domain,
                                    const Vector& x0,
                                    const MinimizeOptions& options) {
  auto eval = [&](const Vector& x) {
    Sample s{x, 0.0, Vector()};
    s.f = f(x, &s.g);
    return s;
  };

  Sample cur = eval(project(x0, domain));
  Sample ext = cur;  // extrapolated point
  double lip = options.lipschitz > 0 ? options.lipschitz : 1.0;
  double t = 1.0;

  MinimizeResult out;
  for (int k = 0;; ++k) {
    const Vector vertex = domain.linear_minimizer(cur.g);
    const double gap = std::max(0.0, cur.g.dot(cur.x - vertex));
    out.x = cur.x;
    out.value = cur.f;
    out.gap = gap;
    out.lower_bound = cur.f - gap;
    out.iterations = k;
    if (options.stop_at_value && cur.f <= *options.stop_at_value) {
      out.status = MinimizeStatus::kReachedValue;
      return out;
    }
    if (options.stop_at_lower_bound && out.lower_bound > *options.stop_at_lower_bound) {
      out.status = MinimizeStatus::kCertifiedLowerBound;
      return out;
    }
    if (gap <= options.gap_tol) {
      out.status = MinimizeStatus::kConverged;
      return out;
    }
    if (k >= options.max_iters) {
      out.status = MinimizeStatus::kIterationCap;
      return out;
    }

    // Projected gradient step from the extrapolated point, with backtracking
    // on the quadratic upper model.
    Sample next;
    for (int bt = 0; bt < 80; ++bt) {
      next = eval(project(ext.x - ext.g / lip, domain));
      const Vector d = next.x - ext.x;
      const double model = ext.f + ext.g.dot(d) + 0.5 * lip * d.squaredNorm();
      if (next.f <= model + 1e-12 * (1.0 + std::abs(ext.f))) break;
      lip *= 2.0;
    }

    if (next.f > cur.f) {
      // Momentum overshot: restart from the current iterate.
      t = 1.0;
      ext = cur;
      continue;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const Vector y = next.x + ((t - 1.0) / t_next) * (next.x - cur.x);
    cur = std::move(next);
    t = t_next;
    try {
      ext = eval(y);
    } catch (const Error& e) {
      // The extrapolated point left the function's domain.
      if (e.code() != ErrorCode::kDomainError) throw;
      ext = cur;
      t = 1.0;
    }
  }
}

}  // namespace gameopt
