#include "gameopt/grid.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gameopt/projections.hpp"

namespace gameopt {

namespace {

void check_grid(const Domain& domain, double resolution, double points) {
  if (domain.dim() > kGridMaxDim) {
    std::ostringstream os;
    os << "grid oracle supports n <= " << kGridMaxDim << ", got n = " << domain.dim();
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  if (!(resolution > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid resolution must be positive");
  if (points > static_cast<double>(kGridMaxPoints)) {
    std::ostringstream os;
    os << "grid of about " << points << " points exceeds the limit of " << kGridMaxPoints;
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

// Enumerates all compositions k_1 + ... + k_n = total.
void compositions(int n, long total, std::vector<long>& k, int pos,
                  const std::function<void(const std::vector<long>&)>& visit) {
  if (pos == n - 1) {
    k[pos] = total;
    visit(k);
    return;
  }
  for (long v = 0; v <= total; ++v) {
    k[pos] = v;
    compositions(n, total - v, k, pos + 1, visit);
  }
}

void box_lattice(const Vector& lo, const Vector& hi, double resolution,
                 const std::function<void(const Vector&)>& visit) {
  const int n = static_cast<int>(lo.size());
  std::vector<long> steps(n);
  double total = 1.0;
  for (int i = 0; i < n; ++i) {
    const double width = hi(i) - lo(i);
    steps[i] = width > 0.0 ? std::max(1L, static_cast<long>(std::ceil(width / resolution - 1e-9))) : 0;
    total *= static_cast<double>(steps[i] + 1);
  }
  std::vector<long> idx(n, 0);
  Vector x(n);
  for (;;) {
    for (int i = 0; i < n; ++i) {
      x(i) = steps[i] == 0 ? lo(i)
                           : lo(i) + (hi(i) - lo(i)) * static_cast<double>(idx[i]) /
                                         static_cast<double>(steps[i]);
    }
    visit(x);
    int i = 0;
    while (i < n && idx[i] == steps[i]) idx[i++] = 0;
    if (i == n) return;
    ++idx[i];
  }
}

}  // namespace

void for_each_grid_point(const Domain& domain, double resolution,
                         const std::function<void(const Vector&)>& visit) {
  const int n = domain.dim();
  if (const auto* s = std::get_if<SimplexDomain>(&domain.shape())) {
    const double mass = 1.0 - n * s->floor;
    const long N = std::max(1L, static_cast<long>(std::ceil(mass / resolution - 1e-9)));
    double points = 1.0;
    for (int i = 1; i < n; ++i) points *= static_cast<double>(N + i) / i;
    check_grid(domain, resolution, points);
    std::vector<long> k(n);
    Vector x(n);
    compositions(n, N, k, 0, [&](const std::vector<long>& kk) {
      for (int i = 0; i < n; ++i) {
        x(i) = s->floor + mass * static_cast<double>(kk[i]) / static_cast<double>(N);
      }
      visit(x);
    });
    return;
  }
  const Vector lo = domain.lower_corner();
  const Vector hi = domain.upper_corner();
  double points = 1.0;
  for (int i = 0; i < n; ++i) points *= std::ceil((hi(i) - lo(i)) / resolution) + 1.0;
  check_grid(domain, resolution, points);
  if (const auto* b = std::get_if<BallDomain>(&domain.shape())) {
    box_lattice(lo, hi, resolution, [&](const Vector& x) {
      if ((x - b->center).norm() <= b->radius) visit(x);
      else visit(project_ball(x, b->radius, b->center));
    });
    return;
  }
  box_lattice(lo, hi, resolution, visit);
}

GridMinimum grid_minimum(const std::function<double(const Vector&)>& f,
                         const std::function<double(const Vector&)>& grad_norm,
                         const Domain& domain, double resolution) {
  GridMinimum out;
  out.value = std::numeric_limits<double>::infinity();
  double max_grad = 0.0;
  for_each_grid_point(domain, resolution, [&](const Vector& x) {
    const double v = f(x);
    ++out.points;
    if (v < out.value) {
      out.value = v;
      out.argmin = x;
    }
    if (grad_norm) max_grad = std::max(max_grad, grad_norm(x));
  });
  out.slack = resolution * max_grad;
  return out;
}

}  // namespace gameopt
