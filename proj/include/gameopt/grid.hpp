#ifndef GAMEOPT_GRID_HPP
#define GAMEOPT_GRID_HPP

// Brute-force grids over low-dimensional domains (n <= 3). Used as
// independent oracles for certificates and game values.

#include <functional>

#include "gameopt/core.hpp"

namespace gameopt {

inline constexpr int kGridMaxDim = 3;
inline constexpr long kGridMaxPoints = 50'000'000;

// Visits a grid whose covering radius is at most `resolution`:
//   simplex  lattice with spacing resolution (all vertices included)
//   box      per-axis lattice with spacing <= resolution, corners included
//   ball     box lattice of the bounding cube; outside points are projected
//            onto the sphere
// Throws kInvalidArgument for n > 3 or grids above kGridMaxPoints.
void for_each_grid_point(const Domain& domain, double resolution,
                         const std::function<void(const Vector&)>& visit);

struct GridMinimum {
  double value = 0.0;
  Vector argmin;
  // resolution * (largest gradient norm seen on the grid).
  double slack = 0.0;
  long points = 0;
};

// min over the grid of f, with slack computed from grad_norm at each point.
GridMinimum grid_minimum(const std::function<double(const Vector&)>& f,
                         const std::function<double(const Vector&)>& grad_norm,
                         const Domain& domain, double resolution);

}  // namespace gameopt

#endif  // GAMEOPT_GRID_HPP
