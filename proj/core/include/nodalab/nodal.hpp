#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "nodalab/elliptic.hpp"
#include "nodalab/fields.hpp"
#include "nodalab/geometry.hpp"

namespace nodalab {

/// One straight piece of a zero level set. Each endpoint lies on the grid
/// edge whose two nodes are listed next to it.
struct NodalSegment {
  Point2 a = Point2::Zero();
  Point2 b = Point2::Zero();
  std::array<std::size_t, 2> edge_a{};
  std::array<std::size_t, 2> edge_b{};

  double length() const { return (b - a).norm(); }
};

struct NodalCurve {
  Grid grid;
  std::vector<NodalSegment> segments;  // ordered by cell index
  double total_length = 0.0;
  std::size_t perturbed_zeros = 0;  // nodes with u == 0 moved to +1e-14 ||u||
  bool degenerate = false;          // u vanishes identically
};

/// Piecewise-linear zero set by marching squares. Polar cells are mapped to
/// physical quadrilaterals and the disk center is handled by a triangle fan.
/// Saddle cells are resolved by the mean of their four corners.
NodalCurve extract_nodal_set(const ScalarField& u);

/// Length of the part of the curve inside the region, clipping each segment
/// exactly against the circle or the box.
double length_in_region(const NodalCurve& curve, const Ball<2>& ball);
double length_in_region(const NodalCurve& curve, const Cube<2>& cube);

/// Index of the Even-parity pair whose eigenvalue is nearest to `target`
/// (lower index on ties). Throws DegenerateInput when no Even pair exists.
std::size_t nearest_even_pair(const SteklovSpectrum& spectrum, double target);

struct EigenNodalLength {
  int k = 0;
  double eigenvalue = 0.0;
  double length = 0.0;
  NodalCurve curve;
};

/// Nodal length of the computed disk eigenfunction with eigenvalue nearest k.
EigenNodalLength nodal_length_of_eigenfunction(const SteklovSpectrum& spectrum, int k);
/// Same, solving for the lowest 2k + 3 pairs on `disk` first.
EigenNodalLength nodal_length_of_eigenfunction(const Grid& disk, int k);

/// CSV `x1,y1,x2,y2`.
void write_curve_csv(const std::filesystem::path& path, const NodalCurve& curve);
/// The curve drawn over the outline of its grid.
void write_curve_svg(const std::filesystem::path& path, const NodalCurve& curve);

}  // namespace nodalab
