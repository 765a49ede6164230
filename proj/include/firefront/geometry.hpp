/// @file geometry.hpp
/// @brief Fireline extraction (marching squares), polyline metrics, and
///        Hausdorff distances between fronts.

#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "firefront/field.hpp"

namespace firefront {

using Point2 = std::array<double, 2>;

struct Polyline {
  std::vector<Point2> pts;
  bool closed = false;  ///< closed: pts.back() connects to pts.front()
};

/// Zero contour of a snapshot at one time.
struct Fireline {
  double time = 0.0;
  std::vector<Polyline> lines;
};

/// Marching-squares zero contour with linear edge interpolation. Saddle
/// cells are resolved by the sign of the cell-centre average. Contours that
/// leave the grid stay open; interior contours close.
Fireline extract_fireline(const ScalarField2& psi, const Grid2& g, double time,
                          double level = 0.0);

double polyline_length(const Polyline& p);

/// Shoelace area of one closed loop (throws ValidationError on open input).
double polygon_area(const Polyline& p);
/// Sum of |loop area| over closed loops.
double polygon_area(const std::vector<Polyline>& loops);

/// Area of the region {psi <= 0} estimated by cell counting (each cell
/// weighted by its inside-corner fraction). Robust for regions clipped by
/// the grid boundary, where extracted loops stay open.
double region_area(const ScalarField2& psi, const Grid2& g);

/// Points spaced uniformly in arc length (spacing > 0); keeps both endpoints
/// of an open polyline, drops the duplicate closing point of a closed one.
std::vector<Point2> resample_polyline(const Polyline& p, double spacing);

/// Symmetric Hausdorff distance between point sets: max over directed
/// max-min distances. Brute force; OpenMP over the outer set.
double hausdorff(std::span<const Point2> a, std::span<const Point2> b);
double hausdorff_serial(std::span<const Point2> a, std::span<const Point2> b);

/// Hausdorff between two firelines after resampling every polyline to the
/// given spacing. Throws ValidationError if either fireline is empty.
double fireline_hausdorff(const Fireline& a, const Fireline& b, double spacing);

// --- Front-error time series between two solution sources ---

/// Produces the scaled-or-physical field of one source at a physical time on
/// a shared grid (in the source's own coordinates converted to the grid's).
using FieldSource = std::function<ScalarField2(double t_phys, const Grid2& g)>;

enum class AreaNorm { SqrtArea, Area };

struct MetricsEntry {
  double time = 0.0;          ///< physical seconds
  bool valid = false;         ///< both firelines nonempty
  double hausdorff = 0.0;     ///< same length unit as the grid
  double norm_area = 0.0;     ///< hausdorff / sqrt(area_a) (or / area_a)
  double norm_perimeter = 0.0;///< hausdorff / perimeter_a
  double area_a = 0.0, area_b = 0.0;          ///< burning-region areas
  double perimeter_a = 0.0, perimeter_b = 0.0;///< total fireline lengths
};

using MetricsSeries = std::vector<MetricsEntry>;

/// Evaluates both sources on the grid at each time, extracts firelines,
/// and reports Hausdorff plus normalizations. Resampling spacing is
/// min(dx, dy)/2. Normalization areas/perimeters come from source A.
MetricsSeries compare_series(const FieldSource& a, const FieldSource& b,
                             std::span<const double> times_phys, const Grid2& g,
                             AreaNorm norm = AreaNorm::SqrtArea);

}  // namespace firefront
