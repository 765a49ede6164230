#include "firefront/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace firefront {

namespace {

// Grid edges get stable integer keys: ((j*nx + i) << 1) | orientation.
// Horizontal edge (i,j)-(i+1,j) is orientation 0, vertical (i,j)-(i,j+1) is 1.
inline std::int64_t h_edge(int i, int j, int nx) {
  return ((static_cast<std::int64_t>(j) * nx + i) << 1);
}
inline std::int64_t v_edge(int i, int j, int nx) {
  return ((static_cast<std::int64_t>(j) * nx + i) << 1) | 1;
}

struct Segment {
  std::int64_t k0, k1;
};

}  // namespace

Fireline extract_fireline(const ScalarField2& psi, const Grid2& g, double time,
                          double level) {
  Fireline fl;
  fl.time = time;
  if (psi.nx != g.nx || psi.ny != g.ny)
    throw ValidationError("field and grid shapes differ");

  // Interpolated crossing point of each cut edge, keyed by edge id. Both
  // cells adjacent to an edge compute the identical point.
  std::unordered_map<std::int64_t, Point2> pts;
  std::vector<Segment> segs;
  std::unordered_map<std::int64_t, std::array<int, 2>> adj;
  std::unordered_map<std::int64_t, int> degree;

  auto w = [&](int i, int j) { return psi.at(i, j) - level; };
  auto inside = [&](double v) { return v <= 0.0; };

  auto cut_point = [&](std::int64_t key, int i0, int j0, int i1, int j1) {
    auto it = pts.find(key);
    if (it != pts.end()) return;
    const double w0 = w(i0, j0), w1 = w(i1, j1);
    const double theta = w0 / (w0 - w1);
    pts.emplace(key, Point2{g.x(i0) + theta * (g.x(i1) - g.x(i0)),
                            g.y(j0) + theta * (g.y(j1) - g.y(j0))});
  };

  auto emit = [&](std::int64_t a, std::int64_t b) {
    const int idx = static_cast<int>(segs.size());
    segs.push_back({a, b});
    for (std::int64_t k : {a, b}) {
      auto& d = degree[k];
      if (d < 2) adj[k][d] = idx;
      ++d;
    }
  };

  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double w00 = w(i, j), w10 = w(i + 1, j);
      const double w01 = w(i, j + 1), w11 = w(i + 1, j + 1);
      const int code = (inside(w00) ? 1 : 0) | (inside(w10) ? 2 : 0) |
                       (inside(w11) ? 4 : 0) | (inside(w01) ? 8 : 0);
      if (code == 0 || code == 15) continue;

      const std::int64_t bottom = h_edge(i, j, g.nx);
      const std::int64_t top = h_edge(i, j + 1, g.nx);
      const std::int64_t left = v_edge(i, j, g.nx);
      const std::int64_t right = v_edge(i + 1, j, g.nx);
      auto bottom_pt = [&] { cut_point(bottom, i, j, i + 1, j); };
      auto top_pt = [&] { cut_point(top, i, j + 1, i + 1, j + 1); };
      auto left_pt = [&] { cut_point(left, i, j, i, j + 1); };
      auto right_pt = [&] { cut_point(right, i + 1, j, i + 1, j + 1); };

      switch (code) {
        case 1: case 14:  // corner 00 isolated
          bottom_pt(); left_pt(); emit(bottom, left); break;
        case 2: case 13:  // corner 10 isolated
          bottom_pt(); right_pt(); emit(bottom, right); break;
        case 4: case 11:  // corner 11 isolated
          top_pt(); right_pt(); emit(top, right); break;
        case 8: case 7:   // corner 01 isolated
          top_pt(); left_pt(); emit(top, left); break;
        case 3: case 12:  // bottom pair vs top pair
          left_pt(); right_pt(); emit(left, right); break;
        case 6: case 9:   // right pair vs left pair
          bottom_pt(); top_pt(); emit(bottom, top); break;
        case 5: case 10: {  // saddle: resolve by the cell-centre sign
          bottom_pt(); top_pt(); left_pt(); right_pt();
          const bool centre_in = inside(0.25 * (w00 + w10 + w01 + w11));
          const bool diag00 = (code == 5);  // inside corners on the 00-11 diagonal
          if (diag00 == centre_in) {
            emit(left, top); emit(bottom, right);
          } else {
            emit(left, bottom); emit(top, right);
          }
          break;
        }
        default: break;
      }
    }
  }

  // Chain segments into polylines: open chains start at degree-1 edges,
  // whatever remains closes into loops. Scanning in emission order keeps the
  // result deterministic.
  std::vector<char> used(segs.size(), 0);

  auto other_end = [&](const Segment& s, std::int64_t key) {
    return s.k0 == key ? s.k1 : s.k0;
  };
  auto next_at = [&](std::int64_t key, int exclude) -> int {
    const int deg = degree[key];
    for (int slot = 0; slot < std::min(deg, 2); ++slot) {
      const int idx = adj[key][slot];
      if (idx != exclude && !used[idx]) return idx;
    }
    return -1;
  };

  auto walk = [&](int start_seg, std::int64_t start_key) {
    Polyline line;
    std::int64_t key = start_key;
    int seg = start_seg;
    line.pts.push_back(pts[key]);
    while (seg >= 0) {
      used[seg] = 1;
      key = other_end(segs[seg], key);
      if (key == start_key) {  // loop closed; do not repeat the first point
        line.closed = true;
        break;
      }
      line.pts.push_back(pts[key]);
      seg = next_at(key, seg);
    }
    // collapse zero-length steps (contours passing exactly through nodes)
    std::vector<Point2> clean;
    for (const auto& p : line.pts)
      if (clean.empty() || p != clean.back()) clean.push_back(p);
    if (line.closed && clean.size() > 1 && clean.front() == clean.back())
      clean.pop_back();
    line.pts = std::move(clean);
    const std::size_t min_pts = line.closed ? 3 : 2;
    if (line.pts.size() >= min_pts) fl.lines.push_back(std::move(line));
  };

  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    if (degree[segs[s].k0] == 1)
      walk(static_cast<int>(s), segs[s].k0);
    else if (degree[segs[s].k1] == 1)
      walk(static_cast<int>(s), segs[s].k1);
  }
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) walk(static_cast<int>(s), segs[s].k0);

  return fl;
}

double polyline_length(const Polyline& p) {
  double len = 0.0;
  for (std::size_t k = 1; k < p.pts.size(); ++k)
    len += std::hypot(p.pts[k][0] - p.pts[k - 1][0], p.pts[k][1] - p.pts[k - 1][1]);
  if (p.closed && p.pts.size() > 2)
    len += std::hypot(p.pts.front()[0] - p.pts.back()[0],
                      p.pts.front()[1] - p.pts.back()[1]);
  return len;
}

double polygon_area(const Polyline& p) {
  if (!p.closed) throw ValidationError("polygon area needs a closed polyline");
  double s = 0.0;
  const std::size_t n = p.pts.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point2& a = p.pts[k];
    const Point2& b = p.pts[(k + 1) % n];
    s += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * std::abs(s);
}

double polygon_area(const std::vector<Polyline>& loops) {
  double s = 0.0;
  for (const auto& p : loops) s += polygon_area(p);
  return s;
}

double region_area(const ScalarField2& psi, const Grid2& g) {
  if (psi.nx != g.nx || psi.ny != g.ny)
    throw ValidationError("field and grid shapes differ");
  double cells = 0.0;
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      int in = 0;
      in += psi.at(i, j) <= 0.0;
      in += psi.at(i + 1, j) <= 0.0;
      in += psi.at(i, j + 1) <= 0.0;
      in += psi.at(i + 1, j + 1) <= 0.0;
      cells += 0.25 * in;
    }
  return cells * g.dx * g.dy;
}

std::vector<Point2> resample_polyline(const Polyline& p, double spacing) {
  if (!(spacing > 0)) throw ValidationError("resample spacing must be positive");
  if (p.pts.empty()) return {};

  // closed polylines walk back to their first point
  std::vector<Point2> verts = p.pts;
  if (p.closed) verts.push_back(p.pts.front());

  double len = 0.0;
  std::vector<double> cum{0.0};
  for (std::size_t k = 1; k < verts.size(); ++k) {
    len += std::hypot(verts[k][0] - verts[k - 1][0], verts[k][1] - verts[k - 1][1]);
    cum.push_back(len);
  }
  if (len <= 0.0) return {p.pts.front()};

  const long long n =
      std::max<long long>(p.closed ? 3 : 1, std::llround(len / spacing));
  std::vector<Point2> out;
  const long long count = p.closed ? n : n + 1;  // closed: skip duplicate end
  out.reserve(count);
  std::size_t seg = 1;
  for (long long k = 0; k < count; ++k) {
    const double s = len * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 1 < cum.size() && cum[seg] < s) ++seg;
    const double seg_len = cum[seg] - cum[seg - 1];
    const double t = seg_len > 0 ? (s - cum[seg - 1]) / seg_len : 0.0;
    out.push_back({verts[seg - 1][0] + t * (verts[seg][0] - verts[seg - 1][0]),
                   verts[seg - 1][1] + t * (verts[seg][1] - verts[seg - 1][1])});
  }
  return out;
}

namespace {

double directed_sq(std::span<const Point2> a, std::span<const Point2> b,
                   bool parallel) {
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst) if (parallel)
  for (std::size_t i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) {
      const double dx = a[i][0] - q[0];
      const double dy = a[i][1] - q[1];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) best = d2;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff_impl(std::span<const Point2> a, std::span<const Point2> b,
                      bool parallel) {
  if (a.empty() || b.empty())
    throw ValidationError("hausdorff distance needs nonempty point sets");
  return std::sqrt(std::max(directed_sq(a, b, parallel), directed_sq(b, a, parallel)));
}

}  // namespace

double hausdorff(std::span<const Point2> a, std::span<const Point2> b) {
  return hausdorff_impl(a, b, true);
}
double hausdorff_serial(std::span<const Point2> a, std::span<const Point2> b) {
  return hausdorff_impl(a, b, false);
}

double fireline_hausdorff(const Fireline& a, const Fireline& b, double spacing) {
  std::vector<Point2> pa, pb;
  for (const auto& l : a.lines) {
    auto r = resample_polyline(l, spacing);
    pa.insert(pa.end(), r.begin(), r.end());
  }
  for (const auto& l : b.lines) {
    auto r = resample_polyline(l, spacing);
    pb.insert(pb.end(), r.begin(), r.end());
  }
  if (pa.empty() || pb.empty())
    throw ValidationError("cannot compare empty firelines");
  return hausdorff(pa, pb);
}

MetricsSeries compare_series(const FieldSource& a, const FieldSource& b,
                             std::span<const double> times_phys, const Grid2& g,
                             AreaNorm norm) {
  MetricsSeries out;
  const double spacing = 0.5 * std::min(g.dx, g.dy);
  for (double t : times_phys) {
    MetricsEntry e;
    e.time = t;
    const ScalarField2 fa = a(t, g);
    const ScalarField2 fb = b(t, g);
    const Fireline la = extract_fireline(fa, g, t);
    const Fireline lb = extract_fireline(fb, g, t);

    for (const auto& l : la.lines) e.perimeter_a += polyline_length(l);
    for (const auto& l : lb.lines) e.perimeter_b += polyline_length(l);
    e.area_a = region_area(fa, g);
    e.area_b = region_area(fb, g);

    if (!la.lines.empty() && !lb.lines.empty() && e.area_a > 0 &&
        e.perimeter_a > 0) {
      e.valid = true;
      e.hausdorff = fireline_hausdorff(la, lb, spacing);
      e.norm_area = e.hausdorff /
                    (norm == AreaNorm::SqrtArea ? std::sqrt(e.area_a) : e.area_a);
      e.norm_perimeter = e.hausdorff / e.perimeter_a;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace firefront
