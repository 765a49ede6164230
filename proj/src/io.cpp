#include "firefront/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "firefront/errors.hpp"
#include "nlohmann/json.hpp"

namespace firefront {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << content;
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

void write_loss_csv(const std::string& path, const std::vector<double>& history) {
  std::ostringstream ss;
  ss << "iteration,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    ss << i << ',' << format_double(history[i]) << '\n';
  write_file(path, ss.str());
}

void write_snapshot_csv(const std::string& path, double t_phys,
                        const ScalarField2& f, const Grid2& g) {
  std::ostringstream ss;
  ss << "t,x,y,psi\n";
  const std::string ts = format_double(t_phys);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      ss << ts << ',' << format_double(g.x(i)) << ',' << format_double(g.y(j))
         << ',' << format_double(f.at(i, j)) << '\n';
  write_file(path, ss.str());
}

void write_ignition_csv(const std::string& path, const ScalarField2& ti,
                        const Grid2& g) {
  std::ostringstream ss;
  ss << "x,y,t_ignite\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      ss << format_double(g.x(i)) << ',' << format_double(g.y(j)) << ','
         << format_double(ti.at(i, j)) << '\n';
  write_file(path, ss.str());
}

void write_fireline_csv(const std::string& path, const Fireline& fl) {
  std::ostringstream ss;
  ss << "loop_id,x,y\n";
  for (std::size_t k = 0; k < fl.lines.size(); ++k)
    for (const auto& p : fl.lines[k].pts)
      ss << k << ',' << format_double(p[0]) << ',' << format_double(p[1]) << '\n';
  write_file(path, ss.str());
}

void write_metrics_csv(const std::string& path, const MetricsSeries& ms) {
  std::ostringstream ss;
  ss << "t,hausdorff,hausdorff_over_sqrt_area,hausdorff_over_perimeter,"
        "area_a,area_b,perimeter_a,perimeter_b,valid\n";
  for (const auto& e : ms)
    ss << format_double(e.time) << ',' << format_double(e.hausdorff) << ','
       << format_double(e.norm_area) << ',' << format_double(e.norm_perimeter)
       << ',' << format_double(e.area_a) << ',' << format_double(e.area_b) << ','
       << format_double(e.perimeter_a) << ',' << format_double(e.perimeter_b)
       << ',' << (e.valid ? 1 : 0) << '\n';
  write_file(path, ss.str());
}

std::string metrics_json(const MetricsSeries& ms) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : ms) {
    arr.push_back({{"t", e.time},
                   {"valid", e.valid},
                   {"hausdorff", e.hausdorff},
                   {"hausdorff_over_sqrt_area", e.norm_area},
                   {"hausdorff_over_perimeter", e.norm_perimeter},
                   {"area_a", e.area_a},
                   {"area_b", e.area_b},
                   {"perimeter_a", e.perimeter_a},
                   {"perimeter_b", e.perimeter_b}});
  }
  return arr.dump(2) + "\n";
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_csv_double(const std::string& s, const std::string& path) {
  if (s == "nan") return std::nan("");
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad number '" + s + "' in " + path);
  return v;
}

}  // namespace

SnapshotFile read_snapshot_csv(const std::string& path) {
  std::istringstream is(read_file(path));
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty snapshot: " + path);
  if (line != "t,x,y,psi") throw ParseError("bad snapshot header in " + path);

  SnapshotFile out;
  std::vector<double> xs, ys, vs;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 4) throw ParseError("bad snapshot row in " + path);
    double t = parse_csv_double(cols[0], path);
    if (first) {
      out.time = t;
      first = false;
    } else if (t != out.time) {
      throw ParseError("mixed times in snapshot " + path);
    }
    xs.push_back(parse_csv_double(cols[1], path));
    ys.push_back(parse_csv_double(cols[2], path));
    vs.push_back(parse_csv_double(cols[3], path));
  }
  if (vs.empty()) throw ParseError("no rows in snapshot " + path);

  // Rows are written x-fastest on a uniform grid; recover nx from the first
  // wrap of the x coordinate.
  std::size_t nx = 1;
  while (nx < xs.size() && xs[nx] != xs[0]) ++nx;
  if (nx < 2 || vs.size() % nx != 0)
    throw ParseError("snapshot rows do not form a grid in " + path);
  const std::size_t ny = vs.size() / nx;
  if (ny < 2) throw ParseError("snapshot rows do not form a grid in " + path);

  Grid2 g;
  g.nx = static_cast<int>(nx);
  g.ny = static_cast<int>(ny);
  g.x0 = xs[0];
  g.y0 = ys[0];
  g.dx = (xs[nx - 1] - xs[0]) / static_cast<double>(nx - 1);
  g.dy = (ys[(ny - 1) * nx] - ys[0]) / static_cast<double>(ny - 1);
  if (!(g.dx > 0) || !(g.dy > 0))
    throw ParseError("snapshot grid is degenerate in " + path);

  out.grid = g;
  out.field.nx = g.nx;
  out.field.ny = g.ny;
  out.field.v = std::move(vs);
  return out;
}

std::vector<SnapshotFile> read_snapshot_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& ent : fs::directory_iterator(dir, ec)) {
    const std::string name = ent.path().filename().string();
    if (name.rfind("snapshot_", 0) == 0 && name.size() > 4 &&
        name.substr(name.size() - 4) == ".csv")
      names.push_back(ent.path().string());
  }
  if (ec) throw IoError("cannot list directory: " + dir);
  if (names.empty()) throw IoError("no snapshot_*.csv files under " + dir);
  std::sort(names.begin(), names.end());
  std::vector<SnapshotFile> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(read_snapshot_csv(n));
  std::sort(out.begin(), out.end(),
            [](const SnapshotFile& a, const SnapshotFile& b) { return a.time < b.time; });
  return out;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  if (!m.scenario_path.empty()) j["scenario"] = m.scenario_path;
  if (!m.scenario_hash.empty()) j["scenario_hash"] = m.scenario_hash;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["config"] = m.config;
  j["artifacts"] = m.artifacts;
  j["timings_s"] = m.timings_s;
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  write_file(path_join(dir, "manifest.json"), manifest_json(m));
}

std::string path_join(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

}  // namespace firefront
