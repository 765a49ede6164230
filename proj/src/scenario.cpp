#include "firefront/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "firefront/io.hpp"

namespace firefront {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// --- low-level reader ---

std::vector<ConfigSection> parse_config_sections(const std::string& text) {
  std::vector<ConfigSection> sections;
  std::set<std::string> singles_seen;
  ConfigSection* cur = nullptr;

  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;

    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }

    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      bool repeat = line.rfind("[[", 0) == 0;
      const std::string close = repeat ? "]]" : "]";
      if (line.substr(line.size() - close.size()) != close)
        throw ParseError("unterminated section header at " + where);
      std::string name =
          trim(line.substr(repeat ? 2 : 1, line.size() - 2 * (repeat ? 2 : 1)));
      if (name.empty()) throw ParseError("empty section name at " + where);
      if (!repeat && !singles_seen.insert(name).second)
        throw ParseError("duplicate section [" + name + "] at " + where);
      sections.push_back(ConfigSection{name, {}, {}});
      cur = &sections.back();
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value' at " + where);
    if (!cur) throw ParseError("key before any section at " + where);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key at " + where);
    if (cur->kv.count(key))
      throw ParseError("duplicate key '" + key + "' in [" + cur->name + "]");
    cur->kv[key] = val;
    cur->key_order.push_back(key);
  }
  return sections;
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad number '" + s + "' for " + context);
  return v;
}

long long parse_int(const std::string& s, const std::string& context) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("bad integer '" + s + "' for " + context);
  return v;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& context) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(parse_double(cur, context));
      cur.clear();
    }
  };
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t')
      flush();
    else
      cur.push_back(ch);
  }
  flush();
  if (out.empty()) throw ParseError("empty number list for " + context);
  return out;
}

// --- model pieces ---

void ScalingTransform::validate() const {
  for (const AxisMap* m : {&t, &x, &y})
    if (!(m->factor > 0) || !std::isfinite(m->factor) || !std::isfinite(m->offset))
      throw ValidationError("scaling factors must be positive and finite");
  if (x.factor != y.factor)
    throw ValidationError("spatial axes must share one scaling factor");
}

ScalingTransform make_scaling(const Domain3& d, double extent_t, double extent_x,
                              double extent_y) {
  if (!(extent_t > 0) || !(extent_x > 0) || !(extent_y > 0))
    throw ValidationError("scaling extents must be positive");
  if (!(d.t_max > d.t_min) || !(d.x_max > d.x_min) || !(d.y_max > d.y_min))
    throw ValidationError("domain extents must be positive");
  ScalingTransform s;
  s.t = {d.t_min, (d.t_max - d.t_min) / extent_t};
  const double f_space = std::max((d.x_max - d.x_min) / extent_x,
                                  (d.y_max - d.y_min) / extent_y);
  s.x = {d.x_min, f_space};
  s.y = {d.y_min, f_space};
  return s;
}

void FuelParameters::validate() const {
  if (!(r0 >= 0) || !std::isfinite(r0))
    throw ValidationError("fuel r0 must be >= 0");
  if (!(wind_coeff >= 0) || !(slope_coeff >= 0))
    throw ValidationError("fuel wind/slope coefficients must be >= 0");
  if (!(wind_exp > 0)) throw ValidationError("fuel wind exponent must be > 0");
  if (!(wind_cap > 0)) throw ValidationError("fuel wind cap must be > 0");
  if (!(burn_time > 0)) throw ValidationError("fuel burn time must be > 0");
}

void Poly3::validate(const char* what) const {
  if (deg_t < 0 || deg_x < 0 || deg_y < 0 || deg_t > 8 || deg_x > 8 || deg_y > 8)
    throw ValidationError(std::string(what) + ": polynomial degrees must be in [0, 8]");
  const std::size_t want = static_cast<std::size_t>(deg_t + 1) * (deg_x + 1) * (deg_y + 1);
  if (coeff.size() != want)
    throw ValidationError(std::string(what) + ": expected " + std::to_string(want) +
                          " coefficients, got " + std::to_string(coeff.size()));
  if (!all_finite(coeff))
    throw ValidationError(std::string(what) + ": coefficients must be finite");
}

double Poly3::eval(double t, double x, double y) const {
  const int nx = deg_x + 1, ny = deg_y + 1;
  double rt = 0.0;
  for (int it = deg_t; it >= 0; --it) {
    double rx = 0.0;
    for (int ix = deg_x; ix >= 0; --ix) {
      const double* row = &coeff[(static_cast<std::size_t>(it) * nx + ix) * ny];
      double ry = 0.0;
      for (int iy = deg_y; iy >= 0; --iy) ry = ry * y + row[iy];
      rx = rx * x + ry;
    }
    rt = rt * t + rx;
  }
  return rt;
}

double Poly3::ddx(double t, double x, double y) const {
  const int nx = deg_x + 1, ny = deg_y + 1;
  double rt = 0.0;
  for (int it = deg_t; it >= 0; --it) {
    double rx = 0.0;
    for (int ix = deg_x; ix >= 1; --ix) {
      const double* row = &coeff[(static_cast<std::size_t>(it) * nx + ix) * ny];
      double ry = 0.0;
      for (int iy = deg_y; iy >= 0; --iy) ry = ry * y + row[iy];
      rx = rx * x + ix * ry;
    }
    rt = rt * t + rx;
  }
  return rt;
}

double Poly3::ddy(double t, double x, double y) const {
  const int nx = deg_x + 1, ny = deg_y + 1;
  double rt = 0.0;
  for (int it = deg_t; it >= 0; --it) {
    double rx = 0.0;
    for (int ix = deg_x; ix >= 0; --ix) {
      const double* row = &coeff[(static_cast<std::size_t>(it) * nx + ix) * ny];
      double ry = 0.0;
      for (int iy = deg_y; iy >= 1; --iy) ry = ry * y + iy * row[iy];
      rx = rx * x + ry;
    }
    rt = rt * t + rx;
  }
  return rt;
}

double initial_levelset(const IgnitionShape& shape, double xs, double ys) {
  double best = std::numeric_limits<double>::infinity();
  for (const Cone& c : shape.cones) {
    const double ex = c.a * (xs - c.x0);
    const double ey = c.b * (ys - c.y0);
    best = std::min(best, std::sqrt(ex * ex + ey * ey) - c.h);
  }
  return best;
}

ScaledBox ScenarioConfig::scaled_box() const {
  return {scaling.t.scale(domain.t_max), scaling.x.scale(domain.x_max),
          scaling.y.scale(domain.y_max)};
}

void ScenarioConfig::validate() const {
  if (!(domain.t_max > domain.t_min) || !(domain.x_max > domain.x_min) ||
      !(domain.y_max > domain.y_min))
    throw ValidationError("domain extents must be positive");
  scaling.validate();
  fuel.validate();
  wind.u.validate("wind u");
  wind.v.validate("wind v");
  terrain.z.validate("terrain z");
  if (terrain.z.deg_t != 0)
    throw ValidationError("terrain z: must not depend on time");
  if (!(viscosity_eps >= 0) || !std::isfinite(viscosity_eps))
    throw ValidationError("viscosity_eps must be >= 0");

  if (ignition.cones.empty())
    throw ValidationError("at least one ignition shape is required");
  const ScaledBox box = scaled_box();
  for (const Cone& c : ignition.cones) {
    if (!(c.a > 0) || !(c.b > 0)) throw ValidationError("axis scale must be positive");
    if (!(c.h > 0)) throw ValidationError("ignition apex depth must be positive");
    if (c.x0 < 0 || c.x0 > box.x_hi || c.y0 < 0 || c.y0 > box.y_hi)
      throw ValidationError("ignition center outside scaled domain");
  }
}

// --- scenario file ---

namespace {

class SectionReader {
public:
  explicit SectionReader(const ConfigSection& s) : s_(s) {}

  bool has(const std::string& key) {
    used_.insert(key);
    return s_.kv.count(key) > 0;
  }
  std::string raw(const std::string& key) {
    used_.insert(key);
    auto it = s_.kv.find(key);
    if (it == s_.kv.end())
      throw ValidationError("missing key '" + key + "' in [" + s_.name + "]");
    return it->second;
  }
  double num(const std::string& key) {
    return parse_double(raw(key), "[" + s_.name + "] " + key);
  }
  double num_or(const std::string& key, double fallback) {
    return has(key) ? num(key) : fallback;
  }
  long long integer(const std::string& key) {
    return parse_int(raw(key), "[" + s_.name + "] " + key);
  }
  long long integer_or(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }
  std::vector<double> list(const std::string& key) {
    return parse_double_list(raw(key), "[" + s_.name + "] " + key);
  }
  std::vector<double> list_or(const std::string& key, std::vector<double> fallback) {
    return has(key) ? list(key) : std::move(fallback);
  }

  void reject_unknown() const {
    for (const auto& key : s_.key_order)
      if (!used_.count(key))
        throw ValidationError("unknown key '" + key + "' in [" + s_.name + "]");
  }

private:
  const ConfigSection& s_;
  std::set<std::string> used_;
};

Poly3 read_poly(SectionReader& r, const std::string& prefix) {
  Poly3 p;
  p.deg_t = static_cast<int>(r.integer_or(prefix + "_degt", 0));
  p.deg_x = static_cast<int>(r.integer_or(prefix + "_degx", 0));
  p.deg_y = static_cast<int>(r.integer_or(prefix + "_degy", 0));
  p.coeff = r.list_or(prefix + "_poly", {0.0});
  return p;
}

}  // namespace

ScenarioConfig load_scenario(const std::string& text) {
  ScenarioConfig sc;
  double extent_t = 10.0, extent_x = 10.0, extent_y = 10.0;
  bool saw_domain = false, saw_fuel = false;

  for (const ConfigSection& sec : parse_config_sections(text)) {
    SectionReader r(sec);
    if (sec.name == "domain") {
      saw_domain = true;
      sc.domain.t_min = r.num("t_min");
      sc.domain.t_max = r.num("t_max");
      sc.domain.x_min = r.num("x_min");
      sc.domain.x_max = r.num("x_max");
      sc.domain.y_min = r.num("y_min");
      sc.domain.y_max = r.num("y_max");
    } else if (sec.name == "scaling") {
      extent_t = r.num_or("extent_t", 10.0);
      extent_x = r.num_or("extent_x", 10.0);
      extent_y = r.num_or("extent_y", 10.0);
    } else if (sec.name == "fuel") {
      saw_fuel = true;
      sc.fuel.r0 = r.num("r0");
      sc.fuel.wind_coeff = r.num("c");
      sc.fuel.wind_exp = r.num("b");
      sc.fuel.wind_cap = r.num("e");
      sc.fuel.slope_coeff = r.num("d");
      sc.fuel.burn_time = r.num("tf");
      sc.fuel.category = static_cast<int>(r.integer_or("category", 0));
    } else if (sec.name == "wind") {
      sc.wind.u = read_poly(r, "u");
      sc.wind.v = read_poly(r, "v");
    } else if (sec.name == "terrain") {
      sc.terrain.z.deg_t = 0;
      sc.terrain.z.deg_x = static_cast<int>(r.integer_or("z_degx", 0));
      sc.terrain.z.deg_y = static_cast<int>(r.integer_or("z_degy", 0));
      sc.terrain.z.coeff = r.list_or("z_poly", {0.0});
    } else if (sec.name == "solver") {
      sc.viscosity_eps = r.num_or("viscosity_eps", 0.0);
    } else if (sec.name == "ignition") {
      Cone c;
      c.x0 = r.num("x0");
      c.y0 = r.num("y0");
      c.a = r.num("a");
      c.b = r.num("b");
      c.h = r.num("h");
      sc.ignition.cones.push_back(c);
    } else {
      throw ValidationError("unknown section [" + sec.name + "]");
    }
    r.reject_unknown();
  }

  if (!saw_domain) throw ValidationError("missing [domain] section");
  if (!saw_fuel) throw ValidationError("missing [fuel] section");
  sc.scaling = make_scaling(sc.domain, extent_t, extent_x, extent_y);
  sc.validate();
  return sc;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  return load_scenario(read_file(path));
}

std::map<int, FuelParameters> load_fuel_table(const std::string& path) {
  std::map<int, FuelParameters> table;
  for (const ConfigSection& sec : parse_config_sections(read_file(path))) {
    if (sec.name != "fuel_category")
      throw ValidationError("unknown section [" + sec.name + "] in fuel table");
    SectionReader r(sec);
    FuelParameters f;
    f.category = static_cast<int>(r.integer("category"));
    f.r0 = r.num("r0");
    f.wind_coeff = r.num("c");
    f.wind_exp = r.num("b");
    f.wind_cap = r.num("e");
    f.slope_coeff = r.num("d");
    f.burn_time = r.num("tf");
    r.reject_unknown();
    f.validate();
    if (table.count(f.category))
      throw ValidationError("duplicate fuel category " + std::to_string(f.category));
    table[f.category] = f;
  }
  if (table.empty()) throw ValidationError("fuel table has no [[fuel_category]] rows");
  return table;
}

}  // namespace firefront
