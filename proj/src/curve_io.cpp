#include "fcurve/curve_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "fcurve/errors.hpp"

namespace fcurve {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_curve_csv(std::ostream& os, const Curve& f, CurveCsvKind kind) {
  const Space& s = f.space();
  os << "# alpha=" << format_double(s.alpha()) << " dx=" << format_double(s.dx())
     << " xmax=" << format_double(s.x_max()) << " f0=" << format_double(f.f0()) << '\n';
  if (kind == CurveCsvKind::Values) {
    os << "x,value\n";
    const auto v = f.node_values();
    for (std::size_t i = 0; i < v.size(); ++i) os << format_double(s.node(i)) << ',' << format_double(v[i]) << '\n';
  } else {
    os << "x,deriv\n";
    for (std::size_t i = 0; i < f.cells(); ++i) {
      os << format_double(s.midpoint(i)) << ',' << format_double(f.deriv()[i]) << '\n';
    }
  }
}

void write_curve_csv_file(const std::string& path, const Curve& f, CurveCsvKind kind) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  write_curve_csv(os, f, kind);
}

namespace {
double parse_number(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw ConfigError(where + ": not a number: '" + text + "'");
  return v;
}
}  // namespace

Curve read_curve_csv(std::istream& is, const std::string& origin) {
  std::string line;
  std::size_t lineno = 0;
  auto where = [&] { return origin + ":" + std::to_string(lineno); };

  if (!std::getline(is, line)) throw ConfigError(origin + ": empty curve file");
  ++lineno;
  if (line.rfind('#', 0) != 0) throw ConfigError(where() + ": expected metadata line '# alpha=... dx=... xmax=... f0=...'");
  std::map<std::string, double> meta;
  std::istringstream ms(line.substr(1));
  std::string tok;
  while (ms >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + ": malformed metadata token '" + tok + "'");
    meta[tok.substr(0, eq)] = parse_number(tok.substr(eq + 1), where());
  }
  for (const char* key : {"alpha", "dx", "xmax", "f0"}) {
    if (!meta.count(key)) throw ConfigError(where() + ": metadata is missing " + key);
  }
  const Space s(WeightSpec{meta["alpha"]}, GridSpec{meta["xmax"], meta["dx"]});

  if (!std::getline(is, line)) throw ConfigError(origin + ": missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CurveCsvKind kind;
  if (line == "x,value") {
    kind = CurveCsvKind::Values;
  } else if (line == "x,deriv") {
    kind = CurveCsvKind::Derivatives;
  } else {
    throw ConfigError(where() + ": header must be 'x,value' or 'x,deriv'");
  }

  std::vector<double> vals;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(where() + ": expected two columns");
    const double x = parse_number(line.substr(0, comma), where());
    const double v = parse_number(line.substr(comma + 1), where());
    const std::size_t i = vals.size();
    const double expect = kind == CurveCsvKind::Values ? s.node(i) : s.midpoint(i);
    if (std::abs(x - expect) > 1e-9 * std::max(1.0, s.x_max())) {
      throw ConfigError(where() + ": x = " + format_double(x) + " is not the expected grid point " + format_double(expect));
    }
    vals.push_back(v);
  }
  if (kind == CurveCsvKind::Values) {
    if (vals.size() != s.cells() + 1) throw ConfigError(origin + ": expected " + std::to_string(s.cells() + 1) + " node rows");
    if (std::abs(vals[0] - meta["f0"]) > 1e-12 * std::max(1.0, std::abs(vals[0]))) {
      throw ConfigError(origin + ": f0 metadata disagrees with the first value row");
    }
    return Curve::from_nodes(s, vals);
  }
  if (vals.size() != s.cells()) throw ConfigError(origin + ": expected " + std::to_string(s.cells()) + " derivative rows");
  return Curve(s, meta["f0"], std::move(vals));
}

Curve read_curve_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open curve file " + path);
  return read_curve_csv(is, path);
}

}  // namespace fcurve
