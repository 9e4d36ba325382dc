#pragma once

#include <iosfwd>
#include <string>

#include "fcurve/space.hpp"

namespace fcurve {

// Curve CSV layout:
//   # alpha=<a> dx=<d> xmax=<m> f0=<v>
//   x,value          (one row per node)   or
//   x,deriv          (one row per cell midpoint)
enum class CurveCsvKind { Values, Derivatives };

void write_curve_csv(std::ostream& os, const Curve& f, CurveCsvKind kind = CurveCsvKind::Values);
void write_curve_csv_file(const std::string& path, const Curve& f, CurveCsvKind kind = CurveCsvKind::Values);
Curve read_curve_csv(std::istream& is, const std::string& origin = "<stream>");
Curve read_curve_csv_file(const std::string& path);

// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

}  // namespace fcurve
