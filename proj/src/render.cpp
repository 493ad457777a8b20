#include "reachguard/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "reachguard/errors.hpp"

namespace reachguard {

namespace {

constexpr double kScale = 6.0;  // px per m

struct View {
  double x0, y0, x1, y1;
  double px(double x) const { return (x - x0) * kScale; }
  double py(double y) const { return (y1 - y) * kScale; }  // SVG y points down
  double width() const { return (x1 - x0) * kScale; }
  double height() const { return (y1 - y0) * kScale; }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void header(std::ostringstream& os, const View& v) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(v.width()) << "\" height=\""
     << num(v.height()) << "\" viewBox=\"0 0 " << num(v.width()) << ' ' << num(v.height()) << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"#f4f4f0\"/>\n";
}

void cells(std::ostringstream& os, const View& v, const OccupancyGrid2D& g, const char* fill, double opacity) {
  os << "<g fill=\"" << fill << "\" fill-opacity=\"" << opacity << "\">\n";
  for (int ix = 0; ix < g.nx; ++ix) {
    for (int iy = 0; iy < g.ny; ++iy) {
      if (!g.at(ix, iy)) continue;
      const double x = g.origin_x + ix * g.cell, y = g.origin_y + (iy + 1) * g.cell;
      os << "<rect x=\"" << num(v.px(x)) << "\" y=\"" << num(v.py(y)) << "\" width=\"" << num(g.cell * kScale)
         << "\" height=\"" << num(g.cell * kScale) << "\"/>\n";
    }
  }
  os << "</g>\n";
}

void vehicle(std::ostringstream& os, const View& v, const AgentState& s, const char* fill) {
  constexpr double len = 4.5, wid = 1.8;
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  os << "<polygon fill=\"" << fill << "\" stroke=\"#222\" stroke-width=\"1\" points=\"";
  for (auto [a, b] : {std::pair{len / 2, wid / 2}, {-len / 2, wid / 2}, {-len / 2, -wid / 2}, {len / 2, -wid / 2}}) {
    os << num(v.px(s.x + c * a - sn * b)) << ',' << num(v.py(s.y + sn * a + c * b)) << ' ';
  }
  os << "\"/>\n";
}

}  // namespace

std::string mask_svg(const OccupancyGrid2D& k, const std::string& title) {
  View v{k.origin_x - 2.0, k.origin_y - 2.0, k.origin_x + k.nx * k.cell + 2.0, k.origin_y + k.ny * k.cell + 2.0};
  v.x0 = std::min(v.x0, -2.0);
  v.y0 = std::min(v.y0, -2.0);
  v.x1 = std::max(v.x1, 2.0);
  v.y1 = std::max(v.y1, 2.0);
  std::ostringstream os;
  header(os, v);
  cells(os, v, k, "#c0392b", 0.7);
  os << "<circle cx=\"" << num(v.px(0)) << "\" cy=\"" << num(v.py(0)) << "\" r=\"3\" fill=\"#222\"/>\n";
  if (!title.empty()) os << "<text x=\"8\" y=\"16\" font-family=\"monospace\" font-size=\"12\">" << title << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string frame_svg(const SimFrame& f) {
  const auto& sc = f.scenario;
  const auto& st = f.step;
  double xmin = std::min({st.ego.x, st.human.x, sc.lane.origin_x}) - 15.0;
  double xmax = std::max({st.ego.x, st.human.x, sc.lane.origin_x}) + 30.0;
  double ymin = std::min(st.ego.y, st.human.y) - 20.0;
  double ymax = std::max(st.ego.y, st.human.y) + 20.0;
  if (!f.nominal.states.empty()) {
    xmax = std::max(xmax, f.nominal.states.back().x + 5.0);
    xmin = std::min(xmin, f.nominal.states.back().x - 5.0);
  }
  const View v{xmin, ymin, xmax, ymax};
  std::ostringstream os;
  header(os, v);

  // Lane centre line and stop line.
  const double c = std::cos(sc.lane.heading), s = std::sin(sc.lane.heading);
  const double reach = (xmax - xmin) + (ymax - ymin);
  os << "<line x1=\"" << num(v.px(sc.lane.origin_x - reach * c)) << "\" y1=\"" << num(v.py(sc.lane.origin_y - reach * s))
     << "\" x2=\"" << num(v.px(sc.lane.origin_x + reach * c)) << "\" y2=\"" << num(v.py(sc.lane.origin_y + reach * s))
     << "\" stroke=\"#999\" stroke-width=\"" << num(3.5 * kScale) << "\" stroke-opacity=\"0.3\"/>\n";
  const double lx = sc.lane.origin_x + sc.stop_line * c, ly = sc.lane.origin_y + sc.stop_line * s;
  os << "<line x1=\"" << num(v.px(lx + 1.75 * s)) << "\" y1=\"" << num(v.py(ly - 1.75 * c)) << "\" x2=\""
     << num(v.px(lx - 1.75 * s)) << "\" y2=\"" << num(v.py(ly + 1.75 * c))
     << "\" stroke=\"#fff\" stroke-width=\"3\"/>\n";

  cells(os, v, f.collision.grid, "#e67e22", 0.25);
  cells(os, v, f.k_world, "#c0392b", 0.6);

  os << "<polyline fill=\"none\" stroke=\"#2c3e50\" stroke-dasharray=\"4 3\" points=\"";
  for (const auto& p : f.nominal.states) os << num(v.px(p.x)) << ',' << num(v.py(p.y)) << ' ';
  os << "\"/>\n";
  vehicle(os, v, st.ego, "#2e86de");
  vehicle(os, v, st.human, "#f39c12");

  char title[200];
  std::snprintf(title, sizeof title, "%s  t=%.1f s  beta=%.3f  %s  a=%.2f  line %.2f m", sc.name.c_str(), st.time,
                st.beta, to_string(st.command.reason), st.command.acceleration, st.dist_to_line);
  os << "<text x=\"8\" y=\"16\" font-family=\"monospace\" font-size=\"12\">" << title << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

}  // namespace reachguard
