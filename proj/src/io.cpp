#include "fillab/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace fillab::io {

namespace {

Poly3 poly_from_json(const nlohmann::json& rows, int axis) {
  Poly3 p;
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != 6)
      throw ParseError("system json: poly rows must be [i,j,k,cx,cy,cz]");
    for (int m = 0; m < 3; ++m)
      if (!row[m].is_number_integer() || row[m].get<int>() < 0)
        throw ParseError("system json: exponents must be non-negative integers");
    const double c = row[3 + axis].get<double>();
    if (!std::isfinite(c))
      throw ParseError("system json: coefficients must be finite");
    p.add(row[0].get<int>(), row[1].get<int>(), row[2].get<int>(), c);
  }
  return p;
}

PolyField3 field_from_json(const nlohmann::json& j) {
  if (!j.contains("poly"))
    throw ParseError("system json: field needs a \"poly\" table");
  PolyField3 f;
  f.x = poly_from_json(j["poly"], 0);
  f.y = poly_from_json(j["poly"], 1);
  f.z = poly_from_json(j["poly"], 2);
  return f;
}

nlohmann::json field_to_json(const PolyField3& f) {
  // Merge the three component tables on the union of exponents.
  std::map<std::array<int, 3>, std::array<double, 3>> merged;
  auto absorb = [&](const Poly3& p, int axis) {
    for (const auto& t : p.terms()) merged[{t.i, t.j, t.k}][axis] = t.c;
  };
  absorb(f.x, 0);
  absorb(f.y, 1);
  absorb(f.z, 2);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [e, c] : merged)
    rows.push_back({e[0], e[1], e[2], c[0], c[1], c[2]});
  return {{"poly", rows}};
}

}  // namespace

FilippovSystem parse_system_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("system json: ") + e.what());
  }
  if (j.value("switching", "") != std::string("z"))
    throw ParseError("system json: only switching \"z\" is supported");
  if (!j.contains("X") || !j.contains("Y"))
    throw ParseError("system json: needs X and Y fields");
  return {SmoothField::polynomial(field_from_json(j["X"])),
          SmoothField::polynomial(field_from_json(j["Y"]))};
}

FilippovSystem load_system_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open system file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system_json(ss.str());
}

std::string system_to_json(const FilippovSystem& sys) {
  if (!sys.above.poly() || !sys.below.poly())
    throw ParseError("system_to_json: only polynomial systems serialize");
  nlohmann::json j;
  j["switching"] = "z";
  j["X"] = field_to_json(*sys.above.poly());
  j["Y"] = field_to_json(*sys.below.poly());
  return j.dump(2);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
}

std::vector<std::string> num_row(const std::vector<double>& vals) {
  std::vector<std::string> r;
  r.reserve(vals.size());
  for (double v : vals) r.push_back(fmt17(v));
  return r;
}

std::string render_svg(const std::vector<SvgCurve>& curves,
                       const SvgOptions& opts) {
  if (curves.empty()) throw EmptyInput("render_svg: no curves");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : curves)
    for (const auto& p : c.pts) {
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
  if (!(xmin <= xmax)) throw EmptyInput("render_svg: curves have no points");
  if (xmax - xmin < 1e-12) {
    xmin -= 1;
    xmax += 1;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 1;
    ymax += 1;
  }
  const double padx = 0.08 * (xmax - xmin), pady = 0.08 * (ymax - ymin);
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;
  const double L = 64, R = 16, T = opts.title.empty() ? 16 : 36, B = 44;
  const double W = opts.width - L - R, H = opts.height - T - B;
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * W; };
  auto sy = [&](double y) { return T + (ymax - y) / (ymax - ymin) * H; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
    << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width
    << " " << opts.height << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << opts.width << "\" height=\""
    << opts.height << "\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    s << "<text x=\"" << fmt6(opts.width / 2.0)
      << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">"
      << opts.title << "</text>\n";
  // Frame and ticks (lines, not polylines: curve count stays exact).
  s << "<line x1=\"" << fmt6(L) << "\" y1=\"" << fmt6(T + H) << "\" x2=\""
    << fmt6(L + W) << "\" y2=\"" << fmt6(T + H)
    << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s << "<line x1=\"" << fmt6(L) << "\" y1=\"" << fmt6(T) << "\" x2=\""
    << fmt6(L) << "\" y2=\"" << fmt6(T + H)
    << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    s << "<line x1=\"" << fmt6(sx(xv)) << "\" y1=\"" << fmt6(T + H)
      << "\" x2=\"" << fmt6(sx(xv)) << "\" y2=\"" << fmt6(T + H + 4)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    s << "<text x=\"" << fmt6(sx(xv)) << "\" y=\"" << fmt6(T + H + 18)
      << "\" text-anchor=\"middle\" font-size=\"11\" "
         "font-family=\"sans-serif\">"
      << fmt6(xv) << "</text>\n";
    s << "<line x1=\"" << fmt6(L - 4) << "\" y1=\"" << fmt6(sy(yv))
      << "\" x2=\"" << fmt6(L) << "\" y2=\"" << fmt6(sy(yv))
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    s << "<text x=\"" << fmt6(L - 8) << "\" y=\"" << fmt6(sy(yv) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\" "
         "font-family=\"sans-serif\">"
      << fmt6(yv) << "</text>\n";
  }
  s << "<text x=\"" << fmt6(L + W / 2) << "\" y=\"" << fmt6(T + H + 36)
    << "\" text-anchor=\"middle\" font-size=\"13\" "
       "font-family=\"sans-serif\">"
    << opts.xlabel << "</text>\n";
  s << "<text x=\"14\" y=\"" << fmt6(T + H / 2)
    << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
       "transform=\"rotate(-90 14 "
    << fmt6(T + H / 2) << ")\">" << opts.ylabel << "</text>\n";

  for (const auto& c : curves) {
    s << "<polyline fill=\"none\" stroke=\"" << c.color << "\" stroke-width=\""
      << fmt6(c.width) << "\"";
    if (c.dashed) s << " stroke-dasharray=\"6 4\"";
    s << " points=\"";
    for (std::size_t i = 0; i < c.pts.size(); ++i)
      s << (i ? " " : "") << fmt6(sx(c.pts[i].x())) << ","
        << fmt6(sy(c.pts[i].y()));
    s << "\"/>\n";
  }
  double ly = T + 14;
  for (const auto& c : curves) {
    if (c.name.empty()) continue;
    s << "<line x1=\"" << fmt6(L + W - 140) << "\" y1=\"" << fmt6(ly - 4)
      << "\" x2=\"" << fmt6(L + W - 112) << "\" y2=\"" << fmt6(ly - 4)
      << "\" stroke=\"" << c.color << "\" stroke-width=\"2\"";
    if (c.dashed) s << " stroke-dasharray=\"6 4\"";
    s << "/>\n";
    s << "<text x=\"" << fmt6(L + W - 106) << "\" y=\"" << fmt6(ly)
      << "\" font-size=\"12\" font-family=\"sans-serif\">" << c.name
      << "</text>\n";
    ly += 18;
  }
  s << "</svg>\n";
  return s.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << content;
}

}  // namespace fillab::io
