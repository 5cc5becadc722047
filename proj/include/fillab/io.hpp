#pragma once

#include "fillab/common.hpp"
#include "fillab/core.hpp"

#include <string>
#include <vector>

namespace fillab::io {

/// System definition schema:
/// {"switching":"z","X":{"poly":[[i,j,k,cx,cy,cz],...]},"Y":{"poly":[...]}}
FilippovSystem parse_system_json(const std::string& text);
FilippovSystem load_system_json(const std::string& path);
std::string system_to_json(const FilippovSystem& sys);

std::string fmt17(double v);
std::string fmt6(double v);

/// CSV with 17-significant-digit round-trip formatting. Cells arrive
/// preformatted so mixed text/number tables stay simple.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> num_row(const std::vector<double>& vals);

struct SvgCurve {
  std::string name;
  std::string color = "#1f77b4";
  std::vector<Vec2> pts;
  double width = 1.5;
  bool dashed = false;
};

struct SvgOptions {
  int width = 720;
  int height = 540;
  std::string title;
  std::string xlabel = "x";
  std::string ylabel = "y";
};

/// Standalone deterministic SVG: one polyline per curve, axis lines, legend.
/// 6 significant digits everywhere. Throws EmptyInput for no curves.
std::string render_svg(const std::vector<SvgCurve>& curves,
                       const SvgOptions& opts = {});

void write_file(const std::string& path, const std::string& content);

}  // namespace fillab::io
