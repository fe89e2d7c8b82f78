// Deterministic SVG export of board fields and planchette paths.
#pragma once

#include "planchette/board.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace planchette {

struct SvgStyle {
    double pixels_per_unit = 60.0;
    double margin = 20.0;  // pixels
};

/// Board frame and labelled goal markers; `field` (nx x ny over `grid`) is
/// drawn as a grey-scale heatmap when non-empty, `path` as a single polyline
/// when it has at least one point.
std::string render_svg(const BoardLayout& board, const GridSpec& grid, const Eigen::ArrayXXd& field,
                       const std::vector<Position>& path, const SvgStyle& style = {});

std::string render_field_svg(const BoardLayout& board, const GridSpec& grid, const Eigen::ArrayXXd& field,
                             const SvgStyle& style = {});
std::string render_trajectory_svg(const BoardLayout& board, const std::vector<Position>& path,
                                  const SvgStyle& style = {});

}  // namespace planchette
