// Board geometry: goal coordinates, clipping region, nearest-goal
// quantization and Voronoi mass integration over a regular grid.
#pragma once

#include "planchette/alphabet.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <utility>

namespace planchette {

using Position = Eigen::Vector2d;
using GoalMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct Bounds {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool contains(const Position& p) const
    {
        return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
    }
    bool operator==(const Bounds&) const = default;
};

/// Symbol set, one goal per symbol (row i of goals() belongs to Symbol i), and
/// the rectangle the planchette is confined to.
class BoardLayout {
public:
    /// Throws ConfigError if a goal is out of bounds or two goals coincide.
    BoardLayout(Alphabet alphabet, GoalMatrix goals, Bounds bounds);

    const Alphabet& alphabet() const { return alphabet_; }
    const GoalMatrix& goals() const { return goals_; }
    const Bounds& bounds() const { return bounds_; }
    std::size_t size() const { return alphabet_.size(); }

    Position goal(Symbol s) const { return goals_.row(s).transpose(); }

private:
    Alphabet alphabet_;
    GoalMatrix goals_;
    Bounds bounds_;
};

/// 7x4 unit grid {0..6}x{0..3}; BOS at (3,0); a..z then EOS fill the other
/// cells row-major (y ascending, then x); bounds [-1,7]x[-1,4].
BoardLayout default_board();

Position clip(const BoardLayout& board, const Position& p);

/// Argmin of Euclidean distance; ties go to the lower symbol index.
Symbol nearest_goal(const BoardLayout& board, const Position& p);

/// Regular grid of square cells anchored at the lower-left corner of a bounds
/// rectangle. Cell (i, j) spans x in [x0 + i*step, x0 + (i+1)*step).
struct GridSpec {
    double x0 = 0.0;
    double y0 = 0.0;
    double step = 0.1;
    Eigen::Index nx = 0;
    Eigen::Index ny = 0;

    static GridSpec covering(const Bounds& bounds, double step);

    Position center(Eigen::Index i, Eigen::Index j) const
    {
        return {x0 + (static_cast<double>(i) + 0.5) * step, y0 + (static_cast<double>(j) + 0.5) * step};
    }
    /// Cell containing p, with points on the upper edges folded into the last cell.
    std::pair<Eigen::Index, Eigen::Index> cell_of(const Position& p) const;
    bool operator==(const GridSpec&) const = default;
};

/// Assigns each grid cell's probability to the nearest goal. `density` is
/// nx-by-ny and must sum to 1 within 1e-6 (std::invalid_argument otherwise).
Eigen::VectorXd voronoi_cell_mass(const BoardLayout& board, const GridSpec& grid,
                                  const Eigen::ArrayXXd& density);

/// `bounds<TAB>x_min<TAB>x_max<TAB>y_min<TAB>y_max` then `symbol<TAB>x<TAB>y`.
BoardLayout read_board(std::istream& in);
BoardLayout load_board(const std::string& path);
void write_board(std::ostream& out, const BoardLayout& board);

}  // namespace planchette
