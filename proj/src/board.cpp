#include "planchette/board.hpp"

#include "planchette/csv.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace planchette {

BoardLayout::BoardLayout(Alphabet alphabet, GoalMatrix goals, Bounds bounds)
    : alphabet_(std::move(alphabet)), goals_(std::move(goals)), bounds_(bounds)
{
    if (goals_.rows() != static_cast<Eigen::Index>(alphabet_.size()))
        throw ConfigError("board: one goal per symbol is required");
    if (!(bounds_.x_min < bounds_.x_max) || !(bounds_.y_min < bounds_.y_max))
        throw ConfigError("board: empty bounds");
    for (Eigen::Index i = 0; i < goals_.rows(); ++i) {
        const Position g = goals_.row(i).transpose();
        if (!g.allFinite() || !bounds_.contains(g))
            throw ConfigError("board: goal of '" + alphabet_.name(static_cast<Symbol>(i)) + "' is out of bounds");
        for (Eigen::Index k = 0; k < i; ++k)
            if (goals_.row(k) == goals_.row(i))
                throw ConfigError("board: goals of '" + alphabet_.name(static_cast<Symbol>(k)) + "' and '" +
                                  alphabet_.name(static_cast<Symbol>(i)) + "' coincide");
    }
}

BoardLayout default_board()
{
    Alphabet alphabet = Alphabet::standard();
    GoalMatrix goals(static_cast<Eigen::Index>(alphabet.size()), 2);
    const Position bos_goal(3.0, 0.0);
    goals.row(alphabet.bos()) = bos_goal.transpose();

    // Letters then EOS, in symbol order, skip the BOS cell.
    Symbol next = 0;
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 7; ++x) {
            const Position cell(x, y);
            if (cell == bos_goal) continue;
            if (next == alphabet.bos()) ++next;
            goals.row(next++) = cell.transpose();
        }
    }
    return BoardLayout(std::move(alphabet), std::move(goals), Bounds{-1.0, 7.0, -1.0, 4.0});
}

Position clip(const BoardLayout& board, const Position& p)
{
    const Bounds& b = board.bounds();
    return {std::clamp(p.x(), b.x_min, b.x_max), std::clamp(p.y(), b.y_min, b.y_max)};
}

Symbol nearest_goal(const BoardLayout& board, const Position& p)
{
    Eigen::Index best = 0;
    // Strict < keeps the lowest index on ties.
    (board.goals().rowwise() - p.transpose()).rowwise().squaredNorm().minCoeff(&best);
    return static_cast<Symbol>(best);
}

GridSpec GridSpec::covering(const Bounds& bounds, double step)
{
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    GridSpec g;
    g.x0 = bounds.x_min;
    g.y0 = bounds.y_min;
    g.step = step;
    g.nx = static_cast<Eigen::Index>(std::ceil(bounds.width() / step - 1e-9));
    g.ny = static_cast<Eigen::Index>(std::ceil(bounds.height() / step - 1e-9));
    return g;
}

std::pair<Eigen::Index, Eigen::Index> GridSpec::cell_of(const Position& p) const
{
    auto index = [this](double v, double origin, Eigen::Index n) {
        const auto k = static_cast<Eigen::Index>(std::floor((v - origin) / step));
        return std::clamp<Eigen::Index>(k, 0, n - 1);
    };
    return {index(p.x(), x0, nx), index(p.y(), y0, ny)};
}

Eigen::VectorXd voronoi_cell_mass(const BoardLayout& board, const GridSpec& grid,
                                  const Eigen::ArrayXXd& density)
{
    if (density.rows() != grid.nx || density.cols() != grid.ny)
        throw std::invalid_argument("density shape does not match grid");
    if ((density < 0.0).any() || std::abs(density.sum() - 1.0) > 1e-6)
        throw std::invalid_argument("density must be nonnegative and sum to 1");
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(board.size()));
    for (Eigen::Index j = 0; j < grid.ny; ++j)
        for (Eigen::Index i = 0; i < grid.nx; ++i)
            mass[nearest_goal(board, grid.center(i, j))] += density(i, j);
    return mass;
}

BoardLayout read_board(std::istream& in)
{
    std::string line;
    std::optional<Bounds> bounds;
    std::vector<std::string> names;
    std::vector<Position> goals;
    int lineno = 0;
    auto number = [&](const std::string& field) {
        try {
            std::size_t used = 0;
            const double v = std::stod(field, &used);
            if (used != field.size()) throw std::invalid_argument(field);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("board line " + std::to_string(lineno) + ": bad number '" + field + "'");
        }
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split(line, '\t');
        if (!bounds) {
            if (fields.size() != 5 || fields[0] != "bounds")
                throw ConfigError("board: first record must be bounds<TAB>x_min<TAB>x_max<TAB>y_min<TAB>y_max");
            bounds = Bounds{number(fields[1]), number(fields[2]), number(fields[3]), number(fields[4])};
            continue;
        }
        if (fields.size() != 3) throw ConfigError("board line " + std::to_string(lineno) + ": expected symbol<TAB>x<TAB>y");
        names.push_back(fields[0]);
        goals.emplace_back(number(fields[1]), number(fields[2]));
    }
    if (!bounds) throw ConfigError("board: missing bounds record");
    GoalMatrix m(static_cast<Eigen::Index>(goals.size()), 2);
    for (std::size_t i = 0; i < goals.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = goals[i].transpose();
    return BoardLayout(Alphabet(std::move(names)), std::move(m), *bounds);
}

BoardLayout load_board(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open board file '" + path + "'");
    return read_board(in);
}

void write_board(std::ostream& out, const BoardLayout& board)
{
    const Bounds& b = board.bounds();
    out << "bounds\t" << format_double(b.x_min) << '\t' << format_double(b.x_max) << '\t'
        << format_double(b.y_min) << '\t' << format_double(b.y_max) << '\n';
    for (std::size_t i = 0; i < board.size(); ++i) {
        const auto s = static_cast<Symbol>(i);
        const Position g = board.goal(s);
        out << board.alphabet().name(s) << '\t' << format_double(g.x()) << '\t' << format_double(g.y()) << '\n';
    }
}

}  // namespace planchette
