#include "planchette/render.hpp"

#include "planchette/csv.hpp"

#include <cmath>
#include <sstream>

namespace planchette {

namespace {

class Canvas {
public:
    Canvas(const Bounds& b, const SvgStyle& s) : b_(b), s_(s) {}

    double x(double u) const { return s_.margin + (u - b_.x_min) * s_.pixels_per_unit; }
    // SVG y grows downward.
    double y(double v) const { return s_.margin + (b_.y_max - v) * s_.pixels_per_unit; }
    double len(double d) const { return d * s_.pixels_per_unit; }
    double width() const { return 2.0 * s_.margin + len(b_.width()); }
    double height() const { return 2.0 * s_.margin + len(b_.height()); }

private:
    Bounds b_;
    SvgStyle s_;
};

std::string num(double v)
{
    // Two decimals keep files small and stable.
    return format_double(std::round(v * 100.0) / 100.0);
}

std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const BoardLayout& board, const GridSpec& grid, const Eigen::ArrayXXd& field,
                       const std::vector<Position>& path, const SvgStyle& style)
{
    const Bounds& b = board.bounds();
    const Canvas cv(b, style);
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(cv.width()) << "\" height=\""
        << num(cv.height()) << "\" viewBox=\"0 0 " << num(cv.width()) << ' ' << num(cv.height()) << "\">\n";
    out << "<rect class=\"board\" x=\"" << num(cv.x(b.x_min)) << "\" y=\"" << num(cv.y(b.y_max)) << "\" width=\""
        << num(cv.len(b.width())) << "\" height=\"" << num(cv.len(b.height()))
        << "\" fill=\"white\" stroke=\"black\"/>\n";

    if (field.size() != 0) {
        const double lo = field.minCoeff();
        const double hi = field.maxCoeff();
        const double span = hi > lo ? hi - lo : 1.0;
        out << "<g class=\"field\">\n";
        for (Eigen::Index j = 0; j < grid.ny; ++j) {
            for (Eigen::Index i = 0; i < grid.nx; ++i) {
                const Position c = grid.center(i, j);
                const int shade = static_cast<int>(std::lround(255.0 * (1.0 - (field(i, j) - lo) / span)));
                out << "<rect x=\"" << num(cv.x(c.x() - grid.step / 2)) << "\" y=\""
                    << num(cv.y(c.y() + grid.step / 2)) << "\" width=\"" << num(cv.len(grid.step))
                    << "\" height=\"" << num(cv.len(grid.step)) << "\" fill=\"rgb(" << shade << ',' << shade << ','
                    << shade << ")\"/>\n";
            }
        }
        out << "</g>\n";
    }

    out << "<g class=\"goals\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">\n";
    const Alphabet& alphabet = board.alphabet();
    for (Symbol s = 0; s < static_cast<Symbol>(board.size()); ++s) {
        const Position& g = board.goal(s);
        out << "<circle cx=\"" << num(cv.x(g.x())) << "\" cy=\"" << num(cv.y(g.y()))
            << "\" r=\"4\" fill=\"steelblue\"/>\n";
        out << "<text x=\"" << num(cv.x(g.x())) << "\" y=\"" << num(cv.y(g.y()) - 7) << "\">"
            << xml_escape(alphabet.name(s)) << "</text>\n";
    }
    out << "</g>\n";

    if (!path.empty()) {
        out << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"crimson\" stroke-width=\"1\" points=\"";
        for (std::size_t k = 0; k < path.size(); ++k)
            out << (k ? " " : "") << num(cv.x(path[k].x())) << ',' << num(cv.y(path[k].y()));
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_field_svg(const BoardLayout& board, const GridSpec& grid, const Eigen::ArrayXXd& field,
                             const SvgStyle& style)
{
    return render_svg(board, grid, field, {}, style);
}

std::string render_trajectory_svg(const BoardLayout& board, const std::vector<Position>& path, const SvgStyle& style)
{
    return render_svg(board, GridSpec{}, Eigen::ArrayXXd(), path, style);
}

}  // namespace planchette
