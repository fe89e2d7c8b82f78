#include "planchette/oracle.hpp"

#include "planchette/csv.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace planchette {

double GibbsField::entropy() const
{
    return -(probs > 0.0).select(probs * probs.log(), 0.0).sum();
}

GibbsField GibbsField::coarsened(int factor) const
{
    if (factor < 1 || grid.nx % factor != 0 || grid.ny % factor != 0)
        throw std::invalid_argument("coarsening factor must divide the grid");
    GibbsField out;
    out.temperature = temperature;
    out.grid = grid;
    out.grid.step = grid.step * factor;
    out.grid.nx = grid.nx / factor;
    out.grid.ny = grid.ny / factor;
    out.probs = Eigen::ArrayXXd::Zero(out.grid.nx, out.grid.ny);
    out.energy = Eigen::ArrayXXd::Zero(out.grid.nx, out.grid.ny);
    for (Eigen::Index j = 0; j < out.grid.ny; ++j) {
        for (Eigen::Index i = 0; i < out.grid.nx; ++i) {
            out.probs(i, j) = probs.block(i * factor, j * factor, factor, factor).sum();
            if (energy.size() != 0) out.energy(i, j) = energy.block(i * factor, j * factor, factor, factor).mean();
        }
    }
    return out;
}

GibbsField gibbs_oracle(const EnergyContext& ctx, double temperature, double grid_step)
{
    const Bounds& b = ctx.board().bounds();
    if (!(temperature > 0.0)) throw std::invalid_argument("gibbs_oracle: temperature must be positive");
    if (!(grid_step > 0.0) || grid_step > std::min(b.width(), b.height()) / 10.0 + 1e-12)
        throw std::invalid_argument("gibbs_oracle: grid step must be in (0, min extent / 10]");

    GibbsField field;
    field.grid = GridSpec::covering(b, grid_step);
    field.temperature = temperature;
    field.energy.resize(field.grid.nx, field.grid.ny);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> inside(field.grid.nx, field.grid.ny);
    for (Eigen::Index j = 0; j < field.grid.ny; ++j) {
        for (Eigen::Index i = 0; i < field.grid.nx; ++i) {
            const Position c = field.grid.center(i, j);
            inside(i, j) = b.contains(c);
            field.energy(i, j) = fused_energy(c, ctx);
        }
    }
    const double e_min = inside.select(field.energy, std::numeric_limits<double>::infinity()).minCoeff();
    field.probs = inside.select((-(field.energy - e_min) / temperature).exp(), 0.0);
    field.probs /= field.probs.sum();
    return field;
}

Histogram empirical_histogram(CollectiveDynamics& dyn, const Position& start, long steps, long burn_in,
                              double grid_step)
{
    if (burn_in < 0 || steps <= burn_in) throw std::invalid_argument("empirical_histogram: need steps > burn_in >= 0");
    Histogram h;
    h.grid = GridSpec::covering(dyn.board().bounds(), grid_step);
    h.counts = Eigen::ArrayXXd::Zero(h.grid.nx, h.grid.ny);
    Position x = clip(dyn.board(), start);
    for (long t = 1; t <= steps; ++t) {
        x = dyn.step(x);
        if (t > burn_in) {
            const auto [i, j] = h.grid.cell_of(x);
            h.counts(i, j) += 1.0;
        }
    }
    return h;
}

Histogram empirical_histogram(const BoardLayout& board, const std::vector<AgentSpec>& agents,
                              std::span<const Symbol> context, const DynamicsConfig& cfg, long steps,
                              long burn_in, double grid_step)
{
    CollectiveDynamics dyn(board, agents, cfg);
    dyn.set_context(context);
    return empirical_histogram(dyn, board.goal(board.alphabet().bos()), steps, burn_in, grid_step);
}

Eigen::VectorXd char_mass_oracle(const EnergyContext& ctx, double temperature, double grid_step)
{
    const GibbsField field = gibbs_oracle(ctx, temperature, grid_step);
    return voronoi_cell_mass(ctx.board(), field.grid, field.probs);
}

Eigen::VectorXd selectable_masses(const Eigen::VectorXd& masses, const Alphabet& alphabet)
{
    Eigen::VectorXd out = masses;
    out[alphabet.bos()] = 0.0;
    const double total = out.sum();
    if (!(total > 0.0)) throw std::domain_error("no mass outside the BOS cell");
    return out / total;
}

PoeCheck poe_char_check(std::span<const Eigen::VectorXd> agent_masses, std::span<const double> exponents,
                        const Eigen::VectorXd& cocre)
{
    if (agent_masses.empty() || agent_masses.size() != exponents.size())
        throw std::invalid_argument("poe_char_check: one exponent per agent is required");
    double sum = 0.0;
    for (double e : exponents) {
        if (!(e > 0.0)) throw std::invalid_argument("poe_char_check: exponents must be positive");
        sum += e;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("poe_char_check: exponents must sum to 1");

    const Eigen::Index n = cocre.size();
    PoeCheck check;
    check.product = Eigen::VectorXd::Zero(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        bool any_positive = false;
        double log_prod = 0.0;
        for (std::size_t i = 0; i < agent_masses.size(); ++i) {
            const double m = agent_masses[i][c];
            any_positive = any_positive || m > 0.0;
            log_prod += exponents[i] * std::log(m);
        }
        if (!any_positive) {
            check.excluded.push_back(static_cast<Symbol>(c));
            continue;
        }
        check.product[c] = std::exp(log_prod);
    }
    if (!check.excluded.empty() && check.excluded.size() != static_cast<std::size_t>(n))
        std::clog << "warning: poe_char_check excluded " << check.excluded.size()
                  << " symbol(s) with zero mass in every component\n";
    check.product /= check.product.sum();
    check.tv = total_variation(cocre, check.product);
    return check;
}

std::string field_csv(const GridSpec& grid, const Eigen::ArrayXXd& energy, const Eigen::ArrayXXd& prob)
{
    std::ostringstream out;
    out << "x,y,E_fused,prob\n";
    for (Eigen::Index j = 0; j < grid.ny; ++j) {
        for (Eigen::Index i = 0; i < grid.nx; ++i) {
            const Position c = grid.center(i, j);
            out << format_double(c.x()) << ',' << format_double(c.y()) << ',';
            if (energy.size() != 0) out << format_double(energy(i, j));
            out << ',' << format_double(prob(i, j)) << '\n';
        }
    }
    return out.str();
}

}  // namespace planchette
