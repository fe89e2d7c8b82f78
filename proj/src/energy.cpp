#include "planchette/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace planchette {

double effective_energy(const Position& p, const Eigen::VectorXd& dist, const BoardLayout& board,
                        const PotentialParams& params)
{
    return dist.dot(goal_energies<double>(p, board.goals(), params));
}

Eigen::Vector2d effective_gradient(const Position& p, const Eigen::VectorXd& dist, const BoardLayout& board,
                                   const PotentialParams& params)
{
    return goal_gradients<double>(p, board.goals(), params).transpose() * dist;
}

EnergyContext::EnergyContext(BoardLayout board, std::vector<Eigen::VectorXd> dists, PotentialParams params)
    : board_(std::move(board)), dists_(std::move(dists)), params_(params)
{
    if (!(params_.r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
    if (dists_.empty()) throw std::invalid_argument("energy context needs at least one agent");
    for (const auto& d : dists_) {
        if (d.size() != static_cast<Eigen::Index>(board_.size()))
            throw std::invalid_argument("distribution size does not match board");
        if ((d.array() < 0.0).any() || std::abs(d.sum() - 1.0) > 1e-9)
            throw std::invalid_argument("distribution must be nonnegative and sum to 1");
    }
}

Eigen::VectorXd EnergyContext::fused_weights() const
{
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dists_.front().size());
    for (const auto& d : dists_) w += d;
    return w;
}

double fused_energy(const Position& p, const EnergyContext& ctx)
{
    double total = 0.0;
    for (const auto& d : ctx.dists()) total += effective_energy(p, d, ctx.board(), ctx.params());
    return total;
}

Eigen::Vector2d fused_gradient(const Position& p, const EnergyContext& ctx)
{
    Eigen::Vector2d total = Eigen::Vector2d::Zero();
    for (const auto& d : ctx.dists()) total += effective_gradient(p, d, ctx.board(), ctx.params());
    return total;
}

}  // namespace planchette
