// Elemental, effective and fused energy landscapes over the board with
// analytic gradients. The Cauchy kernels are templated on scalar so tests can
// evaluate them in extended precision.
#pragma once

#include "planchette/board.hpp"

#include <Eigen/Core>

#include <cmath>
#include <vector>

namespace planchette {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

struct PotentialParams {
    double r0 = 0.3;    // boundary radius, board units
    double phi0 = 0.0;  // constant offset
};

/// 1/2 ln(1 + (r/r0)^2)
template <typename Scalar>
Scalar phi_cauchy(Scalar r, Scalar r0)
{
    using std::log1p;
    const Scalar q = r / r0;
    return Scalar(0.5) * log1p(q * q);
}

/// phi(|p - goal|) + phi0; minimum phi0 at the goal.
template <typename Scalar>
Scalar elemental_energy(const Vector2<Scalar>& p, const Vector2<Scalar>& goal, const PotentialParams& params)
{
    using std::log1p;
    const Scalar r0 = Scalar(params.r0);
    return Scalar(0.5) * log1p((p - goal).squaredNorm() / (r0 * r0)) + Scalar(params.phi0);
}

/// (p - goal) / (r0^2 + |p - goal|^2); norm at most 1/(2 r0).
template <typename Scalar>
Vector2<Scalar> elemental_gradient(const Vector2<Scalar>& p, const Vector2<Scalar>& goal, const PotentialParams& params)
{
    const Scalar r0 = Scalar(params.r0);
    const Vector2<Scalar> d = p - goal;
    return d / (r0 * r0 + d.squaredNorm());
}

/// Per-goal elemental energies at p, one entry per row of `goals`.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> goal_energies(const Vector2<Scalar>& p, const Eigen::MatrixBase<Derived>& goals,
                                                      const PotentialParams& params)
{
    using std::log1p;
    const Scalar r0 = Scalar(params.r0);
    const auto r2 = (goals.template cast<Scalar>().rowwise() - p.transpose()).rowwise().squaredNorm();
    return (Scalar(0.5) * (r2.array() / (r0 * r0)).log1p() + Scalar(params.phi0)).matrix();
}

/// Per-goal elemental gradients at p, one row per goal.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 2> goal_gradients(const Vector2<Scalar>& p, const Eigen::MatrixBase<Derived>& goals,
                                                       const PotentialParams& params)
{
    const Scalar r0 = Scalar(params.r0);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2> d = (-goals.template cast<Scalar>()).rowwise() + p.transpose();
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> denom = r0 * r0 + d.rowwise().squaredNorm().array();
    d.array().colwise() /= denom;
    return d;
}

/// sum_c dist(c) * elemental_energy(p, g_c)
double effective_energy(const Position& p, const Eigen::VectorXd& dist, const BoardLayout& board,
                        const PotentialParams& params);
Eigen::Vector2d effective_gradient(const Position& p, const Eigen::VectorXd& dist, const BoardLayout& board,
                                   const PotentialParams& params);

/// Board, one next-symbol distribution per agent, and potential parameters.
class EnergyContext {
public:
    /// Throws std::invalid_argument if a distribution has the wrong size, is
    /// negative, or does not sum to 1 within 1e-9, or if the list is empty.
    EnergyContext(BoardLayout board, std::vector<Eigen::VectorXd> dists, PotentialParams params);

    const BoardLayout& board() const { return board_; }
    const std::vector<Eigen::VectorXd>& dists() const { return dists_; }
    const PotentialParams& params() const { return params_; }
    std::size_t agents() const { return dists_.size(); }

    /// Sum over agents of the per-agent distributions (fused goal weights).
    Eigen::VectorXd fused_weights() const;

private:
    BoardLayout board_;
    std::vector<Eigen::VectorXd> dists_;
    PotentialParams params_;
};

/// Exactly sum_i effective_energy(p, dists[i]) in agent order.
double fused_energy(const Position& p, const EnergyContext& ctx);
Eigen::Vector2d fused_gradient(const Position& p, const EnergyContext& ctx);

inline Eigen::Vector2d gradient(const Position& p, const Eigen::VectorXd& dist, const BoardLayout& board,
                                const PotentialParams& params)
{
    return effective_gradient(p, dist, board, params);
}
inline Eigen::Vector2d gradient(const Position& p, const EnergyContext& ctx) { return fused_gradient(p, ctx); }

/// Analytic bound on |grad E_fused| for N agents: N / (2 r0).
inline double gradient_norm_bound(std::size_t agents, const PotentialParams& params)
{
    return static_cast<double>(agents) / (2.0 * params.r0);
}

}  // namespace planchette
