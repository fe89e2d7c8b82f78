// Brute-force references for the sampler: the grid Gibbs-Boltzmann field of
// the fused energy, empirical occupation histograms, character masses over
// Voronoi cells, and the character-level product-of-experts comparison.
#pragma once

#include "planchette/board.hpp"
#include "planchette/dynamics.hpp"
#include "planchette/energy.hpp"

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace planchette {

/// Cell probabilities proportional to exp(-E_fused(center) / T) over the
/// board rectangle.
struct GibbsField {
    GridSpec grid;
    Eigen::ArrayXXd energy;  // E_fused at cell centers
    Eigen::ArrayXXd probs;   // nonnegative, sums to 1
    double temperature = 0.0;

    /// -sum p ln p
    double entropy() const;
    /// Merges factor x factor blocks of cells; factor must divide nx and ny.
    GibbsField coarsened(int factor) const;
};

/// grid_step must be positive and at most a tenth of the smaller board
/// extent. Energies are shifted by their minimum before exponentiation.
GibbsField gibbs_oracle(const EnergyContext& ctx, double temperature, double grid_step);

struct Histogram {
    GridSpec grid;
    Eigen::ArrayXXd counts;

    double total() const { return counts.sum(); }
    Eigen::ArrayXXd normalized() const { return counts / total(); }
};

/// Runs `steps` collective steps from `start` on the context already set in
/// `dyn` and bins x(t) for t > burn_in.
Histogram empirical_histogram(CollectiveDynamics& dyn, const Position& start, long steps, long burn_in,
                              double grid_step);

/// Convenience form: fresh dynamics for `context`, started at the BOS goal.
Histogram empirical_histogram(const BoardLayout& board, const std::vector<AgentSpec>& agents,
                              std::span<const Symbol> context, const DynamicsConfig& cfg, long steps,
                              long burn_in, double grid_step);

/// 1/2 sum |a - b|. Shapes must match and both inputs must sum to 1 within
/// 1e-6 (std::invalid_argument otherwise).
template <typename DerivedA, typename DerivedB>
double total_variation(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("total_variation: shape mismatch");
    const auto& x = a.derived().array();
    const auto& y = b.derived().array();
    if (std::abs(x.sum() - 1.0) > 1e-6 || std::abs(y.sum() - 1.0) > 1e-6)
        throw std::invalid_argument("total_variation: inputs must be normalized");
    return 0.5 * (x - y).abs().sum();
}

/// Gibbs mass of each symbol's Voronoi cell, BOS included.
Eigen::VectorXd char_mass_oracle(const EnergyContext& ctx, double temperature, double grid_step);

/// Zeroes BOS and renormalizes: the distribution over selectable symbols.
Eigen::VectorXd selectable_masses(const Eigen::VectorXd& masses, const Alphabet& alphabet);

struct PoeCheck {
    double tv = 0.0;
    Eigen::VectorXd product;       // normalized prod_i masses_i^{e_i}
    std::vector<Symbol> excluded;  // zero in every component
};

/// TV between `cocre` and the normalized tempered product of `agent_masses`.
/// Exponents must be positive and sum to 1 within 1e-9.
PoeCheck poe_char_check(std::span<const Eigen::VectorXd> agent_masses, std::span<const double> exponents,
                        const Eigen::VectorXd& cocre);

/// CSV with columns x,y,E_fused,prob (row-major over y then x). `energy`
/// may be empty, in which case the E_fused column is left blank.
std::string field_csv(const GridSpec& grid, const Eigen::ArrayXXd& energy, const Eigen::ArrayXXd& prob);

}  // namespace planchette
