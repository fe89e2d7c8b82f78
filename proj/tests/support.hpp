// Shared fixtures for the unit tests.
#pragma once

#include "planchette/board.hpp"
#include "planchette/corpus_lm.hpp"

#include <Eigen/Core>

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace planchette::testing {

inline Vocabulary vocab(std::vector<VocabEntry> entries)
{
    return Vocabulary{std::move(entries)};
}

/// Probability vector over the standard alphabet with the given masses.
inline Eigen::VectorXd dist_of(const Alphabet& alphabet, const std::vector<std::pair<std::string, double>>& masses)
{
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(alphabet.size()));
    for (const auto& [name, m] : masses) d[*alphabet.find(name)] = m;
    return d;
}

inline Eigen::VectorXd point_mass(const Alphabet& alphabet, const std::string& name)
{
    return dist_of(alphabet, {{name, 1.0}});
}

/// Random distribution over emittable symbols (BOS = 0).
inline Eigen::VectorXd random_dist(const Alphabet& alphabet, std::mt19937_64& rng)
{
    std::gamma_distribution<double> g(0.5, 1.0);
    Eigen::VectorXd d(static_cast<Eigen::Index>(alphabet.size()));
    for (Eigen::Index c = 0; c < d.size(); ++c) d[c] = g(rng);
    d[alphabet.bos()] = 0.0;
    return d / d.sum();
}

inline Position random_position(const Bounds& b, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> ux(b.x_min, b.x_max), uy(b.y_min, b.y_max);
    const double x = ux(rng);
    return {x, uy(rng)};
}

/// Alphabet {a, b, EOS, BOS} for toy boards.
inline Alphabet toy_alphabet()
{
    return Alphabet({"a", "b", std::string(kEosName), std::string(kBosName)});
}

}  // namespace planchette::testing
