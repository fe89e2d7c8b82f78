// Collective Langevin planchette dynamics: per-agent actions, the summed
// collective update, vote-based character selection and the outer
// sequence-generation loop.
#pragma once

#include "planchette/board.hpp"
#include "planchette/corpus_lm.hpp"
#include "planchette/energy.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace planchette {

/// marginal: each agent descends its effective (goal-averaged) energy.
/// resample: each agent descends toward one goal drawn from its model every
/// delta_t steps.
enum class GoalMode { marginal, resample };

struct DynamicsConfig {
    double eta = 0.1;
    int delta_t = 1;
    int t_max_inner = 2000;
    double vote_fraction = 0.05;
    int t_max_outer = 20;
    GoalMode mode = GoalMode::marginal;
    PotentialParams params{};
    std::uint64_t seed = 0;
    /// Start each character from the previous trajectory's last position
    /// instead of the BOS goal.
    bool continue_from_previous = false;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
    /// ceil(vote_fraction * t_max_inner)
    int vote_steps() const;
    int burn_in() const { return t_max_inner - vote_steps(); }
};

struct AgentSpec {
    std::shared_ptr<const CharModel> model;
    double noise_d = 0.01;

    double temperature(double eta) const { return noise_d / eta; }
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);
/// Independent stream seed for (seed, key); used for trials and agent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

/// One seeded random stream. Gaussians come from std::normal_distribution over
/// a 64-bit Mersenne Twister.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    /// x first, then y.
    Eigen::Vector2d normal2()
    {
        const double x = normal();
        return {x, normal()};
    }
    double uniform() { return std::generate_canonical<double, 53>(engine_); }
    /// Inverse-CDF draw from a probability vector.
    Symbol categorical(const Eigen::VectorXd& probs);

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Sampler state for one trial: agents, one stream per agent plus one goal
/// stream, the current energy context and the inner-loop clock.
class CollectiveDynamics {
public:
    CollectiveDynamics(BoardLayout board, std::vector<AgentSpec> agents, DynamicsConfig cfg);

    /// Queries every agent's model for `context` and restarts the inner clock.
    void set_context(std::span<const Symbol> context);
    /// Uses explicit per-agent distributions and restarts the inner clock.
    void set_distributions(std::vector<Eigen::VectorXd> dists);

    /// -eta * grad E_i(p) + sqrt(2 D_i) * xi, consuming one Gaussian pair
    /// from agent i's stream. The gradient is the effective one in marginal
    /// mode and the elemental one toward the current sampled goal otherwise.
    Eigen::Vector2d agent_action(std::size_t agent, const Position& p);

    /// clip(p + sum_i a_i); agents act in index order. In resample mode the
    /// goals are redrawn whenever the clock is a positive multiple of delta_t.
    Position step(const Position& p);

    double fused_energy_at(const Position& p) const;

    const BoardLayout& board() const { return board_; }
    const DynamicsConfig& config() const { return cfg_; }
    const std::vector<AgentSpec>& agents() const { return agents_; }
    const EnergyContext& energy() const;
    const std::vector<Symbol>& sampled_goals() const { return goals_; }

    double fused_noise() const;
    double temperature() const { return fused_noise() / cfg_.eta; }

private:
    void resample_goals();

    BoardLayout board_;
    std::vector<AgentSpec> agents_;
    DynamicsConfig cfg_;
    std::vector<RngStream> agent_streams_;
    RngStream goal_stream_;
    std::optional<EnergyContext> ctx_;
    std::vector<Symbol> goals_;
    long clock_ = 0;
};

/// -eta * grad E_fused + sqrt(2 D_fused) xi, clipped. Reference single-noise
/// ULA driver.
Position centralized_ula_step(const Position& p, const EnergyContext& ctx, double eta, double d_fused,
                              RngStream& rng);

inline constexpr Symbol kNoVote = -1;

struct Trajectory {
    std::vector<Position> positions;    // t_max_inner + 1 entries
    std::vector<double> fused_energy;   // E_fused(positions[t + 1])
    std::vector<Symbol> step_votes;     // kNoVote during burn-in
    Eigen::VectorXi votes;              // histogram over the alphabet
    Symbol selected = kNoVote;
};

/// Runs one inner loop for `context` from `start`. The selected symbol is the
/// vote argmax excluding BOS (ties to the lower index); if every vote went to
/// BOS the nearest non-BOS goal of the final position is taken.
Trajectory select_character(CollectiveDynamics& dyn, std::span<const Symbol> context, const Position& start);

/// Same, with the inner loop driven by explicit per-agent distributions.
Trajectory select_character(CollectiveDynamics& dyn, std::vector<Eigen::VectorXd> dists, const Position& start);

struct GenerationRecord {
    std::vector<Symbol> sequence;  // EOS-terminated unless t_max_outer was reached
    std::vector<Trajectory> per_char;
    std::uint64_t seed = 0;

    /// Letters before the terminal EOS.
    std::string word(const Alphabet& alphabet) const;
    bool terminated(const Alphabet& alphabet) const
    {
        return !sequence.empty() && sequence.back() == alphabet.eos();
    }
};

/// Outer loop; seeds all streams from cfg.seed. With keep_paths = false the
/// per-step positions, energies and step votes are dropped after selection.
GenerationRecord generate_sequence(const BoardLayout& board, const std::vector<AgentSpec>& agents,
                                   const DynamicsConfig& cfg, bool keep_paths = true);

}  // namespace planchette
