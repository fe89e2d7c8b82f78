#include "planchette/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace planchette {

namespace {

constexpr std::uint64_t kGoalStreamKey = 0x676f616c73ULL;  // "goals"

}  // namespace

void DynamicsConfig::validate() const
{
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
    if (t_max_inner < 1) throw ConfigError("t_max_inner must be >= 1");
    if (delta_t < 1 || delta_t > t_max_inner) throw ConfigError("delta_t must be in [1, t_max_inner]");
    if (!(vote_fraction > 0.0) || vote_fraction > 1.0) throw ConfigError("vote_fraction must be in (0, 1]");
    if (t_max_outer < 0) throw ConfigError("t_max_outer must be >= 0");
    if (!(params.r0 > 0.0)) throw ConfigError("r0 must be positive");
}

int DynamicsConfig::vote_steps() const
{
    const double raw = vote_fraction * static_cast<double>(t_max_inner);
    return std::clamp(static_cast<int>(std::ceil(raw - 1e-9)), 1, t_max_inner);
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key)
{
    return seed ^ mix64(key);
}

Symbol RngStream::categorical(const Eigen::VectorXd& probs)
{
    const double u = uniform() * probs.sum();
    double acc = 0.0;
    Symbol last = 0;
    for (Eigen::Index c = 0; c < probs.size(); ++c) {
        if (probs[c] <= 0.0) continue;
        acc += probs[c];
        last = static_cast<Symbol>(c);
        if (u < acc) return last;
    }
    return last;
}

// ---------------------------------------------------------------------------

CollectiveDynamics::CollectiveDynamics(BoardLayout board, std::vector<AgentSpec> agents, DynamicsConfig cfg)
    : board_(std::move(board)), agents_(std::move(agents)), cfg_(cfg),
      goal_stream_(mix64(derive_seed(cfg.seed, kGoalStreamKey)))
{
    cfg_.validate();
    if (agents_.empty()) throw ConfigError("at least one agent is required");
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const AgentSpec& a = agents_[i];
        if (!(a.noise_d >= 0.0) || !std::isfinite(a.noise_d)) throw ConfigError("noise_d must be >= 0");
        if (a.model && !(a.model->alphabet() == board_.alphabet()))
            throw ConfigError("agent model alphabet does not match the board");
        agent_streams_.emplace_back(mix64(derive_seed(cfg.seed, i + 1)));
    }
}

void CollectiveDynamics::set_context(std::span<const Symbol> context)
{
    std::vector<Eigen::VectorXd> dists;
    dists.reserve(agents_.size());
    for (const auto& a : agents_) {
        if (!a.model) throw std::logic_error("agent has no language model");
        dists.push_back(a.model->next_char_dist(context));
    }
    set_distributions(std::move(dists));
}

void CollectiveDynamics::set_distributions(std::vector<Eigen::VectorXd> dists)
{
    if (dists.size() != agents_.size()) throw std::invalid_argument("one distribution per agent is required");
    ctx_.emplace(board_, std::move(dists), cfg_.params);
    clock_ = 0;
    if (cfg_.mode == GoalMode::resample) resample_goals();
}

const EnergyContext& CollectiveDynamics::energy() const
{
    if (!ctx_) throw std::logic_error("no context set");
    return *ctx_;
}

void CollectiveDynamics::resample_goals()
{
    goals_.resize(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) goals_[i] = goal_stream_.categorical(ctx_->dists()[i]);
}

double CollectiveDynamics::fused_noise() const
{
    double d = 0.0;
    for (const auto& a : agents_) d += a.noise_d;
    return d;
}

Eigen::Vector2d CollectiveDynamics::agent_action(std::size_t agent, const Position& p)
{
    const EnergyContext& ctx = energy();
    const Eigen::Vector2d grad =
        cfg_.mode == GoalMode::marginal
            ? effective_gradient(p, ctx.dists()[agent], board_, cfg_.params)
            : elemental_gradient<double>(p, board_.goal(goals_[agent]), cfg_.params);
    return -cfg_.eta * grad + std::sqrt(2.0 * agents_[agent].noise_d) * agent_streams_[agent].normal2();
}

Position CollectiveDynamics::step(const Position& p)
{
    const EnergyContext& ctx = energy();
    if (cfg_.mode == GoalMode::resample && clock_ > 0 && clock_ % cfg_.delta_t == 0) resample_goals();

    // Per-goal terms are shared by all agents.
    const Eigen::Matrix<double, Eigen::Dynamic, 2> terms = goal_gradients<double>(p, board_.goals(), cfg_.params);
    Eigen::Vector2d next = p;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const Eigen::Vector2d grad = cfg_.mode == GoalMode::marginal
                                         ? Eigen::Vector2d(terms.transpose() * ctx.dists()[i])
                                         : Eigen::Vector2d(terms.row(goals_[i]).transpose());
        next += -cfg_.eta * grad + std::sqrt(2.0 * agents_[i].noise_d) * agent_streams_[i].normal2();
    }
    ++clock_;
    return clip(board_, next);
}

double CollectiveDynamics::fused_energy_at(const Position& p) const
{
    const EnergyContext& ctx = energy();
    const Eigen::VectorXd e = goal_energies<double>(p, board_.goals(), cfg_.params);
    double total = 0.0;
    for (const auto& d : ctx.dists()) total += d.dot(e);
    return total;
}

Position centralized_ula_step(const Position& p, const EnergyContext& ctx, double eta, double d_fused,
                              RngStream& rng)
{
    if (!(d_fused >= 0.0)) throw std::invalid_argument("d_fused must be >= 0");
    return clip(ctx.board(), p - eta * fused_gradient(p, ctx) + std::sqrt(2.0 * d_fused) * rng.normal2());
}

// ---------------------------------------------------------------------------

namespace {

Trajectory run_inner_loop(CollectiveDynamics& dyn, const Position& start)
{
    const DynamicsConfig& cfg = dyn.config();
    const BoardLayout& board = dyn.board();
    const int burn_in = cfg.burn_in();

    Trajectory traj;
    traj.positions.reserve(static_cast<std::size_t>(cfg.t_max_inner) + 1);
    traj.fused_energy.reserve(static_cast<std::size_t>(cfg.t_max_inner));
    traj.step_votes.reserve(static_cast<std::size_t>(cfg.t_max_inner));
    traj.votes = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(board.size()));

    Position x = clip(board, start);
    traj.positions.push_back(x);
    for (int t = 1; t <= cfg.t_max_inner; ++t) {
        x = dyn.step(x);
        traj.positions.push_back(x);
        traj.fused_energy.push_back(dyn.fused_energy_at(x));
        if (t > burn_in) {
            const Symbol s = nearest_goal(board, x);
            ++traj.votes[s];
            traj.step_votes.push_back(s);
        } else {
            traj.step_votes.push_back(kNoVote);
        }
    }

    const Symbol bos = board.alphabet().bos();
    int best = 0;
    for (Eigen::Index c = 0; c < traj.votes.size(); ++c) {
        if (static_cast<Symbol>(c) == bos) continue;
        if (traj.votes[c] > best) {
            best = traj.votes[c];
            traj.selected = static_cast<Symbol>(c);
        }
    }
    if (traj.selected == kNoVote) {
        Eigen::VectorXd d2 = (board.goals().rowwise() - x.transpose()).rowwise().squaredNorm();
        d2[bos] = std::numeric_limits<double>::infinity();
        Eigen::Index idx = 0;
        d2.minCoeff(&idx);
        traj.selected = static_cast<Symbol>(idx);
    }
    return traj;
}

}  // namespace

Trajectory select_character(CollectiveDynamics& dyn, std::span<const Symbol> context, const Position& start)
{
    dyn.set_context(context);
    return run_inner_loop(dyn, start);
}

Trajectory select_character(CollectiveDynamics& dyn, std::vector<Eigen::VectorXd> dists, const Position& start)
{
    dyn.set_distributions(std::move(dists));
    return run_inner_loop(dyn, start);
}

std::string GenerationRecord::word(const Alphabet& alphabet) const
{
    std::span<const Symbol> letters(sequence);
    if (!letters.empty() && letters.back() == alphabet.eos()) letters = letters.first(letters.size() - 1);
    return alphabet.decode(letters);
}

GenerationRecord generate_sequence(const BoardLayout& board, const std::vector<AgentSpec>& agents,
                                   const DynamicsConfig& cfg, bool keep_paths)
{
    CollectiveDynamics dyn(board, agents, cfg);
    GenerationRecord record;
    record.seed = cfg.seed;

    const Position home = board.goal(board.alphabet().bos());
    Position start = home;
    while (static_cast<int>(record.sequence.size()) < cfg.t_max_outer) {
        Trajectory traj = select_character(dyn, record.sequence, start);
        if (cfg.continue_from_previous) start = traj.positions.back();
        record.sequence.push_back(traj.selected);
        if (!keep_paths) {
            traj.positions = {};
            traj.fused_energy = {};
            traj.step_votes = {};
        }
        record.per_char.push_back(std::move(traj));
        if (record.sequence.back() == board.alphabet().eos()) break;
    }
    return record;
}

}  // namespace planchette
