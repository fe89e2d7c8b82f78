// Experiment configuration, multi-trial execution and result tables.
#pragma once

#include "planchette/board.hpp"
#include "planchette/corpus_lm.hpp"
#include "planchette/dynamics.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace planchette {

/// colorful: w normalized; reverse: (1 - w) normalized; uniform: equal.
enum class CorpusScheme { colorful, reverse, uniform };

CorpusScheme parse_scheme(const std::string& name);
std::string to_string(CorpusScheme scheme);

/// Reweights a vocabulary for one agent. Throws ConfigError if every
/// resulting weight is zero.
Vocabulary build_agent_corpora(const Vocabulary& vocab, CorpusScheme scheme);

/// Path of the bundled flower vocabulary.
std::string default_vocabulary_path();

struct AgentConfig {
    std::string name;
    CorpusScheme scheme = CorpusScheme::colorful;
    double noise_d = 0.01;
    std::string model_path;  // optional pre-trained model, overrides scheme
};

struct ExperimentConfig {
    std::string board = "default";
    std::string vocabulary;  // empty: bundled file
    int order = 6;
    double alpha = kDefaultSmoothing;
    TrainingMode training = ExpectationCounts{};
    std::vector<AgentConfig> agents{{"agent1", CorpusScheme::colorful, 0.01, {}},
                                    {"agent2", CorpusScheme::reverse, 0.01, {}}};
    DynamicsConfig dynamics{};
    int trials = 100;
    std::string output = "out";
    /// Model used for likelihoods of the collective run: "fused" or an agent name.
    std::string evaluator = "fused";

    /// Missing keys keep their defaults. Throws ConfigError on bad values.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
    void validate() const;
};

/// Board, vocabulary and trained models resolved from a config.
class Experiment {
public:
    explicit Experiment(const ExperimentConfig& cfg);

    const ExperimentConfig& config() const { return cfg_; }
    const BoardLayout& board() const { return board_; }
    const Vocabulary& vocabulary() const { return vocab_; }
    std::size_t agent_count() const { return models_.size(); }
    const std::string& agent_name(std::size_t i) const { return cfg_.agents.at(i).name; }
    std::shared_ptr<const CharModel> model(std::size_t i) const { return models_.at(i); }
    /// Tempered product of all agents' models, exponents T_i / T_fused.
    std::shared_ptr<const CharModel> fused_model() const { return fused_; }
    std::shared_ptr<const CharModel> evaluator(const std::string& name) const;

    /// Agents by index with their configured noise.
    std::vector<AgentSpec> agents(const std::vector<std::size_t>& which) const;
    std::vector<AgentSpec> all_agents() const;

private:
    ExperimentConfig cfg_;
    BoardLayout board_;
    Vocabulary vocab_;
    std::vector<std::shared_ptr<const CharModel>> models_;
    std::shared_ptr<const CharModel> fused_;
};

struct WordStat {
    std::string word;  // letters before EOS; empty for a bare EOS
    int count = 0;
    double logprob = 0.0;
    double prob = 0.0;  // exp(logprob)
    bool valid = false;
};

/// "EOS" for the empty output, otherwise the word itself.
std::string display_word(const std::string& word);

struct TrialSummary {
    int trials = 0;
    std::vector<WordStat> words;  // by count descending, then word
    double entropy = 0.0;         // natural log, invalid outputs included
    int valid_count = 0;
    double mean_valid_weight = 0.0;  // NaN when no valid word was generated

    int distinct() const { return static_cast<int>(words.size()); }
    /// One entry per valid trial (with repetition), in word order.
    std::vector<std::string> valid_words() const;
};

struct TrialRun {
    TrialSummary summary;
    std::vector<GenerationRecord> records;  // by trial index
    std::vector<std::string> words;         // by trial index
};

/// seed XOR mix64(trial + 1)
std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// Independent generate_sequence runs on a worker pool; results are reduced
/// in trial order. Paths are kept only for trial 0.
TrialRun run_trials(const BoardLayout& board, const std::vector<AgentSpec>& agents, const DynamicsConfig& cfg,
                    int trials, const Vocabulary& vocab, const CharModel& evaluator);

/// Collective run of every configured agent, evaluated by cfg.evaluator.
TrialRun run_trials(const Experiment& exp);

TrialSummary summarize(const std::vector<std::string>& words, const Vocabulary& vocab, const CharModel& evaluator);

/// Each agent alone, then all agents together, each for cfg.trials trials.
struct ConditionRuns {
    std::vector<std::string> names;  // agent names..., "cocre"
    std::vector<TrialRun> runs;
};
ConditionRuns run_conditions(const Experiment& exp);

struct PerplexityMatrix {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::vector<std::vector<std::optional<double>>> values;  // nullopt: no valid words
};

/// rows: generating condition; cols: evaluator; entries: perplexity of the
/// row's valid words under the column's model.
PerplexityMatrix perplexity_matrix(const std::vector<std::pair<std::string, std::vector<std::string>>>& generated,
                                   const std::vector<std::pair<std::string, std::shared_ptr<const CharModel>>>& evaluators);

struct AblationPoint {
    double temperature = 0.0;  // T_fused; each of N agents gets D_i = T * eta / N
    TrialSummary summary;
};

std::vector<AblationPoint> ablation_sweep(const Experiment& exp, const std::vector<double>& temperatures);

struct WeightDensity {
    std::vector<std::string> conditions;
    std::vector<std::vector<double>> weights;     // per condition, per valid word
    std::vector<std::vector<int>> histogram;      // per condition, 20 bins over [0,1]
    std::vector<double> means;                    // NaN when empty

    std::string weights_csv() const;    // condition,weight
    std::string histogram_csv() const;  // condition,bin_lo,bin_hi,count
};

WeightDensity export_weight_density(const std::vector<std::pair<std::string, std::vector<std::string>>>& generated,
                                    const Vocabulary& vocab);

// Writers ------------------------------------------------------------------

std::string frequency_csv(const TrialSummary& summary);   // rank,word,freq,prob,logprob,valid
std::string perplexity_csv(const PerplexityMatrix& m);
std::string ablation_csv(const std::vector<AblationPoint>& points);
std::string trajectory_csv(const Trajectory& traj, const Alphabet& alphabet);  // t,x,y,E_fused,voted_symbol
/// One JSON object per line: trial, seed, sequence, per-character votes.
std::string generation_jsonl(const std::vector<GenerationRecord>& records, const Alphabet& alphabet);
nlohmann::json summary_json(const TrialSummary& summary);

}  // namespace planchette
