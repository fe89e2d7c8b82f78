// Character n-gram language models trained from weighted word lists, their
// tempered product-of-experts fusion, and likelihood / perplexity scoring.
#pragma once

#include "planchette/alphabet.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace planchette {

struct VocabEntry {
    std::string word;
    double weight = 0.0;
};

/// Weighted word list. Words are non-empty, lowercase and spelled with board
/// characters; weights are finite and in [0, 1].
struct Vocabulary {
    std::vector<VocabEntry> entries;

    bool contains(std::string_view word) const;
    std::optional<double> weight_of(std::string_view word) const;
    /// Throws ConfigError on an empty list, bad weights or unknown characters.
    void validate(const Alphabet& alphabet) const;
};

/// `word<TAB>weight` per line; `#` lines and blank lines are skipped.
Vocabulary read_vocabulary(std::istream& in, const Alphabet& alphabet);
Vocabulary load_vocabulary(const std::string& path, const Alphabet& alphabet);

/// Anything that yields a next-symbol distribution for a context.
class CharModel {
public:
    virtual ~CharModel() = default;
    virtual const Alphabet& alphabet() const = 0;
    /// Probability vector over the alphabet; sums to 1, BOS entry is 0.
    virtual Eigen::VectorXd next_char_dist(std::span<const Symbol> context) const = 0;
};

/// Fractional counts equal to the expected counts of `corpus_size` weighted
/// draws, so the smoothing pseudo-count has the same meaning in both modes.
struct ExpectationCounts {
    double corpus_size = 100000.0;
};
struct SampledCounts {
    std::uint64_t count = 100000;
    std::uint64_t seed = 0;
};
using TrainingMode = std::variant<ExpectationCounts, SampledCounts>;

inline constexpr double kDefaultSmoothing = 1e-3;

class NgramModel final : public CharModel {
public:
    using Context = std::vector<Symbol>;

    NgramModel(Alphabet alphabet, int order, double alpha);

    const Alphabet& alphabet() const override { return alphabet_; }
    int order() const { return order_; }
    double alpha() const { return alpha_; }
    const std::map<Context, Eigen::VectorXd>& counts() const { return counts_; }

    /// Uses the trailing order-1 symbols of `context`, left-padded with BOS.
    /// A context never seen in training (zero total) with alpha = 0 falls back
    /// to uniform over emittable symbols.
    Eigen::VectorXd next_char_dist(std::span<const Symbol> context) const override;

    /// Adds `weight` to every n-gram of the padded word.
    void add_word(std::span<const Symbol> word, double weight);

    nlohmann::json to_json() const;
    static NgramModel from_json(const nlohmann::json& doc);

private:
    Context padded_context(std::span<const Symbol> context) const;

    Alphabet alphabet_;
    int order_;
    double alpha_;
    std::map<Context, Eigen::VectorXd> counts_;
};

NgramModel train_weighted(const Vocabulary& vocab, const Alphabet& alphabet, int order,
                          double alpha, const TrainingMode& mode = ExpectationCounts{});

/// Normalized weighted geometric mean of component distributions.
class FusedCharModel final : public CharModel {
public:
    FusedCharModel(std::vector<std::shared_ptr<const CharModel>> models,
                   std::vector<double> exponents);

    const Alphabet& alphabet() const override { return models_.front()->alphabet(); }
    Eigen::VectorXd next_char_dist(std::span<const Symbol> context) const override;

    std::size_t size() const { return models_.size(); }
    const std::vector<double>& exponents() const { return exponents_; }

private:
    std::vector<std::shared_ptr<const CharModel>> models_;
    std::vector<double> exponents_;
};

FusedCharModel fuse_char_models(std::vector<std::shared_ptr<const CharModel>> models,
                                std::vector<double> exponents);

/// Context-independent distribution; used for hand-set agents on toy boards.
class FixedCharModel final : public CharModel {
public:
    FixedCharModel(Alphabet alphabet, Eigen::VectorXd probs);

    const Alphabet& alphabet() const override { return alphabet_; }
    Eigen::VectorXd next_char_dist(std::span<const Symbol>) const override { return probs_; }

private:
    Alphabet alphabet_;
    Eigen::VectorXd probs_;
};

/// Sum of ln P(c_t | c_<t) over the word followed by EOS. Returns -infinity
/// when any step has probability zero.
double sequence_logprob(const CharModel& model, std::string_view word);

/// Character-level perplexity over all words, EOS steps included. Throws
/// std::domain_error if any word has probability zero.
double perplexity(const CharModel& model, std::span<const std::string> words);

}  // namespace planchette
