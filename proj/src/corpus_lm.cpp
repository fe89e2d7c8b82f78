#include "planchette/corpus_lm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace planchette {

bool Vocabulary::contains(std::string_view word) const
{
    return weight_of(word).has_value();
}

std::optional<double> Vocabulary::weight_of(std::string_view word) const
{
    for (const auto& e : entries)
        if (e.word == word) return e.weight;
    return std::nullopt;
}

void Vocabulary::validate(const Alphabet& alphabet) const
{
    if (entries.empty()) throw ConfigError("vocabulary is empty");
    for (const auto& e : entries) {
        if (e.word.empty()) throw ConfigError("vocabulary contains an empty word");
        if (!std::isfinite(e.weight) || e.weight < 0.0 || e.weight > 1.0)
            throw ConfigError("word '" + e.word + "' has weight outside [0,1]");
        const auto symbols = alphabet.encode(e.word);
        for (Symbol s : symbols)
            if (s == alphabet.eos() || s == alphabet.bos())
                throw ConfigError("word '" + e.word + "' contains a marker symbol");
    }
}

Vocabulary read_vocabulary(std::istream& in, const Alphabet& alphabet)
{
    Vocabulary vocab;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ConfigError("vocabulary line " + std::to_string(lineno) + ": expected word<TAB>weight");
        std::string word = line.substr(0, tab);
        if (word.find(' ') != std::string::npos)
            throw ConfigError("vocabulary line " + std::to_string(lineno) + ": multiword name '" +
                              word + "' is not supported");
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        double weight = 0.0;
        try {
            std::size_t used = 0;
            const std::string rest = line.substr(tab + 1);
            weight = std::stod(rest, &used);
            if (rest.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ConfigError("vocabulary line " + std::to_string(lineno) + ": bad weight");
        }
        vocab.entries.push_back({std::move(word), weight});
    }
    vocab.validate(alphabet);
    return vocab;
}

Vocabulary load_vocabulary(const std::string& path, const Alphabet& alphabet)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open vocabulary file '" + path + "'");
    return read_vocabulary(in, alphabet);
}

// ---------------------------------------------------------------------------

NgramModel::NgramModel(Alphabet alphabet, int order, double alpha)
    : alphabet_(std::move(alphabet)), order_(order), alpha_(alpha)
{
    if (order < 1) throw ConfigError("n-gram order must be >= 1");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("smoothing alpha must be >= 0");
}

NgramModel::Context NgramModel::padded_context(std::span<const Symbol> context) const
{
    const auto width = static_cast<std::size_t>(order_ - 1);
    Context ctx(width, alphabet_.bos());
    const std::size_t take = std::min(width, context.size());
    std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
              ctx.end() - static_cast<std::ptrdiff_t>(take));
    return ctx;
}

void NgramModel::add_word(std::span<const Symbol> word, double weight)
{
    if (weight == 0.0) return;
    std::vector<Symbol> padded(static_cast<std::size_t>(order_ - 1), alphabet_.bos());
    padded.insert(padded.end(), word.begin(), word.end());
    padded.push_back(alphabet_.eos());
    const auto width = static_cast<std::size_t>(order_ - 1);
    for (std::size_t t = width; t < padded.size(); ++t) {
        Context ctx(padded.begin() + static_cast<std::ptrdiff_t>(t - width),
                    padded.begin() + static_cast<std::ptrdiff_t>(t));
        auto [it, inserted] = counts_.try_emplace(std::move(ctx));
        if (inserted) it->second = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(alphabet_.size()));
        it->second[padded[t]] += weight;
    }
}

Eigen::VectorXd NgramModel::next_char_dist(std::span<const Symbol> context) const
{
    const auto n = static_cast<Eigen::Index>(alphabet_.size());
    const auto emit = static_cast<double>(alphabet_.emittable_count());
    Eigen::VectorXd probs = Eigen::VectorXd::Zero(n);

    const auto it = counts_.find(padded_context(context));
    const double total = it == counts_.end() ? 0.0 : it->second.sum();
    const double denom = total + alpha_ * emit;
    if (denom <= 0.0) {
        probs.setConstant(1.0 / emit);
    } else if (it == counts_.end()) {
        probs.setConstant(alpha_ / denom);
    } else {
        probs = (it->second.array() + alpha_) / denom;
    }
    probs[alphabet_.bos()] = 0.0;
    return probs;
}

nlohmann::json NgramModel::to_json() const
{
    nlohmann::json doc;
    doc["format"] = "planchette-ngram";
    doc["order"] = order_;
    doc["alpha"] = alpha_;
    doc["alphabet"] = alphabet_.names();
    auto& table = doc["counts"] = nlohmann::json::array();
    for (const auto& [ctx, counts] : counts_) {
        nlohmann::json row;
        auto& names = row["context"] = nlohmann::json::array();
        for (Symbol s : ctx) names.push_back(alphabet_.name(s));
        auto& next = row["next"] = nlohmann::json::object();
        for (Eigen::Index c = 0; c < counts.size(); ++c)
            if (counts[c] != 0.0) next[alphabet_.name(static_cast<Symbol>(c))] = counts[c];
        table.push_back(std::move(row));
    }
    return doc;
}

NgramModel NgramModel::from_json(const nlohmann::json& doc)
{
    try {
        if (doc.value("format", "") != "planchette-ngram") throw ConfigError("not an n-gram model document");
        NgramModel model(Alphabet(doc.at("alphabet").get<std::vector<std::string>>()),
                         doc.at("order").get<int>(), doc.at("alpha").get<double>());
        const auto n = static_cast<Eigen::Index>(model.alphabet_.size());
        auto symbol = [&](const std::string& name) {
            const auto s = model.alphabet_.find(name);
            if (!s) throw ConfigError("model refers to unknown symbol '" + name + "'");
            return *s;
        };
        for (const auto& row : doc.at("counts")) {
            Context ctx;
            for (const auto& name : row.at("context")) ctx.push_back(symbol(name.get<std::string>()));
            if (ctx.size() != static_cast<std::size_t>(model.order_ - 1))
                throw ConfigError("model context has wrong length");
            Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
            for (const auto& [name, value] : row.at("next").items()) counts[symbol(name)] = value.get<double>();
            model.counts_.emplace(std::move(ctx), std::move(counts));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model document: ") + e.what());
    }
}

NgramModel train_weighted(const Vocabulary& vocab, const Alphabet& alphabet, int order, double alpha,
                          const TrainingMode& mode)
{
    vocab.validate(alphabet);
    NgramModel model(alphabet, order, alpha);

    std::vector<std::vector<Symbol>> words;
    std::vector<double> weights;
    for (const auto& e : vocab.entries) {
        words.push_back(alphabet.encode(e.word));
        weights.push_back(e.weight);
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) throw ConfigError("vocabulary weights are all zero");

    if (const auto* sampled = std::get_if<SampledCounts>(&mode)) {
        if (sampled->count < 1) throw ConfigError("sample count must be >= 1");
        std::mt19937_64 rng(sampled->seed);
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        std::vector<std::uint64_t> hits(words.size(), 0);
        for (std::uint64_t k = 0; k < sampled->count; ++k) ++hits[pick(rng)];
        for (std::size_t i = 0; i < words.size(); ++i)
            model.add_word(words[i], static_cast<double>(hits[i]));
    } else {
        const double corpus = std::get<ExpectationCounts>(mode).corpus_size;
        if (!(corpus > 0.0)) throw ConfigError("expected corpus size must be positive");
        for (std::size_t i = 0; i < words.size(); ++i) model.add_word(words[i], corpus * weights[i] / total);
    }
    return model;
}

// ---------------------------------------------------------------------------

FusedCharModel::FusedCharModel(std::vector<std::shared_ptr<const CharModel>> models,
                               std::vector<double> exponents)
    : models_(std::move(models)), exponents_(std::move(exponents))
{
    if (models_.empty()) throw ConfigError("fusion needs at least one model");
    if (models_.size() != exponents_.size()) throw ConfigError("one exponent per model is required");
    double sum = 0.0;
    for (double e : exponents_) {
        if (!(e > 0.0)) throw ConfigError("fusion exponents must be positive");
        sum += e;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("fusion exponents must sum to 1");
    for (const auto& m : models_)
        if (!(m->alphabet() == models_.front()->alphabet()))
            throw ConfigError("fused models must share an alphabet");
}

Eigen::VectorXd FusedCharModel::next_char_dist(std::span<const Symbol> context) const
{
    const Alphabet& alpha = alphabet();
    const auto n = static_cast<Eigen::Index>(alpha.size());
    Eigen::ArrayXd log_prod = Eigen::ArrayXd::Zero(n);
    for (std::size_t i = 0; i < models_.size(); ++i)
        log_prod += exponents_[i] * models_[i]->next_char_dist(context).array().log();

    log_prod[alpha.bos()] = -std::numeric_limits<double>::infinity();
    const double top = log_prod.maxCoeff();
    Eigen::VectorXd probs(n);
    if (!std::isfinite(top)) {
        // Disjoint supports: no symbol survives the product.
        probs.setConstant(1.0 / static_cast<double>(alpha.emittable_count()));
    } else {
        // Vectorized exp(-inf) is not exactly zero.
        probs = (log_prod == -std::numeric_limits<double>::infinity()).select(0.0, (log_prod - top).exp()).matrix();
        probs /= probs.sum();
    }
    probs[alpha.bos()] = 0.0;
    return probs;
}

FusedCharModel fuse_char_models(std::vector<std::shared_ptr<const CharModel>> models,
                                std::vector<double> exponents)
{
    return FusedCharModel(std::move(models), std::move(exponents));
}

FixedCharModel::FixedCharModel(Alphabet alphabet, Eigen::VectorXd probs)
    : alphabet_(std::move(alphabet)), probs_(std::move(probs))
{
    if (probs_.size() != static_cast<Eigen::Index>(alphabet_.size()))
        throw ConfigError("distribution size does not match alphabet");
    if ((probs_.array() < 0.0).any() || std::abs(probs_.sum() - 1.0) > 1e-9)
        throw ConfigError("distribution must be nonnegative and sum to 1");
    if (probs_[alphabet_.bos()] != 0.0) throw ConfigError("BOS must have probability zero");
}

// ---------------------------------------------------------------------------

double sequence_logprob(const CharModel& model, std::string_view word)
{
    const Alphabet& alphabet = model.alphabet();
    std::vector<Symbol> symbols = alphabet.encode(word);
    symbols.push_back(alphabet.eos());
    double total = 0.0;
    for (std::size_t t = 0; t < symbols.size(); ++t) {
        const double p = model.next_char_dist(std::span(symbols).first(t))[symbols[t]];
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        total += std::log(p);
    }
    return total;
}

double perplexity(const CharModel& model, std::span<const std::string> words)
{
    if (words.empty()) throw std::invalid_argument("perplexity of an empty word list");
    double logprob = 0.0;
    double length = 0.0;
    for (const auto& w : words) {
        const double lp = sequence_logprob(model, w);
        if (!std::isfinite(lp))
            throw std::domain_error("word '" + w + "' has zero probability; enable smoothing");
        logprob += lp;
        length += static_cast<double>(w.size() + 1);
    }
    return std::exp(-logprob / length);
}

}  // namespace planchette
