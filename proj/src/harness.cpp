#include "planchette/harness.hpp"

#include "planchette/csv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#ifndef PLANCHETTE_DATA_DIR
#define PLANCHETTE_DATA_DIR "data"
#endif

namespace planchette {

using nlohmann::json;

CorpusScheme parse_scheme(const std::string& name)
{
    if (name == "colorful") return CorpusScheme::colorful;
    if (name == "reverse") return CorpusScheme::reverse;
    if (name == "uniform") return CorpusScheme::uniform;
    throw ConfigError("unknown corpus scheme '" + name + "'");
}

std::string to_string(CorpusScheme scheme)
{
    switch (scheme) {
    case CorpusScheme::colorful: return "colorful";
    case CorpusScheme::reverse: return "reverse";
    case CorpusScheme::uniform: return "uniform";
    }
    return "?";
}

Vocabulary build_agent_corpora(const Vocabulary& vocab, CorpusScheme scheme)
{
    Vocabulary out = vocab;
    double total = 0.0;
    for (auto& e : out.entries) {
        if (!(e.weight >= 0.0 && e.weight <= 1.0)) throw ConfigError("weight of '" + e.word + "' outside [0,1]");
        switch (scheme) {
        case CorpusScheme::colorful: break;
        case CorpusScheme::reverse: e.weight = 1.0 - e.weight; break;
        case CorpusScheme::uniform: e.weight = 1.0; break;
        }
        total += e.weight;
    }
    if (!(total > 0.0)) throw ConfigError("corpus weights are all zero under scheme " + to_string(scheme));
    for (auto& e : out.entries) e.weight /= total;
    return out;
}

std::string default_vocabulary_path()
{
    return std::string(PLANCHETTE_DATA_DIR) + "/flowers.tsv";
}

// ---------------------------------------------------------------------------

namespace {

GoalMode parse_mode(const std::string& s)
{
    if (s == "marginal") return GoalMode::marginal;
    if (s == "resample") return GoalMode::resample;
    throw ConfigError("unknown dynamics mode '" + s + "'");
}

template <typename T>
void read_opt(const json& doc, const char* key, T& into)
{
    if (doc.contains(key)) into = doc.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc)
{
    ExperimentConfig cfg;
    try {
        if (!doc.is_object()) throw ConfigError("config must be a JSON object");
        read_opt(doc, "board", cfg.board);
        read_opt(doc, "vocabulary", cfg.vocabulary);
        read_opt(doc, "order", cfg.order);
        read_opt(doc, "alpha", cfg.alpha);
        read_opt(doc, "trials", cfg.trials);
        read_opt(doc, "output", cfg.output);
        read_opt(doc, "evaluator", cfg.evaluator);
        read_opt(doc, "seed", cfg.dynamics.seed);
        if (doc.contains("training")) {
            const json& t = doc.at("training");
            const std::string mode = t.value("mode", "expectation");
            if (mode == "expectation") {
                ExpectationCounts e;
                read_opt(t, "corpus_size", e.corpus_size);
                cfg.training = e;
            } else if (mode == "sample") {
                SampledCounts s;
                read_opt(t, "count", s.count);
                read_opt(t, "seed", s.seed);
                cfg.training = s;
            } else {
                throw ConfigError("unknown training mode '" + mode + "'");
            }
        }
        if (doc.contains("agents")) {
            cfg.agents.clear();
            for (const json& a : doc.at("agents")) {
                AgentConfig ac;
                ac.name = a.value("name", "agent" + std::to_string(cfg.agents.size() + 1));
                if (a.contains("scheme")) ac.scheme = parse_scheme(a.at("scheme").get<std::string>());
                read_opt(a, "noise_d", ac.noise_d);
                read_opt(a, "model", ac.model_path);
                cfg.agents.push_back(std::move(ac));
            }
        }
        if (doc.contains("dynamics")) {
            const json& d = doc.at("dynamics");
            DynamicsConfig& dyn = cfg.dynamics;
            read_opt(d, "eta", dyn.eta);
            read_opt(d, "delta_t", dyn.delta_t);
            read_opt(d, "t_max_inner", dyn.t_max_inner);
            read_opt(d, "vote_fraction", dyn.vote_fraction);
            read_opt(d, "t_max_outer", dyn.t_max_outer);
            read_opt(d, "r0", dyn.params.r0);
            read_opt(d, "phi0", dyn.params.phi0);
            read_opt(d, "continue_from_previous", dyn.continue_from_previous);
            if (d.contains("mode")) dyn.mode = parse_mode(d.at("mode").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json ExperimentConfig::to_json() const
{
    json doc;
    doc["board"] = board;
    doc["vocabulary"] = vocabulary;
    doc["order"] = order;
    doc["alpha"] = alpha;
    if (const auto* s = std::get_if<SampledCounts>(&training))
        doc["training"] = {{"mode", "sample"}, {"count", s->count}, {"seed", s->seed}};
    else
        doc["training"] = {{"mode", "expectation"}, {"corpus_size", std::get<ExpectationCounts>(training).corpus_size}};
    doc["agents"] = json::array();
    for (const auto& a : agents) {
        json j = {{"name", a.name}, {"scheme", to_string(a.scheme)}, {"noise_d", a.noise_d}};
        if (!a.model_path.empty()) j["model"] = a.model_path;
        doc["agents"].push_back(std::move(j));
    }
    doc["dynamics"] = {{"eta", dynamics.eta},
                       {"delta_t", dynamics.delta_t},
                       {"t_max_inner", dynamics.t_max_inner},
                       {"vote_fraction", dynamics.vote_fraction},
                       {"t_max_outer", dynamics.t_max_outer},
                       {"mode", dynamics.mode == GoalMode::marginal ? "marginal" : "resample"},
                       {"r0", dynamics.params.r0},
                       {"phi0", dynamics.params.phi0},
                       {"continue_from_previous", dynamics.continue_from_previous}};
    doc["trials"] = trials;
    doc["seed"] = dynamics.seed;
    doc["output"] = output;
    doc["evaluator"] = evaluator;
    return doc;
}

void ExperimentConfig::validate() const
{
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (order < 1) throw ConfigError("order must be >= 1");
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (agents.empty()) throw ConfigError("at least one agent is required");
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].name.empty() || agents[i].name == "fused" || agents[i].name == "cocre")
            throw ConfigError("agent names must be non-empty and not 'fused' or 'cocre'");
        if (!(agents[i].noise_d >= 0.0)) throw ConfigError("noise_d must be >= 0");
        for (std::size_t k = 0; k < i; ++k)
            if (agents[k].name == agents[i].name) throw ConfigError("duplicate agent name '" + agents[i].name + "'");
    }
    dynamics.validate();
    if (evaluator != "fused" &&
        std::none_of(agents.begin(), agents.end(), [&](const AgentConfig& a) { return a.name == evaluator; }))
        throw ConfigError("evaluator '" + evaluator + "' is neither 'fused' nor an agent name");
}

// ---------------------------------------------------------------------------

namespace {

BoardLayout resolve_board(const std::string& source)
{
    return source.empty() || source == "default" ? default_board() : load_board(source);
}

}  // namespace

Experiment::Experiment(const ExperimentConfig& cfg)
    : cfg_(cfg), board_(resolve_board(cfg.board)),
      vocab_(load_vocabulary(cfg.vocabulary.empty() ? default_vocabulary_path() : cfg.vocabulary, board_.alphabet()))
{
    cfg_.validate();
    std::vector<double> exponents;
    double d_total = 0.0;
    for (const auto& a : cfg_.agents) d_total += a.noise_d;
    for (std::size_t i = 0; i < cfg_.agents.size(); ++i) {
        const AgentConfig& a = cfg_.agents[i];
        if (!a.model_path.empty()) {
            std::ifstream in(a.model_path);
            if (!in) throw ConfigError("cannot open model file '" + a.model_path + "'");
            json doc;
            try {
                in >> doc;
            } catch (const json::exception& e) {
                throw ConfigError("model file '" + a.model_path + "': " + e.what());
            }
            models_.push_back(std::make_shared<NgramModel>(NgramModel::from_json(doc)));
            if (!(models_.back()->alphabet() == board_.alphabet()))
                throw ConfigError("model '" + a.model_path + "' does not match the board alphabet");
        } else {
            TrainingMode mode = cfg_.training;
            if (auto* s = std::get_if<SampledCounts>(&mode)) s->seed = derive_seed(s->seed, i);
            models_.push_back(std::make_shared<NgramModel>(
                train_weighted(build_agent_corpora(vocab_, a.scheme), board_.alphabet(), cfg_.order, cfg_.alpha, mode)));
        }
        exponents.push_back(d_total > 0.0 ? a.noise_d / d_total : 1.0 / static_cast<double>(cfg_.agents.size()));
    }
    // Agents with zero noise drop out of the tempered product; keep exponents positive.
    for (double& e : exponents) e = std::max(e, 1e-12);
    double sum = 0.0;
    for (double e : exponents) sum += e;
    for (double& e : exponents) e /= sum;
    fused_ = std::make_shared<FusedCharModel>(models_, exponents);
}

std::shared_ptr<const CharModel> Experiment::evaluator(const std::string& name) const
{
    if (name == "fused") return fused_;
    for (std::size_t i = 0; i < cfg_.agents.size(); ++i)
        if (cfg_.agents[i].name == name) return models_[i];
    throw ConfigError("unknown evaluator '" + name + "'");
}

std::vector<AgentSpec> Experiment::agents(const std::vector<std::size_t>& which) const
{
    std::vector<AgentSpec> out;
    for (std::size_t i : which) out.push_back({models_.at(i), cfg_.agents.at(i).noise_d});
    return out;
}

std::vector<AgentSpec> Experiment::all_agents() const
{
    std::vector<std::size_t> idx(models_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return agents(idx);
}

// ---------------------------------------------------------------------------

std::string display_word(const std::string& word)
{
    return word.empty() ? std::string(kEosName) : word;
}

std::vector<std::string> TrialSummary::valid_words() const
{
    std::vector<std::string> out;
    for (const auto& w : words)
        if (w.valid) out.insert(out.end(), static_cast<std::size_t>(w.count), w.word);
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t trial_seed(std::uint64_t seed, int trial)
{
    return seed ^ mix64(static_cast<std::uint64_t>(trial) + 1);
}

TrialSummary summarize(const std::vector<std::string>& words, const Vocabulary& vocab, const CharModel& evaluator)
{
    TrialSummary s;
    s.trials = static_cast<int>(words.size());
    std::map<std::string, int> freq;
    for (const auto& w : words) ++freq[w];

    double weight_sum = 0.0;
    for (const auto& [word, count] : freq) {
        WordStat ws;
        ws.word = word;
        ws.count = count;
        ws.logprob = sequence_logprob(evaluator, word);
        ws.prob = std::exp(ws.logprob);
        const auto weight = vocab.weight_of(word);
        ws.valid = weight.has_value();
        if (ws.valid) {
            s.valid_count += count;
            weight_sum += *weight * count;
        }
        const double p = static_cast<double>(count) / static_cast<double>(s.trials);
        s.entropy -= p * std::log(p);
        s.words.push_back(std::move(ws));
    }
    if (s.entropy == 0.0) s.entropy = 0.0;  // folds -0
    s.mean_valid_weight =
        s.valid_count > 0 ? weight_sum / s.valid_count : std::numeric_limits<double>::quiet_NaN();
    std::stable_sort(s.words.begin(), s.words.end(),
                     [](const WordStat& a, const WordStat& b) { return a.count > b.count; });
    return s;
}

TrialRun run_trials(const BoardLayout& board, const std::vector<AgentSpec>& agents, const DynamicsConfig& cfg,
                    int trials, const Vocabulary& vocab, const CharModel& evaluator)
{
    if (trials < 1) throw ConfigError("trials must be >= 1");
    cfg.validate();

    TrialRun run;
    run.records.resize(static_cast<std::size_t>(trials));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};

    auto worker = [&] {
        for (int t = next++; t < trials; t = next++) {
            try {
                DynamicsConfig trial_cfg = cfg;
                trial_cfg.seed = trial_seed(cfg.seed, t);
                run.records[static_cast<std::size_t>(t)] = generate_sequence(board, agents, trial_cfg, t == 0);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads = std::min<unsigned>(hw, static_cast<unsigned>(trials));
    {
        std::vector<std::jthread> pool;
        for (unsigned k = 1; k < n_threads; ++k) pool.emplace_back(worker);
        worker();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (const auto& r : run.records) run.words.push_back(r.word(board.alphabet()));
    run.summary = summarize(run.words, vocab, evaluator);
    return run;
}

TrialRun run_trials(const Experiment& exp)
{
    return run_trials(exp.board(), exp.all_agents(), exp.config().dynamics, exp.config().trials, exp.vocabulary(),
                      *exp.evaluator(exp.config().evaluator));
}

ConditionRuns run_conditions(const Experiment& exp)
{
    ConditionRuns out;
    const auto& cfg = exp.config();
    for (std::size_t i = 0; i < exp.agent_count(); ++i) {
        out.names.push_back(exp.agent_name(i));
        out.runs.push_back(run_trials(exp.board(), exp.agents({i}), cfg.dynamics, cfg.trials, exp.vocabulary(),
                                      *exp.model(i)));
    }
    out.names.push_back("cocre");
    out.runs.push_back(run_trials(exp));
    return out;
}

PerplexityMatrix perplexity_matrix(const std::vector<std::pair<std::string, std::vector<std::string>>>& generated,
                                   const std::vector<std::pair<std::string, std::shared_ptr<const CharModel>>>& evaluators)
{
    PerplexityMatrix m;
    for (const auto& [name, model] : evaluators) m.cols.push_back(name);
    for (const auto& [row, words] : generated) {
        m.rows.push_back(row);
        std::vector<std::optional<double>> values;
        if (words.empty()) {
            std::clog << "warning: condition '" << row << "' produced no valid words; row left empty\n";
            values.assign(evaluators.size(), std::nullopt);
        } else {
            for (const auto& [name, model] : evaluators) values.emplace_back(perplexity(*model, words));
        }
        m.values.push_back(std::move(values));
    }
    return m;
}

std::vector<AblationPoint> ablation_sweep(const Experiment& exp, const std::vector<double>& temperatures)
{
    std::vector<AblationPoint> points;
    const auto& cfg = exp.config();
    for (double temp : temperatures) {
        if (!(temp >= 0.0)) throw ConfigError("ablation temperatures must be >= 0");
        std::vector<AgentSpec> agents = exp.all_agents();
        for (auto& a : agents) a.noise_d = temp * cfg.dynamics.eta / static_cast<double>(agents.size());
        TrialRun run = run_trials(exp.board(), agents, cfg.dynamics, cfg.trials, exp.vocabulary(),
                                  *exp.evaluator(cfg.evaluator));
        points.push_back({temp, std::move(run.summary)});
    }
    return points;
}

WeightDensity export_weight_density(const std::vector<std::pair<std::string, std::vector<std::string>>>& generated,
                                    const Vocabulary& vocab)
{
    constexpr int kBins = 20;
    WeightDensity out;
    for (const auto& [name, words] : generated) {
        out.conditions.push_back(name);
        std::vector<double> weights;
        std::vector<int> hist(kBins, 0);
        for (const auto& w : words) {
            const auto weight = vocab.weight_of(w);
            if (!weight) continue;
            weights.push_back(*weight);
            ++hist[static_cast<std::size_t>(std::clamp(static_cast<int>(*weight * kBins), 0, kBins - 1))];
        }
        double mean = std::numeric_limits<double>::quiet_NaN();
        if (!weights.empty()) {
            double sum = 0.0;
            for (double w : weights) sum += w;
            mean = sum / static_cast<double>(weights.size());
        }
        out.weights.push_back(std::move(weights));
        out.histogram.push_back(std::move(hist));
        out.means.push_back(mean);
    }
    return out;
}

std::string WeightDensity::weights_csv() const
{
    std::ostringstream out;
    out << "condition,weight\n";
    for (std::size_t c = 0; c < conditions.size(); ++c)
        for (double w : weights[c]) out << conditions[c] << ',' << format_double(w) << '\n';
    return out.str();
}

std::string WeightDensity::histogram_csv() const
{
    std::ostringstream out;
    out << "condition,bin_lo,bin_hi,count\n";
    for (std::size_t c = 0; c < conditions.size(); ++c) {
        const auto bins = static_cast<int>(histogram[c].size());
        for (int b = 0; b < bins; ++b)
            out << conditions[c] << ',' << format_double(static_cast<double>(b) / bins) << ','
                << format_double(static_cast<double>(b + 1) / bins) << ',' << histogram[c][static_cast<std::size_t>(b)]
                << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------

std::string frequency_csv(const TrialSummary& summary)
{
    std::ostringstream out;
    out << "rank,word,freq,prob,logprob,valid\n";
    int rank = 0;
    for (const auto& w : summary.words) {
        out << ++rank << ',' << display_word(w.word) << ',' << w.count << ',' << format_double(w.prob) << ','
            << (std::isfinite(w.logprob) ? format_double(w.logprob) : std::string("-inf")) << ','
            << (w.valid ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string perplexity_csv(const PerplexityMatrix& m)
{
    std::ostringstream out;
    out << "generated_by";
    for (const auto& c : m.cols) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        out << m.rows[r];
        for (const auto& v : m.values[r]) out << ',' << (v ? format_double(*v) : std::string());
        out << '\n';
    }
    return out.str();
}

std::string ablation_csv(const std::vector<AblationPoint>& points)
{
    std::ostringstream out;
    out << "temperature,trials,valid_count,distinct,entropy\n";
    for (const auto& p : points)
        out << format_double(p.temperature) << ',' << p.summary.trials << ',' << p.summary.valid_count << ','
            << p.summary.distinct() << ',' << format_double(p.summary.entropy) << '\n';
    return out.str();
}

std::string trajectory_csv(const Trajectory& traj, const Alphabet& alphabet)
{
    std::ostringstream out;
    out << "t,x,y,E_fused,voted_symbol\n";
    for (std::size_t t = 0; t < traj.positions.size(); ++t) {
        const Position& p = traj.positions[t];
        out << t << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ',';
        if (t > 0) out << format_double(traj.fused_energy[t - 1]);
        out << ',';
        if (t > 0 && traj.step_votes[t - 1] != kNoVote) out << alphabet.name(traj.step_votes[t - 1]);
        out << '\n';
    }
    return out.str();
}

std::string generation_jsonl(const std::vector<GenerationRecord>& records, const Alphabet& alphabet)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const GenerationRecord& r = records[i];
        json line;
        line["trial"] = i;
        line["seed"] = r.seed;
        line["word"] = r.word(alphabet);
        auto& seq = line["sequence"] = json::array();
        for (Symbol s : r.sequence) seq.push_back(alphabet.name(s));
        auto& votes = line["votes"] = json::array();
        for (const auto& traj : r.per_char) {
            json hist = json::object();
            for (Eigen::Index c = 0; c < traj.votes.size(); ++c)
                if (traj.votes[c] > 0) hist[alphabet.name(static_cast<Symbol>(c))] = traj.votes[c];
            votes.push_back(std::move(hist));
        }
        out << line.dump() << '\n';
    }
    return out.str();
}

json summary_json(const TrialSummary& summary)
{
    json doc;
    doc["trials"] = summary.trials;
    doc["distinct"] = summary.distinct();
    doc["valid_count"] = summary.valid_count;
    doc["entropy"] = summary.entropy;
    doc["mean_valid_weight"] = std::isfinite(summary.mean_valid_weight) ? json(summary.mean_valid_weight) : json();
    auto& words = doc["words"] = json::array();
    for (const auto& w : summary.words)
        words.push_back({{"word", display_word(w.word)},
                         {"freq", w.count},
                         {"prob", w.prob},
                         {"logprob", std::isfinite(w.logprob) ? json(w.logprob) : json()},
                         {"valid", w.valid}});
    return doc;
}

}  // namespace planchette
