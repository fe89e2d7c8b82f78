// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Every criterion exports a CSV; the suite runs each criterion twice and the
// last criterion compares the two exports byte for byte.
#include "planchette/csv.hpp"
#include "planchette/harness.hpp"
#include "planchette/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace planchette;

namespace {

constexpr std::uint64_t kSeed = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
    std::string csv;  // exported artefact, compared across repeats
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;  // <= 0: no limit
    std::function<Outcome()> run;
};

const ExperimentConfig& flower_config()
{
    static const ExperimentConfig cfg = [] {
        ExperimentConfig c;
        c.dynamics.seed = kSeed;
        return c;
    }();
    return cfg;
}

const Experiment& flower_experiment()
{
    static const Experiment exp(flower_config());
    return exp;
}

std::vector<Eigen::VectorXd> empty_context_dists(const Experiment& exp)
{
    std::vector<Eigen::VectorXd> d;
    for (std::size_t i = 0; i < exp.agent_count(); ++i) d.push_back(exp.model(i)->next_char_dist({}));
    return d;
}

std::string fmt(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// 1 -------------------------------------------------------------------------

Outcome gradient_oracle()
{
    const Experiment& exp = flower_experiment();
    const BoardLayout& b = exp.board();
    const EnergyContext ctx(b, empty_context_dists(exp), flower_config().dynamics.params);
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> ux(b.bounds().x_min, b.bounds().x_max);
    std::uniform_real_distribution<double> uy(b.bounds().y_min, b.bounds().y_max);
    const double h = 1e-5;
    double worst = 0.0;
    std::ostringstream csv;
    csv << "x,y,rel_err_fused\n";
    for (int k = 0; k < 1000; ++k) {
        const double x = ux(rng);
        const Position p(x, uy(rng));
        auto check = [&](const std::function<double(const Position&)>& f, const Eigen::Vector2d& g) {
            const Eigen::Vector2d fd((f(p + Eigen::Vector2d(h, 0)) - f(p - Eigen::Vector2d(h, 0))) / (2 * h),
                                     (f(p + Eigen::Vector2d(0, h)) - f(p - Eigen::Vector2d(0, h))) / (2 * h));
            const double err = (g - fd).norm() / (1.0 + fd.norm());
            worst = std::max(worst, err);
            return err;
        };
        for (const auto& d : ctx.dists())
            check([&](const Position& q) { return effective_energy(q, d, b, ctx.params()); },
                  effective_gradient(p, d, b, ctx.params()));
        const double e = check([&](const Position& q) { return fused_energy(q, ctx); }, fused_gradient(p, ctx));
        csv << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(e) << '\n';
    }
    return {worst < 1e-6, "max relative error " + fmt(worst), csv.str()};
}

// 2 -------------------------------------------------------------------------

Outcome moment_identity()
{
    const Experiment& exp = flower_experiment();
    const DynamicsConfig& cfg = flower_config().dynamics;
    CollectiveDynamics dyn(exp.board(), exp.all_agents(), cfg);
    dyn.set_context({});
    const double two_d = 2.0 * dyn.fused_noise();
    const int n = 100000;

    std::ostringstream csv;
    csv << "x,y,mean_x,mean_y,drift_x,drift_y,cov_xx,cov_xy,cov_yy\n";
    double worst_z = 0.0, worst_cov = 0.0;
    // 5 x 4 interior lattice, at least one unit from the clipping bounds.
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 5; ++i) {
            const Position p(0.3 + 1.35 * i, 0.2 + 0.87 * j);
            Eigen::Vector2d mean = Eigen::Vector2d::Zero();
            Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
            for (int k = 0; k < n; ++k) {
                const Eigen::Vector2d d = dyn.step(p) - p;
                mean += d;
                second += d * d.transpose();
            }
            mean /= n;
            const Eigen::Matrix2d cov = (second - n * mean * mean.transpose()) / (n - 1);
            const Eigen::Vector2d drift = -cfg.eta * fused_gradient(p, dyn.energy());
            const double sigma = std::sqrt(two_d / n);
            worst_z = std::max(worst_z, ((mean - drift).cwiseAbs() / sigma).maxCoeff());
            worst_cov = std::max({worst_cov, std::abs(cov(0, 0) / two_d - 1.0), std::abs(cov(1, 1) / two_d - 1.0),
                                  std::abs(cov(0, 1)) / two_d});
            csv << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(mean.x()) << ','
                << format_double(mean.y()) << ',' << format_double(drift.x()) << ',' << format_double(drift.y())
                << ',' << format_double(cov(0, 0)) << ',' << format_double(cov(0, 1)) << ','
                << format_double(cov(1, 1)) << '\n';
        }
    }
    return {worst_z <= 3.0 && worst_cov <= 0.05,
            "max |mean - drift| = " + fmt(worst_z, 3) + " sigma, max covariance deviation " + fmt(100 * worst_cov, 3) +
                "%",
            csv.str()};
}

// 3 -------------------------------------------------------------------------

Outcome stationarity()
{
    const Experiment& exp = flower_experiment();
    const DynamicsConfig& cfg = flower_config().dynamics;
    const auto agents = exp.all_agents();
    const EnergyContext ctx(exp.board(), empty_context_dists(exp), cfg.params);
    double d_fused = 0.0;
    for (const auto& a : agents) d_fused += a.noise_d;
    const double temperature = d_fused / cfg.eta;

    const GibbsField oracle = gibbs_oracle(ctx, temperature, 0.02).coarsened(5);
    const Histogram hist = empirical_histogram(exp.board(), agents, {}, cfg, 200000, 10000, 0.1);
    const Eigen::ArrayXXd emp = hist.normalized();
    const double tv = total_variation(emp, oracle.probs);
    return {tv <= 0.05 && std::abs(temperature - 0.2) < 1e-12,
            "TV " + fmt(tv) + " at T_fused " + fmt(temperature) + " (limit 0.05)",
            field_csv(hist.grid, Eigen::ArrayXXd(), emp)};
}

// 4 -------------------------------------------------------------------------

/// Equilateral triangle a, b, EOS of side 1 with BOS at the centroid.
BoardLayout triangle_board()
{
    const Alphabet alphabet({"a", "b", std::string(kEosName), std::string(kBosName)});
    const double h = std::sqrt(3.0) / 2.0;
    GoalMatrix g(4, 2);
    g << 0.0, 0.0, 1.0, 0.0, 0.5, h, 0.5, h / 3.0;
    return BoardLayout(alphabet, g, Bounds{-1.0, 2.0, -1.0, h + 1.0});
}

Outcome poe_toy()
{
    const BoardLayout board = triangle_board();
    const Alphabet& alphabet = board.alphabet();
    Eigen::VectorXd p1(4), p2(4);
    p1 << 0.6, 0.3, 0.1, 0.0;
    p2 << 0.2, 0.5, 0.3, 0.0;
    const double d_i = 0.01;
    DynamicsConfig cfg;
    cfg.seed = kSeed;
    const double t_i = d_i / cfg.eta;

    std::vector<Eigen::VectorXd> single;
    for (const auto& p : {p1, p2})
        single.push_back(selectable_masses(char_mass_oracle(EnergyContext(board, {p}, cfg.params), t_i, 0.02),
                                           alphabet));

    const std::vector<AgentSpec> agents{{std::make_shared<FixedCharModel>(alphabet, p1), d_i},
                                        {std::make_shared<FixedCharModel>(alphabet, p2), d_i}};
    CollectiveDynamics dyn(board, agents, cfg);
    const int selections = 2000;
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(4);
    for (int k = 0; k < selections; ++k)
        freq[select_character(dyn, std::span<const Symbol>{}, board.goal(alphabet.bos())).selected] += 1.0;
    freq /= selections;

    const std::vector<double> exponents{0.5, 0.5};
    const PoeCheck check = poe_char_check(single, exponents, freq);
    std::ostringstream csv;
    csv << "symbol,agent1_mass,agent2_mass,product,cocre_freq\n";
    for (Symbol c = 0; c < 4; ++c)
        csv << alphabet.name(c) << ',' << format_double(single[0][c]) << ',' << format_double(single[1][c]) << ','
            << format_double(check.product[c]) << ',' << format_double(freq[c]) << '\n';
    return {check.tv <= 0.1, "TV " + fmt(check.tv) + " over " + std::to_string(selections) + " selections (limit 0.1)",
            csv.str()};
}

// 5 -------------------------------------------------------------------------

Outcome noise_collapse()
{
    const Experiment& exp = flower_experiment();
    const auto& cfg = flower_config();
    auto quiet = exp.all_agents();
    for (auto& a : quiet) a.noise_d = 0.0;
    const auto evaluator = exp.fused_model();
    const TrialRun still = run_trials(exp.board(), quiet, cfg.dynamics, 100, exp.vocabulary(), *evaluator);
    const TrialRun noisy = run_trials(exp.board(), exp.all_agents(), cfg.dynamics, 100, exp.vocabulary(), *evaluator);
    const int d0 = still.summary.distinct();
    const int d1 = noisy.summary.distinct();
    return {d0 == 1 && d1 >= 5,
            "D=0: " + std::to_string(d0) + " distinct ('" + display_word(still.summary.words.front().word) +
                "'); defaults: " + std::to_string(d1) + " distinct",
            "condition\n" + std::string("no_noise\n") + frequency_csv(still.summary) + "default\n" +
                frequency_csv(noisy.summary)};
}

// 6, 8 ----------------------------------------------------------------------

const ConditionRuns& flower_conditions()
{
    static const ConditionRuns runs = run_conditions(flower_experiment());
    return runs;
}

std::vector<std::pair<std::string, std::vector<std::string>>> valid_generations(const ConditionRuns& runs)
{
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    for (std::size_t k = 0; k < runs.names.size(); ++k) out.emplace_back(runs.names[k], runs.runs[k].summary.valid_words());
    return out;
}

Outcome perplexity_pattern(const ConditionRuns& runs)
{
    const Experiment& exp = flower_experiment();
    std::vector<std::pair<std::string, std::shared_ptr<const CharModel>>> evaluators;
    for (std::size_t i = 0; i < exp.agent_count(); ++i) evaluators.emplace_back(exp.agent_name(i), exp.model(i));
    evaluators.emplace_back("fused", exp.fused_model());
    const PerplexityMatrix m = perplexity_matrix(valid_generations(runs), evaluators);

    // Row r's own column: agent r for single agents, the fused column for cocre.
    bool ok = true;
    std::ostringstream detail;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        const std::size_t own = r < exp.agent_count() ? r : evaluators.size() - 1;
        const auto& row = m.values[r];
        bool lowest = row[own].has_value();
        for (std::size_t c = 0; lowest && c < row.size(); ++c)
            if (c != own) lowest = row[c].has_value() && *row[own] < *row[c];
        ok = ok && lowest;
        detail << (r ? "; " : "") << m.rows[r] << " own " << (row[own] ? fmt(*row[own]) : "n/a")
               << (lowest ? " lowest" : " NOT lowest");
    }
    return {ok, detail.str(), perplexity_csv(m)};
}

Outcome weight_betweenness(const ConditionRuns& runs)
{
    const WeightDensity wd = export_weight_density(valid_generations(runs), flower_experiment().vocabulary());
    const double a1 = wd.means[0], a2 = wd.means[1], co = wd.means[2];
    const bool ok = std::isfinite(co) && co >= std::min(a1, a2) && co <= std::max(a1, a2);
    return {ok,
            "mean weight " + wd.conditions[2] + " " + fmt(co) + " in [" + fmt(std::min(a1, a2)) + ", " +
                fmt(std::max(a1, a2)) + "]",
            wd.weights_csv() + wd.histogram_csv()};
}

// 7 -------------------------------------------------------------------------

/// Monotone in the given direction with at most one adjacent equal pair.
template <typename T>
bool monotone_one_tie(const std::vector<T>& v, bool increasing)
{
    int ties = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k] == v[k - 1]) ++ties;
        else if ((v[k] > v[k - 1]) != increasing) return false;
    }
    return ties <= 1;
}

Outcome ablation_trend()
{
    const auto points = ablation_sweep(flower_experiment(), {0.0, 0.2, 0.5, 1.0});
    std::vector<int> valid;
    std::vector<double> entropy;
    std::ostringstream detail;
    for (const auto& p : points) {
        valid.push_back(p.summary.valid_count);
        entropy.push_back(p.summary.entropy);
        detail << (valid.size() > 1 ? "; " : "") << "T=" << fmt(p.temperature) << ": valid " << p.summary.valid_count
               << ", H " << fmt(p.summary.entropy, 3);
    }
    return {monotone_one_tie(valid, false) && monotone_one_tie(entropy, true), detail.str(), ablation_csv(points)};
}

}  // namespace

int main()
{
    namespace fs = std::filesystem;
    const fs::path out_dir = fs::current_path() / "acceptance_out";
    fs::create_directories(out_dir);

    std::vector<Criterion> criteria{
        {1, "gradient oracle", 1.0, gradient_oracle},
        {2, "one-step moment identity", 30.0, moment_identity},
        {3, "stationarity vs Gibbs oracle", 120.0, stationarity},
        {4, "character-level product of experts", 120.0, poe_toy},
        {5, "no-noise collapse", 300.0, noise_collapse},
        {6, "perplexity matrix pattern", 600.0, [] { return perplexity_pattern(flower_conditions()); }},
        {7, "ablation trend", 1200.0, ablation_trend},
        {8, "weight-density betweenness", 0.0, [] { return weight_betweenness(flower_conditions()); }},
    };

    // Build shared models outside the timed sections.
    flower_experiment();

    int failures = 0;
    std::vector<std::string> first_csv;
    for (auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what(), {}};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.time_limit_s <= 0.0 || secs < c.time_limit_s;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::ofstream(out_dir / ("criterion" + std::to_string(c.id) + ".csv"), std::ios::binary) << o.csv;
        first_csv.push_back(o.csv);
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.detail << " ("
                  << fmt(secs, 3) << " s" << (in_time ? "" : ", over time limit") << ")" << std::endl;
    }

    // 9: fresh runs of everything with the same seed.
    {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<int> differing;
        const ConditionRuns repeat_runs = run_conditions(flower_experiment());
        for (std::size_t k = 0; k < criteria.size(); ++k) {
            Outcome o;
            if (criteria[k].id == 6) o = perplexity_pattern(repeat_runs);
            else if (criteria[k].id == 8) o = weight_betweenness(repeat_runs);
            else o = criteria[k].run();
            if (o.csv != first_csv[k] || o.csv.empty()) differing.push_back(criteria[k].id);
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string detail = differing.empty() ? "criteria 1-8 re-exported byte-identical CSVs" : "differing:";
        for (int id : differing) detail += " " + std::to_string(id);
        failures += differing.empty() ? 0 : 1;
        std::cout << (differing.empty() ? "[PASS] " : "[FAIL] ") << "9 determinism: " << detail << " ("
                  << fmt(secs, 3) << " s)" << std::endl;
    }

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
