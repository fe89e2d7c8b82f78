// Command-line front end: training, generation, oracles, tables and SVGs.
#include "planchette/csv.hpp"
#include "planchette/harness.hpp"
#include "planchette/oracle.hpp"
#include "planchette/render.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace planchette;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

ExperimentConfig load_config(const GlobalOptions& g)
{
    ExperimentConfig cfg;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw ConfigError("cannot open config '" + g.config_path + "'");
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw ConfigError("config '" + g.config_path + "': " + e.what());
        }
        cfg = ExperimentConfig::from_json(doc);
    }
    if (g.seed) cfg.dynamics.seed = *g.seed;
    if (!g.out.empty()) cfg.output = g.out;
    cfg.validate();
    return cfg;
}

fs::path output_dir(const ExperimentConfig& cfg)
{
    fs::path dir(cfg.output);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    std::cout << path.string() << '\n';
}

std::vector<Symbol> parse_context(const Alphabet& alphabet, const std::string& text)
{
    return alphabet.encode(text);
}

/// Agent indices for "cocre" (all) or a single agent name.
std::vector<std::size_t> condition_agents(const Experiment& exp, const std::string& condition)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < exp.agent_count(); ++i)
        if (condition == "cocre" || exp.agent_name(i) == condition) idx.push_back(i);
    if (idx.empty()) throw ConfigError("unknown condition '" + condition + "'");
    return idx;
}

EnergyContext context_energy(const Experiment& exp, const std::vector<std::size_t>& which,
                             const std::vector<Symbol>& context)
{
    std::vector<Eigen::VectorXd> dists;
    for (std::size_t i : which) dists.push_back(exp.model(i)->next_char_dist(context));
    return EnergyContext(exp.board(), std::move(dists), exp.config().dynamics.params);
}

double fused_temperature(const Experiment& exp, const std::vector<std::size_t>& which)
{
    double d = 0.0;
    for (std::size_t i : which) d += exp.config().agents[i].noise_d;
    return d / exp.config().dynamics.eta;
}

std::string masses_csv(const Alphabet& alphabet, const Eigen::VectorXd& masses)
{
    std::ostringstream out;
    out << "symbol,mass\n";
    for (Eigen::Index c = 0; c < masses.size(); ++c)
        out << alphabet.name(static_cast<Symbol>(c)) << ',' << format_double(masses[c]) << '\n';
    return out.str();
}

// Subcommands ---------------------------------------------------------------

void cmd_train(const GlobalOptions& g)
{
    const ExperimentConfig cfg = load_config(g);
    const Experiment exp(cfg);
    const fs::path dir = output_dir(cfg) / "models";
    fs::create_directories(dir);
    for (std::size_t i = 0; i < exp.agent_count(); ++i) {
        const auto* ngram = dynamic_cast<const NgramModel*>(exp.model(i).get());
        if (!ngram) throw std::logic_error("agent model is not an n-gram model");
        write_file(dir / (exp.agent_name(i) + ".json"), ngram->to_json().dump(1) + "\n");
    }
}

void cmd_generate(const GlobalOptions& g, const std::string& condition, std::optional<int> trials)
{
    ExperimentConfig cfg = load_config(g);
    if (trials) cfg.trials = *trials;
    cfg.validate();
    const Experiment exp(cfg);
    const auto which = condition_agents(exp, condition);
    const auto evaluator = condition == "cocre" ? exp.evaluator(cfg.evaluator) : exp.model(which.front());
    const TrialRun run =
        run_trials(exp.board(), exp.agents(which), cfg.dynamics, cfg.trials, exp.vocabulary(), *evaluator);

    const fs::path dir = output_dir(cfg);
    const Alphabet& alphabet = exp.board().alphabet();
    write_file(dir / "frequency.csv", frequency_csv(run.summary));
    write_file(dir / "generations.jsonl", generation_jsonl(run.records, alphabet));
    write_file(dir / "summary.json", summary_json(run.summary).dump(2) + "\n");
    const auto& first = run.records.front().per_char;
    for (std::size_t k = 0; k < first.size(); ++k)
        write_file(dir / ("trajectory_t0_c" + std::to_string(k) + ".csv"), trajectory_csv(first[k], alphabet));
}

void cmd_oracle(const GlobalOptions& g, const std::string& context_text, const std::string& condition,
                std::optional<double> temperature, double grid_step)
{
    const ExperimentConfig cfg = load_config(g);
    const Experiment exp(cfg);
    const auto which = condition_agents(exp, condition);
    const EnergyContext ctx = context_energy(exp, which, parse_context(exp.board().alphabet(), context_text));
    const double temp = temperature.value_or(fused_temperature(exp, which));
    const GibbsField field = gibbs_oracle(ctx, temp, grid_step);

    const fs::path dir = output_dir(cfg);
    write_file(dir / "field.csv", field_csv(field.grid, field.energy, field.probs));
    write_file(dir / "char_mass.csv",
               masses_csv(exp.board().alphabet(), voronoi_cell_mass(exp.board(), field.grid, field.probs)));
}

void cmd_compare(const GlobalOptions& g, const std::string& context_text, const std::string& condition, long steps,
                 long burn_in, double grid_step, int refine)
{
    const ExperimentConfig cfg = load_config(g);
    const Experiment exp(cfg);
    const auto which = condition_agents(exp, condition);
    const auto context = parse_context(exp.board().alphabet(), context_text);
    const EnergyContext ctx = context_energy(exp, which, context);
    const double temp = fused_temperature(exp, which);
    if (!(temp > 0.0)) throw ConfigError("compare needs a positive fused temperature");

    const GibbsField field = gibbs_oracle(ctx, temp, grid_step / refine).coarsened(refine);
    const Histogram hist =
        empirical_histogram(exp.board(), exp.agents(which), context, cfg.dynamics, steps, burn_in, grid_step);
    if (!(hist.grid == field.grid)) throw std::logic_error("oracle and histogram grids differ");
    const Eigen::ArrayXXd emp = hist.normalized();
    const double tv = total_variation(emp, field.probs);

    std::ostringstream csv;
    csv << "x,y,empirical,gibbs\n";
    for (Eigen::Index j = 0; j < field.grid.ny; ++j)
        for (Eigen::Index i = 0; i < field.grid.nx; ++i) {
            const Position c = field.grid.center(i, j);
            csv << format_double(c.x()) << ',' << format_double(c.y()) << ',' << format_double(emp(i, j)) << ','
                << format_double(field.probs(i, j)) << '\n';
        }
    const fs::path dir = output_dir(cfg);
    write_file(dir / "compare.csv", csv.str());
    const json summary = {{"context", context_text},  {"condition", condition}, {"temperature", temp},
                          {"steps", steps},           {"burn_in", burn_in},     {"grid_step", grid_step},
                          {"total_variation", tv}};
    write_file(dir / "compare.json", summary.dump(2) + "\n");
}

void cmd_perplexity(const GlobalOptions& g)
{
    const ExperimentConfig cfg = load_config(g);
    const Experiment exp(cfg);
    const ConditionRuns runs = run_conditions(exp);

    std::vector<std::pair<std::string, std::vector<std::string>>> generated;
    for (std::size_t k = 0; k < runs.names.size(); ++k)
        generated.emplace_back(runs.names[k], runs.runs[k].summary.valid_words());
    std::vector<std::pair<std::string, std::shared_ptr<const CharModel>>> evaluators;
    for (std::size_t i = 0; i < exp.agent_count(); ++i) evaluators.emplace_back(exp.agent_name(i), exp.model(i));
    evaluators.emplace_back("fused", exp.fused_model());

    const fs::path dir = output_dir(cfg);
    for (std::size_t k = 0; k < runs.names.size(); ++k)
        write_file(dir / ("frequency_" + runs.names[k] + ".csv"), frequency_csv(runs.runs[k].summary));
    write_file(dir / "perplexity.csv", perplexity_csv(perplexity_matrix(generated, evaluators)));
    const WeightDensity density = export_weight_density(generated, exp.vocabulary());
    write_file(dir / "weights.csv", density.weights_csv());
    write_file(dir / "weights_hist.csv", density.histogram_csv());
}

void cmd_ablate(const GlobalOptions& g, const std::vector<double>& temperatures)
{
    const ExperimentConfig cfg = load_config(g);
    const Experiment exp(cfg);
    const auto points = ablation_sweep(exp, temperatures);
    const fs::path dir = output_dir(cfg);
    write_file(dir / "ablation.csv", ablation_csv(points));
    for (const auto& p : points)
        write_file(dir / ("frequency_T" + format_double(p.temperature) + ".csv"), frequency_csv(p.summary));
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Rebuilds a grid from cell-center columns of a field CSV.
std::pair<GridSpec, Eigen::ArrayXXd> field_from_csv(const CsvTable& table, const std::string& column)
{
    std::vector<double> xs, ys, vs;
    try {
        xs = table.numbers("x");
        ys = table.numbers("y");
        vs = table.numbers(column);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field CSV: ") + e.what());
    }
    const std::set<double> ux(xs.begin(), xs.end());
    const std::set<double> uy(ys.begin(), ys.end());
    if (ux.size() < 2 || uy.size() < 2 || ux.size() * uy.size() != xs.size())
        throw ConfigError("field CSV is not a full regular grid");
    GridSpec grid;
    grid.step = *std::next(ux.begin()) - *ux.begin();
    grid.x0 = *ux.begin() - grid.step / 2;
    grid.y0 = *uy.begin() - grid.step / 2;
    grid.nx = static_cast<Eigen::Index>(ux.size());
    grid.ny = static_cast<Eigen::Index>(uy.size());
    Eigen::ArrayXXd values = Eigen::ArrayXXd::Zero(grid.nx, grid.ny);
    for (std::size_t r = 0; r < xs.size(); ++r) {
        const auto [i, j] = grid.cell_of(Position(xs[r], ys[r]));
        values(i, j) = vs[r];
    }
    return {grid, values};
}

void cmd_render(const GlobalOptions& g, const std::string& field_path, const std::string& column,
                const std::string& trajectory_path, const std::string& name)
{
    const ExperimentConfig cfg = load_config(g);
    const BoardLayout board = cfg.board.empty() || cfg.board == "default" ? default_board() : load_board(cfg.board);
    GridSpec grid;
    Eigen::ArrayXXd field;
    std::vector<Position> path;
    if (!field_path.empty()) std::tie(grid, field) = field_from_csv(parse_csv(read_text(field_path)), column);
    if (!trajectory_path.empty()) {
        const CsvTable table = parse_csv(read_text(trajectory_path));
        std::vector<double> xs, ys;
        try {
            xs = table.numbers("x");
            ys = table.numbers("y");
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("trajectory CSV: ") + e.what());
        }
        for (std::size_t r = 0; r < xs.size(); ++r) path.emplace_back(xs[r], ys[r]);
    }
    write_file(output_dir(cfg) / name, render_svg(board, grid, field, path));
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Collective Langevin planchette simulator"};
    app.require_subcommand(1);
    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "Base seed (overrides config)");
    app.add_option("--out", g.out, "Output directory (overrides config)");

    auto* train = app.add_subcommand("train", "Train and save the agents' n-gram models");

    std::string condition = "cocre";
    int trials = 0;
    auto* generate = app.add_subcommand("generate", "Run trials and write frequency tables and generations");
    generate->add_option("--condition", condition, "cocre or an agent name");
    auto* trials_opt = generate->add_option("--trials", trials)->check(CLI::PositiveNumber);

    std::string context;
    double temperature = 0.0;
    double grid_step = 0.1;
    auto* oracle = app.add_subcommand("oracle", "Gibbs field and character masses for one context");
    oracle->add_option("--context", context, "Characters generated so far");
    oracle->add_option("--condition", condition, "cocre or an agent name");
    auto* temp_opt = oracle->add_option("--temperature", temperature, "Defaults to the fused temperature");
    oracle->add_option("--grid", grid_step);

    long steps = 200000;
    long burn_in = 10000;
    int refine = 5;
    auto* compare = app.add_subcommand("compare", "Empirical occupation histogram against the Gibbs oracle");
    compare->add_option("--context", context);
    compare->add_option("--condition", condition);
    compare->add_option("--steps", steps)->check(CLI::PositiveNumber);
    compare->add_option("--burn-in", burn_in)->check(CLI::NonNegativeNumber);
    compare->add_option("--grid", grid_step);
    compare->add_option("--refine", refine, "Oracle sub-cells per histogram cell edge")->check(CLI::PositiveNumber);

    auto* perplexity_cmd = app.add_subcommand("perplexity", "Per-condition runs, perplexity matrix, weight export");

    std::vector<double> temperatures{0.0, 0.2, 0.5, 1.0};
    auto* ablate = app.add_subcommand("ablate", "Sweep the fused temperature");
    ablate->add_option("--temperatures", temperatures)->delimiter(',');

    std::string field_path;
    std::string column = "prob";
    std::string trajectory_path;
    std::string svg_name = "render.svg";
    auto* render = app.add_subcommand("render", "SVG of a field CSV and/or a trajectory CSV");
    render->add_option("--field", field_path)->check(CLI::ExistingFile);
    render->add_option("--column", column, "Field column to shade");
    render->add_option("--trajectory", trajectory_path)->check(CLI::ExistingFile);
    render->add_option("--name", svg_name, "Output file name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (*seed_opt) g.seed = seed;

    try {
        if (*train) cmd_train(g);
        else if (*generate) cmd_generate(g, condition, *trials_opt ? std::optional<int>(trials) : std::nullopt);
        else if (*oracle) cmd_oracle(g, context, condition, *temp_opt ? std::optional<double>(temperature) : std::nullopt, grid_step);
        else if (*compare) cmd_compare(g, context, condition, steps, burn_in, grid_step, refine);
        else if (*perplexity_cmd) cmd_perplexity(g);
        else if (*ablate) cmd_ablate(g, temperatures);
        else if (*render) cmd_render(g, field_path, column, trajectory_path, svg_name);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
