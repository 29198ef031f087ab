#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "conmf/bench.hpp"

namespace conmf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Split on top-level commas, leaving parenthesized parameter lists intact.
std::vector<std::string> split_top_level(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) parts.push_back(trim(cur));
    return parts;
}

std::size_t parse_count(const std::string& v, const std::string& what) {
    if (v == "inf" || v == "INF") return CompressorSpec::kInfinite;
    try {
        const long long x = std::stoll(v);
        if (x < 0) throw std::invalid_argument("negative");
        return static_cast<std::size_t>(x);
    } catch (...) {
        throw std::invalid_argument("cannot parse " + what + " value '" + v + "'");
    }
}

/// Strategy grammar: name or name(key=value,...). Names: vanilla|none,
/// gaussian|gc, rsi, countgauss|cg, stream|gcs. Keys: nu, q, mu, nu_i,
/// max_iter ("inf" allowed).
CompressorSpec parse_strategy(const std::string& text) {
    std::string name = trim(text);
    std::map<std::string, std::string> params;
    const auto open = name.find('(');
    if (open != std::string::npos) {
        if (name.back() != ')') throw std::invalid_argument("strategy '" + text + "': missing ')'");
        const std::string inner = name.substr(open + 1, name.size() - open - 2);
        name = trim(name.substr(0, open));
        for (const auto& kv : split_top_level(inner)) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("strategy '" + text + "': expected key=value, got '" + kv +
                                            "'");
            params[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
        }
    }

    auto get = [&](const char* key, std::size_t fallback, bool required = false) {
        const auto it = params.find(key);
        if (it == params.end()) {
            if (required)
                throw std::invalid_argument("strategy '" + text + "': missing parameter '" + key + "'");
            return fallback;
        }
        const std::size_t v = parse_count(it->second, key);
        params.erase(it);
        return v;
    };
    auto finish = [&](CompressorSpec s) {
        if (!params.empty())
            throw std::invalid_argument("strategy '" + text + "': unknown parameter '" +
                                        params.begin()->first + "'");
        return s;
    };

    if (name == "vanilla" || name == "none") return finish(CompressorSpec::none());
    if (name == "gaussian" || name == "gc") return finish(CompressorSpec::gaussian(get("nu", 0, true)));
    if (name == "rsi") return finish(CompressorSpec::rsi(get("nu", 0, true), get("q", 4)));
    if (name == "countgauss" || name == "cg")
        return finish(CompressorSpec::countgauss(get("nu", 0, true), get("mu", 0, true)));
    if (name == "stream" || name == "gcs")
        return finish(CompressorSpec::stream(get("nu_i", 0, true), get("max_iter", 1)));
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::vector<SolverKind> parse_solvers(const std::string& v) {
    if (v == "as" || v == "activeset" || v == "active_set") return {SolverKind::ActiveSet};
    if (v == "nenmf" || v == "nesterov" || v == "ne") return {SolverKind::Nesterov};
    if (v == "both") return {SolverKind::ActiveSet, SolverKind::Nesterov};
    throw std::invalid_argument("unknown solver '" + v + "' (expected as, nenmf or both)");
}

/// Flat key = value config, '#' starts a comment. Keys: n, m, p, iters,
/// seeds, seed, solver, strategies, out, threads.
void apply_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "n") cfg.n = parse_count(value, key);
        else if (key == "m") cfg.m = parse_count(value, key);
        else if (key == "p") cfg.p = parse_count(value, key);
        else if (key == "iters") cfg.outer_iters = parse_count(value, key);
        else if (key == "seeds") cfg.num_seeds = parse_count(value, key);
        else if (key == "seed") cfg.base_seed = std::stoull(value);
        else if (key == "threads") cfg.threads = parse_count(value, key);
        else if (key == "solver") cfg.solvers = parse_solvers(value);
        else if (key == "out") cfg.output_dir = value;
        else if (key == "strategies") {
            cfg.strategy_grid.clear();
            for (const auto& part : split_top_level(value))
                cfg.strategy_grid.push_back(parse_strategy(part));
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                                     "'");
        }
    }
}

std::vector<CompressorSpec> demo_grid() {
    std::vector<CompressorSpec> grid;
    grid.push_back(CompressorSpec::none());
    grid.push_back(CompressorSpec::gaussian(10));
    grid.push_back(CompressorSpec::gaussian(50));
    grid.push_back(CompressorSpec::rsi(10, 4));
    grid.push_back(CompressorSpec::countgauss(10, 30));
    for (std::size_t nu_i : {10u, 50u})
        for (std::size_t mi : {1u, 2u, 5u, 10u, 25u}) grid.push_back(CompressorSpec::stream(nu_i, mi));
    grid.push_back(CompressorSpec::stream(100, 1));
    grid.push_back(CompressorSpec::stream(150, 1));
    return grid;
}

std::string default_out_dir() {
    if (const char* env = std::getenv("CONMF_OUT_DIR")) return env;
    return "out";
}

void execute_experiment(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    const TraceGrid traces = run_experiment(cfg);

    const std::string dat = cfg.output_dir + "/rre_median.dat";
    const std::string csv = cfg.output_dir + "/rre_median.csv";
    const std::string cost = cfg.output_dir + "/cost_report.txt";
    emit_dat(traces, dat);
    emit_csv(traces, csv);
    emit_cost_report(cfg, cost);

    std::cout << "wrote " << dat << "\nwrote " << csv << "\nwrote " << cost << "\n\n";
    std::cout << "final median RRE per column:\n";
    const auto names = column_names(traces);
    std::size_t c = 0;
    for (const auto& [key, tr] : traces) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6e", tr.values.back());
        std::cout << "  " << names[c++] << " = " << buf << "\n";
    }
}

// Flag values land here first; they are applied over the config file only
// when actually given on the command line.
struct Flags {
    std::size_t n = 0, m = 0, p = 0, iters = 0, seeds = 0, threads = 0;
    std::uint64_t seed = 0;
    std::size_t nu = 10, nu_i = 0, mu = 30, q = 4;
    std::string max_iter = "1";
    std::string solver, strategy, out, config;
};

struct FlagOpts {
    CLI::Option* n = nullptr;
    CLI::Option* m = nullptr;
    CLI::Option* p = nullptr;
    CLI::Option* iters = nullptr;
    CLI::Option* seeds = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* threads = nullptr;
};

FlagOpts add_common(CLI::App* cmd, Flags& fl, bool with_config) {
    FlagOpts opts;
    if (with_config) cmd->add_option("--config", fl.config, "flat key=value config file");
    opts.n = cmd->add_option("--n", fl.n, "data rows");
    opts.m = cmd->add_option("--m", fl.m, "data columns");
    opts.p = cmd->add_option("--p", fl.p, "factorization rank");
    cmd->add_option("--nu", fl.nu, "oversampling for gaussian/rsi/countgauss");
    cmd->add_option("--nu-i", fl.nu_i, "per-refresh oversampling for stream");
    cmd->add_option("--mu", fl.mu, "countgauss sketch oversampling");
    cmd->add_option("--q", fl.q, "rsi subspace iterations");
    cmd->add_option("--max-iter", fl.max_iter, "stream refresh period (count or 'inf')");
    opts.iters = cmd->add_option("--iters", fl.iters, "outer NMF iterations");
    opts.seeds = cmd->add_option("--seeds", fl.seeds, "number of simulation seeds");
    opts.seed = cmd->add_option("--seed", fl.seed, "base seed");
    cmd->add_option("--solver", fl.solver, "as, nenmf or both");
    cmd->add_option("--strategy", fl.strategy, "single strategy expression, replaces the grid");
    cmd->add_option("--out", fl.out, "output directory");
    opts.threads = cmd->add_option("--threads", fl.threads, "worker threads (0 = hardware)");
    return opts;
}

CompressorSpec strategy_from_flags(const Flags& fl) {
    const std::string& name = fl.strategy;
    if (name == "vanilla" || name == "none") return CompressorSpec::none();
    if (name == "gaussian" || name == "gc") return CompressorSpec::gaussian(fl.nu);
    if (name == "rsi") return CompressorSpec::rsi(fl.nu, fl.q);
    if (name == "countgauss" || name == "cg") return CompressorSpec::countgauss(fl.nu, fl.mu);
    if (name == "stream" || name == "gcs")
        return CompressorSpec::stream(fl.nu_i ? fl.nu_i : fl.nu, parse_count(fl.max_iter, "max_iter"));
    return parse_strategy(name);  // full expression form also accepted
}

void overlay_flags(const Flags& fl, const FlagOpts& opts, ExperimentConfig& cfg) {
    if (opts.n->count()) cfg.n = fl.n;
    if (opts.m->count()) cfg.m = fl.m;
    if (opts.p->count()) cfg.p = fl.p;
    if (opts.iters->count()) cfg.outer_iters = fl.iters;
    if (opts.seeds->count()) cfg.num_seeds = fl.seeds;
    if (opts.seed->count()) cfg.base_seed = fl.seed;
    if (opts.threads->count()) cfg.threads = fl.threads;
    if (!fl.solver.empty()) cfg.solvers = parse_solvers(fl.solver);
    if (!fl.strategy.empty()) cfg.strategy_grid = {strategy_from_flags(fl)};
    if (!fl.out.empty()) cfg.output_dir = fl.out;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"compressed NMF bench harness"};
    app.require_subcommand(1);

    Flags fl;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
    const FlagOpts run_opts = add_common(run, fl, true);
    CLI::App* cost = app.add_subcommand("cost", "emit the operation-count report only");
    const FlagOpts cost_opts = add_common(cost, fl, false);
    CLI::App* demo = app.add_subcommand("demo", "built-in desk-scale experiment over the full grid");
    const FlagOpts demo_opts = add_common(demo, fl, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        ExperimentConfig cfg;
        cfg.output_dir = default_out_dir();

        if (run->parsed()) {
            if (!fl.config.empty()) apply_config_file(fl.config, cfg);
            overlay_flags(fl, run_opts, cfg);
            if (cfg.strategy_grid.empty()) cfg.strategy_grid = {CompressorSpec::none()};
            execute_experiment(cfg);
            return 0;
        }

        if (cost->parsed()) {
            overlay_flags(fl, cost_opts, cfg);
            if (fl.strategy.empty()) {
                const std::size_t mi = parse_count(fl.max_iter, "max_iter");
                cfg.strategy_grid = {CompressorSpec::gaussian(fl.nu), CompressorSpec::rsi(fl.nu, fl.q),
                                     CompressorSpec::stream(fl.nu_i ? fl.nu_i : fl.nu, mi)};
            }
            std::cout << format_cost_report(compute_cost_report(cfg));
            if (!fl.out.empty()) {
                std::filesystem::create_directories(fl.out);
                emit_cost_report(cfg, fl.out + "/cost_report.txt");
            }
            return 0;
        }

        // demo
        cfg.base_seed = 42;
        cfg.strategy_grid = demo_grid();
        overlay_flags(fl, demo_opts, cfg);
        if (fl.strategy.empty() && cfg.strategy_grid.empty()) cfg.strategy_grid = demo_grid();
        execute_experiment(cfg);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace conmf
