#include "conmf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace conmf {

namespace {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string solver_prefix(SolverKind s) {
    return s == SolverKind::ActiveSet ? "aS_" : "neNMF_";
}

std::string kind_suffix(CompressorKind k) {
    switch (k) {
        case CompressorKind::None: return "V";
        case CompressorKind::Gaussian: return "GC";
        case CompressorKind::Rsi: return "RSI";
        case CompressorKind::CountGauss: return "CG";
        case CompressorKind::Stream: return "GC_RE";
    }
    return "?";
}

std::string param_tag(const CompressorSpec& s) {
    switch (s.kind) {
        case CompressorKind::None: return "";
        case CompressorKind::Gaussian: return "_nu" + std::to_string(s.nu);
        case CompressorKind::Rsi: return "_nu" + std::to_string(s.nu) + "_q" + std::to_string(s.q);
        case CompressorKind::CountGauss:
            return "_nu" + std::to_string(s.nu) + "_mu" + std::to_string(s.mu);
        case CompressorKind::Stream:
            return "_nu" + std::to_string(s.nu_i) + "_mi" +
                   (s.max_iter == CompressorSpec::kInfinite ? "inf" : std::to_string(s.max_iter));
    }
    return "";
}

void emit_table(const TraceGrid& traces, const std::string& path, const char* sep) {
    if (traces.empty()) throw std::invalid_argument("emit: no traces to write");
    const std::size_t len = traces.begin()->second.values.size();
    for (const auto& [key, tr] : traces)
        if (tr.values.size() != len)
            throw std::invalid_argument("emit: traces have unequal lengths");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit: cannot open " + path);

    const auto names = column_names(traces);
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? sep : "") << names[c];
    out << "\n";
    for (std::size_t r = 0; r < len; ++r) {
        std::size_t c = 0;
        for (const auto& [key, tr] : traces) out << (c++ ? sep : "") << fmt17(tr.values[r]);
        out << "\n";
    }
    out.flush();
    if (!out) throw std::runtime_error("emit: write failed for " + path);
}

Rational countgauss_refresh_cost(std::size_t n, std::size_t m, std::size_t p,
                                 const CompressorSpec& s) {
    // sketch pass over each side (n*m adds apiece) plus the small dense
    // products Omega * (S X) on both sides
    const __int128 sketch = 2 * static_cast<__int128>(n) * m;
    const __int128 dense =
        static_cast<__int128>(p + s.nu) * (p + s.mu) * (static_cast<__int128>(n) + m);
    return Rational(static_cast<std::int64_t>(sketch)) +
           Rational(static_cast<std::int64_t>(dense));
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n < 1 || m < 1 || p < 1) throw std::invalid_argument("experiment: n, m, p must be >= 1");
    if (p > std::min(n, m)) throw std::invalid_argument("experiment: p exceeds min(n,m)");
    if (num_seeds < 1) throw std::invalid_argument("experiment: num_seeds must be >= 1");
    if (outer_iters < 1) throw std::invalid_argument("experiment: outer_iters must be >= 1");
    if (solvers.empty()) throw std::invalid_argument("experiment: no solvers selected");
    if (strategy_grid.empty()) throw std::invalid_argument("experiment: empty strategy grid");
    for (const auto& s : strategy_grid) s.validate(n, m, p);
}

Matrix synth_lowrank(std::size_t n, std::size_t m, std::size_t p, const RandomSource& src) {
    if (p < 1 || p > std::min(n, m))
        throw std::invalid_argument("synth_lowrank: need 1 <= p <= min(n,m)");
    const Matrix gstar = nonneg_uniform_matrix(src.substream(0), n, p);
    const Matrix fstar = nonneg_uniform_matrix(src.substream(1), p, m);
    return matmul(gstar, fstar);
}

RreTrace median_trace(const std::vector<RreTrace>& traces) {
    if (traces.empty()) throw std::invalid_argument("median_trace: no traces");
    const std::size_t len = traces.front().values.size();
    for (const auto& t : traces)
        if (t.values.size() != len) throw std::invalid_argument("median_trace: unequal lengths");

    RreTrace out;
    out.label = traces.front().label;
    out.values.resize(len);
    std::vector<double> point(traces.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t s = 0; s < traces.size(); ++s) point[s] = traces[s].values[i];
        std::sort(point.begin(), point.end());
        const std::size_t half = point.size() / 2;
        out.values[i] =
            (point.size() % 2 == 1) ? point[half] : 0.5 * (point[half - 1] + point[half]);
    }
    return out;
}

TraceGrid run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    struct Task {
        std::size_t seed_idx;
        SolverKind solver;
        CompressorSpec strategy;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < cfg.num_seeds; ++s)
        for (SolverKind solver : cfg.solvers)
            for (const auto& strategy : cfg.strategy_grid) tasks.push_back({s, solver, strategy});

    std::vector<std::optional<RreTrace>> results(tasks.size());
    std::vector<std::string> errors(tasks.size());

    auto run_task = [&](std::size_t i) {
        const Task& t = tasks[i];
        const std::uint64_t run_seed = derive_seed(cfg.base_seed, t.seed_idx);
        try {
            const Matrix x =
                synth_lowrank(cfg.n, cfg.m, cfg.p, RandomSource(run_seed).substream(3));
            NmfConfig ncfg;
            ncfg.p = cfg.p;
            ncfg.outer_iters = cfg.outer_iters;
            ncfg.solver = t.solver;
            ncfg.compressor = t.strategy;
            ncfg.seed = run_seed;
            results[i] = run_nmf(x, ncfg).trace;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    std::size_t nthreads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    nthreads = std::max<std::size_t>(1, std::min(nthreads, tasks.size()));
    if (nthreads == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(nthreads);
        for (std::size_t w = 0; w < nthreads; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
                    run_task(i);
            });
        for (auto& th : workers) th.join();
    }

    TraceGrid grid;
    for (SolverKind solver : cfg.solvers) {
        for (const auto& strategy : cfg.strategy_grid) {
            std::vector<RreTrace> cell;
            bool failed = false;
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                if (tasks[i].solver != solver || !(tasks[i].strategy == strategy)) continue;
                if (results[i]) {
                    cell.push_back(*results[i]);
                } else {
                    failed = true;
                    std::cerr << "run failed: " << solver_name(solver) << "/" << strategy.describe()
                              << "/seed_idx=" << tasks[i].seed_idx << ": " << errors[i] << "\n";
                }
            }
            RreTrace agg;
            agg.label = {solver, strategy, cfg.base_seed};
            if (failed || cell.empty()) {
                agg.values.assign(cfg.outer_iters + 1, std::nan(""));
            } else {
                agg = median_trace(cell);
                agg.label = {solver, strategy, cfg.base_seed};
            }
            grid[{solver, strategy}] = std::move(agg);
        }
    }
    return grid;
}

std::vector<std::string> column_names(const TraceGrid& traces) {
    // A kind gets parameter tags once the grid holds more than one spec of it.
    std::map<CompressorKind, std::set<std::string>> variants;
    for (const auto& [key, tr] : traces)
        variants[key.strategy.kind].insert(param_tag(key.strategy));

    std::vector<std::string> names;
    names.reserve(traces.size());
    for (const auto& [key, tr] : traces) {
        std::string name = solver_prefix(key.solver) + kind_suffix(key.strategy.kind);
        if (variants[key.strategy.kind].size() > 1) name += param_tag(key.strategy);
        names.push_back(std::move(name));
    }
    return names;
}

void emit_dat(const TraceGrid& traces, const std::string& path) { emit_table(traces, path, " "); }

void emit_csv(const TraceGrid& traces, const std::string& path) { emit_table(traces, path, ","); }

CostReport compute_cost_report(const ExperimentConfig& cfg) {
    cfg.validate();
    CostReport report;
    report.n = cfg.n;
    report.m = cfg.m;
    report.p = cfg.p;
    report.outer_iters = cfg.outer_iters;

    std::vector<CompressorSpec> ordered = cfg.strategy_grid;
    std::sort(ordered.begin(), ordered.end(), spec_less);
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    for (const auto& s : ordered) {
        StrategyCost row;
        row.spec = s;
        switch (s.kind) {
            case CompressorKind::None:
                break;  // all zero
            case CompressorKind::Gaussian:
                row.per_refresh = Rational(2) * Rational(flops_project(cfg.n, cfg.m, cfg.p, s.nu));
                row.refreshes = 1;
                row.total = row.per_refresh;
                break;
            case CompressorKind::Rsi:
                row.setup = Rational(2) * flops_rpi(cfg.n, cfg.m, cfg.p, s.nu, s.q);
                row.per_refresh = Rational(2) * Rational(flops_project(cfg.n, cfg.m, cfg.p, s.nu));
                row.refreshes = 1;
                row.total = row.setup + row.per_refresh;
                break;
            case CompressorKind::CountGauss:
                row.per_refresh = countgauss_refresh_cost(cfg.n, cfg.m, cfg.p, s);
                row.refreshes = 1;
                row.total = row.per_refresh;
                break;
            case CompressorKind::Stream: {
                row.per_refresh = Rational(2) * Rational(flops_project(cfg.n, cfg.m, cfg.p, s.nu_i));
                row.refreshes = s.max_iter == CompressorSpec::kInfinite
                                    ? 1
                                    : (cfg.outer_iters + s.max_iter - 1) / s.max_iter;
                row.total = Rational(static_cast<std::int64_t>(row.refreshes)) * row.per_refresh;
                break;
            }
        }
        report.rows.push_back(std::move(row));
    }

    // Crossover of each stream against the first structured compressor: the
    // smallest refresh count whose cumulative projection cost exceeds the
    // structured total.
    const StrategyCost* rsi_row = nullptr;
    for (const auto& row : report.rows)
        if (row.spec.kind == CompressorKind::Rsi) {
            rsi_row = &row;
            break;
        }
    if (rsi_row) {
        for (const auto& row : report.rows) {
            if (row.spec.kind != CompressorKind::Stream) continue;
            CostReport::Crossover cx;
            cx.stream = row.spec;
            cx.rsi = rsi_row->spec;
            cx.refreshes = static_cast<std::size_t>(rsi_row->total.floor_div(row.per_refresh)) + 1;
            report.crossovers.push_back(cx);
        }
    }
    return report;
}

std::string format_cost_report(const CostReport& report) {
    std::ostringstream out;
    out << "compression operation counts (exact), n=" << report.n << " m=" << report.m
        << " p=" << report.p << " iterations=" << report.outer_iters << "\n\n";

    std::vector<std::vector<std::string>> cells;
    cells.push_back({"strategy", "setup", "per_refresh", "refreshes", "total"});
    for (const auto& row : report.rows)
        cells.push_back({row.spec.describe(), row.setup.to_string(), row.per_refresh.to_string(),
                         std::to_string(row.refreshes), row.total.to_string()});

    std::vector<std::size_t> width(cells[0].size(), 0);
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            out << line[c];
            if (c + 1 < line.size()) out << std::string(width[c] - line[c].size() + 2, ' ');
        }
        out << "\n";
    }

    for (const auto& cx : report.crossovers)
        out << "\n" << cx.stream.describe() << " overtakes " << cx.rsi.describe()
            << " in total projection cost at refresh " << cx.refreshes << "\n";
    return out.str();
}

void emit_cost_report(const ExperimentConfig& cfg, const std::string& path) {
    const std::string text = format_cost_report(compute_cost_report(cfg));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_cost_report: cannot open " + path);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("emit_cost_report: write failed for " + path);
}

}  // namespace conmf
