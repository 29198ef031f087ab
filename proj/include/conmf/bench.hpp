#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conmf/compress.hpp"
#include "conmf/nmf.hpp"

namespace conmf {

/// Multi-seed experiment over a grid of (solver, strategy) cells on synthetic
/// rank-p data.
struct ExperimentConfig {
    std::size_t n = 200;
    std::size_t m = 200;
    std::size_t p = 5;
    std::size_t num_seeds = 15;
    std::size_t outer_iters = 100;
    std::vector<SolverKind> solvers = {SolverKind::ActiveSet, SolverKind::Nesterov};
    std::vector<CompressorSpec> strategy_grid;
    std::uint64_t base_seed = 0;
    std::string output_dir = ".";
    std::size_t threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct GridKey {
    SolverKind solver = SolverKind::ActiveSet;
    CompressorSpec strategy;

    bool operator<(const GridKey& o) const {
        if (solver != o.solver) return solver < o.solver;
        return spec_less(strategy, o.strategy);
    }
};

using TraceGrid = std::map<GridKey, RreTrace>;

/// X = G* F* with entrywise-uniform factors; nonnegative and rank p almost
/// surely. Factors come from substreams 0 and 1 of src.
Matrix synth_lowrank(std::size_t n, std::size_t m, std::size_t p, const RandomSource& src);

/// Pointwise median over equally long traces (middle value for odd counts,
/// mean of the two middle values for even counts).
RreTrace median_trace(const std::vector<RreTrace>& traces);

/// Run every (seed, solver, strategy) cell and aggregate pointwise medians
/// per (solver, strategy). Seed s of the experiment runs with
/// derive_seed(base_seed, s), so all strategies of one seed share the data
/// matrix and the factor initialization. A cell whose runs fail is reported
/// on stderr and carries an all-NaN trace in the result.
TraceGrid run_experiment(const ExperimentConfig& cfg);

/// Column keys in the emitted tables, canonical order (solver then strategy):
/// prefix aS_/neNMF_, suffix V, GC, RSI, CG or GC_RE, with parameter tags
/// appended whenever one strategy kind appears more than once in the grid.
std::vector<std::string> column_names(const TraceGrid& traces);

/// Whitespace-separated table, one header line then one row per iteration
/// index; 17 significant digits, missing cells as "nan".
void emit_dat(const TraceGrid& traces, const std::string& path);

/// Same table, comma-separated.
void emit_csv(const TraceGrid& traces, const std::string& path);

/// Exact operation counts per strategy plus the refresh count at which a
/// stream's projection total first exceeds the structured compressor's total.
struct StrategyCost {
    CompressorSpec spec;
    Rational setup;        // structured build cost, paid once
    Rational per_refresh;  // cost of recomputing X_L and X_R
    std::size_t refreshes = 0;
    Rational total;
};

struct CostReport {
    std::size_t n = 0, m = 0, p = 0, outer_iters = 0;
    std::vector<StrategyCost> rows;

    struct Crossover {
        CompressorSpec stream;
        CompressorSpec rsi;
        std::size_t refreshes = 0;  // smallest refresh count with stream total > rsi total
    };
    std::vector<Crossover> crossovers;
};

CostReport compute_cost_report(const ExperimentConfig& cfg);
std::string format_cost_report(const CostReport& report);

/// Formats compute_cost_report(cfg) and writes it to path.
void emit_cost_report(const ExperimentConfig& cfg, const std::string& path);

/// CLI entry point (subcommands run / cost / demo). Returns the process exit
/// status.
int cli_main(int argc, const char* const* argv);

}  // namespace conmf
