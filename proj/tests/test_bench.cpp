#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "conmf/bench.hpp"
#include "oracles.hpp"

using namespace conmf;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(static_cast<bool>(in));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

ExperimentConfig tiny_experiment() {
    ExperimentConfig cfg;
    cfg.n = 30;
    cfg.m = 30;
    cfg.p = 3;
    cfg.num_seeds = 3;
    cfg.outer_iters = 8;
    cfg.solvers = {SolverKind::ActiveSet};
    cfg.strategy_grid = {CompressorSpec::none(), CompressorSpec::gaussian(4),
                         CompressorSpec::stream(4, 2)};
    cfg.base_seed = 77;
    cfg.threads = 2;
    return cfg;
}

}  // namespace

TEST_CASE("synth_lowrank produces nonnegative exact-rank data") {
    const RandomSource src(9);

    SUBCASE("rank-1 instance has vanishing 2x2 minors") {
        const Matrix x = synth_lowrank(12, 10, 1, src);
        for (std::size_t i = 0; i + 1 < x.rows(); ++i)
            for (std::size_t j = 0; j + 1 < x.cols(); ++j) {
                const double minor = x(i, j) * x(i + 1, j + 1) - x(i, j + 1) * x(i + 1, j);
                CHECK(std::fabs(minor) <= 1e-10);
            }
    }

    SUBCASE("entries are nonnegative") {
        const Matrix x = synth_lowrank(25, 20, 4, src);
        for (double v : x.data()) CHECK(v >= 0.0);
    }

    SUBCASE("singular values past p vanish relative to the largest") {
        const Matrix x = synth_lowrank(50, 50, 5, src);
        const auto sv = oracle::deflated_singular_values(x, 6);
        CHECK(sv[5] <= 1e-10 * sv[0]);
    }

    SUBCASE("p above min(n,m) is rejected") {
        CHECK_THROWS_AS(synth_lowrank(4, 10, 5, src), std::invalid_argument);
    }
}

TEST_CASE("median_trace") {
    RunLabel label;
    const RreTrace a{{1.0, 5.0, 0.1}, label};
    const RreTrace b{{2.0, 4.0, 0.3}, label};
    const RreTrace c{{3.0, 6.0, 0.2}, label};

    SUBCASE("median of one is the trace itself") {
        CHECK(median_trace({a}).values == a.values);
    }
    SUBCASE("median of three picks the pointwise middle value") {
        CHECK(median_trace({a, b, c}).values == std::vector<double>{2.0, 5.0, 0.2});
    }
    SUBCASE("median of two averages") {
        CHECK(median_trace({a, b}).values == std::vector<double>{1.5, 4.5, 0.2});
    }
    SUBCASE("unequal lengths rejected") {
        CHECK_THROWS_AS(median_trace({a, RreTrace{{1.0}, label}}), std::invalid_argument);
    }
}

TEST_CASE("run_experiment is deterministic and permutation invariant") {
    const ExperimentConfig cfg = tiny_experiment();
    const TraceGrid first = run_experiment(cfg);
    CHECK(first.size() == 3);

    ExperimentConfig permuted = cfg;
    std::swap(permuted.strategy_grid[0], permuted.strategy_grid[2]);
    permuted.threads = 1;  // thread count must not matter either
    const TraceGrid second = run_experiment(permuted);

    REQUIRE(second.size() == first.size());
    auto it1 = first.begin();
    auto it2 = second.begin();
    for (; it1 != first.end(); ++it1, ++it2) {
        CHECK(it1->first.solver == it2->first.solver);
        CHECK(it1->first.strategy == it2->first.strategy);
        CHECK(it1->second.values == it2->second.values);
    }
}

TEST_CASE("run_experiment with one seed returns the plain trace") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.num_seeds = 1;
    cfg.strategy_grid = {CompressorSpec::none()};
    const TraceGrid grid = run_experiment(cfg);
    REQUIRE(grid.size() == 1);

    const std::uint64_t run_seed = derive_seed(cfg.base_seed, 0);
    const Matrix x = synth_lowrank(cfg.n, cfg.m, cfg.p, RandomSource(run_seed).substream(3));
    NmfConfig ncfg;
    ncfg.p = cfg.p;
    ncfg.outer_iters = cfg.outer_iters;
    ncfg.solver = SolverKind::ActiveSet;
    ncfg.seed = run_seed;
    CHECK(grid.begin()->second.values == vanilla_nmf(x, ncfg).trace.values);
}

TEST_CASE("column names follow the paper's key scheme") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.solvers = {SolverKind::ActiveSet, SolverKind::Nesterov};
    cfg.num_seeds = 1;
    cfg.outer_iters = 2;
    cfg.strategy_grid = {CompressorSpec::none(), CompressorSpec::gaussian(4),
                         CompressorSpec::rsi(4, 2), CompressorSpec::countgauss(4, 10),
                         CompressorSpec::stream(4, 1)};
    const TraceGrid grid = run_experiment(cfg);
    const auto names = column_names(grid);
    const std::vector<std::string> expected = {
        "aS_V",    "aS_GC",    "aS_RSI",    "aS_CG",    "aS_GC_RE",
        "neNMF_V", "neNMF_GC", "neNMF_RSI", "neNMF_CG", "neNMF_GC_RE"};
    CHECK(names == expected);
}

TEST_CASE("column names get parameter tags once a kind repeats") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.num_seeds = 1;
    cfg.outer_iters = 2;
    cfg.strategy_grid = {CompressorSpec::stream(4, 1),
                         CompressorSpec::stream(4, CompressorSpec::kInfinite),
                         CompressorSpec::stream(6, 1)};
    const auto names = column_names(run_experiment(cfg));
    const std::vector<std::string> expected = {"aS_GC_RE_nu4_mi1", "aS_GC_RE_nu4_miinf",
                                               "aS_GC_RE_nu6_mi1"};
    CHECK(names == expected);
}

TEST_CASE("emit_dat format and round trip") {
    RunLabel label;
    TraceGrid grid;
    grid[{SolverKind::ActiveSet, CompressorSpec::none()}] = {{1.0, 0.5}, label};

    const std::string path = temp_path("conmf_test_single.dat");
    emit_dat(grid, path);
    const std::string text = slurp(path);
    CHECK(text == "aS_V\n1\n0.5\n");

    // round trip at full precision through %.17g
    TraceGrid rich;
    rich[{SolverKind::ActiveSet, CompressorSpec::none()}] = {
        {1.0 / 3.0, 6.02214076e23, 1e-300, 0.1 + 0.2}, label};
    rich[{SolverKind::Nesterov, CompressorSpec::gaussian(4)}] = {
        {std::nan(""), 2.0 / 7.0, -0.0, 4.9406564584124654e-324}, label};
    const std::string path2 = temp_path("conmf_test_roundtrip.dat");
    emit_dat(rich, path2);

    std::ifstream in(path2);
    std::string header;
    std::getline(in, header);
    CHECK(header == "aS_V neNMF_GC");
    for (std::size_t row = 0; row < 4; ++row) {
        std::string va, vb;
        in >> va >> vb;
        const double a = std::strtod(va.c_str(), nullptr);
        const double b = std::strtod(vb.c_str(), nullptr);
        const double want_a = rich.begin()->second.values[row];
        const double want_b = std::next(rich.begin())->second.values[row];
        if (std::isnan(want_a)) CHECK(std::isnan(a));
        else CHECK(a == want_a);
        if (std::isnan(want_b)) CHECK(std::isnan(b));
        else CHECK(b == want_b);
    }

    // csv mirror carries the same cells
    const std::string path3 = temp_path("conmf_test_mirror.csv");
    emit_csv(rich, path3);
    CHECK(slurp(path3).find("aS_V,neNMF_GC") == 0);

    CHECK_THROWS_AS(emit_dat(rich, "/nonexistent-dir/x.dat"), std::runtime_error);
    TraceGrid ragged = rich;
    ragged.begin()->second.values.push_back(0.0);
    CHECK_THROWS_AS(emit_dat(ragged, path2), std::invalid_argument);
}

TEST_CASE("cost report reproduces the worked example") {
    ExperimentConfig cfg;
    cfg.n = 100;
    cfg.m = 100;
    cfg.p = 5;
    cfg.outer_iters = 100;
    cfg.strategy_grid = {CompressorSpec::gaussian(10), CompressorSpec::rsi(10, 4),
                         CompressorSpec::stream(10, 1)};
    const CostReport report = compute_cost_report(cfg);

    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].spec.kind == CompressorKind::Gaussian);
    CHECK(report.rows[0].total == Rational(300000));
    CHECK(report.rows[1].spec.kind == CompressorKind::Rsi);
    CHECK(report.rows[1].setup == Rational(2485500));  // 2 * 1242750
    CHECK(report.rows[1].total == Rational(2785500));
    CHECK(report.rows[2].spec.kind == CompressorKind::Stream);
    CHECK(report.rows[2].refreshes == 100);
    CHECK(report.rows[2].total == Rational(30000000));

    REQUIRE(report.crossovers.size() == 1);
    CHECK(report.crossovers[0].refreshes == 10);

    const std::string text = format_cost_report(report);
    CHECK(text.find("2785500") != std::string::npos);
    CHECK(text.find("refresh 10") != std::string::npos);
}

TEST_CASE("cost report refresh counting") {
    ExperimentConfig cfg;
    cfg.n = 50;
    cfg.m = 50;
    cfg.p = 5;
    cfg.outer_iters = 100;

    cfg.strategy_grid = {CompressorSpec::stream(10, CompressorSpec::kInfinite)};
    CHECK(compute_cost_report(cfg).rows[0].refreshes == 1);
    CHECK(compute_cost_report(cfg).rows[0].total ==
          Rational(2) * Rational(flops_project(50, 50, 5, 10)));

    cfg.strategy_grid = {CompressorSpec::stream(10, 1)};
    CHECK(compute_cost_report(cfg).rows[0].refreshes == 100);

    cfg.strategy_grid = {CompressorSpec::stream(10, 3)};
    CHECK(compute_cost_report(cfg).rows[0].refreshes == 34);  // ceil(100/3)
}

TEST_CASE("cli cost subcommand prints the exact table") {
    const char* argv[] = {"conmf", "cost", "--n",  "100", "--m",        "100", "--p", "5",
                          "--nu",  "10",   "--q",  "4",   "--iters",    "100", "--max-iter", "1"};
    // capture stdout through a file redirect is overkill here; just check exit
    CHECK(cli_main(static_cast<int>(std::size(argv)), argv) == 0);
}

TEST_CASE("cli run with a missing config file fails and names the path") {
    const char* argv[] = {"conmf", "run", "--config", "missing.toml"};
    CHECK(cli_main(static_cast<int>(std::size(argv)), argv) != 0);
}

TEST_CASE("cli demo output is byte-identical across invocations") {
    // reduced demo (fewer seeds/iterations) to keep the unit test fast; the
    // acceptance suite runs the full one
    const std::string out1 = temp_path("conmf_demo_a");
    const std::string out2 = temp_path("conmf_demo_b");
    std::filesystem::remove_all(out1);
    std::filesystem::remove_all(out2);
    auto run_demo = [&](const std::string& out) {
        const char* argv[] = {"conmf",   "demo", "--seed", "42", "--seeds",   "2",
                              "--iters", "10",   "--out",  out.c_str(), "--threads", "2"};
        CHECK(cli_main(static_cast<int>(std::size(argv)), argv) == 0);
    };
    run_demo(out1);
    run_demo(out2);
    for (const char* f : {"rre_median.dat", "rre_median.csv", "cost_report.txt"})
        CHECK(slurp(out1 + "/" + f) == slurp(out2 + "/" + f));
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg = tiny_experiment();
    cfg.num_seeds = 0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg = tiny_experiment();
    cfg.strategy_grid = {CompressorSpec::gaussian(40)};  // p+nu > min(n,m)
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg = tiny_experiment();
    cfg.strategy_grid.clear();
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}
