// mixsolve: simulate data, fit mixture proportions, and benchmark solvers.

#include <CLI11.hpp>
#include <iostream>

#include "mixsqp/cli.hpp"

namespace cli = mixsqp::cli;

int main(int argc, char** argv) {
  CLI::App app{"Maximum-likelihood mixture proportions: mix-SQP, EM and projected gradient"};
  app.require_subcommand(1);

  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Write simulated effect estimates as TSV");
  sim->add_option("--n", sim_n, "Number of observations")->required();
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--out", sim_out, "Output TSV path")->required();

  cli::SolveOptions so;
  std::string data, matrix, trace_out, out, matrix_out, effect_col = "b", se_col = "SE";
  std::optional<std::size_t> effect_index, se_index;
  std::optional<mixsqp::Index> rank, max_iter;
  std::optional<double> delta;
  bool no_timing = false;
  auto* solve = app.add_subcommand("solve", "Fit mixture weights; JSON report on stdout");
  solve->add_option("--data", data, "TSV/CSV of effect estimates and standard errors");
  solve->add_option("--matrix", matrix, "Precomputed likelihood matrix (.csv or .bin)");
  solve->add_option("--m", so.m, "Grid size")->capture_default_str();
  solve->add_option("--grid-max-sigma", so.grid_max_sigma, "Largest grid sigma (0: automatic)");
  solve->add_option("--solver", so.solver, "sqp | sqp-dense | em | pgd")->capture_default_str();
  solve->add_option("--rtol-qr", so.rtol_qr, "Relative truncation tolerance of the QR factor");
  solve->add_flag("--dense", so.dense, "Use the dense likelihood matrix in mix-SQP");
  solve->add_option("--rank", rank, "Force a fixed QR rank");
  solve->add_option("--eps-dual", so.eps_dual, "Dual residual tolerance");
  solve->add_option("--delta", delta, "Constant added inside the logarithms");
  solve->add_option("--max-iter", max_iter, "Iteration cap");
  solve->add_option("--tol", so.tol, "Objective-change tolerance (em, pgd)");
  solve->add_option("--trace-out", trace_out, "Per-iteration trace CSV");
  solve->add_option("--out", out, "Fitted weights CSV");
  solve->add_option("--matrix-out", matrix_out, "Save the likelihood matrix (.csv or .bin)");
  solve->add_option("--effect-col", effect_col, "Header name of the effect column");
  solve->add_option("--se-col", se_col, "Header name of the standard-error column");
  solve->add_option("--effect-index", effect_index, "0-based effect column index");
  solve->add_option("--se-index", se_index, "0-based standard-error column index");
  solve->add_flag("--no-timing", no_timing, "Omit wall-clock fields for reproducible output");

  cli::BenchOptions bo;
  std::string bench_out;
  bool bench_no_timing = false;
  auto* bench = app.add_subcommand("bench", "Benchmark table over a grid of problem sizes");
  bench->add_option("--n", bo.ns, "Sample sizes")->delimiter(',');
  bench->add_option("--m", bo.ms, "Grid sizes")->delimiter(',');
  bench->add_option("--solvers", bo.solvers, "Solvers to run")->delimiter(',');
  bench->add_option("--repeats", bo.repeats, "Simulations per cell");
  bench->add_option("--seed", bo.seed, "Base random seed");
  bench->add_option("--out", bench_out, "Output CSV (default stdout)");
  bench->add_option("--mem-cap-mb", bo.mem_cap_mb, "Skip cells whose matrix exceeds this");
  bench->add_option("--max-iter", bo.baseline_max_iter, "Iteration cap for em and pgd");
  bench->add_flag("--aggregate", bo.aggregate, "Average over repeats");
  bench->add_flag("--parallel", bo.parallel, "Run cells concurrently (drops timing columns)");
  bench->add_flag("--no-timing", bench_no_timing, "Zero the timing columns");
  bench->add_flag("--rank-sweep", bo.rank_sweep, "Compare forced QR ranks against the dense solve");
  bench->add_option("--ranks", bo.ranks, "Ranks for --rank-sweep, e.g. 4,5,6")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kUsage;
  }

  if (*sim) return cli::cmd_simulate(sim_n, sim_seed, sim_out, std::cout, std::cerr);
  if (*solve) {
    so.data = data;
    so.matrix = matrix;
    so.trace_out = trace_out;
    so.out = out;
    so.matrix_out = matrix_out;
    so.rank = rank;
    so.max_iter = max_iter;
    so.delta = delta;
    so.timing = !no_timing;
    so.table.effect_column = effect_col;
    so.table.se_column = se_col;
    so.table.effect_index = effect_index;
    so.table.se_index = se_index;
    return cli::cmd_solve(so, std::cout, std::cerr);
  }
  bo.out = bench_out;
  bo.timing = !bench_no_timing;
  return cli::cmd_bench(bo, std::cout, std::cerr);
}
