#pragma once

// Front-end commands behind the `mixsolve` executable. Each command writes
// its product to `out`, diagnostics to `err`, and returns a process exit
// code.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsqp/io.hpp"
#include "mixsqp/problem.hpp"
#include "mixsqp/sqp.hpp"

namespace mixsqp::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kInternal = 4 };

inline constexpr const char* kSchema = "mixsolve/1";

struct SolveOptions {
  std::filesystem::path data;
  std::filesystem::path matrix;  // precomputed matrix (.csv or MIXL1 binary)
  Index m = 20;
  double grid_max_sigma = 0.0;
  std::string solver = "sqp";    // sqp | sqp-dense | em | pgd
  double rtol_qr = 1e-10;
  bool dense = false;
  std::optional<Index> rank;
  double eps_dual = 1e-8;
  std::optional<double> delta;
  std::optional<Index> max_iter;
  double tol = 1e-10;            // em / pgd objective-change tolerance
  std::filesystem::path trace_out;
  std::filesystem::path out;     // weights CSV
  std::filesystem::path matrix_out;
  bool timing = true;
  io::TableOptions table;
};

struct RunReport {
  std::string solver;
  Index n = 0;
  Index m = 0;
  Index factor_rank = 0;
  // sum_j log(row_scale_j); turns n * f back into a log-likelihood.
  double log_row_scale_sum = 0.0;
  SolverResult result;
  SolveOptions config;
};

// Runs one solver on L. Throws InvalidInput for an unknown solver id.
RunReport run_solver(const LikelihoodMatrix& l, const SolveOptions& opts);

nlohmann::ordered_json to_json(const RunReport& report, const VarianceGrid& grid,
                               bool timing);

// Columns: iter, objective, objective_times_n, dual_residual, nnz, alpha,
// elapsed_s. elapsed_s is 0 when timing is off.
void write_trace_csv(std::ostream& out, const SolverResult& res, Index n, bool timing);

int cmd_simulate(std::size_t n, std::uint64_t seed, const std::filesystem::path& out_path,
                 std::ostream& out, std::ostream& err);

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err);

struct BenchOptions {
  std::vector<std::size_t> ns{1000};
  std::vector<Index> ms{20};
  std::vector<std::string> solvers{"sqp", "em"};
  int repeats = 1;
  std::uint64_t seed = 1;
  std::filesystem::path out;     // empty: stdout
  std::size_t mem_cap_mb = 4096;
  bool aggregate = false;
  bool parallel = false;         // runs cells concurrently, drops timing
  bool timing = true;
  Index baseline_max_iter = 1000;
  bool rank_sweep = false;
  std::vector<Index> ranks;
};

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace mixsqp::cli
