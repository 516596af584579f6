#include "mixsqp/cli.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "mixsqp/baselines.hpp"
#include "mixsqp/error.hpp"
#include "mixsqp/lowrank.hpp"
#include "mixsqp/simulate.hpp"

namespace mixsqp::cli {

namespace {

using io::format_double;

const std::vector<std::string> kSolvers{"sqp", "sqp-dense", "em", "pgd"};

bool known_solver(const std::string& s) {
  return std::find(kSolvers.begin(), kSolvers.end(), s) != kSolvers.end();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

bool is_binary_matrix(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".bin" || ext == ".mixl";
}

struct LoadedProblem {
  LikelihoodMatrix l;
  VarianceGrid grid;
};

LoadedProblem load_problem(const SolveOptions& opts) {
  if (!opts.matrix.empty()) {
    std::ifstream in(opts.matrix, std::ios::binary);
    if (!in) throw IoError("cannot open " + opts.matrix.string());
    if (is_binary_matrix(opts.matrix)) return {LikelihoodMatrix(io::read_matrix_binary(in)), {}};
    auto [values, grid] = io::read_matrix_csv(in);
    return {LikelihoodMatrix(std::move(values)), std::move(grid)};
  }
  const ObservationSet obs = io::read_observations(opts.data, opts.table);
  VarianceGrid grid = select_grid(obs, opts.m, opts.grid_max_sigma);
  LikelihoodMatrix l = build_likelihood_matrix(obs, grid);
  return {std::move(l), std::move(grid)};
}

void save_matrix(const std::filesystem::path& path, const LoadedProblem& p) {
  auto f = open_out(path);
  if (is_binary_matrix(path)) {
    io::write_matrix_binary(f, p.l.values());
  } else {
    io::write_matrix_csv(f, p.l.values(), p.grid);
  }
  if (!f) throw IoError("write failed: " + path.string());
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

Index nnz(const VectorXd& x) { return static_cast<Index>((x.array() > 0.0).count()); }

}  // namespace

RunReport run_solver(const LikelihoodMatrix& l, const SolveOptions& opts) {
  if (!known_solver(opts.solver)) throw InvalidInput("unknown solver \"" + opts.solver + "\"");
  RunReport rep;
  rep.solver = opts.solver;
  rep.n = l.rows();
  rep.m = l.cols();
  rep.config = opts;
  rep.log_row_scale_sum = l.row_scale().array().log().sum();
  if (opts.solver == "sqp" || opts.solver == "sqp-dense") {
    SqpConfig cfg;
    cfg.eps_dual = opts.eps_dual;
    cfg.delta = opts.delta;
    if (opts.max_iter) cfg.max_iter = *opts.max_iter;
    cfg.rtol_qr = opts.rtol_qr;
    cfg.fixed_rank = opts.rank;
    cfg.use_lowrank = opts.solver == "sqp" && !opts.dense;
    rep.result = mixsqp(l, cfg);
  } else {
    FirstOrderConfig cfg;
    if (opts.max_iter) cfg.max_iter = *opts.max_iter;
    cfg.tol = opts.tol;
    rep.result = opts.solver == "em" ? mixem(l, cfg) : mixpgd(l, cfg);
  }
  rep.factor_rank = rep.result.factor_rank;
  return rep;
}

nlohmann::ordered_json to_json(const RunReport& rep, const VarianceGrid& grid, bool timing) {
  const SolverResult& r = rep.result;
  const double n = static_cast<double>(rep.n);
  nlohmann::ordered_json j;
  j["schema"] = kSchema;
  j["solver"] = rep.solver;
  j["status"] = std::string(to_string(r.status));
  j["n"] = rep.n;
  j["m"] = rep.m;
  j["factor_rank"] = rep.factor_rank;
  j["iterations"] = r.iterations;
  j["objective"] = r.objective;
  j["objective_times_n"] = r.objective * n;
  j["log_likelihood"] = -r.objective * n + rep.log_row_scale_sum;
  j["dual_residual"] = r.dual_residual;
  j["nnz"] = nnz(r.x);
  j["pre_normalization_sum"] = r.pre_normalization_sum;
  if (timing) {
    j["times"] = {{"total_s", r.times.total},
                  {"factorization_s", r.times.factorization},
                  {"derivatives_s", r.times.derivatives},
                  {"subproblem_s", r.times.subproblem},
                  {"line_search_s", r.times.line_search}};
  }
  const SolveOptions& c = rep.config;
  nlohmann::ordered_json cfg;
  cfg["rtol_qr"] = c.rtol_qr;
  cfg["dense"] = c.dense;
  cfg["rank"] = c.rank ? nlohmann::ordered_json(*c.rank) : nlohmann::ordered_json(nullptr);
  cfg["eps_dual"] = c.eps_dual;
  cfg["delta"] = c.delta ? nlohmann::ordered_json(*c.delta) : nlohmann::ordered_json(nullptr);
  cfg["max_iter"] = c.max_iter ? nlohmann::ordered_json(*c.max_iter) : nlohmann::ordered_json(nullptr);
  cfg["tol"] = c.tol;
  cfg["grid_max_sigma"] = c.grid_max_sigma;
  j["config"] = cfg;
  j["sigma"] = grid.sigma;
  j["x"] = std::vector<double>(r.x.begin(), r.x.end());
  return j;
}

void write_trace_csv(std::ostream& out, const SolverResult& res, Index n, bool timing) {
  out << "iter,objective,objective_times_n,dual_residual,nnz,alpha,elapsed_s\n";
  for (const TraceRecord& t : res.trace) {
    out << t.iter << ',' << format_double(t.objective) << ','
        << format_double(t.objective * static_cast<double>(n)) << ','
        << format_double(t.dual_residual) << ',' << t.nnz << ',' << format_double(t.alpha)
        << ',' << format_double(timing ? t.wall_time : 0.0) << '\n';
  }
}

int cmd_simulate(std::size_t n, std::uint64_t seed, const std::filesystem::path& out_path,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (n < 1) throw InvalidInput("--n must be at least 1");
    if (out_path.empty()) throw InvalidInput("--out is required");
    const ObservationSet obs = simulate_observations({n, seed});
    io::write_observations(out_path, obs);
    out << obs.size() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.data.empty() == opts.matrix.empty())
      throw InvalidInput("exactly one of --data or --matrix is required");
    if (opts.matrix.empty() && opts.m < 2) throw InvalidInput("--m must be at least 2");
    if (!known_solver(opts.solver)) throw InvalidInput("unknown solver \"" + opts.solver + "\"");
    const LoadedProblem prob = load_problem(opts);
    if (!opts.matrix_out.empty()) save_matrix(opts.matrix_out, prob);
    const RunReport rep = run_solver(prob.l, opts);
    out << to_json(rep, prob.grid, opts.timing).dump(2) << '\n';
    if (!opts.trace_out.empty()) {
      auto f = open_out(opts.trace_out);
      write_trace_csv(f, rep.result, rep.n, opts.timing);
    }
    if (!opts.out.empty()) {
      auto f = open_out(opts.out);
      f << "sigma,weight\n";
      for (Index k = 0; k < rep.m; ++k) {
        const double sigma = static_cast<std::size_t>(k) < prob.grid.size()
                                 ? prob.grid.sigma[static_cast<std::size_t>(k)]
                                 : std::nan("");
        f << format_double(sigma) << ',' << format_double(rep.result.x[k]) << '\n';
      }
    }
    err << "solver " << rep.solver << ": " << to_string(rep.result.status) << " after "
        << rep.result.iterations << " iterations\n";
    return static_cast<int>(kOk);
  });
}

namespace {

struct BenchCell {
  std::size_t n;
  Index m;
  int repeat;
};

struct BenchRow {
  BenchCell cell;
  std::string solver;
  std::uint64_t seed;
  RunReport report;
};

std::uint64_t cell_seed(std::uint64_t seed, int repeat) {
  return seed + static_cast<std::uint64_t>(repeat);
}

bool fits(std::size_t n, Index m, std::size_t cap_mb) {
  const double bytes = static_cast<double>(n) * static_cast<double>(m) * 8.0;
  return bytes <= static_cast<double>(cap_mb) * 1024.0 * 1024.0;
}

void bench_table(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  const bool timing = opts.timing && !opts.parallel;
  std::vector<BenchCell> cells;
  for (std::size_t n : opts.ns) {
    for (Index m : opts.ms) {
      if (!fits(n, m, opts.mem_cap_mb)) {
        err << "skipping n=" << n << " m=" << m << ": exceeds --mem-cap-mb "
            << opts.mem_cap_mb << '\n';
        continue;
      }
      for (int r = 0; r < opts.repeats; ++r) cells.push_back({n, m, r});
    }
  }
  std::vector<std::vector<BenchRow>> rows(cells.size());
  std::vector<std::exception_ptr> failures(cells.size());
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (std::size_t c = 0; c < cells.size(); ++c) try {
    const BenchCell cell = cells[c];
    const std::uint64_t seed = cell_seed(opts.seed, cell.repeat);
    const ObservationSet obs = simulate_observations({cell.n, seed});
    const LikelihoodMatrix l = build_likelihood_matrix(obs, select_grid(obs, cell.m));
    for (const std::string& solver : opts.solvers) {
      SolveOptions so;
      so.solver = solver;
      so.m = cell.m;
      if (solver == "em" || solver == "pgd") so.max_iter = opts.baseline_max_iter;
      rows[c].push_back({cell, solver, seed, run_solver(l, so)});
    }
  } catch (...) {
    failures[c] = std::current_exception();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  auto num = [](double v) { return format_double(v); };
  if (!opts.aggregate) {
    out << "n,m,solver,repeat,seed,factor_rank,status,iterations,objective,"
           "objective_times_n,dual_residual,nnz,total_s,factorization_s,derivatives_s,"
           "subproblem_s,line_search_s\n";
    for (const auto& group : rows) {
      for (const BenchRow& row : group) {
        const SolverResult& r = row.report.result;
        const PhaseTimes t = timing ? r.times : PhaseTimes{};
        out << row.cell.n << ',' << row.cell.m << ',' << row.solver << ',' << row.cell.repeat
            << ',' << row.seed << ',' << r.factor_rank << ',' << to_string(r.status) << ','
            << r.iterations << ',' << num(r.objective) << ','
            << num(r.objective * static_cast<double>(row.cell.n)) << ','
            << num(r.dual_residual) << ',' << nnz(r.x) << ',' << num(t.total) << ','
            << num(t.factorization) << ',' << num(t.derivatives) << ','
            << num(t.subproblem) << ',' << num(t.line_search) << '\n';
      }
    }
    return;
  }

  struct Acc {
    int count = 0, converged = 0;
    double iterations = 0, objective = 0, dual = 0, nnz = 0, total = 0, factorization = 0,
           derivatives = 0, subproblem = 0, line_search = 0;
  };
  std::map<std::tuple<std::size_t, Index, std::size_t>, Acc> acc;
  for (const auto& group : rows) {
    for (const BenchRow& row : group) {
      const std::size_t solver_pos = static_cast<std::size_t>(
          std::find(opts.solvers.begin(), opts.solvers.end(), row.solver) - opts.solvers.begin());
      Acc& a = acc[{row.cell.n, row.cell.m, solver_pos}];
      const SolverResult& r = row.report.result;
      const PhaseTimes t = timing ? r.times : PhaseTimes{};
      a.count += 1;
      a.converged += r.status == Status::converged ? 1 : 0;
      a.iterations += static_cast<double>(r.iterations);
      a.objective += r.objective;
      a.dual += r.dual_residual;
      a.nnz += static_cast<double>(nnz(r.x));
      a.total += t.total;
      a.factorization += t.factorization;
      a.derivatives += t.derivatives;
      a.subproblem += t.subproblem;
      a.line_search += t.line_search;
    }
  }
  out << "n,m,solver,repeats,converged,mean_iterations,mean_objective,mean_dual_residual,"
         "mean_nnz,mean_total_s,mean_factorization_s,mean_derivatives_s,mean_subproblem_s,"
         "mean_line_search_s\n";
  for (const auto& [key, a] : acc) {
    const double c = a.count;
    out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << opts.solvers[std::get<2>(key)]
        << ',' << a.count << ',' << a.converged << ',' << num(a.iterations / c) << ','
        << num(a.objective / c) << ',' << num(a.dual / c) << ',' << num(a.nnz / c) << ','
        << num(a.total / c) << ',' << num(a.factorization / c) << ','
        << num(a.derivatives / c) << ',' << num(a.subproblem / c) << ','
        << num(a.line_search / c) << '\n';
  }
}

void bench_rank_sweep(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.ns.size() != 1 || opts.ms.size() != 1)
    throw InvalidInput("--rank-sweep takes exactly one --n and one --m");
  if (opts.ranks.empty()) throw InvalidInput("--rank-sweep needs --ranks");
  const std::size_t n = opts.ns.front();
  const Index m = opts.ms.front();
  if (!fits(n, m, opts.mem_cap_mb)) {
    err << "skipping n=" << n << " m=" << m << ": exceeds --mem-cap-mb\n";
    return;
  }
  out << "n,m,repeat,rank,adaptive,reconstruction_error,status,l1_gap,objective_gap\n";
  for (int r = 0; r < opts.repeats; ++r) {
    const std::uint64_t seed = cell_seed(opts.seed, r);
    const ObservationSet obs = simulate_observations({n, seed});
    const LikelihoodMatrix l = build_likelihood_matrix(obs, select_grid(obs, m));
    SqpConfig dense_cfg;
    dense_cfg.use_lowrank = false;
    dense_cfg.record_trace = false;
    const SolverResult dense = mixsqp(l, dense_cfg);
    const double norm = l.values().norm();

    auto emit = [&](std::optional<Index> rank) {
      RrqrOptions ro;
      ro.fixed_rank = rank;
      const LowRankFactor f = rrqr(l.values(), ro);
      SqpConfig cfg;
      cfg.fixed_rank = rank;
      cfg.record_trace = false;
      const SolverResult res = mixsqp(l, cfg);
      out << n << ',' << m << ',' << r << ',' << f.rank << ',' << (rank ? 0 : 1) << ','
          << format_double((l.values() - reconstruct(f)).norm() / norm) << ','
          << to_string(res.status) << ',' << format_double((res.x - dense.x).lpNorm<1>())
          << ',' << format_double(res.objective - dense.objective) << '\n';
    };
    emit(std::nullopt);
    for (Index rank : opts.ranks) emit(rank);
  }
}

}  // namespace

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.ns.empty() || opts.ms.empty()) throw InvalidInput("--n and --m are required");
    for (std::size_t n : opts.ns)
      if (n < 1) throw InvalidInput("--n values must be positive");
    for (Index m : opts.ms)
      if (m < 2) throw InvalidInput("--m values must be at least 2");
    if (opts.repeats < 1) throw InvalidInput("--repeats must be at least 1");
    for (const auto& s : opts.solvers)
      if (!known_solver(s)) throw InvalidInput("unknown solver \"" + s + "\"");
    std::ostringstream table;
    if (opts.rank_sweep) {
      bench_rank_sweep(opts, table, err);
    } else {
      bench_table(opts, table, err);
    }
    if (opts.out.empty()) {
      out << table.str();
    } else {
      auto f = open_out(opts.out);
      f << table.str();
      if (!f) throw IoError("write failed: " + opts.out.string());
    }
    return static_cast<int>(kOk);
  });
}

}  // namespace mixsqp::cli
