#include "secgame/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace secgame {

std::string_view to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::kSaddlePoint: return "saddle-point";
    case SolveMethod::kLp: return "lp";
    case SolveMethod::kOracle: return "oracle";
  }
  return "lp";
}

namespace {

void check_matrix(const std::vector<std::vector<double>>& m) {
  if (m.empty() || m.front().empty()) {
    throw std::invalid_argument("matrix game: empty matrix");
  }
  const std::size_t cols = m.front().size();
  for (const auto& row : m) {
    if (row.size() != cols) {
      throw std::invalid_argument("matrix game: ragged matrix");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("matrix game: non-finite entry");
      }
    }
  }
}

void clean_strategy(std::vector<double>* s) {
  double sum = 0.0;
  for (double& v : *s) {
    if (v < 0) v = 0;
    sum += v;
  }
  if (sum > 0) {
    for (double& v : *s) v /= sum;
  }
}

std::optional<MatrixGameSolution> find_saddle_point(
    const std::vector<std::vector<double>>& m) {
  const std::size_t rows = m.size(), cols = m.front().size();
  std::vector<double> row_min(rows, std::numeric_limits<double>::infinity());
  std::vector<double> col_max(cols, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      row_min[i] = std::min(row_min[i], m[i][j]);
      col_max[j] = std::max(col_max[j], m[i][j]);
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (m[i][j] == row_min[i] && m[i][j] == col_max[j]) {
        MatrixGameSolution sol;
        sol.value = m[i][j];
        sol.row_strategy.assign(rows, 0.0);
        sol.col_strategy.assign(cols, 0.0);
        sol.row_strategy[i] = 1.0;
        sol.col_strategy[j] = 1.0;
        sol.method = SolveMethod::kSaddlePoint;
        return sol;
      }
    }
  }
  return std::nullopt;
}

// Simplex on the normalized defender program of the shifted game M'
// (all entries >= 1):  max sum(y')  s.t.  M' y' <= 1, y' >= 0.
// The optimum is 1/Val(M'); the attacker strategy falls out of the
// duals carried in the slack columns. Bland's rule, so no cycling.
MatrixGameSolution solve_lp(const std::vector<std::vector<double>>& m,
                            double tol) {
  const std::size_t rows = m.size(), cols = m.front().size();

  double min_entry = m[0][0];
  for (const auto& row : m) {
    for (double v : row) min_entry = std::min(min_entry, v);
  }
  const double shift = 1.0 - min_entry;

  const std::size_t n_vars = cols + rows;  // structurals then slacks
  const std::size_t rhs = n_vars;
  std::vector<std::vector<double>> t(rows + 1,
                                     std::vector<double>(n_vars + 1, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t[i][j] = m[i][j] + shift;
    t[i][cols + i] = 1.0;
    t[i][rhs] = 1.0;
    basis[i] = cols + i;
  }
  for (std::size_t j = 0; j < cols; ++j) t[rows][j] = -1.0;

  const double pivot_eps = 1e-12;
  const int max_pivots = 2000 + 50 * static_cast<int>(rows + cols);
  for (int step = 0;; ++step) {
    if (step > max_pivots) {
      throw SolveError("matrix game LP failed to converge within pivot cap");
    }
    std::size_t enter = n_vars;
    for (std::size_t j = 0; j < n_vars; ++j) {
      if (t[rows][j] < -pivot_eps) {
        enter = j;
        break;
      }
    }
    if (enter == n_vars) break;

    std::size_t leave = rows;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (t[i][enter] <= pivot_eps) continue;
      const double ratio = t[i][rhs] / t[i][enter];
      if (leave == rows || ratio < best_ratio - pivot_eps ||
          (std::abs(ratio - best_ratio) <= pivot_eps &&
           basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave == rows) {
      throw SolveError("matrix game LP is unbounded (malformed matrix)");
    }

    const double pivot = t[leave][enter];
    for (double& v : t[leave]) v /= pivot;
    for (std::size_t i = 0; i <= rows; ++i) {
      if (i == leave) continue;
      const double factor = t[i][enter];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j <= n_vars; ++j) {
        t[i][j] -= factor * t[leave][j];
      }
    }
    basis[leave] = enter;
  }

  const double objective = t[rows][rhs];  // sum of normalized y'
  if (!(objective > 0)) {
    throw SolveError("matrix game LP produced a non-positive objective");
  }
  const double shifted_value = 1.0 / objective;

  MatrixGameSolution sol;
  sol.method = SolveMethod::kLp;
  sol.value = shifted_value - shift;
  sol.col_strategy.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] < cols) sol.col_strategy[basis[i]] = t[i][rhs] * shifted_value;
  }
  sol.row_strategy.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    sol.row_strategy[i] = t[rows][cols + i] * shifted_value;
  }
  clean_strategy(&sol.row_strategy);
  clean_strategy(&sol.col_strategy);
  (void)tol;
  return sol;
}

double matrix_scale(const std::vector<std::vector<double>>& m) {
  double scale = 1.0;
  for (const auto& row : m) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  return scale;
}

// Next k-combination of indices in lexicographic order.
bool next_combination(std::vector<std::size_t>* idx, std::size_t n) {
  const std::size_t k = idx->size();
  for (std::size_t i = k; i-- > 0;) {
    if ((*idx)[i] < n - k + i) {
      ++(*idx)[i];
      for (std::size_t j = i + 1; j < k; ++j) (*idx)[j] = (*idx)[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Gaussian elimination with partial pivoting; returns false if singular.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>* out) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  out->assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) (*out)[i] = b[i] / a[i][i];
  return true;
}

}  // namespace

double best_response_gap(const std::vector<std::vector<double>>& m,
                         const MatrixGameSolution& sol) {
  check_matrix(m);
  const std::size_t rows = m.size(), cols = m.front().size();
  double gap = 0.0;
  double row_sum = std::accumulate(sol.row_strategy.begin(),
                                   sol.row_strategy.end(), 0.0);
  double col_sum = std::accumulate(sol.col_strategy.begin(),
                                   sol.col_strategy.end(), 0.0);
  gap = std::max(gap, std::abs(row_sum - 1.0));
  gap = std::max(gap, std::abs(col_sum - 1.0));
  // Pure rows must not beat the value against the defender's mix,
  // pure columns must not push below it against the attacker's mix.
  for (std::size_t i = 0; i < rows; ++i) {
    double payoff = 0.0;
    for (std::size_t j = 0; j < cols; ++j) payoff += m[i][j] * sol.col_strategy[j];
    gap = std::max(gap, payoff - sol.value);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double payoff = 0.0;
    for (std::size_t i = 0; i < rows; ++i) payoff += m[i][j] * sol.row_strategy[i];
    gap = std::max(gap, sol.value - payoff);
  }
  return gap;
}

MatrixGameSolution solve_oracle(const std::vector<std::vector<double>>& m) {
  check_matrix(m);
  const std::size_t rows = m.size(), cols = m.front().size();
  if (rows > 8 || cols > 8) {
    throw std::invalid_argument("solve_oracle: matrix exceeds the 8x8 cap");
  }
  const double tol = 1e-8 * matrix_scale(m);

  for (std::size_t k = 1; k <= std::min(rows, cols); ++k) {
    std::vector<std::size_t> support_rows(k), support_cols(k);
    std::iota(support_rows.begin(), support_rows.end(), 0);
    do {
      std::iota(support_cols.begin(), support_cols.end(), 0);
      do {
        // Indifference system for the row player: every supported column
        // yields the value v; weights sum to one. Mirrored for columns.
        std::vector<std::vector<double>> ax(k + 1,
                                            std::vector<double>(k + 1, 0.0));
        std::vector<double> bx(k + 1, 0.0);
        for (std::size_t jj = 0; jj < k; ++jj) {
          for (std::size_t ii = 0; ii < k; ++ii) {
            ax[jj][ii] = m[support_rows[ii]][support_cols[jj]];
          }
          ax[jj][k] = -1.0;
        }
        for (std::size_t ii = 0; ii < k; ++ii) ax[k][ii] = 1.0;
        bx[k] = 1.0;
        std::vector<double> xk;
        if (!solve_linear(ax, bx, &xk)) continue;

        std::vector<std::vector<double>> ay(k + 1,
                                            std::vector<double>(k + 1, 0.0));
        std::vector<double> by(k + 1, 0.0);
        for (std::size_t ii = 0; ii < k; ++ii) {
          for (std::size_t jj = 0; jj < k; ++jj) {
            ay[ii][jj] = m[support_rows[ii]][support_cols[jj]];
          }
          ay[ii][k] = -1.0;
        }
        for (std::size_t jj = 0; jj < k; ++jj) ay[k][jj] = 1.0;
        by[k] = 1.0;
        std::vector<double> yk;
        if (!solve_linear(ay, by, &yk)) continue;

        if (std::abs(xk[k] - yk[k]) > tol) continue;
        bool feasible = true;
        for (std::size_t ii = 0; ii < k && feasible; ++ii) {
          feasible = xk[ii] >= -tol;
        }
        for (std::size_t jj = 0; jj < k && feasible; ++jj) {
          feasible = yk[jj] >= -tol;
        }
        if (!feasible) continue;

        MatrixGameSolution sol;
        sol.method = SolveMethod::kOracle;
        sol.value = xk[k];
        sol.row_strategy.assign(rows, 0.0);
        sol.col_strategy.assign(cols, 0.0);
        for (std::size_t ii = 0; ii < k; ++ii) {
          sol.row_strategy[support_rows[ii]] = xk[ii];
        }
        for (std::size_t jj = 0; jj < k; ++jj) {
          sol.col_strategy[support_cols[jj]] = yk[jj];
        }
        clean_strategy(&sol.row_strategy);
        clean_strategy(&sol.col_strategy);
        if (best_response_gap(m, sol) <= tol * 10) return sol;
      } while (next_combination(&support_cols, cols));
    } while (next_combination(&support_rows, rows));
  }
  throw SolveError("solve_oracle: no equilibrium support found");
}

MatrixGameSolution solve_oracle(const PayoffMatrix& m) {
  return solve_oracle(m.entries);
}

MatrixGameSolution solve_matrix_game(const std::vector<std::vector<double>>& m,
                                     double tol) {
  check_matrix(m);
  if (auto saddle = find_saddle_point(m)) return *saddle;
  MatrixGameSolution sol = solve_lp(m, tol);
  const double gap = best_response_gap(m, sol);
  const double budget = std::max(tol, 1e-9) * matrix_scale(m);
  if (gap > budget) {
    // Degenerate vertex; fall back to the reference method when small.
    if (m.size() <= 8 && m.front().size() <= 8) {
      MatrixGameSolution alt = solve_oracle(m);
      alt.method = SolveMethod::kLp;
      return alt;
    }
    std::ostringstream msg;
    msg << "solve_matrix_game: best-response gap " << gap
        << " exceeds tolerance " << budget;
    throw SolveError(msg.str());
  }
  return sol;
}

MatrixGameSolution solve_matrix_game(const PayoffMatrix& m, double tol) {
  return solve_matrix_game(m.entries, tol);
}

MatrixGameSolution uniform_over_support(const std::vector<std::vector<double>>& m,
                                        const MatrixGameSolution& sol,
                                        double tol) {
  check_matrix(m);
  const std::size_t rows = m.size(), cols = m.front().size();
  MatrixGameSolution out = sol;
  out.row_strategy.assign(rows, 0.0);
  out.col_strategy.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double payoff = 0.0;
    for (std::size_t j = 0; j < cols; ++j) payoff += m[i][j] * sol.col_strategy[j];
    if (payoff >= sol.value - tol) out.row_strategy[i] = 1.0;
  }
  for (std::size_t j = 0; j < cols; ++j) {
    double payoff = 0.0;
    for (std::size_t i = 0; i < rows; ++i) payoff += m[i][j] * sol.row_strategy[i];
    if (payoff <= sol.value + tol) out.col_strategy[j] = 1.0;
  }
  clean_strategy(&out.row_strategy);
  clean_strategy(&out.col_strategy);
  return out;
}

MatrixSource scenario_matrix_source(const Scenario& scenario,
                                    const GameGraph& graph) {
  return [&scenario, &graph](const GameState& state,
                             const std::map<std::string, double>& continuation) {
    return build_payoff_matrix(scenario, graph, state, continuation,
                               scenario.game_params);
  };
}

namespace {

std::vector<const GameState*> sweep_order(const GameGraph& graph) {
  // Successors before predecessors, so one sweep of an acyclic game is
  // already exact. Falls back to declaration order on cyclic graphs.
  std::vector<std::string> topo;
  std::vector<const GameState*> order;
  if (graph.topological_order(&topo)) {
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      order.push_back(graph.find_state(*it));
    }
  } else {
    for (const auto& s : graph.states) order.push_back(&s);
  }
  return order;
}

EquilibriumResult finalize(const GameGraph& graph, const MatrixSource& source,
                           const GameParams& params,
                           std::map<std::string, double> values,
                           int iterations, double residual,
                           std::vector<double> history) {
  EquilibriumResult result;
  result.iterations = iterations;
  result.converged = true;
  result.residual = residual;
  result.residual_history = std::move(history);
  for (const GameState* state : sweep_order(graph)) {
    StateStrategies strat;
    if (!state->rows.empty()) {
      PayoffMatrix m = source(*state, values);
      MatrixGameSolution sol = solve_matrix_game(m, params.lp_tolerance);
      values[state->id] = sol.value;
      strat.row_labels = m.rows;
      strat.col_labels = m.cols;
      strat.attacker = sol.row_strategy;
      strat.defender = sol.col_strategy;
    } else {
      values[state->id] = 0.0;
    }
    result.strategies[state->id] = std::move(strat);
  }
  result.values = std::move(values);
  return result;
}

}  // namespace

EquilibriumResult shapley_iterate(const GameGraph& graph,
                                  const MatrixSource& source,
                                  const GameParams& params) {
  if (graph.states.empty()) {
    throw std::invalid_argument("shapley_iterate: empty graph");
  }
  const bool acyclic = graph.is_acyclic();
  if (!acyclic && !(params.discount < 1.0)) {
    throw SolveError(
        "shapley_iterate: the state graph has cycles and discount = 1; value "
        "iteration cannot contract. Set discount < 1.");
  }

  const auto order = sweep_order(graph);
  std::map<std::string, double> values;
  for (const auto& s : graph.states) values[s.id] = 0.0;

  std::vector<double> history;
  for (int sweep = 1; sweep <= params.max_sweeps; ++sweep) {
    double residual = 0.0;
    for (const GameState* state : order) {
      const double previous = values[state->id];
      double updated = 0.0;
      if (!state->rows.empty()) {
        PayoffMatrix m = source(*state, values);
        updated = solve_matrix_game(m, params.lp_tolerance).value;
      }
      values[state->id] = updated;
      residual = std::max(residual, std::abs(updated - previous));
    }
    history.push_back(residual);
    if (residual < params.convergence_delta) {
      return finalize(graph, source, params, std::move(values), sweep, residual,
                      std::move(history));
    }
  }
  throw SolveError("shapley_iterate: no convergence within " +
                       std::to_string(params.max_sweeps) + " sweeps (residual " +
                       std::to_string(history.back()) + ")",
                   history);
}

EquilibriumResult backward_induct(const GameGraph& graph,
                                  const MatrixSource& source,
                                  const GameParams& params) {
  if (graph.states.empty()) {
    throw std::invalid_argument("backward_induct: empty graph");
  }
  if (!graph.is_acyclic()) {
    throw SolveError(
        "backward_induct: the state graph has cycles; use shapley_iterate "
        "with discount < 1");
  }
  std::map<std::string, double> values;
  for (const GameState* state : sweep_order(graph)) {
    if (state->rows.empty()) {
      values[state->id] = 0.0;
    } else {
      PayoffMatrix m = source(*state, values);
      values[state->id] = solve_matrix_game(m, params.lp_tolerance).value;
    }
  }
  return finalize(graph, source, params, std::move(values), 1, 0.0, {0.0});
}

EquilibriumResult with_uniform_support(const GameGraph& graph,
                                       const MatrixSource& source,
                                       EquilibriumResult result) {
  for (const auto& state : graph.states) {
    auto it = result.strategies.find(state.id);
    if (it == result.strategies.end() || it->second.attacker.empty()) continue;
    PayoffMatrix m = source(state, result.values);
    MatrixGameSolution sol;
    sol.value = result.values.at(state.id);
    sol.row_strategy = it->second.attacker;
    sol.col_strategy = it->second.defender;
    MatrixGameSolution uniform = uniform_over_support(m.entries, sol, 1e-9);
    it->second.attacker = uniform.row_strategy;
    it->second.defender = uniform.col_strategy;
  }
  return result;
}

SecurityRisk security_risk(const EquilibriumResult& result,
                           const GameGraph& graph) {
  if (!result.converged) {
    throw std::invalid_argument("security_risk: result did not converge");
  }
  auto it = result.values.find(graph.initial_state);
  if (it == result.values.end()) {
    throw std::invalid_argument("security_risk: no value for initial state '" +
                                graph.initial_state + "'");
  }
  SecurityRisk risk;
  risk.value = it->second;
  risk.safe = risk.value <= 0.0;
  risk.initial_state = graph.initial_state;
  return risk;
}

}  // namespace secgame
