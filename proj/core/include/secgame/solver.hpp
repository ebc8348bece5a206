#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "secgame/state_graph.hpp"
#include "secgame/utility.hpp"

namespace secgame {

// Raised when an equilibrium computation cannot finish (iteration cap,
// cyclic graph without discounting, degenerate numerics).
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what,
                      std::vector<double> residual_history = {})
      : std::runtime_error(what),
        residual_history_(std::move(residual_history)) {}

  const std::vector<double>& residual_history() const {
    return residual_history_;
  }

 private:
  std::vector<double> residual_history_;
};

enum class SolveMethod { kSaddlePoint, kLp, kOracle };

std::string_view to_string(SolveMethod method);

// Minimax value and one pair of optimal mixed strategies of a zero-sum
// matrix game (row player maximizes).
struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> row_strategy;
  std::vector<double> col_strategy;
  SolveMethod method = SolveMethod::kLp;
};

// Exact minimax solve: pure saddle point when one exists, otherwise the
// positivity-shifted standard LP via a built-in simplex. Best-response
// conditions hold within `tol` on return.
MatrixGameSolution solve_matrix_game(const std::vector<std::vector<double>>& m,
                                     double tol = 1e-9);
MatrixGameSolution solve_matrix_game(const PayoffMatrix& m, double tol = 1e-9);

// Independent reference solver: enumerates equal-size support pairs and
// solves the indifference equations. Restricted to matrices up to 8x8.
MatrixGameSolution solve_oracle(const std::vector<std::vector<double>>& m);
MatrixGameSolution solve_oracle(const PayoffMatrix& m);

// Largest violation of the equilibrium conditions by `sol` on `m`
// (best responses and strategy normalization); 0 means exact.
double best_response_gap(const std::vector<std::vector<double>>& m,
                         const MatrixGameSolution& sol);

// Presentation mode: uniform distributions over the pure best responses
// to the computed equilibrium. Collapses equivalent optimal rows into
// one canonical point, e.g. an equal split over two interchangeable
// attack rows.
MatrixGameSolution uniform_over_support(const std::vector<std::vector<double>>& m,
                                        const MatrixGameSolution& sol,
                                        double tol = 1e-9);

// Supplies each state's payoff matrix given continuation values.
using MatrixSource = std::function<PayoffMatrix(
    const GameState&, const std::map<std::string, double>&)>;

// Matrix source backed by a scenario's utility parameters. Both
// references must outlive the returned callable.
MatrixSource scenario_matrix_source(const Scenario& scenario,
                                    const GameGraph& graph);

struct StateStrategies {
  std::vector<RowLabel> row_labels;
  std::vector<std::string> col_labels;
  std::vector<double> attacker;
  std::vector<double> defender;
};

struct EquilibriumResult {
  std::map<std::string, double> values;
  std::map<std::string, StateStrategies> strategies;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  std::vector<double> residual_history;
};

// Shapley value iteration: from all-zero values, repeatedly replace each
// state's value with the minimax value of its rebuilt payoff matrix
// until the largest per-sweep change drops below
// params.convergence_delta. States are swept successors-first when the
// graph is acyclic. Requires discount < 1 or an acyclic graph; throws
// SolveError otherwise or when params.max_sweeps is exhausted.
EquilibriumResult shapley_iterate(const GameGraph& graph,
                                  const MatrixSource& source,
                                  const GameParams& params);

// Exact one-pass solve of an acyclic game, leaves first. Throws
// SolveError on a cycle, pointing the caller at shapley_iterate with a
// discount below 1.
EquilibriumResult backward_induct(const GameGraph& graph,
                                  const MatrixSource& source,
                                  const GameParams& params);

// Replaces every state's strategies with the uniform-over-best-response
// presentation (see uniform_over_support), keeping values untouched.
EquilibriumResult with_uniform_support(const GameGraph& graph,
                                       const MatrixSource& source,
                                       EquilibriumResult result);

struct SecurityRisk {
  double value = 0.0;   // game value at the initial state
  bool safe = false;    // true iff value <= 0: attacking never profits
  std::string initial_state;
};

// Headline number of a solved game: the attacker's maximum expected
// accumulated payoff from the initial state. Throws std::invalid_argument
// when the result did not converge.
SecurityRisk security_risk(const EquilibriumResult& result,
                           const GameGraph& graph);

}  // namespace secgame
