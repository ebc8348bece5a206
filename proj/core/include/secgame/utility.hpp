#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "secgame/model.hpp"

namespace secgame {

struct GameState;
struct GameGraph;
struct RowSpec;

// Per-entry decomposition of a payoff value. `recovery` is the applied
// mitigation (clamped so loss - recovery >= 0), `asset_coeff` the
// product of asset value and per-(node, attack) success coefficient.
// total = immediate + discount * indirect, with
// immediate = (loss - recovery) * asset_coeff - tracing_cost.
struct UtilityBreakdown {
  double loss = 0.0;
  double recovery = 0.0;
  double asset_coeff = 0.0;
  double tracing_cost = 0.0;
  double immediate = 0.0;
  double indirect = 0.0;
  double discount = 1.0;
  double total = 0.0;
};

// Loss after recovery, clamped at zero: a defense cannot turn damage
// into negative damage.
double mitigated_loss(double loss, double recovery);

// Exposure cost alpha * attack_time / window. Throws
// std::invalid_argument when window <= 0.
double tracing_cost(double alpha, double attack_time, double window);

// Attacker utility of playing `attack` on `node` against `defense`:
//   (L - R) * V * success_coeff - alpha * T / t
// Recovery applies only when the defense mitigates this attack; the
// tracing term only when it traces it. A noop defense contributes
// neither.
double attack_utility(const AttackAction& attack, const DefenseAction& defense,
                      const NetworkNode& node, double success_coeff);

UtilityBreakdown attack_utility_breakdown(const AttackAction& attack,
                                          const DefenseAction& defense,
                                          const NetworkNode& node,
                                          double success_coeff);

// Expected attacker payoff of hitting a device that presents
// `observed_fp` when deception makes the true targets indistinguishable:
// sum over true fingerprints f of count(f, observed)/N * payoff(f).
// `payoffs_by_true_fp` must cover every fingerprint with a positive
// count. Throws std::invalid_argument when nothing presents the
// fingerprint or a payoff is missing.
double deception_expected_payoff(
    const std::vector<std::pair<std::string, double>>& payoffs_by_true_fp,
    const DeceptionConfig& config, const std::string& observed_fp);

// One successor whose continuation value feeds a payoff cell.
struct CellCoupling {
  std::string state_id;
  double prob = 0.0;

  bool operator==(const CellCoupling&) const = default;
};

// Value structure of one (attack row, defense) cell before continuation
// values are known: the immediate breakdown, a pinned constant inside
// the indirect term, and the successor couplings that will multiply
// continuation values.
struct CellComponents {
  UtilityBreakdown base;
  double fixed_indirect = 0.0;
  std::vector<CellCoupling> couplings;
};

CellComponents payoff_cell(const Scenario& scenario, const RowSpec& row,
                           const std::string& defense_id,
                           const GameParams& params);

struct RowLabel {
  std::string attack_id;
  std::string target;  // node id, or observed fingerprint for folded rows

  bool operator==(const RowLabel&) const = default;
};

// Attacker-payoff matrix of one game state. Rows are attack rows
// (deception-indistinguishable targets folded into one expected row),
// columns defense actions. The defender's matrix is the element-wise
// negation. When folding occurred, `prefold_rows`/`prefold_entries`
// expose the per-target values the fold averaged.
struct PayoffMatrix {
  std::string state_id;
  std::vector<RowLabel> rows;
  std::vector<std::string> cols;
  std::vector<std::vector<double>> entries;
  std::vector<std::vector<UtilityBreakdown>> breakdowns;
  std::vector<RowLabel> prefold_rows;
  std::vector<std::vector<double>> prefold_entries;

  double entry(std::size_t i, std::size_t j) const { return entries[i][j]; }
  double defender_entry(std::size_t i, std::size_t j) const {
    return -entries[i][j];
  }
  bool folded() const { return !prefold_rows.empty(); }
};

// Assembles the payoff matrix of `state`: entry (i, j) is the immediate
// utility of (attack row i, defense j) plus discount times the
// probability-weighted continuation values of the successor states (or
// the scenario's pinned continuation constant for that edge).
// `continuation` must provide a value for every coupled successor.
// Throws std::invalid_argument on a state with no attack rows or a
// missing continuation value, std::runtime_error on non-finite
// arithmetic.
PayoffMatrix build_payoff_matrix(const Scenario& scenario, const GameGraph& graph,
                                 const GameState& state,
                                 const std::map<std::string, double>& continuation,
                                 const GameParams& params);

}  // namespace secgame
