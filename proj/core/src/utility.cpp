#include "secgame/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "secgame/state_graph.hpp"

namespace secgame {

double mitigated_loss(double loss, double recovery) {
  return std::max(0.0, loss - recovery);
}

double tracing_cost(double alpha, double attack_time, double window) {
  if (!(window > 0)) {
    throw std::invalid_argument(
        "tracing_cost: detection window must be > 0, got " +
        std::to_string(window));
  }
  return alpha * attack_time / window;
}

UtilityBreakdown attack_utility_breakdown(const AttackAction& attack,
                                          const DefenseAction& defense,
                                          const NetworkNode& node,
                                          double success_coeff) {
  const bool noop = defense.kind == DefenseKind::kNoop;
  const double loss = attack.loss();
  double recovery = 0.0;
  double exposure = 0.0;
  if (!noop) {
    if (defense.mitigates_attack(attack.id)) {
      recovery = std::min(defense.recovery, loss);
    }
    if (defense.traces_attack(attack.id)) {
      exposure = tracing_cost(defense.tracing_alpha, attack.attack_time,
                              defense.detection_window);
    }
  }
  UtilityBreakdown b;
  b.loss = loss;
  b.recovery = recovery;
  b.asset_coeff = node.asset_value * success_coeff;
  b.tracing_cost = exposure;
  b.immediate = (loss - recovery) * b.asset_coeff - exposure;
  b.indirect = 0.0;
  b.total = b.immediate;
  return b;
}

double attack_utility(const AttackAction& attack, const DefenseAction& defense,
                      const NetworkNode& node, double success_coeff) {
  return attack_utility_breakdown(attack, defense, node, success_coeff)
      .immediate;
}

double deception_expected_payoff(
    const std::vector<std::pair<std::string, double>>& payoffs_by_true_fp,
    const DeceptionConfig& config, const std::string& observed_fp) {
  const std::int64_t total = config.presented_total(observed_fp);
  if (total <= 0) {
    throw std::invalid_argument(
        "deception_expected_payoff: no device presents fingerprint '" +
        observed_fp + "'");
  }
  double expected = 0.0;
  for (const auto& [key, n] : config.counts) {
    if (key.second != observed_fp || n == 0) continue;
    auto it = std::find_if(
        payoffs_by_true_fp.begin(), payoffs_by_true_fp.end(),
        [&](const auto& p) { return p.first == key.first; });
    if (it == payoffs_by_true_fp.end()) {
      throw std::invalid_argument(
          "deception_expected_payoff: missing payoff for true fingerprint '" +
          key.first + "'");
    }
    expected += static_cast<double>(n) / static_cast<double>(total) * it->second;
  }
  return expected;
}

namespace {

double declared_coeff(const Scenario& scenario, const std::string& node_id,
                      const std::string& attack_id, bool declared) {
  if (declared) {
    const NodeConfig* cfg = scenario.find_config(node_id);
    if (cfg != nullptr) {
      const NodeAttack* na = cfg->find_attack(attack_id);
      if (na != nullptr) return na->success_coeff;
    }
  }
  return 1.0;
}

struct MemberView {
  std::string node_id;
  double weight = 1.0;
  bool declared = true;
  std::optional<std::string> child;
};

std::vector<MemberView> row_members(const RowSpec& row) {
  std::vector<MemberView> out;
  if (row.folded) {
    for (const auto& m : row.members) {
      out.push_back(MemberView{m.node_id, m.weight, m.declared, m.child_state});
    }
  } else {
    out.push_back(MemberView{row.target_node, 1.0, true, row.child_state});
  }
  return out;
}

}  // namespace

CellComponents payoff_cell(const Scenario& scenario, const RowSpec& row,
                           const std::string& defense_id,
                           const GameParams& params) {
  const AttackAction* attack = scenario.find_attack(row.attack_id);
  if (attack == nullptr) {
    throw std::invalid_argument("payoff_cell: unknown attack '" +
                                row.attack_id + "'");
  }
  const DefenseAction* defense = scenario.find_defense(defense_id);
  if (defense == nullptr) {
    throw std::invalid_argument("payoff_cell: unknown defense '" + defense_id +
                                "'");
  }
  const double p = scenario.transition_prob(attack->id, defense->id);

  CellComponents cell;
  cell.base.discount = params.discount;
  for (const auto& member : row_members(row)) {
    const NetworkNode* node = scenario.find_node(member.node_id);
    if (node == nullptr) {
      throw std::invalid_argument("payoff_cell: unknown node '" +
                                  member.node_id + "'");
    }
    const UtilityBreakdown part = attack_utility_breakdown(
        *attack, *defense, *node,
        declared_coeff(scenario, member.node_id, attack->id, member.declared));
    cell.base.loss += member.weight * part.loss;
    cell.base.recovery += member.weight * part.recovery;
    cell.base.asset_coeff += member.weight * part.asset_coeff;
    cell.base.tracing_cost += member.weight * part.tracing_cost;
    cell.base.immediate += member.weight * part.immediate;

    const std::optional<double> pinned =
        scenario.continuation_override(member.node_id, attack->id, defense->id);
    if (pinned.has_value()) {
      cell.fixed_indirect += member.weight * *pinned;
    } else if (member.child.has_value()) {
      cell.couplings.push_back(CellCoupling{*member.child, member.weight * p});
    }
  }
  cell.base.total = cell.base.immediate;
  return cell;
}

namespace {

double resolve_indirect(const CellComponents& cell,
                        const std::map<std::string, double>& continuation) {
  double indirect = cell.fixed_indirect;
  for (const auto& c : cell.couplings) {
    auto it = continuation.find(c.state_id);
    if (it == continuation.end()) {
      throw std::invalid_argument(
          "build_payoff_matrix: missing continuation value for state '" +
          c.state_id + "'");
    }
    indirect += c.prob * it->second;
  }
  return indirect;
}

UtilityBreakdown resolve_cell(const CellComponents& cell,
                              const std::map<std::string, double>& continuation,
                              const GameParams& params) {
  UtilityBreakdown b = cell.base;
  b.indirect = resolve_indirect(cell, continuation);
  b.total = b.immediate + params.discount * b.indirect;
  return b;
}

}  // namespace

PayoffMatrix build_payoff_matrix(const Scenario& scenario, const GameGraph& graph,
                                 const GameState& state,
                                 const std::map<std::string, double>& continuation,
                                 const GameParams& params) {
  (void)graph;  // successor linkage is carried by the row specs
  if (state.rows.empty()) {
    throw std::invalid_argument("build_payoff_matrix: state '" + state.id +
                                "' has no attack rows");
  }

  PayoffMatrix m;
  m.state_id = state.id;
  for (const auto& row : state.rows) {
    m.rows.push_back(RowLabel{row.attack_id, row.target_label()});
  }
  m.cols = state.defender_actions;
  m.entries.assign(state.rows.size(), std::vector<double>(m.cols.size(), 0.0));
  m.breakdowns.assign(state.rows.size(),
                      std::vector<UtilityBreakdown>(m.cols.size()));

  for (std::size_t i = 0; i < state.rows.size(); ++i) {
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
      const UtilityBreakdown b = resolve_cell(
          payoff_cell(scenario, state.rows[i], m.cols[j], params), continuation,
          params);
      if (!std::isfinite(b.total)) {
        throw std::runtime_error(
            "build_payoff_matrix: non-finite payoff at state '" + state.id +
            "', row " + state.rows[i].attack_id + ", defense " + m.cols[j]);
      }
      m.entries[i][j] = b.total;
      m.breakdowns[i][j] = b;
    }
  }

  // When rows were deception-folded, also expose the per-target values
  // the expectation averaged over.
  const bool any_fold =
      std::any_of(state.rows.begin(), state.rows.end(),
                  [](const RowSpec& r) { return r.folded; });
  if (any_fold) {
    auto append_prefold = [&](const RowSpec& single, const std::string& target) {
      std::vector<double> values;
      for (const auto& col : m.cols) {
        values.push_back(resolve_cell(payoff_cell(scenario, single, col, params),
                                      continuation, params)
                             .total);
      }
      m.prefold_rows.push_back(RowLabel{single.attack_id, target});
      m.prefold_entries.push_back(std::move(values));
    };
    for (const auto& row : state.rows) {
      if (!row.folded) {
        append_prefold(row, row.target_node);
        continue;
      }
      for (const auto& member : row.members) {
        RowSpec single;
        single.attack_id = row.attack_id;
        single.folded = true;
        single.observed_fp = row.observed_fp;
        single.members = {member};
        single.members.front().weight = 1.0;
        append_prefold(single, member.node_id);
      }
    }
  }

  return m;
}

}  // namespace secgame
