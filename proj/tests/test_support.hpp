#pragma once

// Shared generators for randomized tests: matrices, valid scenarios and
// synthetic stage games with controllable structure.

#include <random>
#include <string>
#include <vector>

#include "secgame/io.hpp"
#include "secgame/model.hpp"
#include "secgame/state_graph.hpp"

namespace testsupport {

inline std::vector<std::vector<double>> random_matrix(std::mt19937_64& rng,
                                                      std::size_t rows,
                                                      std::size_t cols,
                                                      double lo = -100.0,
                                                      double hi = 100.0) {
  std::uniform_real_distribution<double> entry(lo, hi);
  std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
  for (auto& row : m) {
    for (auto& v : row) v = entry(rng);
  }
  return m;
}

// A structurally valid random scenario: consistent ids, one entrance,
// exactly one noop defense, deception counts that match the census.
inline secgame::Scenario random_scenario(std::mt19937_64& rng) {
  using namespace secgame;
  auto pick = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto real = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  Scenario s;
  const int n_nodes = pick(2, 6);
  const bool with_deception = n_nodes >= 3 && pick(0, 1) == 1;
  for (int i = 0; i < n_nodes; ++i) {
    NetworkNode node;
    node.id = "n" + std::to_string(i);
    node.name = "Node " + std::to_string(i);
    node.asset_value = real(0.0, 20.0);
    node.true_fingerprint = "fp-" + node.id;
    node.observed_fingerprint = node.true_fingerprint;
    node.is_entrance = i == 0;
    s.nodes.push_back(std::move(node));
  }
  if (with_deception) {
    // The last two nodes present one shared fingerprint.
    s.nodes[n_nodes - 2].observed_fingerprint = "fp-shared";
    s.nodes[n_nodes - 1].observed_fingerprint = "fp-shared";
    s.nodes[n_nodes - 1].is_shadow = true;
    s.nodes[n_nodes - 1].asset_value = 0.0;
    s.deception.counts[{s.nodes[n_nodes - 2].true_fingerprint, "fp-shared"}] = 1;
    s.deception.counts[{s.nodes[n_nodes - 1].true_fingerprint, "fp-shared"}] = 1;
  }

  const int n_attacks = pick(2, 5);
  const NodeStateLevel levels[] = {
      NodeStateLevel::kNoPrivilege, NodeStateLevel::kRemoteAccess,
      NodeStateLevel::kRoot, NodeStateLevel::kDataLeak};
  for (int i = 0; i < n_attacks; ++i) {
    AttackAction a;
    a.id = "a" + std::to_string(i);
    a.name = "attack " + std::to_string(i);
    a.stage = i % 2 == 0 ? AttackStage::kIntrusion
                         : AttackStage::kLateralTransfer;
    a.loss_c = real(0.0, 80.0);
    a.loss_i = real(0.0, 40.0);
    a.loss_a = real(0.0, 40.0);
    a.success_prob = real(0.0, 1.0);
    a.attack_time = real(0.5, 30.0);
    a.result_state = levels[pick(1, 3)];
    s.attack_catalog.push_back(std::move(a));
  }

  const int n_defenses = pick(1, 3);
  for (int i = 0; i < n_defenses; ++i) {
    DefenseAction d;
    d.id = "d" + std::to_string(i);
    d.name = "defense " + std::to_string(i);
    d.kind = pick(0, 1) == 0 ? DefenseKind::kPassive : DefenseKind::kProactive;
    d.recovery = real(0.0, 50.0);
    d.tracing_alpha = real(0.0, 3.0);
    d.detection_window = real(0.5, 5.0);
    d.cost_flat = real(0.0, 5.0);
    for (const auto& a : s.attack_catalog) {
      if (pick(0, 2) == 0) d.mitigates.push_back(a.id);
      if (pick(0, 2) == 0) d.traces.push_back(a.id);
    }
    s.defense_catalog.push_back(std::move(d));
  }
  DefenseAction noop;
  noop.id = "noop";
  noop.name = "no defense";
  noop.kind = DefenseKind::kNoop;
  noop.detection_window = 1.0;
  s.defense_catalog.push_back(std::move(noop));

  for (int i = 0; i < n_nodes; ++i) {
    for (int j = 0; j < n_nodes; ++j) {
      if (i == j) continue;
      if (pick(0, 2) != 0) continue;
      s.edges.emplace_back("n" + std::to_string(i), "n" + std::to_string(j));
      if (pick(0, 3) != 0) {
        s.acl_rules.push_back(AclRule{"n" + std::to_string(i),
                                      "n" + std::to_string(j), pick(0, 4) != 0});
      }
    }
  }
  if (pick(0, 1) == 0 && n_nodes >= 2) {
    s.acl_rules.push_back(AclRule{"*", "n1", true});
  }

  for (int i = 0; i < n_nodes; ++i) {
    NodeConfig cfg;
    cfg.node_id = "n" + std::to_string(i);
    for (const auto& a : s.attack_catalog) {
      if (pick(0, 1) != 0) continue;
      NodeAttack na;
      na.attack_id = a.id;
      na.effect = levels[pick(0, 3)];
      na.success_coeff = real(0.0, 2.0);
      if (pick(0, 2) == 0) {
        na.paired_defense = s.defense_catalog[pick(0, n_defenses - 1)].id;
      }
      cfg.attacks.push_back(std::move(na));
    }
    if (!cfg.attacks.empty()) s.node_configs.push_back(std::move(cfg));
  }

  const double discounts[] = {1.0, 0.9, 0.5};
  s.game_params.discount = discounts[pick(0, 2)];

  if (pick(0, 1) == 0 && !s.node_configs.empty()) {
    const auto& cfg = s.node_configs.front();
    ContinuationOverride o;
    o.node_id = cfg.node_id;
    o.attack_id = cfg.attacks.front().attack_id;
    o.defense_id = s.defense_catalog.front().id;
    o.value = real(-50.0, 50.0);
    s.overrides.continuation.push_back(std::move(o));
  }
  if (pick(0, 1) == 0) {
    TransitionProbOverride o;
    o.attack_id = s.attack_catalog.front().id;
    o.prob = real(0.0, 1.0);
    s.overrides.transition_probs.push_back(std::move(o));
  }
  return s;
}

// A random synthetic stage game (possibly cyclic) with per-cell
// successor couplings whose mass never exceeds 1.
inline secgame::StageGameTable random_stage_game(std::mt19937_64& rng,
                                                 int max_states,
                                                 double discount) {
  using namespace secgame;
  auto pick = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto real = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  StageGameTable table;
  table.params.discount = discount;
  const int n = pick(2, max_states);
  for (int i = 0; i < n; ++i) {
    GameState state;
    state.id = "S" + std::to_string(i);
    const int rows = pick(1, 3), cols = pick(1, 3);
    StageGameTable::StateTable t;
    for (int r = 0; r < rows; ++r) {
      RowSpec spec;
      spec.attack_id = "r" + std::to_string(r);
      spec.target_node = "t";
      state.rows.push_back(spec);
      t.rows.push_back(RowLabel{spec.attack_id, "t"});
    }
    for (int c = 0; c < cols; ++c) t.cols.push_back("c" + std::to_string(c));
    t.immediate = random_matrix(rng, rows, cols, -50.0, 50.0);
    t.fixed_indirect.assign(rows, std::vector<double>(cols, 0.0));
    t.couplings.assign(rows,
                       std::vector<std::vector<CellCoupling>>(cols));
    table.graph.states.push_back(std::move(state));
    table.tables["S" + std::to_string(i)] = std::move(t);
  }
  for (int i = 0; i < n; ++i) {
    const std::string id = "S" + std::to_string(i);
    auto& t = table.tables[id];
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      for (std::size_t c = 0; c < t.cols.size(); ++c) {
        if (pick(0, 9) >= 7) continue;  // 30% of cells are terminal
        const int n_targets = pick(1, 2);
        double mass = real(0.3, 1.0);
        std::vector<CellCoupling> couples;
        for (int k = 0; k < n_targets; ++k) {
          const std::string to = "S" + std::to_string(pick(0, n - 1));
          const double p = mass / n_targets;
          couples.push_back(CellCoupling{to, p});
        }
        std::vector<TransitionTarget> targets;
        for (const auto& couple : couples) {
          targets.push_back(TransitionTarget{couple.state_id, couple.prob});
        }
        t.couplings[r][c] = std::move(couples);
        table.graph.transitions[{id, t.rows[r].attack_id, t.cols[c]}] =
            std::move(targets);
      }
    }
  }
  table.graph.initial_state = "S0";
  return table;
}

}  // namespace testsupport
