#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "secgame/model.hpp"

namespace secgame {

// One applicable (attack, target) pair at a state.
struct AttackTarget {
  std::string attack_id;
  std::string node_id;

  auto operator<=>(const AttackTarget&) const = default;
};

// A target priced inside a deception-folded row. `weight` is the
// probability that the launched attack lands on this node. Synthesized
// members (attack not declared on the node) are priced with a default
// coefficient of 1; the node's own asset parameters decide the damage.
struct FoldMember {
  std::string node_id;
  double weight = 1.0;
  bool declared = true;
  std::optional<std::string> child_state;

  bool operator==(const FoldMember&) const = default;
};

// One attacker row of a state's payoff matrix. Plain rows target a
// single node (the utility-maximal target when an action applies to
// several). Folded rows target an observed fingerprint whose presenting
// nodes the attacker cannot tell apart.
struct RowSpec {
  std::string attack_id;
  bool folded = false;
  std::string target_node;                 // plain rows
  std::optional<std::string> child_state;  // plain rows
  std::string observed_fp;                 // folded rows
  std::vector<FoldMember> members;         // folded rows

  const std::string& target_label() const {
    return folded ? observed_fp : target_node;
  }
  bool has_successor() const;

  bool operator==(const RowSpec&) const = default;
};

struct GameState {
  std::string id;
  std::map<std::string, NodeStateLevel> node_levels;
  // Every applicable (attack, target) pair: all declared attacks on
  // untouched reachable nodes plus privilege escalations on compromised
  // ones. Nodes already expanded by the generation pass are excluded.
  std::vector<AttackTarget> attacker_actions;
  // Defenses paired with some applicable attack, plus the noop entry
  // (always last).
  std::vector<std::string> defender_actions;
  std::vector<RowSpec> rows;
  bool is_terminal = false;

  NodeStateLevel level(const std::string& node_id) const;
  std::set<std::string> attack_id_set() const;

  bool operator==(const GameState&) const = default;
};

struct TransitionTarget {
  std::string state_id;
  double prob = 0.0;

  bool operator==(const TransitionTarget&) const = default;
};

// Directed game-state graph. Transition lists are keyed by
// (state, attack, defense); per key the probabilities sum to at most 1,
// any deficit being the chance the game ends there.
struct GameGraph {
  std::vector<GameState> states;
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<TransitionTarget>>
      transitions;
  std::string initial_state;

  const GameState* find_state(const std::string& id) const;
  const std::vector<TransitionTarget>* transitions_for(
      const std::string& state_id, const std::string& attack_id,
      const std::string& defense_id) const;
  // Distinct successor state ids of one state, sorted.
  std::vector<std::string> successors(const std::string& state_id) const;
  // Kahn topological sort; returns false on a cycle. On success
  // `order` (if given) receives state ids, sources first.
  bool topological_order(std::vector<std::string>* order = nullptr) const;
  bool is_acyclic() const { return topological_order(); }
};

// Greedy state generation. Seeds the initial state with `compromised`
// at remote-access level, then walks ACL-reachable neighbors node by
// node; every applicable attack becomes a payoff row but only each
// node's utility-maximal raising attack materializes a successor state,
// and a node is expanded at most once per pass. The result is acyclic.
// Throws std::invalid_argument on an invalid scenario, an unknown or
// (unless `allow_any_start`) non-entrance start node, or an empty start
// set when the scenario has no entrance nodes.
GameGraph generate_states(const Scenario& scenario,
                          const std::set<std::string>& compromised = {},
                          bool allow_any_start = false);

// All (attack, node) pairs that are ACL-reachable from a compromised
// node (or run locally on one) and would raise the node's level. Unlike
// the per-state action set this ignores the generation pass's
// expansion bookkeeping.
std::vector<AttackTarget> reachable_frontier(const Scenario& scenario,
                                             const GameGraph& graph,
                                             const GameState& state);

}  // namespace secgame
