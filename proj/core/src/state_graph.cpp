#include "secgame/state_graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "secgame/utility.hpp"

namespace secgame {

bool RowSpec::has_successor() const {
  if (folded) {
    return std::any_of(members.begin(), members.end(), [](const FoldMember& m) {
      return m.child_state.has_value();
    });
  }
  return child_state.has_value();
}

NodeStateLevel GameState::level(const std::string& node_id) const {
  auto it = node_levels.find(node_id);
  return it == node_levels.end() ? NodeStateLevel::kNoPrivilege : it->second;
}

std::set<std::string> GameState::attack_id_set() const {
  std::set<std::string> ids;
  for (const auto& a : attacker_actions) ids.insert(a.attack_id);
  return ids;
}

const GameState* GameGraph::find_state(const std::string& id) const {
  for (const auto& s : states) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const std::vector<TransitionTarget>* GameGraph::transitions_for(
    const std::string& state_id, const std::string& attack_id,
    const std::string& defense_id) const {
  auto it = transitions.find({state_id, attack_id, defense_id});
  return it == transitions.end() ? nullptr : &it->second;
}

std::vector<std::string> GameGraph::successors(
    const std::string& state_id) const {
  std::set<std::string> out;
  for (const auto& [key, targets] : transitions) {
    if (std::get<0>(key) != state_id) continue;
    for (const auto& t : targets) out.insert(t.state_id);
  }
  return {out.begin(), out.end()};
}

bool GameGraph::topological_order(std::vector<std::string>* order) const {
  std::map<std::string, int> indegree;
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& s : states) indegree[s.id];
  for (const auto& s : states) {
    for (const auto& succ : successors(s.id)) {
      if (adj[s.id].insert(succ).second) ++indegree[succ];
    }
  }
  std::deque<std::string> ready;
  for (const auto& s : states) {
    if (indegree[s.id] == 0) ready.push_back(s.id);
  }
  std::vector<std::string> sorted;
  while (!ready.empty()) {
    std::string id = ready.front();
    ready.pop_front();
    sorted.push_back(id);
    for (const auto& succ : adj[id]) {
      if (--indegree[succ] == 0) ready.push_back(succ);
    }
  }
  if (sorted.size() != states.size()) return false;
  if (order != nullptr) *order = std::move(sorted);
  return true;
}

namespace {

// Edge-and-ACL reachability, precomputed once per generation pass.
class NeighborIndex {
 public:
  explicit NeighborIndex(const Scenario& scenario) {
    for (const auto& [from, to] : scenario.edges) {
      if (acl_permits(scenario, from, to)) neighbors_[from].insert(to);
    }
  }

  // Nodes attackable at `state`: every compromised node (escalation runs
  // locally, no ACL hop needed) plus every permitted neighbor of one.
  std::set<std::string> attackable(const Scenario& scenario,
                                   const GameState& state) const {
    std::set<std::string> out;
    for (const auto& node : scenario.nodes) {
      if (state.level(node.id) < NodeStateLevel::kRemoteAccess) continue;
      out.insert(node.id);
      auto it = neighbors_.find(node.id);
      if (it == neighbors_.end()) continue;
      out.insert(it->second.begin(), it->second.end());
    }
    return out;
  }

 private:
  std::map<std::string, std::set<std::string>> neighbors_;
};

std::vector<AttackTarget> applicable_pairs(const Scenario& scenario,
                                           const NeighborIndex& index,
                                           const GameState& state,
                                           const std::set<std::string>& visited) {
  const std::set<std::string> attackable = index.attackable(scenario, state);
  std::vector<AttackTarget> out;
  for (const auto& node : scenario.nodes) {
    if (visited.count(node.id) || !attackable.count(node.id)) continue;
    const NodeConfig* cfg = scenario.find_config(node.id);
    if (cfg == nullptr) continue;
    const NodeStateLevel level = state.level(node.id);
    for (const auto& na : cfg->attacks) {
      // An untouched node is exposed to every declared attack; once
      // compromised, only genuine escalations remain interesting.
      if (level == NodeStateLevel::kNoPrivilege ||
          raises_level(level, na.effect)) {
        out.push_back(AttackTarget{na.attack_id, node.id});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> class_nodes(const Scenario& scenario,
                                     const std::string& observed_fp) {
  std::vector<std::string> out;
  for (const auto& n : scenario.nodes) {
    if (n.observed_fingerprint == observed_fp) out.push_back(n.id);
  }
  return out;
}

bool deception_active(const Scenario& scenario, const std::string& observed_fp) {
  if (observed_fp.empty()) return false;
  if (scenario.deception.presented_total(observed_fp) <= 0) return false;
  return class_nodes(scenario, observed_fp).size() >= 2;
}

double noop_score(const Scenario& scenario, const AttackAction& attack,
                  const std::string& node_id, double coeff) {
  return attack_utility(attack, *scenario.noop_defense(),
                        *scenario.find_node(node_id), coeff);
}

struct ChildLink {
  NodeStateLevel level;
  std::string state_id;
};

std::optional<std::string> link_child(
    const std::map<std::string, ChildLink>& childmap,
    const std::string& node_id, NodeStateLevel effect) {
  auto it = childmap.find(node_id);
  if (it == childmap.end() || it->second.level != effect) return std::nullopt;
  return it->second.state_id;
}

std::vector<FoldMember> fold_members(const Scenario& scenario,
                                     const AttackAction& attack,
                                     const std::string& observed_fp,
                                     const std::map<std::string, ChildLink>& childmap) {
  const auto nodes = class_nodes(scenario, observed_fp);
  const double total =
      static_cast<double>(scenario.deception.presented_total(observed_fp));
  std::vector<FoldMember> members;
  for (const auto& node_id : nodes) {
    const NetworkNode& node = *scenario.find_node(node_id);
    std::int64_t share =
        scenario.deception.count(node.true_fingerprint, observed_fp);
    if (share <= 0) continue;
    std::int64_t same_true = 0;
    for (const auto& other : nodes) {
      if (scenario.find_node(other)->true_fingerprint == node.true_fingerprint) {
        ++same_true;
      }
    }
    FoldMember m;
    m.node_id = node_id;
    m.weight = static_cast<double>(share) / total /
               static_cast<double>(same_true);
    const NodeConfig* cfg = scenario.find_config(node_id);
    const NodeAttack* na =
        cfg == nullptr ? nullptr : cfg->find_attack(attack.id);
    m.declared = na != nullptr;
    const NodeStateLevel effect = na != nullptr ? na->effect : attack.result_state;
    m.child_state = link_child(childmap, node_id, effect);
    members.push_back(std::move(m));
  }
  return members;
}

// Candidate row for one attack id: either a single concrete target or a
// deception class. Scored by immediate utility against the noop defense.
struct RowOption {
  RowSpec row;
  double score = 0.0;
};

std::vector<RowSpec> build_rows(const Scenario& scenario,
                                const std::vector<AttackTarget>& pairs,
                                const std::map<std::string, ChildLink>& childmap) {
  std::vector<RowSpec> rows;
  for (std::size_t i = 0; i < pairs.size();) {
    const std::string& attack_id = pairs[i].attack_id;
    const AttackAction& attack = *scenario.find_attack(attack_id);

    std::vector<RowOption> options;
    std::set<std::string> folded_classes;
    for (std::size_t j = i; j < pairs.size() && pairs[j].attack_id == attack_id;
         ++j) {
      const std::string& node_id = pairs[j].node_id;
      const NetworkNode& node = *scenario.find_node(node_id);
      if (deception_active(scenario, node.observed_fingerprint)) {
        if (!folded_classes.insert(node.observed_fingerprint).second) continue;
        RowOption opt;
        opt.row.attack_id = attack_id;
        opt.row.folded = true;
        opt.row.observed_fp = node.observed_fingerprint;
        opt.row.members =
            fold_members(scenario, attack, node.observed_fingerprint, childmap);
        for (const auto& m : opt.row.members) {
          const NodeConfig* cfg = scenario.find_config(m.node_id);
          const NodeAttack* na =
              cfg == nullptr ? nullptr : cfg->find_attack(attack_id);
          const double coeff =
              m.declared && na != nullptr ? na->success_coeff : 1.0;
          opt.score += m.weight * noop_score(scenario, attack, m.node_id, coeff);
        }
        options.push_back(std::move(opt));
      } else {
        const NodeAttack& na =
            *scenario.find_config(node_id)->find_attack(attack_id);
        RowOption opt;
        opt.row.attack_id = attack_id;
        opt.row.target_node = node_id;
        opt.row.child_state = link_child(childmap, node_id, na.effect);
        opt.score = noop_score(scenario, attack, node_id, na.success_coeff);
        options.push_back(std::move(opt));
      }
    }

    // A rational attacker aims the action at its best target; dominated
    // targets of the same action do not get rows of their own.
    const RowOption* best = &options.front();
    for (const auto& opt : options) {
      if (opt.score > best->score ||
          (opt.score == best->score &&
           opt.row.target_label() < best->row.target_label())) {
        best = &opt;
      }
    }
    rows.push_back(best->row);

    while (i < pairs.size() && pairs[i].attack_id == attack_id) ++i;
  }
  return rows;
}

std::vector<std::string> paired_defenses(const Scenario& scenario,
                                         const std::vector<AttackTarget>& pairs) {
  std::set<std::string> ids;
  for (const auto& pair : pairs) {
    const NodeConfig* cfg = scenario.find_config(pair.node_id);
    if (cfg == nullptr) continue;
    const NodeAttack* na = cfg->find_attack(pair.attack_id);
    if (na == nullptr || na->paired_defense.empty()) continue;
    ids.insert(na->paired_defense);
  }
  const DefenseAction* noop = scenario.noop_defense();
  ids.erase(noop->id);
  std::vector<std::string> out(ids.begin(), ids.end());
  out.push_back(noop->id);
  return out;
}

}  // namespace

GameGraph generate_states(const Scenario& scenario,
                          const std::set<std::string>& compromised,
                          bool allow_any_start) {
  const auto violations = validate_scenario(scenario);
  if (!violations.empty()) {
    throw std::invalid_argument("generate_states: invalid scenario (" +
                                violations.front().where + ": " +
                                violations.front().message + ")");
  }

  std::set<std::string> start = compromised;
  if (start.empty()) {
    for (const auto& n : scenario.nodes) {
      if (n.is_entrance) start.insert(n.id);
    }
    if (start.empty()) {
      throw std::invalid_argument(
          "generate_states: no compromised nodes given and the scenario has "
          "no entrance nodes");
    }
  } else {
    for (const auto& id : start) {
      const NetworkNode* node = scenario.find_node(id);
      if (node == nullptr) {
        throw std::invalid_argument("generate_states: unknown start node '" +
                                    id + "'");
      }
      if (!node->is_entrance && !allow_any_start) {
        throw std::invalid_argument("generate_states: start node '" + id +
                                    "' is not an entrance node");
      }
    }
  }

  GameGraph graph;
  GameState initial;
  initial.id = "S0";
  for (const auto& n : scenario.nodes) {
    initial.node_levels[n.id] = start.count(n.id)
                                    ? NodeStateLevel::kRemoteAccess
                                    : NodeStateLevel::kNoPrivilege;
  }
  graph.states.push_back(std::move(initial));
  graph.initial_state = "S0";

  const NeighborIndex index(scenario);
  std::set<std::string> visited;
  std::deque<std::size_t> queue;
  queue.push_back(0);

  while (!queue.empty()) {
    const std::size_t idx = queue.front();
    queue.pop_front();
    GameState state = graph.states[idx];

    const auto pairs = applicable_pairs(scenario, index, state, visited);
    state.attacker_actions = pairs;
    state.defender_actions = paired_defenses(scenario, pairs);

    // Expand each not-yet-visited node through its utility-maximal
    // raising attack; that one successor state is materialized.
    std::map<std::string, ChildLink> childmap;
    for (const auto& node : scenario.nodes) {
      if (visited.count(node.id)) continue;
      const NodeConfig* cfg = scenario.find_config(node.id);
      if (cfg == nullptr) continue;
      const NodeStateLevel level = state.level(node.id);

      const NodeAttack* best = nullptr;
      double best_score = 0.0;
      for (const auto& pair : pairs) {
        if (pair.node_id != node.id) continue;
        const NodeAttack* na = cfg->find_attack(pair.attack_id);
        if (na == nullptr || !raises_level(level, na->effect)) continue;
        const double score = noop_score(
            scenario, *scenario.find_attack(na->attack_id), node.id,
            na->success_coeff);
        if (best == nullptr || score > best_score ||
            (score == best_score && na->attack_id < best->attack_id)) {
          best = na;
          best_score = score;
        }
      }
      if (best == nullptr) continue;

      visited.insert(node.id);
      GameState child;
      child.id = "S" + std::to_string(graph.states.size());
      child.node_levels = state.node_levels;
      child.node_levels[node.id] = best->effect;
      childmap[node.id] = ChildLink{best->effect, child.id};
      graph.states.push_back(std::move(child));
      queue.push_back(graph.states.size() - 1);
    }

    state.rows = build_rows(scenario, pairs, childmap);

    for (const auto& row : state.rows) {
      for (const auto& defense_id : state.defender_actions) {
        const double p = scenario.transition_prob(row.attack_id, defense_id);
        std::vector<TransitionTarget> targets;
        if (row.folded) {
          for (const auto& m : row.members) {
            if (m.child_state.has_value()) {
              targets.push_back(TransitionTarget{*m.child_state, m.weight * p});
            }
          }
        } else if (row.child_state.has_value()) {
          targets.push_back(TransitionTarget{*row.child_state, p});
        }
        if (!targets.empty()) {
          graph.transitions[{state.id, row.attack_id, defense_id}] =
              std::move(targets);
        }
      }
    }

    state.is_terminal =
        state.rows.empty() ||
        std::none_of(state.rows.begin(), state.rows.end(),
                     [](const RowSpec& r) { return r.has_successor(); });

    graph.states[idx] = std::move(state);
  }

  return graph;
}

std::vector<AttackTarget> reachable_frontier(const Scenario& scenario,
                                             const GameGraph& graph,
                                             const GameState& state) {
  (void)graph;
  const NeighborIndex index(scenario);
  const std::set<std::string> attackable = index.attackable(scenario, state);
  std::vector<AttackTarget> out;
  for (const auto& node : scenario.nodes) {
    if (!attackable.count(node.id)) continue;
    const NodeConfig* cfg = scenario.find_config(node.id);
    if (cfg == nullptr) continue;
    const NodeStateLevel level = state.level(node.id);
    for (const auto& na : cfg->attacks) {
      if (raises_level(level, na.effect)) {
        out.push_back(AttackTarget{na.attack_id, node.id});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace secgame
