#include "secgame/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace secgame {

std::string_view to_string(NodeStateLevel level) {
  switch (level) {
    case NodeStateLevel::kNoPrivilege: return "no_privilege";
    case NodeStateLevel::kRemoteAccess: return "remote_access";
    case NodeStateLevel::kRoot: return "root";
    case NodeStateLevel::kDataLeak: return "data_leak";
  }
  return "no_privilege";
}

std::optional<NodeStateLevel> node_state_level_from_string(std::string_view s) {
  if (s == "no_privilege") return NodeStateLevel::kNoPrivilege;
  if (s == "remote_access") return NodeStateLevel::kRemoteAccess;
  if (s == "root") return NodeStateLevel::kRoot;
  if (s == "data_leak") return NodeStateLevel::kDataLeak;
  return std::nullopt;
}

std::string_view to_string(AttackStage stage) {
  switch (stage) {
    case AttackStage::kInformationCollecting: return "information_collecting";
    case AttackStage::kIntrusion: return "intrusion";
    case AttackStage::kPrivilegeElevation: return "privilege_elevation";
    case AttackStage::kLateralTransfer: return "lateral_transfer";
    case AttackStage::kPersistentResident: return "persistent_resident";
    case AttackStage::kTracksEraser: return "tracks_eraser";
  }
  return "intrusion";
}

std::optional<AttackStage> attack_stage_from_string(std::string_view s) {
  if (s == "information_collecting") return AttackStage::kInformationCollecting;
  if (s == "intrusion") return AttackStage::kIntrusion;
  if (s == "privilege_elevation") return AttackStage::kPrivilegeElevation;
  if (s == "lateral_transfer") return AttackStage::kLateralTransfer;
  if (s == "persistent_resident") return AttackStage::kPersistentResident;
  if (s == "tracks_eraser") return AttackStage::kTracksEraser;
  return std::nullopt;
}

std::string_view to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kPassive: return "passive";
    case DefenseKind::kProactive: return "proactive";
    case DefenseKind::kNoop: return "noop";
  }
  return "passive";
}

std::optional<DefenseKind> defense_kind_from_string(std::string_view s) {
  if (s == "passive") return DefenseKind::kPassive;
  if (s == "proactive") return DefenseKind::kProactive;
  if (s == "noop") return DefenseKind::kNoop;
  return std::nullopt;
}

bool DefenseAction::mitigates_attack(const std::string& attack_id) const {
  return std::find(mitigates.begin(), mitigates.end(), attack_id) !=
         mitigates.end();
}

bool DefenseAction::traces_attack(const std::string& attack_id) const {
  return std::find(traces.begin(), traces.end(), attack_id) != traces.end();
}

std::int64_t DeceptionConfig::count(const std::string& true_fp,
                                    const std::string& observed_fp) const {
  auto it = counts.find({true_fp, observed_fp});
  return it == counts.end() ? 0 : it->second;
}

std::int64_t DeceptionConfig::presented_total(
    const std::string& observed_fp) const {
  std::int64_t total = 0;
  for (const auto& [key, n] : counts) {
    if (key.second == observed_fp) total += n;
  }
  return total;
}

const NodeAttack* NodeConfig::find_attack(const std::string& attack_id) const {
  for (const auto& a : attacks) {
    if (a.attack_id == attack_id) return &a;
  }
  return nullptr;
}

const NetworkNode* Scenario::find_node(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const AttackAction* Scenario::find_attack(const std::string& id) const {
  for (const auto& a : attack_catalog) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

const DefenseAction* Scenario::find_defense(const std::string& id) const {
  for (const auto& d : defense_catalog) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const NodeConfig* Scenario::find_config(const std::string& node_id) const {
  for (const auto& c : node_configs) {
    if (c.node_id == node_id) return &c;
  }
  return nullptr;
}

const DefenseAction* Scenario::noop_defense() const {
  for (const auto& d : defense_catalog) {
    if (d.kind == DefenseKind::kNoop) return &d;
  }
  return nullptr;
}

std::optional<double> Scenario::continuation_override(
    const std::string& node_id, const std::string& attack_id,
    const std::string& defense_id) const {
  for (const auto& o : overrides.continuation) {
    if (o.node_id == node_id && o.attack_id == attack_id &&
        o.defense_id == defense_id) {
      return o.value;
    }
  }
  return std::nullopt;
}

double Scenario::transition_prob(const std::string& attack_id,
                                 const std::string& defense_id) const {
  // Most specific first: (attack, defense), then (attack, any).
  for (const auto& o : overrides.transition_probs) {
    if (o.attack_id == attack_id && o.defense_id == defense_id) return o.prob;
  }
  for (const auto& o : overrides.transition_probs) {
    if (o.attack_id == attack_id && o.defense_id.empty()) return o.prob;
  }
  const AttackAction* a = find_attack(attack_id);
  return a ? a->success_prob : 1.0;
}

namespace {

void add_violation(std::vector<Violation>* out, const std::string& where,
                   const std::string& message) {
  out->push_back(Violation{where, message});
}

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;

  std::set<std::string> node_ids;
  bool has_entrance = false;
  for (const auto& n : s.nodes) {
    if (!node_ids.insert(n.id).second) {
      add_violation(&out, n.id, "duplicate node id");
    }
    if (n.asset_value < 0) {
      add_violation(&out, n.id, "asset_value must be >= 0");
    }
    has_entrance = has_entrance || n.is_entrance;
  }
  if (!has_entrance) {
    add_violation(&out, "nodes", "at least one node must be an entrance");
  }

  for (const auto& [from, to] : s.edges) {
    if (!node_ids.count(from)) {
      add_violation(&out, from, "edge references unknown node '" + from + "'");
    }
    if (!node_ids.count(to)) {
      add_violation(&out, to, "edge references unknown node '" + to + "'");
    }
  }

  for (const auto& rule : s.acl_rules) {
    if (rule.from != "*" && !node_ids.count(rule.from)) {
      add_violation(&out, rule.from,
                    "acl rule references unknown node '" + rule.from + "'");
    }
    if (!node_ids.count(rule.to)) {
      add_violation(&out, rule.to,
                    "acl rule references unknown node '" + rule.to + "'");
    }
  }

  std::set<std::string> attack_ids;
  for (const auto& a : s.attack_catalog) {
    if (!attack_ids.insert(a.id).second) {
      add_violation(&out, a.id, "duplicate attack id");
    }
    if (a.loss_c < 0 || a.loss_i < 0 || a.loss_a < 0) {
      add_violation(&out, a.id, "loss components must be >= 0");
    }
    if (a.success_prob < 0 || a.success_prob > 1) {
      add_violation(&out, a.id, "success_prob must lie in [0, 1]");
    }
    if (!(a.attack_time > 0)) {
      add_violation(&out, a.id, "attack_time must be > 0");
    }
  }

  std::set<std::string> defense_ids;
  int noop_count = 0;
  for (const auto& d : s.defense_catalog) {
    if (!defense_ids.insert(d.id).second) {
      add_violation(&out, d.id, "duplicate defense id");
    }
    if (d.recovery < 0) add_violation(&out, d.id, "recovery must be >= 0");
    if (d.tracing_alpha < 0) {
      add_violation(&out, d.id, "tracing_alpha must be >= 0");
    }
    if (!(d.detection_window > 0)) {
      add_violation(&out, d.id, "detection_window must be > 0");
    }
    if (d.cost_flat < 0) add_violation(&out, d.id, "cost_flat must be >= 0");
    if (d.kind == DefenseKind::kNoop) {
      ++noop_count;
      if (d.recovery != 0 || d.tracing_alpha != 0 || d.cost_flat != 0) {
        add_violation(&out, d.id, "noop defense must have all-zero effects");
      }
    }
    for (const auto& lists : {&d.mitigates, &d.traces}) {
      for (const auto& aid : *lists) {
        if (!attack_ids.count(aid)) {
          add_violation(&out, d.id,
                        "defense references unknown attack '" + aid + "'");
        }
      }
    }
  }
  if (noop_count != 1) {
    add_violation(&out, "defenses",
                  "exactly one noop defense required, found " +
                      std::to_string(noop_count));
  }

  std::set<std::string> configured;
  for (const auto& c : s.node_configs) {
    if (!node_ids.count(c.node_id)) {
      add_violation(&out, c.node_id,
                    "node config references unknown node '" + c.node_id + "'");
    }
    if (!configured.insert(c.node_id).second) {
      add_violation(&out, c.node_id, "duplicate node config");
    }
    std::set<std::string> seen;
    for (const auto& na : c.attacks) {
      if (!attack_ids.count(na.attack_id)) {
        add_violation(&out, c.node_id,
                      "node config references unknown attack '" +
                          na.attack_id + "'");
      }
      if (!seen.insert(na.attack_id).second) {
        add_violation(&out, c.node_id,
                      "duplicate attack '" + na.attack_id + "' in node config");
      }
      if (!na.paired_defense.empty() && !defense_ids.count(na.paired_defense)) {
        add_violation(&out, c.node_id,
                      "node config references unknown defense '" +
                          na.paired_defense + "'");
      }
      if (na.success_coeff < 0) {
        add_violation(&out, c.node_id,
                      "success_coeff must be >= 0 for attack '" +
                          na.attack_id + "'");
      }
    }
  }

  // Deception column sums must agree with the observed-fingerprint census.
  std::map<std::string, std::int64_t> observed_census;
  for (const auto& n : s.nodes) {
    if (!n.observed_fingerprint.empty()) ++observed_census[n.observed_fingerprint];
  }
  std::map<std::string, std::int64_t> declared;
  for (const auto& [key, n] : s.deception.counts) {
    if (n < 0) {
      add_violation(&out, key.second, "deception count must be >= 0");
    }
    declared[key.second] += n;
  }
  for (const auto& [observed, total] : declared) {
    auto it = observed_census.find(observed);
    std::int64_t actual = it == observed_census.end() ? 0 : it->second;
    if (total != actual) {
      add_violation(&out, observed,
                    "deception counts for observed fingerprint '" + observed +
                        "' sum to " + std::to_string(total) + " but " +
                        std::to_string(actual) + " node(s) present it");
    }
  }

  const GameParams& p = s.game_params;
  if (!(p.discount > 0) || p.discount > 1) {
    add_violation(&out, "params", "discount must lie in (0, 1]");
  }
  if (!(p.convergence_delta > 0)) {
    add_violation(&out, "params", "convergence_delta must be > 0");
  }
  if (!(p.lp_tolerance > 0)) {
    add_violation(&out, "params", "lp_tolerance must be > 0");
  }
  if (p.max_sweeps <= 0) {
    add_violation(&out, "params", "max_sweeps must be > 0");
  }

  for (const auto& o : s.overrides.continuation) {
    if (!node_ids.count(o.node_id)) {
      add_violation(&out, o.node_id,
                    "override references unknown node '" + o.node_id + "'");
    }
    if (!attack_ids.count(o.attack_id)) {
      add_violation(&out, o.attack_id,
                    "override references unknown attack '" + o.attack_id + "'");
    }
    if (!defense_ids.count(o.defense_id)) {
      add_violation(&out, o.defense_id,
                    "override references unknown defense '" + o.defense_id + "'");
    }
    if (!std::isfinite(o.value)) {
      add_violation(&out, o.attack_id, "override value must be finite");
    }
  }
  for (const auto& o : s.overrides.transition_probs) {
    if (!attack_ids.count(o.attack_id)) {
      add_violation(&out, o.attack_id,
                    "transition override references unknown attack '" +
                        o.attack_id + "'");
    }
    if (!o.defense_id.empty() && !defense_ids.count(o.defense_id)) {
      add_violation(&out, o.defense_id,
                    "transition override references unknown defense '" +
                        o.defense_id + "'");
    }
    if (o.prob < 0 || o.prob > 1) {
      add_violation(&out, o.attack_id,
                    "transition probability must lie in [0, 1]");
    }
  }

  return out;
}

bool acl_permits(const Scenario& s, const std::string& from,
                 const std::string& to) {
  if (!s.find_node(from)) {
    throw std::invalid_argument("acl_permits: unknown node '" + from + "'");
  }
  if (!s.find_node(to)) {
    throw std::invalid_argument("acl_permits: unknown node '" + to + "'");
  }
  for (const auto& rule : s.acl_rules) {
    bool from_match = rule.from == "*" || rule.from == from;
    if (from_match && rule.to == to) return rule.permit;
  }
  return false;
}

}  // namespace secgame
