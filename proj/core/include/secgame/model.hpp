#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace secgame {

// Compromise level of a single network node, ordered by danger.
enum class NodeStateLevel {
  kNoPrivilege = 0,
  kRemoteAccess = 1,
  kRoot = 2,
  kDataLeak = 3,
};

std::string_view to_string(NodeStateLevel level);
std::optional<NodeStateLevel> node_state_level_from_string(std::string_view s);

inline bool raises_level(NodeStateLevel from, NodeStateLevel to) {
  return static_cast<int>(to) > static_cast<int>(from);
}

// Kill-chain stage an attack technique belongs to.
enum class AttackStage {
  kInformationCollecting,
  kIntrusion,
  kPrivilegeElevation,
  kLateralTransfer,
  kPersistentResident,
  kTracksEraser,
};

std::string_view to_string(AttackStage stage);
std::optional<AttackStage> attack_stage_from_string(std::string_view s);

enum class DefenseKind {
  kPassive,
  kProactive,
  kNoop,
};

std::string_view to_string(DefenseKind kind);
std::optional<DefenseKind> defense_kind_from_string(std::string_view s);

struct NetworkNode {
  std::string id;
  std::string name;
  double asset_value = 0.0;
  std::string true_fingerprint;
  std::string observed_fingerprint;
  bool is_entrance = false;
  bool is_shadow = false;

  bool operator==(const NetworkNode&) const = default;
};

// First matching rule decides; no match means deny. `from` may be the
// wildcard "*".
struct AclRule {
  std::string from;
  std::string to;
  bool permit = true;

  bool operator==(const AclRule&) const = default;
};

struct AttackAction {
  std::string id;
  std::string name;
  AttackStage stage = AttackStage::kIntrusion;
  double loss_c = 0.0;
  double loss_i = 0.0;
  double loss_a = 0.0;
  double success_prob = 1.0;
  double attack_time = 1.0;
  NodeStateLevel result_state = NodeStateLevel::kRemoteAccess;

  double loss() const { return loss_c + loss_i + loss_a; }

  bool operator==(const AttackAction&) const = default;
};

struct DefenseAction {
  std::string id;
  std::string name;
  DefenseKind kind = DefenseKind::kPassive;
  double recovery = 0.0;
  double tracing_alpha = 0.0;
  double detection_window = 1.0;
  double cost_flat = 0.0;
  // Attack ids this defense mitigates (recovery applies) or traces
  // (exposure cost applies). A defense is not assumed to counter every
  // attack: limited login blunts password attacks but does nothing
  // against an exploited CVE.
  std::vector<std::string> mitigates;
  std::vector<std::string> traces;

  bool mitigates_attack(const std::string& attack_id) const;
  bool traces_attack(const std::string& attack_id) const;

  bool operator==(const DefenseAction&) const = default;
};

// Deployment counts of true fingerprints presented as observed
// fingerprints. For an observed fingerprint o, the attacker cannot tell
// apart the count(f, o) devices whose true fingerprint is f.
struct DeceptionConfig {
  std::map<std::pair<std::string, std::string>, std::int64_t> counts;

  std::int64_t count(const std::string& true_fp,
                     const std::string& observed_fp) const;
  // N_o: total number of devices presenting observed fingerprint o.
  std::int64_t presented_total(const std::string& observed_fp) const;
  bool empty() const { return counts.empty(); }

  bool operator==(const DeceptionConfig&) const = default;
};

// One attack applicable on a node: the compromise level it yields, the
// damage coefficient folded into the asset term, and the defense action
// (if any) the defender would deploy against it there.
struct NodeAttack {
  std::string attack_id;
  NodeStateLevel effect = NodeStateLevel::kRemoteAccess;
  double success_coeff = 1.0;
  std::string paired_defense;  // empty = none

  bool operator==(const NodeAttack&) const = default;
};

struct NodeConfig {
  std::string node_id;
  std::vector<NodeAttack> attacks;

  const NodeAttack* find_attack(const std::string& attack_id) const;

  bool operator==(const NodeConfig&) const = default;
};

struct GameParams {
  double discount = 1.0;
  double convergence_delta = 1e-6;
  double lp_tolerance = 1e-9;
  int max_sweeps = 10000;

  bool operator==(const GameParams&) const = default;
};

// Pins the indirect (continuation) term of a payoff entry to a constant
// for the row attacking `node_id` with `attack_id` against `defense_id`.
// Scenario authors use these to encode standing effects the closed-form
// utility cannot see (e.g. decoy exposure under the no-op defense) and
// to pin published reference values.
struct ContinuationOverride {
  std::string node_id;
  std::string attack_id;
  std::string defense_id;
  double value = 0.0;

  bool operator==(const ContinuationOverride&) const = default;
};

struct TransitionProbOverride {
  std::string attack_id;
  std::string defense_id;  // empty = any defense
  double prob = 1.0;

  bool operator==(const TransitionProbOverride&) const = default;
};

struct ScenarioOverrides {
  std::vector<ContinuationOverride> continuation;
  std::vector<TransitionProbOverride> transition_probs;

  bool operator==(const ScenarioOverrides&) const = default;
};

// Full description of a network scenario: topology, action catalogs,
// per-node applicability, deception deployment and solver parameters.
struct Scenario {
  std::vector<NetworkNode> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<AclRule> acl_rules;
  std::vector<AttackAction> attack_catalog;
  std::vector<DefenseAction> defense_catalog;
  std::vector<NodeConfig> node_configs;
  DeceptionConfig deception;
  GameParams game_params;
  ScenarioOverrides overrides;

  const NetworkNode* find_node(const std::string& id) const;
  const AttackAction* find_attack(const std::string& id) const;
  const DefenseAction* find_defense(const std::string& id) const;
  const NodeConfig* find_config(const std::string& node_id) const;
  // The catalog's single no-op entry, or nullptr if the scenario is
  // malformed.
  const DefenseAction* noop_defense() const;

  std::optional<double> continuation_override(const std::string& node_id,
                                              const std::string& attack_id,
                                              const std::string& defense_id) const;
  double transition_prob(const std::string& attack_id,
                         const std::string& defense_id) const;

  bool operator==(const Scenario&) const = default;
};

struct Violation {
  std::string where;    // offending node/action/rule id
  std::string message;  // human-readable description

  bool operator==(const Violation&) const = default;
};

// Checks every scenario invariant and returns one entry per violation.
// A valid scenario yields an empty report. Pure: never throws, never
// mutates.
std::vector<Violation> validate_scenario(const Scenario& s);

// First-match ACL evaluation, default deny. Throws std::invalid_argument
// when either node id is unknown.
bool acl_permits(const Scenario& s, const std::string& from,
                 const std::string& to);

}  // namespace secgame
