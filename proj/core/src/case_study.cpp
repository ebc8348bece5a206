#include "secgame/io.hpp"
#include "secgame/model.hpp"

namespace secgame {

// Six-node reference network: two internet-facing clients, two servers
// behind a firewall, a key asset and a decoy presenting the same
// fingerprint. Utility parameters are calibrated so the assembled S0
// and S2 payoff tables land on round reference numbers; the pinned
// continuation constants encode the sub-tree totals and the standing
// exposure an attacker incurs on the decoy even when the defender idles.
Scenario builtin_case_study() {
  Scenario s;

  s.nodes = {
      {"client_a", "Client A", 1.0, "ws-client-a", "ws-client-a", true, false},
      {"client_b", "Client B", 1.0, "ws-client-b", "ws-client-b", false, false},
      {"server_a", "Server A", 1.0, "app-server", "app-server", false, false},
      {"server_b", "Server B", 1.0, "file-server", "file-server", false, false},
      {"key_asset", "Key Asset", 10.0, "db-server", "asset-server", false,
       false},
      {"shadow_asset", "Shadow Asset", 0.0, "decoy", "asset-server", false,
       true},
  };

  s.edges = {
      {"client_a", "client_b"},  {"client_a", "server_b"},
      {"client_b", "server_a"},  {"client_b", "server_b"},
      {"server_b", "key_asset"}, {"server_b", "shadow_asset"},
  };

  s.acl_rules = {
      {"*", "server_b", true},        {"client_b", "server_a", true},
      {"client_a", "client_b", true}, {"server_b", "key_asset", true},
      {"server_b", "shadow_asset", true},
  };

  auto attack = [](std::string id, std::string name, AttackStage stage,
                   double loss_c, double loss_i, double loss_a, double time,
                   NodeStateLevel result) {
    AttackAction a;
    a.id = std::move(id);
    a.name = std::move(name);
    a.stage = stage;
    a.loss_c = loss_c;
    a.loss_i = loss_i;
    a.loss_a = loss_a;
    a.success_prob = 1.0;
    a.attack_time = time;
    a.result_state = result;
    return a;
  };
  s.attack_catalog = {
      attack("a1", "weak password attack", AttackStage::kIntrusion, 60, 0, 0, 1,
             NodeStateLevel::kRemoteAccess),
      attack("a2", "client CVE exploit", AttackStage::kPrivilegeElevation, 80,
             0, 0, 1, NodeStateLevel::kRoot),
      attack("a3", "denial of service", AttackStage::kIntrusion, 0, 0, 30, 10,
             NodeStateLevel::kNoPrivilege),
      attack("a4", "remote CVE exploit", AttackStage::kIntrusion, 40, 0, 0, 20,
             NodeStateLevel::kRemoteAccess),
      attack("a5", "malicious code implant", AttackStage::kIntrusion, 0, 50, 0,
             5, NodeStateLevel::kRemoteAccess),
      attack("a6", "phishing email", AttackStage::kIntrusion, 70, 0, 0, 3,
             NodeStateLevel::kRemoteAccess),
      attack("a7", "credential hash bypass", AttackStage::kLateralTransfer, 100,
             0, 0, 50, NodeStateLevel::kRemoteAccess),
      attack("a8", "server CVE exploit", AttackStage::kLateralTransfer, 100, 0,
             0, 50, NodeStateLevel::kRemoteAccess),
  };

  auto defense = [](std::string id, std::string name, DefenseKind kind,
                    double recovery, double alpha, double window,
                    std::vector<std::string> mitigates,
                    std::vector<std::string> traces) {
    DefenseAction d;
    d.id = std::move(id);
    d.name = std::move(name);
    d.kind = kind;
    d.recovery = recovery;
    d.tracing_alpha = alpha;
    d.detection_window = window;
    d.cost_flat = 0.0;
    d.mitigates = std::move(mitigates);
    d.traces = std::move(traces);
    return d;
  };
  s.defense_catalog = {
      defense("d1", "limited login", DefenseKind::kPassive, 40, 1, 2, {"a1"},
              {"a3", "a4"}),
      defense("d2", "anti-virus software", DefenseKind::kPassive, 30, 0, 1,
              {"a5"}, {}),
      defense("d3", "patch manager system", DefenseKind::kPassive, 40, 2, 1,
              {"a2", "a8"}, {"a7", "a8"}),
      defense("d4", "firewall reconfiguration", DefenseKind::kPassive, 35, 0, 1,
              {"a6"}, {}),
      defense("d5", "no defense", DefenseKind::kNoop, 0, 0, 1, {}, {}),
  };

  s.node_configs = {
      {"client_a",
       {{"a2", NodeStateLevel::kRoot, 0.5, ""},
        {"a3", NodeStateLevel::kNoPrivilege, 1.0, ""},
        {"a6", NodeStateLevel::kRemoteAccess, 1.0, "d4"}}},
      {"client_b",
       {{"a1", NodeStateLevel::kRemoteAccess, 1.0, "d1"},
        {"a3", NodeStateLevel::kNoPrivilege, 1.0, ""},
        {"a4", NodeStateLevel::kRemoteAccess, 0.05, ""}}},
      {"server_a",
       {{"a2", NodeStateLevel::kRemoteAccess, 0.5, "d3"},
        {"a5", NodeStateLevel::kRemoteAccess, 1.0, "d2"}}},
      {"server_b", {{"a4", NodeStateLevel::kRemoteAccess, 0.1, ""}}},
      {"key_asset",
       {{"a7", NodeStateLevel::kRemoteAccess, 1.0, ""},
        {"a8", NodeStateLevel::kRemoteAccess, 1.0, "d3"}}},
      {"shadow_asset", {{"a7", NodeStateLevel::kRemoteAccess, 0.0, ""}}},
  };

  s.deception.counts[{"db-server", "asset-server"}] = 1;
  s.deception.counts[{"decoy", "asset-server"}] = 1;

  s.game_params.discount = 1.0;
  s.game_params.convergence_delta = 1e-6;
  s.game_params.lp_tolerance = 1e-9;

  // Pinned continuation constants. The S0 rows carry the reference
  // sub-tree totals; the no-defense column of the asset states carries
  // the exposure an attacker suffers on the decoy side regardless of
  // the defender's move.
  s.overrides.continuation = {
      {"client_b", "a1", "d1", 10},       {"client_b", "a1", "d5", 10},
      {"client_a", "a2", "d1", -10},      {"client_a", "a2", "d5", 50},
      {"client_b", "a3", "d5", -5},       {"server_b", "a4", "d1", 26},
      {"server_b", "a4", "d5", 16},       {"key_asset", "a7", "d5", -100},
      {"key_asset", "a8", "d5", -500},    {"shadow_asset", "a7", "d5", -100},
      {"shadow_asset", "a8", "d5", -100},
  };

  return s;
}

const CaseStudyReference& case_study_reference() {
  static const CaseStudyReference ref = [] {
    CaseStudyReference r;
    r.s0_row_actions = {"a1", "a2", "a3", "a4"};
    r.s0_cols = {"d1", "d5"};
    r.s0_matrix = {{30, 70}, {30, 90}, {25, 25}, {20, 20}};
    r.s0_value = 30;
    r.s0_attacker_uniform = {0.5, 0.5, 0, 0};
    r.s0_defender = {1, 0};
    r.s2_row_actions = {"a7", "a8"};
    r.s2_cols = {"d3", "d5"};
    r.s2_folded = {{400, 400}, {200, 200}};
    r.s2_prefold = {{900, 900}, {-100, -100}, {500, 500}, {-100, -100}};
    r.s2_value = 400;
    return r;
  }();
  return ref;
}

}  // namespace secgame
