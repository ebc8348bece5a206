#include "secgame/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace secgame {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open file '" + path + "'");
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write file '" + path + "'");
  }
  out << content;
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // normalize -0
  if (std::isfinite(value) && std::abs(value) < 1e15 &&
      value == std::round(value)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", value);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& message) {
  throw ParseError(context.empty() ? message : context + ": " + message);
}

void check_fields(const json& obj, const std::string& context,
                  const std::set<std::string>& allowed, bool allow_unknown) {
  if (allow_unknown) return;
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) {
      fail(context, "unknown field '" + key + "'");
    }
  }
}

const json* find_field(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string req_string(const json& obj, const std::string& key,
                       const std::string& context) {
  const json* f = find_field(obj, key);
  if (f == nullptr || !f->is_string()) {
    fail(context, "missing or non-string field '" + key + "'");
  }
  return f->get<std::string>();
}

std::string opt_string(const json& obj, const std::string& key,
                       const std::string& fallback) {
  const json* f = find_field(obj, key);
  return f != nullptr && f->is_string() ? f->get<std::string>() : fallback;
}

double opt_number(const json& obj, const std::string& key, double fallback,
                  const std::string& context) {
  const json* f = find_field(obj, key);
  if (f == nullptr) return fallback;
  if (!f->is_number()) fail(context, "field '" + key + "' must be a number");
  return f->get<double>();
}

bool opt_bool(const json& obj, const std::string& key, bool fallback,
              const std::string& context) {
  const json* f = find_field(obj, key);
  if (f == nullptr) return fallback;
  if (!f->is_boolean()) fail(context, "field '" + key + "' must be a boolean");
  return f->get<bool>();
}

const json& req_array(const json& obj, const std::string& key,
                      const std::string& context) {
  const json* f = find_field(obj, key);
  if (f == nullptr || !f->is_array()) {
    fail(context, "missing or non-array field '" + key + "'");
  }
  return *f;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

NodeStateLevel parse_level(const json& obj, const std::string& key,
                           NodeStateLevel fallback, const std::string& context) {
  const json* f = find_field(obj, key);
  if (f == nullptr) return fallback;
  if (!f->is_string()) fail(context, "field '" + key + "' must be a string");
  auto level = node_state_level_from_string(f->get<std::string>());
  if (!level) {
    fail(context, "unknown node state level '" + f->get<std::string>() + "'");
  }
  return *level;
}

std::vector<std::string> opt_string_array(const json& obj, const std::string& key,
                                          const std::string& context) {
  const json* f = find_field(obj, key);
  if (f == nullptr) return {};
  if (!f->is_array()) fail(context, "field '" + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : *f) {
    if (!v.is_string()) fail(context, "field '" + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const ParseOptions& options) {
  const bool allow_unknown_fields = options.allow_unknown_fields;
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("scenario document must be an object");
  check_fields(doc, "scenario",
               {"format_version", "nodes", "edges", "acl", "attacks",
                "defenses", "node_configs", "deception", "params", "overrides"},
               allow_unknown_fields);

  const json* version = find_field(doc, "format_version");
  if (version == nullptr || !version->is_number_integer() ||
      version->get<int>() != 1) {
    throw ParseError("scenario: format_version must be the integer 1");
  }

  Scenario s;

  for (const auto& n : req_array(doc, "nodes", "scenario")) {
    const std::string ctx = "node '" + opt_string(n, "id", "?") + "'";
    check_fields(n, ctx,
                 {"id", "name", "asset_value", "true_fingerprint",
                  "observed_fingerprint", "is_entrance", "is_shadow"},
                 allow_unknown_fields);
    NetworkNode node;
    node.id = req_string(n, "id", "node");
    node.name = opt_string(n, "name", node.id);
    node.asset_value = opt_number(n, "asset_value", 0.0, ctx);
    node.true_fingerprint = opt_string(n, "true_fingerprint", "");
    node.observed_fingerprint =
        opt_string(n, "observed_fingerprint", node.true_fingerprint);
    node.is_entrance = opt_bool(n, "is_entrance", false, ctx);
    node.is_shadow = opt_bool(n, "is_shadow", false, ctx);
    s.nodes.push_back(std::move(node));
  }

  if (const json* edges = find_field(doc, "edges")) {
    if (!edges->is_array()) throw ParseError("scenario: edges must be an array");
    for (const auto& e : *edges) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() ||
          !e[1].is_string()) {
        throw ParseError("scenario: each edge must be a [from, to] pair");
      }
      s.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }

  if (const json* acl = find_field(doc, "acl")) {
    if (!acl->is_array()) throw ParseError("scenario: acl must be an array");
    for (const auto& r : *acl) {
      const std::string ctx = "acl rule";
      check_fields(r, ctx, {"from", "to", "permit"}, allow_unknown_fields);
      AclRule rule;
      rule.from = req_string(r, "from", ctx);
      rule.to = req_string(r, "to", ctx);
      rule.permit = opt_bool(r, "permit", true, ctx);
      s.acl_rules.push_back(std::move(rule));
    }
  }

  for (const auto& a : req_array(doc, "attacks", "scenario")) {
    const std::string ctx = "attack '" + opt_string(a, "id", "?") + "'";
    check_fields(a, ctx,
                 {"id", "name", "stage", "loss_c", "loss_i", "loss_a",
                  "success_prob", "attack_time", "result_state"},
                 allow_unknown_fields);
    AttackAction attack;
    attack.id = req_string(a, "id", "attack");
    attack.name = opt_string(a, "name", attack.id);
    const std::string stage = opt_string(a, "stage", "intrusion");
    auto parsed_stage = attack_stage_from_string(stage);
    if (!parsed_stage) fail(ctx, "unknown stage '" + stage + "'");
    attack.stage = *parsed_stage;
    attack.loss_c = opt_number(a, "loss_c", 0.0, ctx);
    attack.loss_i = opt_number(a, "loss_i", 0.0, ctx);
    attack.loss_a = opt_number(a, "loss_a", 0.0, ctx);
    attack.success_prob = opt_number(a, "success_prob", 1.0, ctx);
    attack.attack_time = opt_number(a, "attack_time", 1.0, ctx);
    attack.result_state =
        parse_level(a, "result_state", NodeStateLevel::kRemoteAccess, ctx);
    s.attack_catalog.push_back(std::move(attack));
  }

  for (const auto& d : req_array(doc, "defenses", "scenario")) {
    const std::string ctx = "defense '" + opt_string(d, "id", "?") + "'";
    check_fields(d, ctx,
                 {"id", "name", "kind", "recovery", "tracing_alpha",
                  "detection_window", "cost_flat", "mitigates", "traces"},
                 allow_unknown_fields);
    DefenseAction defense;
    defense.id = req_string(d, "id", "defense");
    defense.name = opt_string(d, "name", defense.id);
    const std::string kind = opt_string(d, "kind", "passive");
    auto parsed_kind = defense_kind_from_string(kind);
    if (!parsed_kind) fail(ctx, "unknown kind '" + kind + "'");
    defense.kind = *parsed_kind;
    defense.recovery = opt_number(d, "recovery", 0.0, ctx);
    defense.tracing_alpha = opt_number(d, "tracing_alpha", 0.0, ctx);
    defense.detection_window = opt_number(d, "detection_window", 1.0, ctx);
    defense.cost_flat = opt_number(d, "cost_flat", 0.0, ctx);
    defense.mitigates = opt_string_array(d, "mitigates", ctx);
    defense.traces = opt_string_array(d, "traces", ctx);
    s.defense_catalog.push_back(std::move(defense));
  }

  if (const json* configs = find_field(doc, "node_configs")) {
    if (!configs->is_array()) {
      throw ParseError("scenario: node_configs must be an array");
    }
    for (const auto& c : *configs) {
      const std::string ctx = "node config '" + opt_string(c, "node", "?") + "'";
      check_fields(c, ctx, {"node", "attacks"}, allow_unknown_fields);
      NodeConfig config;
      config.node_id = req_string(c, "node", ctx);
      for (const auto& na : req_array(c, "attacks", ctx)) {
        check_fields(na, ctx, {"attack", "effect", "success_coeff",
                               "paired_defense"},
                     allow_unknown_fields);
        NodeAttack entry;
        entry.attack_id = req_string(na, "attack", ctx);
        entry.effect =
            parse_level(na, "effect", NodeStateLevel::kRemoteAccess, ctx);
        entry.success_coeff = opt_number(na, "success_coeff", 1.0, ctx);
        entry.paired_defense = opt_string(na, "paired_defense", "");
        config.attacks.push_back(std::move(entry));
      }
      s.node_configs.push_back(std::move(config));
    }
  }

  if (const json* deception = find_field(doc, "deception")) {
    check_fields(*deception, "deception", {"counts"}, allow_unknown_fields);
    for (const auto& entry : req_array(*deception, "counts", "deception")) {
      check_fields(entry, "deception count", {"true_fp", "observed_fp", "count"},
                   allow_unknown_fields);
      const std::string true_fp = req_string(entry, "true_fp", "deception");
      const std::string observed = req_string(entry, "observed_fp", "deception");
      const json* count = find_field(entry, "count");
      if (count == nullptr || !count->is_number_integer()) {
        throw ParseError("deception count for ('" + true_fp + "', '" +
                         observed + "') must be an integer");
      }
      s.deception.counts[{true_fp, observed}] = count->get<std::int64_t>();
    }
  }

  if (const json* params = find_field(doc, "params")) {
    check_fields(*params, "params",
                 {"discount", "convergence_delta", "lp_tolerance", "max_sweeps"},
                 allow_unknown_fields);
    s.game_params.discount =
        opt_number(*params, "discount", 1.0, "params");
    s.game_params.convergence_delta =
        opt_number(*params, "convergence_delta", 1e-6, "params");
    s.game_params.lp_tolerance =
        opt_number(*params, "lp_tolerance", 1e-9, "params");
    s.game_params.max_sweeps = static_cast<int>(
        opt_number(*params, "max_sweeps", 10000, "params"));
  }

  if (const json* overrides = find_field(doc, "overrides")) {
    check_fields(*overrides, "overrides", {"continuation", "transition_probs"},
                 allow_unknown_fields);
    if (const json* continuation = find_field(*overrides, "continuation")) {
      for (const auto& o : *continuation) {
        const std::string ctx = "continuation override";
        check_fields(o, ctx, {"node", "attack", "defense", "value"},
                     allow_unknown_fields);
        ContinuationOverride entry;
        entry.node_id = req_string(o, "node", ctx);
        entry.attack_id = req_string(o, "attack", ctx);
        entry.defense_id = req_string(o, "defense", ctx);
        entry.value = opt_number(o, "value", 0.0, ctx);
        s.overrides.continuation.push_back(std::move(entry));
      }
    }
    if (const json* probs = find_field(*overrides, "transition_probs")) {
      for (const auto& o : *probs) {
        const std::string ctx = "transition override";
        check_fields(o, ctx, {"attack", "defense", "prob"}, allow_unknown_fields);
        TransitionProbOverride entry;
        entry.attack_id = req_string(o, "attack", ctx);
        entry.defense_id = opt_string(o, "defense", "");
        entry.prob = opt_number(o, "prob", 1.0, ctx);
        s.overrides.transition_probs.push_back(std::move(entry));
      }
    }
  }

  const auto violations = options.validate ? validate_scenario(s)
                                           : std::vector<Violation>{};
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "scenario failed validation with " << violations.size()
        << " violation(s); first: " << violations.front().where << ": "
        << violations.front().message;
    throw ParseError(msg.str());
  }
  return s;
}

Scenario load_scenario(const std::string& path, const ParseOptions& options) {
  return parse_scenario(read_file(path), options);
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["format_version"] = 1;

  json nodes = json::array();
  for (const auto& n : s.nodes) {
    nodes.push_back({{"id", n.id},
                     {"name", n.name},
                     {"asset_value", n.asset_value},
                     {"true_fingerprint", n.true_fingerprint},
                     {"observed_fingerprint", n.observed_fingerprint},
                     {"is_entrance", n.is_entrance},
                     {"is_shadow", n.is_shadow}});
  }
  doc["nodes"] = std::move(nodes);

  json edges = json::array();
  for (const auto& [from, to] : s.edges) edges.push_back({from, to});
  doc["edges"] = std::move(edges);

  json acl = json::array();
  for (const auto& r : s.acl_rules) {
    acl.push_back({{"from", r.from}, {"to", r.to}, {"permit", r.permit}});
  }
  doc["acl"] = std::move(acl);

  json attacks = json::array();
  for (const auto& a : s.attack_catalog) {
    attacks.push_back({{"id", a.id},
                       {"name", a.name},
                       {"stage", std::string(to_string(a.stage))},
                       {"loss_c", a.loss_c},
                       {"loss_i", a.loss_i},
                       {"loss_a", a.loss_a},
                       {"success_prob", a.success_prob},
                       {"attack_time", a.attack_time},
                       {"result_state", std::string(to_string(a.result_state))}});
  }
  doc["attacks"] = std::move(attacks);

  json defenses = json::array();
  for (const auto& d : s.defense_catalog) {
    defenses.push_back({{"id", d.id},
                        {"name", d.name},
                        {"kind", std::string(to_string(d.kind))},
                        {"recovery", d.recovery},
                        {"tracing_alpha", d.tracing_alpha},
                        {"detection_window", d.detection_window},
                        {"cost_flat", d.cost_flat},
                        {"mitigates", d.mitigates},
                        {"traces", d.traces}});
  }
  doc["defenses"] = std::move(defenses);

  json configs = json::array();
  for (const auto& c : s.node_configs) {
    json attacks_json = json::array();
    for (const auto& na : c.attacks) {
      attacks_json.push_back(
          {{"attack", na.attack_id},
           {"effect", std::string(to_string(na.effect))},
           {"success_coeff", na.success_coeff},
           {"paired_defense", na.paired_defense}});
    }
    configs.push_back({{"node", c.node_id}, {"attacks", std::move(attacks_json)}});
  }
  doc["node_configs"] = std::move(configs);

  json counts = json::array();
  for (const auto& [key, n] : s.deception.counts) {
    counts.push_back(
        {{"true_fp", key.first}, {"observed_fp", key.second}, {"count", n}});
  }
  doc["deception"] = {{"counts", std::move(counts)}};

  doc["params"] = {{"discount", s.game_params.discount},
                   {"convergence_delta", s.game_params.convergence_delta},
                   {"lp_tolerance", s.game_params.lp_tolerance},
                   {"max_sweeps", s.game_params.max_sweeps}};

  json continuation = json::array();
  for (const auto& o : s.overrides.continuation) {
    continuation.push_back({{"node", o.node_id},
                            {"attack", o.attack_id},
                            {"defense", o.defense_id},
                            {"value", o.value}});
  }
  json probs = json::array();
  for (const auto& o : s.overrides.transition_probs) {
    probs.push_back(
        {{"attack", o.attack_id}, {"defense", o.defense_id}, {"prob", o.prob}});
  }
  doc["overrides"] = {{"continuation", std::move(continuation)},
                      {"transition_probs", std::move(probs)}};

  return doc.dump(2) + "\n";
}

StageGameTable stage_game_from_scenario(const Scenario& scenario,
                                        const GameGraph& graph) {
  StageGameTable table;
  table.graph = graph;
  table.params = scenario.game_params;
  for (const auto& state : graph.states) {
    if (state.rows.empty()) continue;
    StageGameTable::StateTable entry;
    for (const auto& row : state.rows) {
      entry.rows.push_back(RowLabel{row.attack_id, row.target_label()});
    }
    entry.cols = state.defender_actions;
    for (const auto& row : state.rows) {
      std::vector<double> immediate_row;
      std::vector<double> fixed_row;
      std::vector<std::vector<CellCoupling>> coupling_row;
      for (const auto& col : entry.cols) {
        CellComponents cell = payoff_cell(scenario, row, col, scenario.game_params);
        immediate_row.push_back(cell.base.immediate);
        fixed_row.push_back(cell.fixed_indirect);
        coupling_row.push_back(std::move(cell.couplings));
      }
      entry.immediate.push_back(std::move(immediate_row));
      entry.fixed_indirect.push_back(std::move(fixed_row));
      entry.couplings.push_back(std::move(coupling_row));
    }
    table.tables[state.id] = std::move(entry);
  }
  return table;
}

std::string serialize_stage_game(const StageGameTable& table) {
  json doc;
  doc["format_version"] = 1;
  doc["initial_state"] = table.graph.initial_state;
  doc["params"] = {{"discount", table.params.discount},
                   {"convergence_delta", table.params.convergence_delta},
                   {"lp_tolerance", table.params.lp_tolerance},
                   {"max_sweeps", table.params.max_sweeps}};

  json states = json::array();
  for (const auto& state : table.graph.states) {
    json entry;
    entry["id"] = state.id;
    entry["terminal"] = state.is_terminal;
    json levels;
    for (const auto& [node, level] : state.node_levels) {
      levels[node] = std::string(to_string(level));
    }
    entry["levels"] = std::move(levels);
    json actions = json::array();
    for (const auto& a : state.attacker_actions) {
      actions.push_back({{"attack", a.attack_id}, {"node", a.node_id}});
    }
    entry["attacker_actions"] = std::move(actions);
    entry["defenders"] = state.defender_actions;

    auto it = table.tables.find(state.id);
    if (it != table.tables.end()) {
      const auto& t = it->second;
      json rows = json::array();
      for (const auto& r : t.rows) {
        rows.push_back({{"attack", r.attack_id}, {"target", r.target}});
      }
      entry["rows"] = std::move(rows);
      entry["cols"] = t.cols;
      json cells = json::array();
      for (std::size_t i = 0; i < t.immediate.size(); ++i) {
        json cell_row = json::array();
        for (std::size_t j = 0; j < t.immediate[i].size(); ++j) {
          json cell;
          cell["immediate"] = t.immediate[i][j];
          if (t.fixed_indirect[i][j] != 0.0) {
            cell["fixed"] = t.fixed_indirect[i][j];
          }
          if (!t.couplings[i][j].empty()) {
            json couple = json::array();
            for (const auto& c : t.couplings[i][j]) {
              couple.push_back({{"to", c.state_id}, {"p", c.prob}});
            }
            cell["couple"] = std::move(couple);
          }
          cell_row.push_back(std::move(cell));
        }
        cells.push_back(std::move(cell_row));
      }
      entry["cells"] = std::move(cells);
    }
    states.push_back(std::move(entry));
  }
  doc["states"] = std::move(states);

  json transitions = json::array();
  for (const auto& [key, targets] : table.graph.transitions) {
    json t;
    t["state"] = std::get<0>(key);
    t["attack"] = std::get<1>(key);
    t["defense"] = std::get<2>(key);
    json target_list = json::array();
    for (const auto& target : targets) {
      target_list.push_back({{"to", target.state_id}, {"p", target.prob}});
    }
    t["targets"] = std::move(target_list);
    transitions.push_back(std::move(t));
  }
  doc["transitions"] = std::move(transitions);

  return doc.dump(2) + "\n";
}

StageGameTable parse_stage_game(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) {
    throw ParseError("stage game document must be an object");
  }
  check_fields(doc, "stage game",
               {"format_version", "initial_state", "params", "states",
                "transitions"},
               false);
  const json* version = find_field(doc, "format_version");
  if (version == nullptr || !version->is_number_integer() ||
      version->get<int>() != 1) {
    throw ParseError("stage game: format_version must be the integer 1");
  }

  StageGameTable table;
  table.graph.initial_state = req_string(doc, "initial_state", "stage game");
  if (const json* params = find_field(doc, "params")) {
    table.params.discount = opt_number(*params, "discount", 1.0, "params");
    table.params.convergence_delta =
        opt_number(*params, "convergence_delta", 1e-6, "params");
    table.params.lp_tolerance =
        opt_number(*params, "lp_tolerance", 1e-9, "params");
    table.params.max_sweeps =
        static_cast<int>(opt_number(*params, "max_sweeps", 10000, "params"));
  }

  for (const auto& entry : req_array(doc, "states", "stage game")) {
    const std::string ctx = "state '" + opt_string(entry, "id", "?") + "'";
    check_fields(entry, ctx,
                 {"id", "terminal", "levels", "attacker_actions", "defenders",
                  "rows", "cols", "cells"},
                 false);
    GameState state;
    state.id = req_string(entry, "id", ctx);
    state.is_terminal = opt_bool(entry, "terminal", false, ctx);
    if (const json* levels = find_field(entry, "levels")) {
      if (!levels->is_object()) fail(ctx, "levels must be an object");
      for (const auto& [node, level] : levels->items()) {
        if (!level.is_string()) {
          fail(ctx, "level for node '" + node + "' must be a string");
        }
        auto parsed = node_state_level_from_string(level.get<std::string>());
        if (!parsed) fail(ctx, "unknown level for node '" + node + "'");
        state.node_levels[node] = *parsed;
      }
    }
    if (const json* actions = find_field(entry, "attacker_actions")) {
      if (!actions->is_array()) fail(ctx, "attacker_actions must be an array");
      for (const auto& a : *actions) {
        state.attacker_actions.push_back(AttackTarget{
            req_string(a, "attack", ctx), req_string(a, "node", ctx)});
      }
    }
    if (const json* defenders = find_field(entry, "defenders")) {
      if (!defenders->is_array()) fail(ctx, "defenders must be an array");
      for (const auto& d : *defenders) {
        if (!d.is_string()) fail(ctx, "defenders must hold strings");
        state.defender_actions.push_back(d.get<std::string>());
      }
    }

    if (const json* rows = find_field(entry, "rows")) {
      if (!rows->is_array()) fail(ctx, "rows must be an array");
      StageGameTable::StateTable t;
      for (const auto& r : *rows) {
        RowLabel label{req_string(r, "attack", ctx),
                       req_string(r, "target", ctx)};
        t.rows.push_back(label);
        RowSpec spec;
        spec.attack_id = label.attack_id;
        spec.target_node = label.target;
        state.rows.push_back(std::move(spec));
      }
      if (const json* cols = find_field(entry, "cols")) {
        if (!cols->is_array()) fail(ctx, "cols must be an array");
        for (const auto& c : *cols) {
          if (!c.is_string()) fail(ctx, "cols must hold strings");
          t.cols.push_back(c.get<std::string>());
        }
      }
      const json& cells = req_array(entry, "cells", ctx);
      if (cells.size() != t.rows.size()) {
        fail(ctx, "cells row count does not match rows");
      }
      for (const auto& cell_row : cells) {
        if (!cell_row.is_array() || cell_row.size() != t.cols.size()) {
          fail(ctx, "cells column count does not match cols");
        }
        std::vector<double> immediate_row;
        std::vector<double> fixed_row;
        std::vector<std::vector<CellCoupling>> coupling_row;
        for (const auto& cell : cell_row) {
          check_fields(cell, ctx, {"immediate", "fixed", "couple"}, false);
          immediate_row.push_back(opt_number(cell, "immediate", 0.0, ctx));
          fixed_row.push_back(opt_number(cell, "fixed", 0.0, ctx));
          std::vector<CellCoupling> couples;
          if (const json* couple = find_field(cell, "couple")) {
            for (const auto& c : *couple) {
              couples.push_back(CellCoupling{req_string(c, "to", ctx),
                                             opt_number(c, "p", 0.0, ctx)});
            }
          }
          coupling_row.push_back(std::move(couples));
        }
        t.immediate.push_back(std::move(immediate_row));
        t.fixed_indirect.push_back(std::move(fixed_row));
        t.couplings.push_back(std::move(coupling_row));
      }
      table.tables[state.id] = std::move(t);
    }
    table.graph.states.push_back(std::move(state));
  }

  if (const json* transitions = find_field(doc, "transitions")) {
    if (!transitions->is_array()) {
      throw ParseError("stage game: transitions must be an array");
    }
    for (const auto& t : *transitions) {
      const std::string ctx = "transition";
      const std::string state = req_string(t, "state", ctx);
      const std::string attack = req_string(t, "attack", ctx);
      const std::string defense = req_string(t, "defense", ctx);
      std::vector<TransitionTarget> targets;
      double mass = 0.0;
      for (const auto& target : req_array(t, "targets", ctx)) {
        TransitionTarget entry{req_string(target, "to", ctx),
                               opt_number(target, "p", 0.0, ctx)};
        if (entry.prob < 0 || entry.prob > 1) {
          fail(ctx, "probability out of [0, 1]");
        }
        mass += entry.prob;
        targets.push_back(std::move(entry));
      }
      if (mass > 1.0 + 1e-9) {
        fail(ctx, "probabilities for (" + state + ", " + attack + ", " +
                      defense + ") sum to more than 1");
      }
      table.graph.transitions[{state, attack, defense}] = std::move(targets);
    }
  }

  // Referential checks: couplings and transitions must point at states.
  for (const auto& [state_id, t] : table.tables) {
    for (const auto& row : t.couplings) {
      for (const auto& cell : row) {
        for (const auto& c : cell) {
          if (table.graph.find_state(c.state_id) == nullptr) {
            throw ParseError("stage game: coupling of state '" + state_id +
                             "' references unknown state '" + c.state_id + "'");
          }
        }
      }
    }
  }
  for (const auto& [key, targets] : table.graph.transitions) {
    for (const auto& t : targets) {
      if (table.graph.find_state(t.state_id) == nullptr) {
        throw ParseError("stage game: transition from '" + std::get<0>(key) +
                         "' references unknown state '" + t.state_id + "'");
      }
    }
  }
  if (table.graph.find_state(table.graph.initial_state) == nullptr) {
    throw ParseError("stage game: unknown initial state '" +
                     table.graph.initial_state + "'");
  }
  return table;
}

StageGameTable load_stage_game(const std::string& path) {
  return parse_stage_game(read_file(path));
}

MatrixSource table_matrix_source(const StageGameTable& table) {
  return [&table](const GameState& state,
                  const std::map<std::string, double>& continuation) {
    auto it = table.tables.find(state.id);
    if (it == table.tables.end()) {
      throw std::invalid_argument("table_matrix_source: no table for state '" +
                                  state.id + "'");
    }
    const auto& t = it->second;
    PayoffMatrix m;
    m.state_id = state.id;
    m.rows = t.rows;
    m.cols = t.cols;
    m.entries.assign(t.rows.size(), std::vector<double>(t.cols.size(), 0.0));
    m.breakdowns.assign(t.rows.size(),
                        std::vector<UtilityBreakdown>(t.cols.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      for (std::size_t j = 0; j < t.cols.size(); ++j) {
        double indirect = t.fixed_indirect[i][j];
        for (const auto& c : t.couplings[i][j]) {
          auto v = continuation.find(c.state_id);
          if (v == continuation.end()) {
            throw std::invalid_argument(
                "table_matrix_source: missing continuation value for state '" +
                c.state_id + "'");
          }
          indirect += c.prob * v->second;
        }
        UtilityBreakdown b;
        b.immediate = t.immediate[i][j];
        b.indirect = indirect;
        b.discount = table.params.discount;
        b.total = b.immediate + table.params.discount * indirect;
        m.entries[i][j] = b.total;
        m.breakdowns[i][j] = b;
      }
    }
    return m;
  };
}

std::string export_graph(const GameGraph& graph,
                         const EquilibriumResult* result) {
  std::ostringstream out;
  out << "digraph game_states {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=ellipse, fontname=\"Helvetica\"];\n";
  for (const auto& state : graph.states) {
    out << "  \"" << state.id << "\" [label=\"" << state.id;
    if (result != nullptr) {
      auto it = result->values.find(state.id);
      if (it != result->values.end()) {
        out << "\\nv=" << format_number(it->second);
      }
    }
    out << "\"";
    if (state.id == graph.initial_state) out << ", shape=box";
    if (state.is_terminal) out << ", style=dashed";
    out << "];\n";
  }
  for (const auto& state : graph.states) {
    for (const auto& [key, targets] : graph.transitions) {
      if (std::get<0>(key) != state.id) continue;
      for (const auto& target : targets) {
        out << "  \"" << state.id << "\" -> \"" << target.state_id
            << "\" [label=\"(" << std::get<1>(key) << "," << std::get<2>(key)
            << ") : " << format_number(target.prob) << "\"];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

std::string export_report(const GameGraph& graph, const MatrixSource& source,
                          const EquilibriumResult& result) {
  if (!result.converged) {
    throw std::invalid_argument("export_report: result did not converge");
  }
  const SecurityRisk risk = security_risk(result, graph);

  json doc;
  doc["format_version"] = 1;
  doc["risk"] = {{"initial_state", risk.initial_state},
                 {"value", risk.value},
                 {"verdict", risk.safe ? "safe" : "unsafe"}};
  doc["solver"] = {{"iterations", result.iterations},
                   {"converged", result.converged},
                   {"residual", result.residual}};

  json states = json::array();
  for (const auto& state : graph.states) {
    json entry;
    entry["id"] = state.id;
    entry["terminal"] = state.is_terminal;
    entry["value"] = result.values.at(state.id);
    if (!state.rows.empty()) {
      PayoffMatrix m = source(state, result.values);
      json rows = json::array();
      for (const auto& r : m.rows) {
        rows.push_back({{"attack", r.attack_id}, {"target", r.target}});
      }
      entry["rows"] = std::move(rows);
      entry["cols"] = m.cols;
      entry["entries"] = m.entries;
      if (m.folded()) {
        json prefold = json::array();
        for (const auto& r : m.prefold_rows) {
          prefold.push_back({{"attack", r.attack_id}, {"target", r.target}});
        }
        entry["prefold_rows"] = std::move(prefold);
        entry["prefold_entries"] = m.prefold_entries;
      }
      auto it = result.strategies.find(state.id);
      if (it != result.strategies.end() && !it->second.attacker.empty()) {
        entry["attacker_strategy"] = it->second.attacker;
        entry["defender_strategy"] = it->second.defender;
      }
    }
    states.push_back(std::move(entry));
  }
  doc["states"] = std::move(states);
  return doc.dump(2) + "\n";
}

namespace {

std::string render_report_body(const json& doc) {
  std::ostringstream out;
  const json& risk = doc.at("risk");
  const std::string verdict = risk.at("verdict").get<std::string>();
  out << "Security risk: " << format_number(risk.at("value").get<double>())
      << " at " << risk.at("initial_state").get<std::string>() << " - "
      << verdict
      << (verdict == "safe" ? " (attacking never profits)"
                            : " (attacker expects positive payoff)")
      << "\n";
  const json& solver = doc.at("solver");
  out << "Solver: "
      << (solver.at("converged").get<bool>() ? "converged"
                                             : "did not converge")
      << " after " << solver.at("iterations").get<int>()
      << " iteration(s), residual "
      << format_number(solver.at("residual").get<double>()) << "\n";
  for (const auto& state : doc.at("states")) {
    out << "\nState " << state.at("id").get<std::string>() << "  value "
        << format_number(state.at("value").get<double>());
    if (state.at("terminal").get<bool>()) out << "  [terminal]";
    out << "\n";
    if (!state.contains("rows")) continue;
    const auto& rows = state.at("rows");
    const auto& cols = state.at("cols");
    const auto& entries = state.at("entries");
    out << "  payoff (attacker rows):\n";
    out << "    row |";
    for (const auto& c : cols) out << " " << c.get<std::string>() << " |";
    out << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << "    " << rows[i].at("attack").get<std::string>() << " ("
          << rows[i].at("target").get<std::string>() << ") |";
      for (const auto& v : entries[i]) {
        out << " " << format_number(v.get<double>()) << " |";
      }
      out << "\n";
    }
    if (state.contains("attacker_strategy")) {
      out << "  attacker:";
      const auto& strat = state.at("attacker_strategy");
      for (std::size_t i = 0; i < strat.size(); ++i) {
        out << " " << rows[i].at("attack").get<std::string>() << ":"
            << format_number(strat[i].get<double>());
      }
      out << "\n  defender:";
      const auto& dstrat = state.at("defender_strategy");
      for (std::size_t j = 0; j < dstrat.size(); ++j) {
        out << " " << cols[j].get<std::string>() << ":"
            << format_number(dstrat[j].get<double>());
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace

std::string render_report_text(const std::string& report_json) {
  const json doc = parse_json(report_json);
  if (!doc.is_object() || !doc.contains("risk") || !doc.contains("states")) {
    throw ParseError("not a report document (risk/states sections missing)");
  }
  try {
    return render_report_body(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report document: ") + e.what());
  }
}

}  // namespace secgame
