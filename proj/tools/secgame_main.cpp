// Command-line front end: validate scenarios, generate state graphs,
// solve for equilibria and render reports.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O or parse error,
// 3 solver non-convergence.

#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "secgame/io.hpp"
#include "secgame/model.hpp"
#include "secgame/solver.hpp"
#include "secgame/state_graph.hpp"
#include "secgame/utility.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;

struct Options {
  std::string scenario_path;
  std::string output_path;
  std::string format;  // text, structured or dot; per-command default
  std::optional<double> discount;
  std::optional<double> delta;
  std::string strategy_mode = "lp-vertex";
  bool lenient = false;
};

void emit(const Options& opt, const std::string& content) {
  if (opt.output_path.empty()) {
    std::cout << content;
  } else {
    secgame::write_file(opt.output_path, content);
  }
}

bool looks_like_stage_game(const std::string& text) {
  auto doc = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  return doc.is_object() && doc.contains("states") && !doc.contains("nodes");
}

void apply_param_overrides(const Options& opt, secgame::GameParams* params) {
  if (opt.discount) params->discount = *opt.discount;
  if (opt.delta) params->convergence_delta = *opt.delta;
}

// Solvable view of the input document: either a scenario (graph is
// generated) or a pre-built stage game.
struct LoadedGame {
  secgame::Scenario scenario;
  bool from_scenario = false;
  secgame::StageGameTable table;
  secgame::GameGraph graph;
  secgame::GameParams params;
};

LoadedGame load_game(const Options& opt, const std::string& text) {
  LoadedGame game;
  if (looks_like_stage_game(text)) {
    game.table = secgame::parse_stage_game(text);
    game.graph = game.table.graph;
    game.params = game.table.params;
    apply_param_overrides(opt, &game.params);
    game.table.params = game.params;
    return game;
  }
  game.from_scenario = true;
  game.scenario =
      secgame::parse_scenario(text, {.allow_unknown_fields = opt.lenient});
  apply_param_overrides(opt, &game.scenario.game_params);
  game.graph = secgame::generate_states(game.scenario);
  game.params = game.scenario.game_params;
  return game;
}

secgame::EquilibriumResult solve_game(const LoadedGame& game,
                                      const secgame::MatrixSource& source) {
  if (game.graph.is_acyclic()) {
    return secgame::backward_induct(game.graph, source, game.params);
  }
  return secgame::shapley_iterate(game.graph, source, game.params);
}

int run_validate(const Options& opt) {
  const secgame::Scenario scenario = secgame::parse_scenario(
      secgame::read_file(opt.scenario_path),
      {.allow_unknown_fields = opt.lenient, .validate = false});
  const auto violations = secgame::validate_scenario(scenario);
  for (const auto& v : violations) {
    std::cout << "violation: " << v.where << ": " << v.message << "\n";
  }
  std::cout << violations.size()
            << (violations.size() == 1 ? " violation\n" : " violations\n");
  return violations.empty() ? kExitOk : kExitValidation;
}

int run_generate(const Options& opt) {
  const secgame::Scenario scenario = secgame::load_scenario(
      opt.scenario_path, {.allow_unknown_fields = opt.lenient});
  const secgame::GameGraph graph = secgame::generate_states(scenario);
  if (opt.format == "dot") {
    emit(opt, secgame::export_graph(graph));
  } else {
    emit(opt, secgame::serialize_stage_game(
                  secgame::stage_game_from_scenario(scenario, graph)));
  }
  return kExitOk;
}

int run_solve(const Options& opt) {
  const LoadedGame game = load_game(opt, secgame::read_file(opt.scenario_path));
  const secgame::MatrixSource source =
      game.from_scenario
          ? secgame::scenario_matrix_source(game.scenario, game.graph)
          : secgame::table_matrix_source(game.table);

  secgame::EquilibriumResult result = solve_game(game, source);
  if (opt.strategy_mode == "uniform-support") {
    result = secgame::with_uniform_support(game.graph, source, result);
  }

  if (opt.format == "dot") {
    emit(opt, secgame::export_graph(game.graph, &result));
  } else {
    const std::string report =
        secgame::export_report(game.graph, source, result);
    emit(opt, opt.format == "text" ? secgame::render_report_text(report)
                                   : report);
  }
  return kExitOk;
}

int run_report(const Options& opt) {
  emit(opt,
       secgame::render_report_text(secgame::read_file(opt.scenario_path)));
  return kExitOk;
}

std::string strategy_line(const std::vector<secgame::RowLabel>& labels,
                          const std::vector<double>& probs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (i > 0) out << " ";
    out << labels[i].attack_id << ":" << secgame::format_number(probs[i]);
  }
  return out.str();
}

std::string defender_line(const std::vector<std::string>& labels,
                          const std::vector<double>& probs) {
  std::ostringstream out;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (j > 0) out << " ";
    out << labels[j] << ":" << secgame::format_number(probs[j]);
  }
  return out.str();
}

void print_matrix_block(std::ostringstream& out, const secgame::PayoffMatrix& m,
                        const std::vector<std::vector<double>>* reference) {
  out << "  row |";
  for (const auto& c : m.cols) out << " " << c << " |";
  out << "\n";
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    out << "  " << m.rows[i].attack_id;
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
      out << " | " << secgame::format_number(m.entries[i][j]);
    }
    if (reference != nullptr) {
      out << "   (reference:";
      for (double v : (*reference)[i]) out << " " << secgame::format_number(v);
      out << ")";
    }
    out << "\n";
  }
}

const secgame::GameState* find_state_by_actions(
    const secgame::GameGraph& graph, const std::set<std::string>& attack_ids) {
  for (const auto& state : graph.states) {
    if (state.attack_id_set() == attack_ids) return &state;
  }
  return nullptr;
}

int run_case_study(const Options& opt) {
  const secgame::Scenario scenario = secgame::builtin_case_study();
  const secgame::GameGraph graph = secgame::generate_states(scenario);
  const secgame::MatrixSource source =
      secgame::scenario_matrix_source(scenario, graph);
  secgame::EquilibriumResult result =
      secgame::backward_induct(graph, source, scenario.game_params);
  const secgame::EquilibriumResult uniform =
      secgame::with_uniform_support(graph, source, result);
  const secgame::CaseStudyReference& ref = secgame::case_study_reference();

  if (opt.format == "scenario") {
    emit(opt, secgame::serialize_scenario(scenario));
    return kExitOk;
  }
  if (opt.format == "structured") {
    emit(opt, secgame::export_report(
                  graph, source,
                  opt.strategy_mode == "uniform-support" ? uniform : result));
    return kExitOk;
  }
  if (opt.format == "dot") {
    emit(opt, secgame::export_graph(graph, &result));
    return kExitOk;
  }

  std::ostringstream out;
  out << "Embedded case study: " << scenario.nodes.size() << " nodes, "
      << scenario.attack_catalog.size() << " attack actions, "
      << scenario.defense_catalog.size() << " defense actions, "
      << graph.states.size() << " game states\n";

  const secgame::GameState* s0 = graph.find_state(graph.initial_state);
  const secgame::PayoffMatrix m0 = source(*s0, result.values);
  out << "\nInitial state " << s0->id << " payoff matrix:\n";
  print_matrix_block(out, m0, &ref.s0_matrix);
  out << "  value: " << secgame::format_number(result.values.at(s0->id))
      << "   (reference: " << secgame::format_number(ref.s0_value) << ")\n";
  const auto& u0 = uniform.strategies.at(s0->id);
  out << "  attacker (uniform-support): "
      << strategy_line(u0.row_labels, u0.attacker) << "   (reference:";
  for (double v : ref.s0_attacker_uniform)
    out << " " << secgame::format_number(v);
  out << ")\n";
  out << "  defender: " << defender_line(u0.col_labels, u0.defender)
      << "   (reference: pure d1)\n";

  const secgame::GameState* s2 =
      find_state_by_actions(graph, {"a7", "a8"});
  if (s2 != nullptr) {
    const secgame::PayoffMatrix m2 = source(*s2, result.values);
    out << "\nDeception state " << s2->id << " payoff matrix (folded):\n";
    print_matrix_block(out, m2, &ref.s2_folded);
    out << "  pre-fold rows:\n";
    for (std::size_t i = 0; i < m2.prefold_rows.size(); ++i) {
      out << "  " << m2.prefold_rows[i].attack_id << "@"
          << m2.prefold_rows[i].target;
      for (double v : m2.prefold_entries[i]) {
        out << " | " << secgame::format_number(v);
      }
      out << "\n";
    }
    out << "  value: " << secgame::format_number(result.values.at(s2->id))
        << "   (reference: " << secgame::format_number(ref.s2_value) << ")\n";
  }

  const secgame::SecurityRisk risk = secgame::security_risk(result, graph);
  out << "\nSecurity risk: " << secgame::format_number(risk.value) << " ("
      << (risk.safe ? "safe" : "unsafe") << ")\n";
  emit(opt, out.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secgame - attack-defense stochastic game analyzer"};
  app.require_subcommand(1);

  Options opt;
  std::function<int(const Options&)> action;

  auto add_common = [&](CLI::App* cmd, bool needs_path,
                        std::vector<std::string> formats) {
    if (needs_path) {
      cmd->add_option("path", opt.scenario_path, "input document")->required();
    }
    cmd->add_option("-o,--output", opt.output_path,
                    "write output to this file instead of stdout");
    if (!formats.empty()) {
      cmd->add_option("--format", opt.format, "output format")
          ->check(CLI::IsMember(formats));
    }
    cmd->add_flag("--lenient", opt.lenient,
                  "ignore unknown fields in input documents");
  };

  CLI::App* validate = app.add_subcommand(
      "validate", "check a scenario document and report violations");
  add_common(validate, true, {});

  CLI::App* generate = app.add_subcommand(
      "generate", "generate the game-state graph from a scenario");
  add_common(generate, true, {"structured", "dot"});

  CLI::App* solve = app.add_subcommand(
      "solve", "solve a scenario or stage-game document for equilibria");
  add_common(solve, true, {"text", "structured", "dot"});
  solve->add_option("--discount", opt.discount,
                    "override the discount factor (0, 1]");
  solve->add_option("--delta", opt.delta,
                    "override the convergence threshold");
  solve->add_option("--strategy-mode", opt.strategy_mode,
                    "strategy presentation: lp-vertex or uniform-support")
      ->check(CLI::IsMember({"lp-vertex", "uniform-support"}));

  CLI::App* report = app.add_subcommand(
      "report", "render a saved structured report as text");
  add_common(report, true, {});

  CLI::App* case_study = app.add_subcommand(
      "case-study", "run the embedded reference scenario end to end");
  add_common(case_study, false, {"text", "structured", "dot", "scenario"});
  case_study->add_option("--strategy-mode", opt.strategy_mode,
                         "strategy presentation: lp-vertex or uniform-support")
      ->check(CLI::IsMember({"lp-vertex", "uniform-support"}));

  validate->callback([&] { action = run_validate; });
  generate->callback([&] {
    if (opt.format.empty()) opt.format = "structured";
    action = run_generate;
  });
  solve->callback([&] {
    if (opt.format.empty()) opt.format = "structured";
    action = run_solve;
  });
  report->callback([&] { action = run_report; });
  case_study->callback([&] {
    if (opt.format.empty()) opt.format = "text";
    action = run_case_study;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    return action(opt);
  } catch (const secgame::ParseError& e) {
    std::cerr << "error[E_PARSE]: " << e.what() << "\n";
    return kExitParse;
  } catch (const secgame::SolveError& e) {
    std::cerr << "error[E_SOLVE]: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error[E_INPUT]: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error[E_IO]: " << e.what() << "\n";
    return kExitParse;
  }
}
