#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "secgame/model.hpp"
#include "secgame/solver.hpp"
#include "secgame/state_graph.hpp"
#include "secgame/utility.hpp"

namespace secgame {

// Malformed input: syntax errors, schema violations, unknown fields.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

struct ParseOptions {
  // Reject unknown fields (strict mode) or ignore them.
  bool allow_unknown_fields = false;
  // Run validate_scenario after parsing and fail on violations.
  bool validate = true;
};

// Scenario documents (JSON, format_version 1). Throws ParseError on
// syntax or schema problems, and on validation violations unless
// options.validate is off.
Scenario parse_scenario(const std::string& text,
                        const ParseOptions& options = {});
Scenario load_scenario(const std::string& path,
                       const ParseOptions& options = {});

// Canonical serialization: sorted keys, every field explicit, stable
// array order. parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

// The embedded six-node reference network: two internet-facing clients
// behind a firewall, two servers, a key asset and an indistinguishable
// decoy copy of it.
Scenario builtin_case_study();

// Expected numbers for the embedded scenario, used by the CLI to print
// actual-vs-reference tables.
struct CaseStudyReference {
  std::vector<std::string> s0_row_actions;
  std::vector<std::string> s0_cols;
  std::vector<std::vector<double>> s0_matrix;
  double s0_value = 0.0;
  std::vector<double> s0_attacker_uniform;
  std::vector<double> s0_defender;
  std::vector<std::string> s2_row_actions;
  std::vector<std::string> s2_cols;
  std::vector<std::vector<double>> s2_folded;
  std::vector<std::vector<double>> s2_prefold;
  double s2_value = 0.0;
};
const CaseStudyReference& case_study_reference();

// A state graph together with the value structure of every payoff cell:
// immediate payoff, pinned indirect constant and successor couplings.
// Self-contained -- solving it does not need the originating scenario.
struct StageGameTable {
  struct StateTable {
    std::vector<RowLabel> rows;
    std::vector<std::string> cols;
    std::vector<std::vector<double>> immediate;
    std::vector<std::vector<double>> fixed_indirect;
    std::vector<std::vector<std::vector<CellCoupling>>> couplings;
  };

  GameGraph graph;
  GameParams params;
  std::map<std::string, StateTable> tables;
};

StageGameTable stage_game_from_scenario(const Scenario& scenario,
                                        const GameGraph& graph);
std::string serialize_stage_game(const StageGameTable& table);
StageGameTable parse_stage_game(const std::string& text);
StageGameTable load_stage_game(const std::string& path);

// Matrix source reading from a stage-game table. The table must outlive
// the returned callable.
MatrixSource table_matrix_source(const StageGameTable& table);

// DOT rendering of the state graph: one node per state (annotated with
// its value when a result is given), one edge per transition labeled
// "(attack, defense) : p". Byte-deterministic.
std::string export_graph(const GameGraph& graph,
                         const EquilibriumResult* result = nullptr);

// Machine-readable report (JSON): headline risk and verdict, solver
// diagnostics, per-state values, matrices and strategies. Throws
// std::invalid_argument when the result did not converge.
std::string export_report(const GameGraph& graph, const MatrixSource& source,
                          const EquilibriumResult& result);

// Human-readable rendering of a report document.
std::string render_report_text(const std::string& report_json);

// Shortest representation that still round-trips: integers print bare,
// everything else with up to 12 significant digits.
std::string format_number(double value);

}  // namespace secgame
