#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "secgame/io.hpp"
#include "secgame/model.hpp"
#include "secgame/solver.hpp"
#include "secgame/state_graph.hpp"
#include "secgame/utility.hpp"

using namespace secgame;

namespace {

AttackAction make_attack(double loss, double time = 1.0) {
  AttackAction a;
  a.id = "atk";
  a.loss_c = loss;
  a.attack_time = time;
  return a;
}

DefenseAction make_defense(double recovery, double alpha, double window,
                           bool counters) {
  DefenseAction d;
  d.id = "def";
  d.kind = DefenseKind::kPassive;
  d.recovery = recovery;
  d.tracing_alpha = alpha;
  d.detection_window = window;
  if (counters) {
    d.mitigates = {"atk"};
    d.traces = {"atk"};
  }
  return d;
}

NetworkNode make_node(double asset) {
  NetworkNode n;
  n.id = "node";
  n.asset_value = asset;
  return n;
}

}  // namespace

TEST_CASE("mitigated loss subtracts recovery and clamps at zero") {
  CHECK(mitigated_loss(60, 40) == 20);
  CHECK(mitigated_loss(100, 0) == 100);
  // oracle: max(0, L - R)
  CHECK(mitigated_loss(30, 50) == std::max(0.0, 30.0 - 50.0));
  CHECK(mitigated_loss(30, 50) == 0);
}

TEST_CASE("tracing cost is alpha * T / t") {
  CHECK(tracing_cost(0, 7, 3) == 0);
  CHECK(tracing_cost(0, 123, 0.5) == 0);
  CHECK(tracing_cost(1, 10, 2) == 5);
  CHECK(tracing_cost(2, 50, 1) == 100);
  CHECK_THROWS_AS(tracing_cost(1, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(tracing_cost(1, 10, -2), std::invalid_argument);
}

TEST_CASE("attack utility reproduces the reference arithmetic") {
  // (60-40)*1-0 = 20
  CHECK(attack_utility(make_attack(60), make_defense(40, 0, 1, true),
                       make_node(1), 1.0) == 20);
  // (80-0)*0.5-0 = 40: the defense does not counter this attack
  CHECK(attack_utility(make_attack(80), make_defense(40, 0, 1, false),
                       make_node(1), 0.5) == 40);
  // 30*1-5 = 25: traced but not mitigated
  {
    DefenseAction d = make_defense(0, 1, 2, false);
    d.traces = {"atk"};
    CHECK(attack_utility(make_attack(30, 10), d, make_node(1), 1.0) == 25);
  }
  // (100-0)*10-100 = 900
  {
    DefenseAction d = make_defense(40, 2, 1, false);
    d.traces = {"atk"};
    CHECK(attack_utility(make_attack(100, 50), d, make_node(10), 1.0) == 900);
  }
  // (100-40)*10-100 = 500
  CHECK(attack_utility(make_attack(100, 50), make_defense(40, 2, 1, true),
                       make_node(10), 1.0) == 500);
  // (100-0)*0-100 = -100, on a zero-value decoy, for both attack kinds
  {
    DefenseAction d = make_defense(0, 2, 1, false);
    d.traces = {"atk"};
    CHECK(attack_utility(make_attack(100, 50), d, make_node(0), 1.0) == -100);
    CHECK(attack_utility(make_attack(100, 50), d, make_node(0), 0.0) == -100);
  }
  // full mitigation, no tracing
  CHECK(attack_utility(make_attack(45), make_defense(45, 0, 1, true),
                       make_node(3), 1.0) == 0);
}

TEST_CASE("noop defense applies neither recovery nor tracing") {
  DefenseAction noop;
  noop.id = "noop";
  noop.kind = DefenseKind::kNoop;
  noop.detection_window = 1;
  // Even with bogus lists the kind wins.
  noop.mitigates = {"atk"};
  noop.traces = {"atk"};
  noop.recovery = 40;
  noop.tracing_alpha = 3;
  CHECK(attack_utility(make_attack(70, 9), noop, make_node(1), 1.0) == 70);
}

TEST_CASE("attack utility is monotone in recovery and tracing strength") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> real(0.0, 100.0);
  for (int i = 0; i < 200; ++i) {
    const AttackAction a = make_attack(real(rng), real(rng) + 0.5);
    const NetworkNode node = make_node(real(rng) / 10.0);
    const double coeff = real(rng) / 100.0;
    const double r1 = real(rng), r2 = r1 + real(rng);
    CHECK(attack_utility(a, make_defense(r2, 0, 1, true), node, coeff) <=
          attack_utility(a, make_defense(r1, 0, 1, true), node, coeff));
    const double alpha1 = real(rng) / 20.0, alpha2 = alpha1 + real(rng) / 20.0;
    CHECK(attack_utility(a, make_defense(0, alpha2, 2, true), node, coeff) <=
          attack_utility(a, make_defense(0, alpha1, 2, true), node, coeff));
  }
}

TEST_CASE("deception expectation matches the reference folds") {
  DeceptionConfig config;
  config.counts[{"key", "shared"}] = 1;
  config.counts[{"shadow", "shared"}] = 1;
  CHECK(deception_expected_payoff({{"key", 900}, {"shadow", -100}}, config,
                                  "shared") == 400);
  CHECK(deception_expected_payoff({{"key", 500}, {"shadow", -100}}, config,
                                  "shared") == 200);
}

TEST_CASE("deception expectation is the identity for a single device") {
  DeceptionConfig config;
  config.counts[{"only", "seen"}] = 1;
  CHECK(deception_expected_payoff({{"only", 123.5}}, config, "seen") == 123.5);
}

TEST_CASE("deception expectation error paths") {
  DeceptionConfig config;
  config.counts[{"key", "shared"}] = 1;
  CHECK_THROWS_AS(deception_expected_payoff({{"key", 1}}, config, "ghost"),
                  std::invalid_argument);
  config.counts[{"shadow", "shared"}] = 2;
  CHECK_THROWS_AS(deception_expected_payoff({{"key", 1}}, config, "shared"),
                  std::invalid_argument);
}

TEST_CASE("deception expectation stays inside the payoff hull") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> payoff(-500.0, 500.0);
  std::uniform_int_distribution<int> count(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    DeceptionConfig config;
    std::vector<std::pair<std::string, double>> payoffs;
    const int n = std::uniform_int_distribution<int>(1, 5)(rng);
    std::int64_t total = 0;
    for (int i = 0; i < n; ++i) {
      const std::string fp = "fp" + std::to_string(i);
      std::int64_t c = count(rng);
      if (i == 0 && c == 0) c = 1;
      config.counts[{fp, "seen"}] = c;
      total += c;
      payoffs.emplace_back(fp, payoff(rng));
    }
    REQUIRE(total > 0);
    double lo = payoffs[0].second, hi = payoffs[0].second;
    for (const auto& [fp, u] : payoffs) {
      if (config.count(fp, "seen") > 0) {
        lo = std::min(lo, u);
        hi = std::max(hi, u);
      }
    }
    const double expected = deception_expected_payoff(payoffs, config, "seen");
    CHECK(expected >= lo - 1e-9);
    CHECK(expected <= hi + 1e-9);
  }
}

TEST_CASE("payoff entries decompose as immediate plus discounted indirect") {
  const Scenario s = builtin_case_study();
  const GameGraph g = generate_states(s);
  const auto source = scenario_matrix_source(s, g);
  const EquilibriumResult result = backward_induct(g, source, s.game_params);
  for (const auto& state : g.states) {
    if (state.rows.empty()) continue;
    const PayoffMatrix m = source(state, result.values);
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
      for (std::size_t j = 0; j < m.entries[i].size(); ++j) {
        const UtilityBreakdown& b = m.breakdowns[i][j];
        CHECK(b.total ==
              doctest::Approx(b.immediate + s.game_params.discount * b.indirect)
                  .epsilon(1e-12));
        CHECK(b.immediate ==
              doctest::Approx((b.loss - b.recovery) * b.asset_coeff -
                              b.tracing_cost)
                  .epsilon(1e-9));
        CHECK(m.entries[i][j] == b.total);
      }
    }
  }
}

TEST_CASE("folded rows equal the deception expectation of their pre-fold rows") {
  const Scenario s = builtin_case_study();
  const GameGraph g = generate_states(s);
  const auto source = scenario_matrix_source(s, g);
  const EquilibriumResult result = backward_induct(g, source, s.game_params);
  for (const auto& state : g.states) {
    if (state.rows.empty()) continue;
    const PayoffMatrix m = source(state, result.values);
    if (!m.folded()) continue;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      for (std::size_t j = 0; j < m.cols.size(); ++j) {
        // collect this row's pre-fold values keyed by true fingerprint
        std::vector<std::pair<std::string, double>> payoffs;
        std::string observed;
        for (std::size_t k = 0; k < m.prefold_rows.size(); ++k) {
          if (m.prefold_rows[k].attack_id != m.rows[i].attack_id) continue;
          const NetworkNode* node = s.find_node(m.prefold_rows[k].target);
          REQUIRE(node != nullptr);
          payoffs.emplace_back(node->true_fingerprint, m.prefold_entries[k][j]);
          observed = node->observed_fingerprint;
        }
        REQUIRE_FALSE(payoffs.empty());
        const double expected =
            deception_expected_payoff(payoffs, s.deception, observed);
        CHECK(m.entries[i][j] == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("payoff matrix of an all-zero game is all zero") {
  Scenario s;
  s.nodes = {{"e", "Entry", 0.0, "fp-e", "fp-e", true, false},
             {"t", "Target", 0.0, "fp-t", "fp-t", false, false}};
  s.edges = {{"e", "t"}};
  s.acl_rules = {{"e", "t", true}};
  AttackAction a;
  a.id = "a0";
  a.attack_time = 1;
  s.attack_catalog = {a};
  DefenseAction noop;
  noop.id = "noop";
  noop.kind = DefenseKind::kNoop;
  noop.detection_window = 1;
  s.defense_catalog = {noop};
  s.node_configs = {{"t", {{"a0", NodeStateLevel::kRemoteAccess, 1.0, ""}}}};

  const GameGraph g = generate_states(s);
  const auto source = scenario_matrix_source(s, g);
  const EquilibriumResult result = backward_induct(g, source, s.game_params);
  const PayoffMatrix m = source(*g.find_state("S0"), result.values);
  for (const auto& row : m.entries) {
    for (double v : row) CHECK(v == 0.0);
  }
}

TEST_CASE("matrix assembly demands continuation values for successors") {
  const Scenario s = builtin_case_study();
  const GameGraph g = generate_states(s);
  // The deception state couples to its two successor states on the d3
  // column, so an empty continuation map must fail there. (The initial
  // state is fully pinned by continuation constants and never consults
  // the map.)
  const GameState* deception_state = nullptr;
  for (const auto& state : g.states) {
    if (state.attack_id_set() == std::set<std::string>{"a7", "a8"}) {
      deception_state = &state;
    }
  }
  REQUIRE(deception_state != nullptr);
  std::map<std::string, double> empty;
  CHECK_THROWS_AS(
      build_payoff_matrix(s, g, *deception_state, empty, s.game_params),
      std::invalid_argument);

  const GameState* s0 = g.find_state("S0");
  REQUIRE(s0 != nullptr);
  CHECK_NOTHROW(build_payoff_matrix(s, g, *s0, empty, s.game_params));
}

TEST_CASE("matrix assembly rejects terminal states") {
  const Scenario s = builtin_case_study();
  const GameGraph g = generate_states(s);
  const GameState* s1 = g.find_state("S1");
  REQUIRE(s1 != nullptr);
  REQUIRE(s1->rows.empty());
  std::map<std::string, double> empty;
  CHECK_THROWS_AS(build_payoff_matrix(s, g, *s1, empty, s.game_params),
                  std::invalid_argument);
}
