// End-to-end checks of the command-line tool via a subprocess. The
// binary path arrives through the SECGAME_CLI_PATH compile definition.

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "secgame/io.hpp"
#include "secgame/model.hpp"

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = std::string(SECGAME_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult result;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) {
    result.output.append(buf, n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

class TempFile {
 public:
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("secgame_cli_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++) + ".json");
    std::ofstream out(path_);
    out << content;
  }
  ~TempFile() { std::filesystem::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

const char* kCyclicStageGame = R"({
  "format_version": 1,
  "initial_state": "A",
  "params": {"discount": 1.0, "convergence_delta": 1e-6},
  "states": [
    {"id": "A", "rows": [{"attack": "act", "target": "t"}], "cols": ["def"],
     "cells": [[{"immediate": 1, "couple": [{"to": "B", "p": 1.0}]}]]},
    {"id": "B", "rows": [{"attack": "act", "target": "t"}], "cols": ["def"],
     "cells": [[{"immediate": 1, "couple": [{"to": "A", "p": 1.0}]}]]}
  ],
  "transitions": [
    {"state": "A", "attack": "act", "defense": "def", "targets": [{"to": "B", "p": 1.0}]},
    {"state": "B", "attack": "act", "defense": "def", "targets": [{"to": "A", "p": 1.0}]}
  ]
})";

}  // namespace

TEST_CASE("case-study prints the reference tables and exits cleanly") {
  const CmdResult r = run_cli("case-study");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("a2 | 30 | 90") != std::string::npos);
  CHECK(r.output.find("a7 | 400 | 400") != std::string::npos);
  CHECK(r.output.find("a8 | 200 | 200") != std::string::npos);
  CHECK(r.output.find("a1:0.5 a2:0.5") != std::string::npos);
  CHECK(r.output.find("Security risk: 30 (unsafe)") != std::string::npos);
}

TEST_CASE("cli output is deterministic across runs") {
  const CmdResult a = run_cli("case-study");
  const CmdResult b = run_cli("case-study");
  CHECK(a.output == b.output);
  CHECK(a.exit_code == b.exit_code);
  const CmdResult sa = run_cli("case-study --format structured");
  const CmdResult sb = run_cli("case-study --format structured");
  CHECK(sa.output == sb.output);
}

TEST_CASE("validate accepts the builtin scenario document") {
  TempFile scenario(secgame::serialize_scenario(secgame::builtin_case_study()));
  const CmdResult r = run_cli("validate " + scenario.path());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("0 violations") != std::string::npos);
}

TEST_CASE("validate reports violations with exit code 1") {
  secgame::Scenario s = secgame::builtin_case_study();
  s.edges.emplace_back("client_a", "X");
  TempFile scenario(secgame::serialize_scenario(s));
  const CmdResult r = run_cli("validate " + scenario.path());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("violation:") != std::string::npos);
  CHECK(r.output.find("X") != std::string::npos);
}

TEST_CASE("parse problems exit with code 2") {
  TempFile garbage("{ not json");
  const CmdResult r = run_cli("solve " + garbage.path());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("error[E_PARSE]") != std::string::npos);

  const CmdResult missing = run_cli("solve /nonexistent/path.json");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("generate emits dot and structured formats") {
  TempFile scenario(secgame::serialize_scenario(secgame::builtin_case_study()));
  const CmdResult dot = run_cli("generate " + scenario.path() + " --format dot");
  CHECK(dot.exit_code == 0);
  CHECK(dot.output.rfind("digraph", 0) == 0);

  const CmdResult structured =
      run_cli("generate " + scenario.path() + " --format structured");
  CHECK(structured.exit_code == 0);
  const auto doc = nlohmann::json::parse(structured.output);
  CHECK(doc.at("format_version").get<int>() == 1);
  CHECK(doc.at("states").size() == 7);
}

TEST_CASE("solve produces a report that the report command renders") {
  TempFile scenario(secgame::serialize_scenario(secgame::builtin_case_study()));
  const CmdResult solved = run_cli("solve " + scenario.path());
  CHECK(solved.exit_code == 0);
  const auto doc = nlohmann::json::parse(solved.output);
  CHECK(doc.at("risk").at("value").get<double>() == 30.0);
  CHECK(doc.at("risk").at("verdict").get<std::string>() == "unsafe");

  TempFile report(solved.output);
  const CmdResult rendered = run_cli("report " + report.path());
  CHECK(rendered.exit_code == 0);
  CHECK(rendered.output.find("Security risk: 30") != std::string::npos);
}

TEST_CASE("solve accepts generated stage games") {
  TempFile scenario(secgame::serialize_scenario(secgame::builtin_case_study()));
  const CmdResult generated =
      run_cli("generate " + scenario.path() + " --format structured");
  REQUIRE(generated.exit_code == 0);
  TempFile stage(generated.output);
  const CmdResult solved = run_cli("solve " + stage.path());
  CHECK(solved.exit_code == 0);
  const auto doc = nlohmann::json::parse(solved.output);
  CHECK(doc.at("risk").at("value").get<double>() == 30.0);
}

TEST_CASE("cyclic games without discounting exit 3 and suggest a fix") {
  TempFile cyclic(kCyclicStageGame);
  const CmdResult r = run_cli("solve " + cyclic.path());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("error[E_SOLVE]") != std::string::npos);
  CHECK(r.output.find("discount < 1") != std::string::npos);

  const CmdResult discounted =
      run_cli("solve " + cyclic.path() + " --discount 0.5");
  CHECK(discounted.exit_code == 0);
  const auto doc = nlohmann::json::parse(discounted.output);
  // v = 1 / (1 - 0.5)
  CHECK(doc.at("risk").at("value").get<double>() ==
        doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("solve honors uniform-support strategy presentation") {
  TempFile scenario(secgame::serialize_scenario(secgame::builtin_case_study()));
  const CmdResult solved = run_cli(
      "solve " + scenario.path() + " --strategy-mode uniform-support");
  CHECK(solved.exit_code == 0);
  const auto doc = nlohmann::json::parse(solved.output);
  for (const auto& state : doc.at("states")) {
    if (state.at("id").get<std::string>() != "S0") continue;
    const auto& strat = state.at("attacker_strategy");
    CHECK(strat[0].get<double>() == doctest::Approx(0.5));
    CHECK(strat[1].get<double>() == doctest::Approx(0.5));
    CHECK(strat[2].get<double>() == 0.0);
    CHECK(strat[3].get<double>() == 0.0);
  }
}

TEST_CASE("case-study emits a valid starter scenario document") {
  const CmdResult r = run_cli("case-study --format scenario");
  CHECK(r.exit_code == 0);
  const secgame::Scenario parsed = secgame::parse_scenario(r.output);
  CHECK(parsed == secgame::builtin_case_study());
}

TEST_CASE("usage errors exit with code 2") {
  const CmdResult unknown = run_cli("frobnicate");
  CHECK(unknown.exit_code == 2);
  const CmdResult noargs = run_cli("");
  CHECK(noargs.exit_code == 2);
}

TEST_CASE("output lands in the requested file") {
  TempFile scenario(secgame::serialize_scenario(secgame::builtin_case_study()));
  const std::string out_path = scenario.path() + ".out";
  const CmdResult r =
      run_cli("generate " + scenario.path() + " --format dot -o " + out_path);
  CHECK(r.exit_code == 0);
  CHECK(r.output.empty());
  const std::string contents = secgame::read_file(out_path);
  CHECK(contents.rfind("digraph", 0) == 0);
  std::filesystem::remove(out_path);
}
