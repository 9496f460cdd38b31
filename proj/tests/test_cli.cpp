#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "unruh/cli.hpp"

using namespace unruh;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using json = nlohmann::json;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "unruh-capacity");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.status = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

/// Runs the installed binary through the shell; stdout only.
Outcome run_binary(const std::string& args) {
  const std::string cmd = std::string(UNRUH_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Outcome o;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

/// Data lines of a CSV output: skips the "# key: value" header and the column row.
std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::vector<std::string>* columns = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) continue;
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      header_seen = true;
      if (columns) *columns = cells;
      continue;
    }
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("fmt prints twelve significant digits and no negative zero", "[cli]") {
  CHECK(cli::fmt(1.0 / 3) == "0.333333333333");
  CHECK(cli::fmt(-0.0) == "0");
  CHECK(cli::fmt(2.0) == "2");
  CHECK(cli::rounded(2.0 / 3) == 0.666666666667);
}

TEST_CASE("spectrum subcommand lists eigenvalues with multiplicities", "[cli]") {
  const Outcome o = run_cli({"spectrum", "--d", "2", "--k", "2"});
  REQUIRE(o.status == 0);
  CHECK_THAT(o.out, ContainsSubstring("# M: 3"));
  std::vector<std::string> cols;
  const auto rows = csv_rows(o.out, &cols);
  CHECK(cols == std::vector<std::string>{"b", "eigenvalue", "multiplicity"});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"1", "0.333333333333", "1"});
  CHECK(rows[1] == std::vector<std::string>{"2", "0.666666666667", "1"});

  const Outcome j = run_cli({"spectrum", "--d", "3", "--k", "4", "--format", "json"});
  REQUIRE(j.status == 0);
  const json doc = json::parse(j.out);
  double mass = 0.0;
  for (const auto& row : doc["rows"]) mass += row["eigenvalue"].get<double>() * row["multiplicity"].get<double>();
  CHECK_THAT(mass, WithinAbs(1.0, 1e-10));
  CHECK(doc["meta"]["d"] == "3");
}

TEST_CASE("cq-curve for the identity channel marks both endpoints on the hull", "[cli]") {
  const Outcome o = run_cli({"cq-curve", "--d", "2", "--k", "1", "--grid", "4"});
  REQUIRE(o.status == 0);
  std::vector<std::string> cols;
  const auto rows = csv_rows(o.out, &cols);
  CHECK(cols == std::vector<std::string>{"mu_1", "rate_x", "rate_y", "on_hull"});
  REQUIRE(rows.size() == 5);
  int on_hull = 0;
  bool classical = false;
  bool quantum = false;
  for (const auto& r : rows) {
    if (r[3] != "1") continue;
    ++on_hull;
    classical |= r[1] == "1" && r[2] == "0";
    quantum |= r[1] == "0" && r[2] == "1";
  }
  // mu = e_1 and mu = e_2 both land on the classical vertex
  CHECK(on_hull == 3);
  CHECK(classical);
  CHECK(quantum);
}

TEST_CASE("ce-curve, cqe-region and rps-region produce well-formed tables", "[cli]") {
  const Outcome ce = run_cli({"ce-curve", "--d", "2", "--z", "0.5", "--grid", "8"});
  REQUIRE(ce.status == 0);
  CHECK_THAT(ce.out, ContainsSubstring("# K: "));
  CHECK(csv_rows(ce.out).size() == 9);

  const Outcome cqe = run_cli({"cqe-region", "--d", "3", "--k", "2", "--grid", "2", "--format", "json"});
  REQUIRE(cqe.status == 0);
  const json doc = json::parse(cqe.out);
  REQUIRE(doc["rows"].size() == 4 * 7);
  CHECK(doc["rows"][0]["kind"] == "apex");
  for (const auto& row : doc["rows"]) {
    const double c = row["C"].get<double>();
    const double q = row["Q"].get<double>();
    const double e = row["E"].get<double>();
    CHECK(c + 2 * q <= row["b1"].get<double>() + 1e-9);
    CHECK(q + e <= row["b2"].get<double>() + 1e-9);
    CHECK(c + q + e <= row["b3"].get<double>() + 1e-9);
  }

  std::vector<std::string> cols;
  const Outcome rps = run_cli({"rps-region", "--d", "3", "--z", "0.25", "--grid", "2"});
  REQUIRE(rps.status == 0);
  const auto rows = csv_rows(rps.out, &cols);
  CHECK(cols == std::vector<std::string>{"nu_1", "nu_2", "rp", "ps", "rps"});
  CHECK(rows.size() == 7);
}

TEST_CASE("dyncap reports value and maximizer as JSON", "[cli]") {
  const Outcome o = run_cli({"dyncap", "--d", "2", "--z", "0", "--grid", "8"});
  REQUIRE(o.status == 0);
  const json doc = json::parse(o.out);
  CHECK_THAT(doc["value"].get<double>(), WithinAbs(2.0, 1e-9));
  CHECK(doc["value"].get<double>() >= doc["grid_value"].get<double>());
  REQUIRE(doc["argmax"].size() == 2);
}

TEST_CASE("verify subcommands pass and exit 0", "[cli]") {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"verify", "hadamard", "--d", "3", "--samples", "10"},
        std::vector<std::string>{"verify", "cloner-equivalence", "--d", "2", "--k", "3", "--samples", "5"},
        std::vector<std::string>{"verify", "ppt", "--d", "2", "--k", "2"}}) {
    const Outcome o = run_cli(args);
    INFO(args[1]);
    CHECK(o.status == 0);
    const json doc = json::parse(o.out);
    CHECK(doc["pass"] == true);
  }
}

TEST_CASE("usage errors exit 2", "[cli]") {
  const std::vector<std::vector<std::string>> bad{
      {"cq-curve", "--d", "2"},
      {"cq-curve", "--d", "2", "--k", "2", "--z", "0.5"},
      {"cq-curve", "--d", "1", "--k", "2"},
      {"cq-curve", "--d", "2", "--z", "1"},
      {"cq-curve", "--d", "2", "--z", "-0.1"},
      {"spectrum", "--d", "2", "--z", "0.5"},
      {"verify", "hadamard", "--d", "2", "--k", "2"},
      {"dyncap", "--d", "2", "--z", "0.5", "--lambda", "-1"},
      {"cq-curve", "--d", "2", "--k", "2", "--format", "xml"},
      {"nonsense"},
      {}};
  for (const auto& args : bad) {
    const Outcome o = run_cli(args);
    INFO((args.empty() ? std::string("<none>") : args[0]) << " " << args.size());
    CHECK(o.status == cli::kUsage);
    CHECK_FALSE(o.err.empty());
    CHECK(o.out.empty());
  }
}

TEST_CASE("numeric guards exit 3 with a JSON diagnostic", "[cli]") {
  const Outcome cap = run_cli({"verify", "hadamard", "--d", "9"});
  CHECK(cap.status == cli::kNumericGuard);
  const json diag = json::parse(cap.err);
  CHECK(diag["error"] == "numeric_guard");
  CHECK(diag["kind"] == "size_cap");

  const Outcome slow = run_cli({"cq-curve", "--d", "2", "--z", "0.99999", "--eps", "1e-15"});
  CHECK(slow.status == cli::kNumericGuard);
  CHECK(json::parse(slow.err)["kind"] == "non_convergence");
  CHECK(slow.out.empty());
}

TEST_CASE("help and version exit 0", "[cli]") {
  CHECK(run_cli({"--help"}).status == 0);
  const Outcome v = run_cli({"--version"});
  CHECK(v.status == 0);
  CHECK_THAT(v.out, ContainsSubstring(cli::kToolVersion));
}

TEST_CASE("--output writes the same bytes as stdout", "[cli]") {
  const auto path = std::filesystem::temp_directory_path() / "unruh_cli_output_test.csv";
  std::filesystem::remove(path);
  const Outcome direct = run_cli({"cq-curve", "--d", "2", "--z", "0.25", "--grid", "6"});
  const Outcome file = run_cli({"cq-curve", "--d", "2", "--z", "0.25", "--grid", "6", "--output", path.string()});
  REQUIRE(file.status == 0);
  CHECK(file.out.empty());
  std::ifstream in(path, std::ios::binary);
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == direct.out);
  std::filesystem::remove(path);
}

TEST_CASE("the binary is deterministic and agrees with the in-process entry", "[cli][binary]") {
  const Outcome a = run_binary("verify cloner-equivalence --d 2 --k 2 --samples 4 --seed 7");
  const Outcome b = run_binary("verify cloner-equivalence --d 2 --k 2 --samples 4 --seed 7");
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == run_cli({"verify", "cloner-equivalence", "--d", "2", "--k", "2", "--samples", "4", "--seed", "7"}).out);

  CHECK(run_binary("cq-curve --d 2").status == cli::kUsage);
  CHECK(run_binary("verify hadamard --d 9").status == cli::kNumericGuard);
}
