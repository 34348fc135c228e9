#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "abdiv/cli.hpp"
#include "abdiv/divergence.hpp"
#include "abdiv/io.hpp"
#include "abdiv/random_models.hpp"
#include "report.hpp"

using namespace abdiv;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("abdiv_cli_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_text_file(path)); }

std::string sachs_path() { return (fs::path(ABDIV_DATA_DIR) / "sachs.json").string(); }

}  // namespace

TEST_CASE("argument handling") {
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({}).code == kExitInvalidInput);
  CHECK(run({"frobnicate"}).code == kExitInvalidInput);
  CHECK(run({"divergence", "a.json", "b.json", "--alpha", "x"}).code == kExitInvalidInput);
  CHECK(run({"divergence", "a.json", "b.json", "--method", "magic"}).code == kExitInvalidInput);
  const Run missing = run({"divergence", "/nonexistent/a.json", "/nonexistent/b.json"});
  CHECK(missing.code == kExitInvalidInput);
  CHECK(missing.err.find("cannot read") != std::string::npos);
}

TEST_CASE("divergence of a model with itself is zero on the grid") {
  TempDir dir("self");
  const Run r = run({"divergence", sachs_path(), sachs_path(), "--grid", "default", "--report", dir.file("r.json")});
  REQUIRE(r.code == kExitOk);
  const auto report = read_json(dir.file("r.json"));
  CHECK(report["command"] == "divergence");
  CHECK(report["version"] == "0.1.0");
  CHECK(report["inputs"].size() == 2);
  CHECK(report["inputs"][0]["fnv1a"] == cli::fnv1a_hex(read_text_file(sachs_path())));
  const auto& rows = report["results"]["rows"];
  CHECK(rows.size() == 36);
  for (const auto& row : rows) CHECK(std::abs(row[3].get<double>()) <= 1e-8);
}

TEST_CASE("cross-check agrees with brute force") {
  TempDir dir("cross");
  SampleStream rng(5);
  for (int t = 0; t < 4; ++t) {
    const auto vars = random_variables(6 + t, 4096, rng);
    const auto pr = random_pair(vars, 3, t % 2 == 1, rng, 0.0, 0.05);
    write_text_file(dir.file("p.json"), dm_to_json(pr.p));
    write_text_file(dir.file("q.json"), dm_to_json(pr.q));
    const Run r = run({"divergence", dir.file("p.json"), dir.file("q.json"), "--grid", "default",
                       "--cross-check", "--csv", dir.file("d.csv"), "--report", dir.file("r.json")});
    REQUIRE(r.code == kExitOk);
    const auto report = read_json(dir.file("r.json"));
    CHECK(report["results"]["columns"][5] == "rel_error");
    for (const auto& row : report["results"]["rows"]) CHECK(row[5].get<double>() <= 1e-8);
    CHECK(read_text_file(dir.file("d.csv")).rfind("alpha,beta,case,value,brute_force,rel_error\n", 0) == 0);
  }
}

TEST_CASE("cross-check reports domains it cannot enumerate") {
  TempDir dir("large");
  SampleStream rng(6);
  const auto vars = make_variables(30, 2);
  const auto g = chain_graph(30);
  write_text_file(dir.file("p.json"), dm_to_json(random_model(vars, g, rng)));
  write_text_file(dir.file("q.json"), dm_to_json(random_model(vars, g, rng)));
  const Run r = run({"divergence", dir.file("p.json"), dir.file("q.json"), "--cross-check"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("cross-check: domain too large") != std::string::npos);
  CHECK(run({"divergence", dir.file("p.json"), dir.file("q.json"), "--method", "brute"}).code == kExitTooLarge);
  CHECK(run({"divergence", dir.file("p.json"), dir.file("q.json"), "--cell-cap", "2"}).code == kExitTooLarge);
}

TEST_CASE("undefined divergences exit with the support code") {
  TempDir dir("support");
  const char* p = R"({"variables": [{"name": "A", "card": 2}],
                      "cliques": [{"vars": ["A"], "table": [1.0, 0.0]}]})";
  const char* q = R"({"variables": [{"name": "A", "card": 2}],
                      "cliques": [{"vars": ["A"], "table": [0.5, 0.5]}]})";
  write_text_file(dir.file("p.json"), p);
  write_text_file(dir.file("q.json"), q);
  const Run r = run({"divergence", dir.file("q.json"), dir.file("p.json"), "--alpha", "1", "--beta", "0"});
  CHECK(r.code == kExitUndefined);
  const Run grid = run({"divergence", dir.file("p.json"), dir.file("q.json"), "--grid", "default"});
  CHECK(grid.code == kExitUndefined);
  CHECK(grid.out.find("undefined") != std::string::npos);
  CHECK(grid.err.find("warning") != std::string::npos);
  CHECK(run({"divergence", dir.file("p.json"), dir.file("q.json")}).code == kExitOk);
}

TEST_CASE("Monte Carlo runs are reproducible") {
  TempDir dir("mc");
  SampleStream rng(8);
  const auto vars = random_variables(8, 6561, rng);
  const auto pr = random_pair(vars, 3, false, rng, 0.0, 0.1);
  write_text_file(dir.file("p.json"), dm_to_json(pr.p));
  write_text_file(dir.file("q.json"), dm_to_json(pr.q));
  auto results = [&](const std::string& name) {
    const Run r = run({"divergence", dir.file("p.json"), dir.file("q.json"), "--method", "mc", "--samples",
                       "100000", "--seed", "7", "--report", dir.file(name)});
    REQUIRE(r.code == kExitOk);
    return read_json(dir.file(name))["results"];
  };
  const auto first = results("a.json");
  CHECK(first == results("b.json"));
  const double exact = alpha_beta_divergence(pr.p, pr.q, {1.0, 0.0});
  const double estimate = first["rows"][0][3];
  const double stderr_ = first["rows"][0][4];
  CHECK(stderr_ > 0.0);
  CHECK(std::abs(estimate - exact) <= 4.0 * stderr_);
}

TEST_CASE("bench") {
  TempDir dir("bench");
  auto bench = [&](const std::string& name) {
    const Run r = run({"bench", "--n", "8,12,24", "--repeats", "1", "--samples", "500", "--seed", "3", "--svg",
                       dir.file("b.svg"), "--report", dir.file(name)});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("jtc time ratio") != std::string::npos);
    return read_json(dir.file(name))["results"]["rows"];
  };
  const auto rows = bench("a.json");
  REQUIRE(rows.size() == 3);
  CHECK(!rows[0][4].is_null());
  CHECK(!rows[1][4].is_null());
  CHECK(rows[2][4].is_null());
  const auto again = bench("b.json");
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i][2] == again[i][2]);
  CHECK(read_text_file(dir.file("b.svg")).rfind("<svg", 0) == 0);
  CHECK(run({"bench", "--family", "random", "--n", "10", "--treewidth", "2", "--repeats", "1", "--samples",
             "200"}).code == kExitOk);
}

TEST_CASE("fit and sample") {
  TempDir dir("fit");
  SampleStream rng(9);
  const auto vars = make_variables(3, 3);
  const auto truth = random_model(vars, chain_graph(3), rng, 0.0, 0.2);
  write_text_file(dir.file("truth.json"), dm_to_json(truth));
  write_text_file(dir.file("structure.json"), R"({"variables": [{"name": "X0", "card": 3}, {"name": "X1", "card": 3},
                                                 {"name": "X2", "card": 3}], "edges": [["X0", "X1"], ["X1", "X2"]]})");
  REQUIRE(run({"sample", dir.file("truth.json"), "-o", dir.file("data.csv"), "--count", "10000", "--seed", "4"}).code ==
          kExitOk);
  const Run fit = run({"fit", dir.file("structure.json"), dir.file("data.csv"), "-o", dir.file("fit.json")});
  REQUIRE(fit.code == kExitOk);
  CHECK(fit.out.find("log_likelihood") != std::string::npos);
  const auto fitted = load_dm(dir.file("fit.json"));
  CHECK(alpha_beta_divergence(truth, fitted, {1.0, 0.0}) < 0.05);

  write_text_file(dir.file("empty.csv"), "");
  CHECK(run({"fit", dir.file("structure.json"), dir.file("empty.csv"), "-o", dir.file("x.json")}).code ==
        kExitInvalidInput);
  write_text_file(dir.file("tiny.csv"), "X0,X1,X2\n0,0,0\n");
  REQUIRE(run({"fit", dir.file("structure.json"), dir.file("tiny.csv"), "-o", dir.file("smooth.json"), "--smoothing",
               "1.0"}).code == kExitOk);
  for (const auto& f : load_dm(dir.file("smooth.json")).clique_marginals()) CHECK((f.values() > 0.0).all());
}

TEST_CASE("case study") {
  TempDir dir("case");
  CHECK(run({"casestudy", "--model", dir.file("missing.json")}).code == kExitInvalidInput);
  const Run r = run({"casestudy", "--model", sachs_path(), "--report", dir.file("r.json")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("(verified at 1e-07)") != std::string::npos);
  const auto report = read_json(dir.file("r.json"));
  const auto& rows = report["results"]["rows"];
  REQUIRE(rows.size() == 36);
  for (const auto& row : rows) {
    CHECK(std::abs(row[6].get<double>()) <= 1e-8);
    CHECK(row[8].get<double>() <= 1e-7);
    const double da = row[2];
    const double db = row[4];
    CHECK(row[9] == (da < db ? "A" : db < da ? "B" : "tie"));
  }
}

TEST_CASE("run report helpers") {
  CHECK(cli::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
  cli::Table t{{"x", "name"}, {{1.5, std::string("a,b")}, {std::monostate{}, std::int64_t{3}}}};
  CHECK(cli::to_csv(t) == "x,name\n1.5,\"a,b\"\n,3\n");
}
