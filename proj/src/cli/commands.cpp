#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "abdiv/baselines.hpp"
#include "abdiv/cli.hpp"
#include "abdiv/divergence.hpp"
#include "abdiv/error.hpp"
#include "abdiv/io.hpp"
#include "abdiv/random_models.hpp"
#include "report.hpp"
#include "svg.hpp"

namespace abdiv {

namespace {

using cli::Cell;
using cli::RunReport;
using cli::Table;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Runs `fn` and records its wall time under `name`.
template <typename Fn>
auto timed(RunReport& report, const std::string& name, Fn&& fn) {
  const auto start = Clock::now();
  if constexpr (std::is_void_v<decltype(fn())>) {
    fn();
    report.phase_seconds.emplace_back(name, seconds_since(start));
  } else {
    auto result = fn();
    report.phase_seconds.emplace_back(name, seconds_since(start));
    return result;
  }
}

int exit_code_for(ErrorKind kind) {
  if (is_support_error(kind)) return kExitUndefined;
  if (kind == ErrorKind::kTableTooLarge || kind == ErrorKind::kDomainTooLarge) return kExitTooLarge;
  return kExitInvalidInput;
}

const char* case_name(DivergenceCase c) {
  switch (c) {
    case DivergenceCase::kGeneral: return "general";
    case DivergenceCase::kAlphaZero: return "alpha=0";
    case DivergenceCase::kBetaZero: return "beta=0";
    case DivergenceCase::kOpposite: return "alpha=-beta";
    case DivergenceCase::kBothZero: return "alpha=beta=0";
  }
  return "";
}

/// |a - b| / |b|, or |a - b| when |b| < 1e-6.
double comparison_error(double value, double reference) {
  const double gap = std::abs(value - reference);
  return std::abs(reference) < 1e-6 ? gap : gap / std::abs(reference);
}

bool has_zero_cell(const DecomposableModel& m) {
  return std::any_of(m.clique_marginals().begin(), m.clique_marginals().end(),
                     [](const Factor& f) { return (f.values() == 0.0).any(); });
}

std::string domain_too_large_note(const DecomposableModel& m) {
  std::ostringstream s;
  s << "cross-check: domain too large (" << m.vars().domain_size() << " joint states exceed the "
    << "brute-force cap of " << kDefaultBruteForceCap << ")";
  return s.str();
}

DecomposableModel load_model_text(RunReport& report, const std::string& path) {
  return parse_model_json(report.read_input(path));
}

/// Options shared by every command.
struct CommonOptions {
  std::uint64_t seed = 1;
  std::string csv;
  std::string svg;
  std::string report;
  std::size_t cell_cap = 0;
};

void add_common(CLI::App& app, CommonOptions& o, bool with_svg) {
  app.add_option("--seed", o.seed, "Random seed (every command is reproducible for a fixed seed)");
  app.add_option("--csv", o.csv, "Write the results table as CSV");
  if (with_svg) app.add_option("--svg", o.svg, "Write a log-log plot as SVG");
  app.add_option("--report", o.report, "Write a JSON run report");
  app.add_option("--cell-cap", o.cell_cap, "Largest factor table, in cells (default 2^26)")
      ->check(CLI::PositiveNumber);
}

void write_outputs(const CommonOptions& o, const RunReport& report, std::ostream& out) {
  if (!o.csv.empty()) {
    write_text_file(o.csv, cli::to_csv(report.results));
    out << "wrote " << o.csv << '\n';
  }
  if (!o.report.empty()) {
    write_text_file(o.report, cli::to_json(report).dump(2) + "\n");
    out << "wrote " << o.report << '\n';
  }
}

// ---------------------------------------------------------------------------
// divergence

struct DivergenceOptions {
  std::string p_path;
  std::string q_path;
  double alpha = 1.0;
  double beta = 0.0;
  std::string grid;
  std::string method = "jtc";
  std::size_t samples = 100000;
  bool cross_check = false;
  bool bootstrap = false;
};

int cmd_divergence(const DivergenceOptions& o, const CommonOptions& common, std::ostream& out,
                   std::ostream& err) {
  RunReport report;
  report.command = "divergence";
  report.parameters = {{"alpha", o.alpha}, {"beta", o.beta},     {"grid", o.grid},
                       {"method", o.method}, {"samples", o.samples}, {"seed", common.seed},
                       {"cross_check", o.cross_check}, {"bootstrap", o.bootstrap}};
  const auto [p, q] = timed(report, "load", [&] {
    return std::pair{load_model_text(report, o.p_path), load_model_text(report, o.q_path)};
  });
  const std::vector<AlphaBeta> points =
      o.grid.empty() ? std::vector<AlphaBeta>{{o.alpha, o.beta}} : default_grid();
  for (const auto& ab : points) classify(ab);

  if ((has_zero_cell(p) || has_zero_cell(q)) &&
      std::any_of(points.begin(), points.end(), [](AlphaBeta ab) { return ab.alpha < 0 || ab.beta < 0; })) {
    err << "warning: a model has zero cells and a negative exponent is requested; "
           "the divergence may be undefined\n";
  }

  const bool mc = o.method == "mc";
  report.results.columns = {"alpha", "beta", "case", "value"};
  if (mc) report.results.columns.push_back("stderr");

  // Reference values: brute force for jtc/mc, the exact engine for brute.
  std::optional<Eigen::ArrayXd> pj, qj;
  const bool brute_feasible = p.vars().domain_size() <= kDefaultBruteForceCap;
  if (o.method == "brute" && !brute_feasible) {
    throw Error(ErrorKind::kDomainTooLarge, domain_too_large_note(p).substr(13));
  }
  if (o.method == "brute" || (o.cross_check && brute_feasible)) {
    timed(report, "enumerate", [&] {
      pj = joint_table(p);
      qj = joint_table(q);
    });
  }
  const bool show_reference = o.cross_check && (o.method == "brute" || brute_feasible);
  if (o.cross_check && !show_reference) report.notes.push_back(domain_too_large_note(p));
  if (show_reference) {
    report.results.columns.push_back(o.method == "brute" ? "jtc" : "brute_force");
    report.results.columns.push_back("rel_error");
  }

  int exit_code = kExitOk;
  const auto start = Clock::now();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const AlphaBeta ab = points[k];
    std::vector<Cell> row{ab.alpha, ab.beta, std::string(case_name(classify(ab)))};
    try {
      double value = 0.0;
      if (o.method == "jtc") {
        value = alpha_beta_divergence(p, q, ab);
        row.emplace_back(value);
      } else if (o.method == "brute") {
        value = brute_force_divergence(*pj, *qj, ab);
        row.emplace_back(value);
      } else {
        McOptions options;
        options.bootstrap = o.bootstrap;
        const auto est = mc_alpha_beta(p, q, ab, o.samples, common.seed + k, options);
        value = est.estimate;
        row.emplace_back(est.estimate);
        row.emplace_back(est.stderr_);
      }
      if (show_reference) {
        const double ref = o.method == "brute" ? alpha_beta_divergence(p, q, ab)
                                               : brute_force_divergence(*pj, *qj, ab);
        row.emplace_back(ref);
        row.emplace_back(comparison_error(value, ref));
      }
    } catch (const Error& e) {
      if (points.size() == 1 || exit_code_for(e.kind()) != kExitUndefined) throw;
      // One undefined point in a grid: report it and keep going.
      row.emplace_back(std::string("undefined: ") + to_string(e.kind()));
      exit_code = kExitUndefined;
    }
    row.resize(report.results.columns.size());
    report.results.rows.push_back(std::move(row));
  }
  report.phase_seconds.emplace_back("compute", seconds_since(start));

  cli::print_table(report.results, out);
  for (const auto& note : report.notes) out << note << '\n';
  write_outputs(common, report, out);
  return exit_code;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  std::string family = "chain";
  std::vector<int> sizes{25, 50, 100, 200};
  int treewidth = 2;
  int repeats = 3;
  std::size_t samples = 10000;
  double alpha = 1.0;
  double beta = 0.0;
};

template <typename Fn>
double median_seconds(int repeats, Fn&& fn) {
  std::vector<double> times;
  for (int r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    fn();
    times.push_back(seconds_since(start));
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

int cmd_bench(const BenchOptions& o, const CommonOptions& common, std::ostream& out) {
  RunReport report;
  report.command = "bench";
  report.parameters = {{"family", o.family}, {"n", o.sizes},         {"treewidth", o.treewidth},
                       {"repeats", o.repeats}, {"samples", o.samples}, {"alpha", o.alpha},
                       {"beta", o.beta},     {"seed", common.seed}};
  report.results.columns = {"n",         "log10_states", "value",      "jtc_seconds",
                            "brute_seconds", "mc_seconds", "mc_estimate", "mc_stderr"};
  const AlphaBeta ab{o.alpha, o.beta};
  classify(ab);
  cli::Series jtc{"JTC", {}, {}};
  cli::Series brute{"brute force", {}, {}};
  cli::Series mc{"Monte Carlo", {}, {}};
  const auto start = Clock::now();
  for (int n : o.sizes) {
    // Each size draws its models from its own derived seed.
    SampleStream rng(splitmix64(common.seed ^ static_cast<std::uint64_t>(n)));
    const VariableTable vars = make_variables(n, 2);
    ModelPair pair;
    if (o.family == "chain") {
      const auto g = chain_graph(n);
      pair.p = random_model(vars, g, rng);
      pair.q = random_model(vars, g, rng);
    } else {
      pair = random_pair(vars, o.treewidth + 1, false, rng);
    }
    double value = 0.0;
    const double t_jtc = median_seconds(o.repeats, [&] { value = alpha_beta_divergence(pair.p, pair.q, ab); });
    std::vector<Cell> row{static_cast<std::int64_t>(n), vars.log_domain_size() / std::log(10.0), value,
                          t_jtc};
    jtc.x.push_back(n);
    jtc.y.push_back(t_jtc);
    if (vars.domain_size() <= kDefaultBruteForceCap) {
      const double t = median_seconds(o.repeats, [&] { brute_force_divergence(pair.p, pair.q, ab); });
      row.emplace_back(t);
      brute.x.push_back(n);
      brute.y.push_back(t);
    } else {
      row.emplace_back();
    }
    McEstimate est;
    const double t_mc =
        median_seconds(o.repeats, [&] { est = mc_alpha_beta(pair.p, pair.q, ab, o.samples, common.seed); });
    row.emplace_back(t_mc);
    row.emplace_back(est.estimate);
    row.emplace_back(est.stderr_);
    mc.x.push_back(n);
    mc.y.push_back(t_mc);
    report.results.rows.push_back(std::move(row));
  }
  report.phase_seconds.emplace_back("bench", seconds_since(start));
  for (std::size_t i = 1; i < jtc.x.size(); ++i) {
    std::ostringstream s;
    s << "jtc time ratio n=" << jtc.x[i] << " / n=" << jtc.x[i - 1] << ": " << jtc.y[i] / jtc.y[i - 1];
    report.notes.push_back(s.str());
  }
  cli::print_table(report.results, out);
  for (const auto& note : report.notes) out << note << '\n';
  if (!common.svg.empty()) {
    std::vector<cli::Series> series{jtc, mc};
    if (!brute.x.empty()) series.push_back(brute);
    write_text_file(common.svg, cli::log_log_svg("D_AB(" + std::to_string(o.alpha) + ", " +
                                                     std::to_string(o.beta) + ") runtime, " + o.family,
                                                 "variables n", "seconds", series));
    out << "wrote " << common.svg << '\n';
  }
  write_outputs(common, report, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// casestudy

struct CaseStudyOptions {
  std::string model_path = "data/sachs.json";
  double tolerance = 1e-7;
};

BayesianNetwork delete_named_edges(const BayesianNetwork& bn,
                                   const std::vector<std::pair<std::string, std::string>>& edges) {
  BayesianNetwork out = bn;
  for (const auto& [from, to] : edges) out = delete_edge(out, bn.vars().id_of(from), bn.vars().id_of(to));
  return out;
}

int cmd_casestudy(const CaseStudyOptions& o, const CommonOptions& common, std::ostream& out) {
  RunReport report;
  report.command = "casestudy";
  report.parameters = {{"model", o.model_path}, {"tolerance", o.tolerance}, {"seed", common.seed}};
  if (!std::filesystem::exists(o.model_path)) {
    throw Error(ErrorKind::kParseError, "sachs network not found at '" + o.model_path +
                                            "'; pass --model with the path to sachs.json");
  }
  const std::vector<std::pair<std::string, std::string>> edges_a{
      {"PKA", "Raf"}, {"PKC", "PKA"}, {"Plcg", "PIP3"}};
  const std::vector<std::pair<std::string, std::string>> edges_b{
      {"PKC", "Raf"}, {"PKC", "Mek"}, {"PKA", "Mek"}};
  report.parameters["candidate_a_deleted"] = edges_a;
  report.parameters["candidate_b_deleted"] = edges_b;

  const BayesianNetwork bn = timed(report, "load", [&] { return parse_bn_json(report.read_input(o.model_path)); });
  const auto [truth, cand_a, cand_b] = timed(report, "build", [&] {
    return std::tuple{bn_to_dm(bn), bn_to_dm(delete_named_edges(bn, edges_a)),
                      bn_to_dm(delete_named_edges(bn, edges_b))};
  });
  const auto [jt, ja, jb] = timed(report, "enumerate", [&] {
    return std::tuple{joint_table(truth), joint_table(cand_a), joint_table(cand_b)};
  });

  report.results.columns = {"alpha", "beta",     "D(sachs||A)", "brute_A",     "D(sachs||B)",
                            "brute_B", "D(sachs||sachs)", "brute_self", "max_rel_error", "closer"};
  double worst = 0.0;
  double t_exact = 0.0;
  double t_brute = 0.0;
  for (const auto& ab : default_grid()) {
    auto start = Clock::now();
    const double da = alpha_beta_divergence(truth, cand_a, ab);
    const double db = alpha_beta_divergence(truth, cand_b, ab);
    const double ds = alpha_beta_divergence(truth, truth, ab);
    t_exact += seconds_since(start);
    start = Clock::now();
    const double ba = brute_force_divergence(jt, ja, ab);
    const double bb = brute_force_divergence(jt, jb, ab);
    const double bs = brute_force_divergence(jt, jt, ab);
    t_brute += seconds_since(start);
    const double rel = std::max({comparison_error(da, ba), comparison_error(db, bb), comparison_error(ds, bs)});
    worst = std::max(worst, rel);
    const std::string closer = da < db ? "A" : db < da ? "B" : "tie";
    report.results.rows.push_back({ab.alpha, ab.beta, da, ba, db, bb, ds, bs, rel, closer});
  }
  report.phase_seconds.emplace_back("exact", t_exact);
  report.phase_seconds.emplace_back("brute_force", t_brute);

  std::ostringstream s;
  s << "candidate A deletes PKA->Raf, PKC->PKA, Plcg->PIP3; candidate B deletes PKC->Raf, PKC->Mek, PKA->Mek";
  report.notes.push_back(s.str());
  s.str("");
  s << "largest deviation from brute force: " << worst << (worst <= o.tolerance ? " (verified" : " (NOT verified")
    << " at " << o.tolerance << ")";
  report.notes.push_back(s.str());
  cli::print_table(report.results, out);
  for (const auto& note : report.notes) out << note << '\n';
  write_outputs(common, report, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit and sample

struct FitOptions {
  std::string structure_path;
  std::string data_path;
  std::string output;
  double smoothing = 0.0;
};

int cmd_fit(const FitOptions& o, const CommonOptions& common, std::ostream& out) {
  RunReport report;
  report.command = "fit";
  report.parameters = {{"smoothing", o.smoothing}, {"output", o.output}, {"seed", common.seed}};
  const Structure s = timed(report, "load", [&] { return parse_structure_json(report.read_input(o.structure_path)); });
  const DataMatrix data = timed(report, "parse_data", [&] { return parse_csv(report.read_input(o.data_path), s.vars); });
  const DecomposableModel m = timed(report, "fit", [&] { return mle_fit(s.vars, s.graph, data, o.smoothing); });
  write_text_file(o.output, dm_to_json(m));
  const double ll = log_likelihood(m, data);
  report.results.columns = {"rows", "cliques", "log_likelihood"};
  report.results.rows.push_back({static_cast<std::int64_t>(data.rows()), static_cast<std::int64_t>(m.num_cliques()), ll});
  cli::print_table(report.results, out);
  out << "wrote " << o.output << '\n';
  write_outputs(common, report, out);
  return kExitOk;
}

struct SampleOptions {
  std::string model_path;
  std::string output;
  std::size_t count = 1000;
};

int cmd_sample(const SampleOptions& o, const CommonOptions& common, std::ostream& out) {
  RunReport report;
  report.command = "sample";
  report.parameters = {{"count", o.count}, {"output", o.output}, {"seed", common.seed}};
  const DecomposableModel m = load_model_text(report, o.model_path);
  const SampleBatch batch = timed(report, "sample", [&] { return forward_sample(m, o.count, common.seed); });
  write_text_file(o.output, data_to_csv(batch.rows, m.vars()));
  report.results.columns = {"rows", "log_likelihood"};
  report.results.rows.push_back({static_cast<std::int64_t>(batch.count()), log_likelihood(m, batch.rows)});
  cli::print_table(report.results, out);
  out << "wrote " << o.output << '\n';
  write_outputs(common, report, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact alpha-beta divergences between decomposable models", "abdiv"};
  app.set_version_flag("--version", std::string(ABDIV_VERSION));
  app.require_subcommand(1);

  CommonOptions common;

  DivergenceOptions div;
  auto* divergence = app.add_subcommand("divergence", "D_AB(P || Q) for two model files");
  divergence->add_option("p", div.p_path, "Model P (decomposable-model or Bayesian-network JSON)")->required();
  divergence->add_option("q", div.q_path, "Model Q")->required();
  divergence->add_option("--alpha", div.alpha, "alpha (default 1)");
  divergence->add_option("--beta", div.beta, "beta (default 0)");
  divergence->add_option("--grid", div.grid, "Preset grid instead of a single point")
      ->check(CLI::IsMember({"default"}));
  divergence->add_option("--method", div.method, "jtc (exact), brute (enumeration) or mc (Monte Carlo)")
      ->check(CLI::IsMember({"jtc", "brute", "mc"}));
  divergence->add_option("--samples", div.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
  divergence->add_flag("--cross-check", div.cross_check, "Compare against a second method");
  divergence->add_flag("--bootstrap", div.bootstrap, "Bootstrap Monte Carlo standard errors");
  add_common(*divergence, common, false);

  BenchOptions bench_o;
  auto* bench = app.add_subcommand("bench", "Runtime scaling of exact, brute-force and Monte Carlo methods");
  bench->add_option("--family", bench_o.family, "chain or random (random chordal graphs)")
      ->check(CLI::IsMember({"chain", "random"}));
  bench->add_option("--n", bench_o.sizes, "Variable counts")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_option("--treewidth", bench_o.treewidth, "Treewidth of the random family")->check(CLI::PositiveNumber);
  bench->add_option("--repeats", bench_o.repeats, "Timing repeats (median)")->check(CLI::PositiveNumber);
  bench->add_option("--samples", bench_o.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
  bench->add_option("--alpha", bench_o.alpha, "alpha (default 1)");
  bench->add_option("--beta", bench_o.beta, "beta (default 0)");
  add_common(*bench, common, true);

  CaseStudyOptions cs;
  auto* casestudy = app.add_subcommand("casestudy", "Model selection between two edge-deleted sachs candidates");
  casestudy->add_option("--model", cs.model_path, "Path to sachs.json");
  casestudy->add_option("--tolerance", cs.tolerance, "Verification bound against brute force");
  add_common(*casestudy, common, false);

  FitOptions fit_o;
  auto* fit = app.add_subcommand("fit", "Maximum-likelihood decomposable model from complete data");
  fit->add_option("structure", fit_o.structure_path, "Structure JSON")->required();
  fit->add_option("data", fit_o.data_path, "CSV with a header of variable names")->required();
  fit->add_option("-o,--output", fit_o.output, "Model file to write")->required();
  fit->add_option("--smoothing", fit_o.smoothing, "Pseudo-count per cell")->check(CLI::NonNegativeNumber);
  add_common(*fit, common, false);

  SampleOptions sample_o;
  auto* sample = app.add_subcommand("sample", "Forward-sample a model to CSV");
  sample->add_option("model", sample_o.model_path, "Model file")->required();
  sample->add_option("-o,--output", sample_o.output, "CSV file to write")->required();
  sample->add_option("--count", sample_o.count, "Number of rows")->check(CLI::PositiveNumber);
  add_common(*sample, common, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    std::optional<ScopedCellCap> cap;
    if (common.cell_cap > 0) cap.emplace(common.cell_cap);
    if (*divergence) return cmd_divergence(div, common, out, err);
    if (*bench) return cmd_bench(bench_o, common, out);
    if (*casestudy) return cmd_casestudy(cs, common, out);
    if (*fit) return cmd_fit(fit_o, common, out);
    if (*sample) return cmd_sample(sample_o, common, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return kExitInvalidInput;
}

}  // namespace abdiv
