#include "cdp/harness.hpp"
#include "cdp/network_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct ProblemFlags {
  std::string builtin;
  std::string network;
  std::string scenario;
  std::string alg = "esqm";
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& f) {
  auto* b = cmd->add_option("--builtin", f.builtin, "built-in problem: dc-abs, constrained, toy-vi");
  auto* n = cmd->add_option("--network", f.network, "network file (cndp-network v1)")->check(CLI::ExistingFile);
  b->excludes(n);
  cmd->add_option("--scenario", f.scenario, "demand preset for network problems")
      ->check(CLI::IsMember({"low", "mid", "high"}))
      ->needs(n);
  cmd->add_option("--alg", f.alg, "esqm or aesqm")->check(CLI::IsMember({"esqm", "aesqm"}));
  cmd->add_option("--set", f.sets, "parameter override key=value (repeatable)");
  cmd->add_option("--seed", f.seed, "seed for randomized diagnostics");
}

cdp::RunSpec make_spec(const ProblemFlags& f) {
  cdp::RunSpec spec;
  spec.builtin = f.builtin;
  spec.network_path = f.network;
  spec.scenario = f.scenario;
  spec.algorithm = cdp::parse_algorithm(f.alg);
  spec.seed = f.seed;
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw cdp::ConfigError("--set expects key=value, got '" + kv + "'");
    spec.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return spec;
}

// Parameters are always shown so a run can be reproduced from its log.
void print_config(const cdp::RunSpec& spec) {
  const auto cfg = cdp::effective_config(spec);
  std::cerr << "parameters (" << cdp::to_string(spec.algorithm) << "):";
  for (const auto& [k, v] : cfg) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
  if (auto it = cfg.find("epsilon"); it != cfg.end() && it->second == 0.0) {
    std::cerr << "warning: epsilon = 0 makes the gap constraint fail the no-nonzero-abnormal-multiplier "
                 "qualification at every feasible point; expect the penalty to grow without bound\n";
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cdp::ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const ProblemFlags& f, const std::string& trace, const std::string& summary) {
  cdp::RunSpec spec = make_spec(f);
  spec.trace_path = trace;
  spec.summary_path = summary;
  print_config(spec);
  const cdp::RunSummary s = cdp::run_command(spec);
  std::cout << cdp::summary_to_json(s) << '\n';
  return 0;
}

int cmd_series(const ProblemFlags& f, const std::string& out) {
  cdp::RunSpec spec = make_spec(f);
  spec.evaluate_every_iterate = true;
  print_config(spec);
  const cdp::RunSummary s = cdp::run_command(spec);
  std::ostringstream os;
  cdp::emit_feasibility_series(os, s.trace, s.gap.has_value());
  if (out.empty()) {
    std::cout << os.str();
  } else {
    cdp::write_file_atomic(out, os.str());
  }
  return 0;
}

int cmd_table(const std::vector<std::string>& files) {
  std::vector<cdp::RunSummary> summaries;
  for (const std::string& path : files) summaries.push_back(cdp::summary_from_json(read_file(path), path));
  const cdp::TableReport table = cdp::report_table(summaries);
  std::cout << table.text;
  if (summaries.empty()) {
    std::cerr << "error: no summaries given\n";
    return 1;
  }
  if (!table.complete) {
    std::cerr << "error: some algorithm/scenario cells are missing\n";
    return 1;
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const cdp::NetworkInstance inst = cdp::load_network(path);
  std::cout << "links " << inst.n_links() << ", paths " << inst.n_paths() << ", od pairs " << inst.n_od() << '\n';
  bool ok = true;
  for (Eigen::Index w = 0; w < inst.n_od(); ++w) {
    const auto paths = inst.paths_of(w);
    std::cout << "od " << inst.od_ids[static_cast<std::size_t>(w)] << ": demand " << inst.r(w) << ", "
              << paths.size() << " paths\n";
    if (paths.empty()) ok = false;
  }
  for (Eigen::Index a = 0; a < inst.n_links(); ++a) {
    if (inst.Delta.row(a).sum() == 0.0)
      std::cout << "note: link " << inst.link_ids[static_cast<std::size_t>(a)] << " is on no path\n";
  }
  const cdp::CndpState s0 = cdp::initial_point(inst);
  const double viol = std::max((inst.Delta * s0.h - s0.v).cwiseAbs().maxCoeff(),
                               (inst.Lambda * s0.h - inst.r).cwiseAbs().maxCoeff());
  std::cout << "starting point conservation residual " << viol << '\n';
  std::cout << (ok ? "ok" : "invalid") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained difference programming solver"};
  app.require_subcommand(1);

  ProblemFlags run_flags;
  std::string trace_path, summary_path;
  auto* run = app.add_subcommand("run", "solve one problem");
  add_problem_flags(run, run_flags);
  run->add_option("--trace", trace_path, "write the iteration trace as CSV");
  run->add_option("--summary", summary_path, "write the result summary as JSON");

  std::vector<std::string> table_files;
  auto* table = app.add_subcommand("table", "objective table from network run summaries");
  table->add_option("summaries", table_files, "summary JSON files");

  ProblemFlags series_flags;
  std::string series_out;
  auto* series = app.add_subcommand("series", "per-iteration objective and feasibility CSV");
  add_problem_flags(series, series_flags);
  series->add_option("--out", series_out, "output CSV (default stdout)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "load a network file and check it");
  validate->add_option("network", validate_path, "network file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_flags, trace_path, summary_path);
    if (*series) return cmd_series(series_flags, series_out);
    if (*table) return cmd_table(table_files);
    if (*validate) return cmd_validate(validate_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cdp::exit_code_for(e);
  }
  return 0;
}
