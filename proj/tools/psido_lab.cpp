// psido_lab: runs the E1-E5 experiments and writes report, table and plot.
//
//   psido_lab run --experiment e1 --config e1_critical.cfg [--threads 4] [--rho 0 ...]
//   psido_lab list-symbols
//
// Exit status: 0 when every verdict passes, 1 when a verdict fails or an
// experiment aborts, 2 on configuration errors.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "psido/harness/config.hpp"
#include "psido/harness/experiments.hpp"
#include "psido/harness/report.hpp"

namespace fs = std::filesystem;
using namespace psido::harness;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw psido::Error("cannot write " + p.string());
  f << text;
}

int run(const std::string& experiment, const std::string& config_path, unsigned threads,
        const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg = config_path.empty() ? default_config(experiment) : load_config(experiment, config_path);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  if (const char* env = std::getenv("PSIDO_OUTPUT_DIR"); env != nullptr && *env != '\0') cfg.values["output_dir"] = env;
  validate(cfg);
  psido::set_thread_count(threads);

  const ExperimentReport r = run_experiment(cfg);

  const fs::path dir = cfg.text("output_dir");
  fs::create_directories(dir);
  const std::string stem = cfg.experiment + "_" + config_hash(cfg);
  write_file(dir / (stem + ".json"), report_to_text(r));
  write_file(dir / (stem + ".csv"), report_to_csv(r));
  write_file(dir / (stem + ".svg"), report_to_svg(r));

  std::cout << cfg.experiment << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
  if (r.aborted) std::cout << "  aborted: " << r.diagnostic << "\n";
  for (const auto& s : r.series) {
    std::cout << "  " << s.name << " (m = " << s.m << "): " << s.verdict;
    if (!s.expectation.empty() && s.expectation != "none") std::cout << " [expected " << s.expectation << "]";
    std::cout << (s.pass ? "" : " FAIL");
    for (const auto& p : s.points) std::cout << " N=" << p.N << ":" << p.max_ratio;
    std::cout << "\n";
  }
  for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";
  std::cout << "  report: " << (dir / (stem + ".json")).string() << "\n";
  return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for pseudo-differential operators"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run one experiment");
  std::string experiment, config_path;
  unsigned threads = 0;
  run_cmd->add_option("--experiment,-e", experiment, "experiment id e1..e5")->required();
  run_cmd->add_option("--config,-c", config_path, "configuration file");
  run_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  std::map<std::string, std::string> flag_values;
  for (const auto& k : config_keys()) {
    std::string dashed = k.name;
    for (char& ch : dashed)
      if (ch == '_') ch = '-';
    std::string names = "--" + dashed;
    if (dashed != k.name) names += ",--" + std::string(k.name);
    run_cmd->add_option(names, flag_values[k.name], k.help);
  }

  auto* list_cmd = app.add_subcommand("list-symbols", "print the built-in symbol families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (list_cmd->parsed()) {
    for (const auto& f : symbol_families()) std::cout << f.name << "\t" << f.description << "\n";
    return 0;
  }

  std::map<std::string, std::string> overrides;
  for (const auto& k : config_keys()) {
    std::string dashed = k.name;
    for (char& ch : dashed)
      if (ch == '_') ch = '-';
    if (run_cmd->count("--" + dashed) > 0) overrides[k.name] = flag_values[k.name];
  }
  try {
    return run(experiment, config_path, threads, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
