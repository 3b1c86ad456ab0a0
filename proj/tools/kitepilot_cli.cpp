// kitepilot command line: run scenarios, identify turn-rate parameters from
// logs, sweep a scenario parameter, run the invariant self-test.
//
// Exit codes: 0 completed, 2 crash, 3 singular state, 4 configuration error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kitepilot/errors.hpp"
#include "kitepilot/runner.hpp"
#include "kitepilot/scenario.hpp"
#include "kitepilot/selftest.hpp"

namespace fs = std::filesystem;
using namespace kitepilot;

namespace {

constexpr int kConfigError = 4;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("KITEPILOT_OUT")) return env;
  return ".";
}

void write_log(const fs::path& path, const std::vector<LogRow>& log) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  write_csv(out, log);
}

int cmd_run(const std::string& file, const std::string& out_flag) {
  const Scenario s = parse_scenario(read_file(file));
  const RunResult r = run_scenario(s);
  const fs::path csv = output_dir(out_flag) / (s.name + ".csv");
  write_log(csv, r.log);
  std::cout << summary_json(r.summary, s.name) << '\n';
  std::cerr << "telemetry: " << csv.string() << '\n';
  return exit_code(r.summary.outcome);
}

int cmd_sysid(const std::string& file, bool rls, int delay, double lambda) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + file + "'", 0);
  const auto log = read_csv(in);
  const SysidEstimate est = identify(log, delay, lambda, rls);
  nlohmann::ordered_json j;
  j["rows"] = log.size();
  j["batch_g_hat"] = est.batch_g_hat;
  j["batch_residual_rms"] = est.batch_residual_rms;
  j["method"] = rls ? "rls" : "batch";
  j["g_hat"] = est.g_hat;
  j["M_hat"] = est.M_hat;
  std::cout << j.dump(2) << '\n';
  return 0;
}

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_sweep(const std::string& scenario_file, const std::string& param, const std::string& values,
              const std::string& out_flag) {
  Scenario base;
  if (!scenario_file.empty()) {
    base = parse_scenario(read_file(scenario_file));
  } else {
    base.name = "sweep";
    base.mode = Mode::Step;
    base.duration = 120.0;
    base.step.start_time = 0.0;
  }

  struct Case {
    std::string value;
    Scenario scenario;
  };
  std::vector<Case> cases;
  for (const auto& v : split_values(values)) {
    Scenario s = base;
    set_scenario_value(s, param, v);
    s.name = base.name + "_" + param + "_" + v;
    s.seed = base.seed + cases.size();
    s.validate();
    cases.push_back({v, s});
  }

  const fs::path dir = output_dir(out_flag);
  std::vector<std::future<RunResult>> jobs;
  for (const auto& c : cases) jobs.push_back(std::async(std::launch::async, [&c] { return run_scenario(c.scenario); }));

  std::cout << "value,outcome,theta_final,theta_steady,psi_final,va_ratio_final\n";
  int worst = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const RunResult r = jobs[i].get();
    write_log(dir / (cases[i].scenario.name + ".csv"), r.log);
    double theta = 0.0, psi = 0.0, ratio = 0.0;
    if (!r.log.empty()) {
      const auto& last = r.log.back();
      theta = last.theta;
      psi = last.psi;
      ratio = last.v0 > 0.0 ? last.v_a / last.v0 : 0.0;
    }
    const double steady = steady_state_theta(psi, cases[i].scenario.aero.glide_ratio);
    std::cout << cases[i].value << ',' << to_string(r.summary.outcome) << ',' << theta << ',' << steady << ','
              << psi << ',' << ratio << '\n';
    worst = std::max(worst, exit_code(r.summary.outcome));
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tethered kite autopilot simulator"};
  app.require_subcommand(1);

  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run a scenario file and write CSV telemetry");
  std::string scenario_file;
  run->add_option("scenario", scenario_file, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory (default: $KITEPILOT_OUT or .)");

  auto* sysid = app.add_subcommand("sysid", "Identify g (and M) from a telemetry CSV");
  std::string csv_file;
  bool use_rls = false;
  int delay = 2;
  double lambda = 0.995;
  sysid->add_option("csv", csv_file, "Telemetry CSV")->required();
  sysid->add_flag("--rls", use_rls, "Report the recursive estimate instead of batch (g, M)");
  sysid->add_option("--delay", delay, "Sensor delay in samples used to align the log")->check(CLI::NonNegativeNumber);
  sysid->add_option("--lambda", lambda, "RLS forgetting factor")->check(CLI::Range(0.9, 1.0));

  auto* sweep = app.add_subcommand("sweep", "Run one scenario per parameter value");
  std::string param, values, sweep_scenario;
  sweep->add_option("--param", param, "Scenario key, e.g. step.amplitude")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--scenario", sweep_scenario, "Base scenario (default: constant-psi hold)");
  sweep->add_option("--out", out_dir, "Output directory (default: $KITEPILOT_OUT or .)");

  auto* selftest = app.add_subcommand("selftest", "Run the invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_file, out_dir);
    if (*sysid) return cmd_sysid(csv_file, use_rls, delay, lambda);
    if (*sweep) return cmd_sweep(sweep_scenario, param, values, out_dir);
    if (*selftest) return report(std::cout, run_selftest()) ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DegenerateRegressorError& e) {
    std::cerr << "sysid error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
