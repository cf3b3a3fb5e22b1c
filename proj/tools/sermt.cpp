// sermt: run, sweep and inspect scenarios.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sermt/grid/topology.hpp"
#include "sermt/metrics/emit.hpp"
#include "sermt/metrics/report.hpp"

using namespace sermt;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeFault = 3;

int run_cmd(const std::string& config_path, const std::string& trace_path) {
  const auto cfg = metrics::load_config(config_path);
  std::ofstream trace;
  metrics::RunOptions opts;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw metrics::RuntimeFault(fmt::format("cannot write '{}'", trace_path));
    opts.trace_out = &trace;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = metrics::run_scenario(cfg, opts);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  std::cout << fmt::format("scenario     {} ({}, seed {}, {:g} s simulated, {:.2f} s wall)\n", cfg.name,
                           cfg.protocol.defense ? "SERMT" : "baseline", *cfg.seed, cfg.duration, dt.count());
  std::cout << metrics::summary(m);
  return m.conservation_ok ? 0 : kRuntimeFault;
}

int sweep_cmd(const std::string& config_path, const std::string& vary_name, const std::string& out_dir, unsigned jobs) {
  const auto cfg = metrics::load_config(config_path);
  const auto vary = vary_name == "malicious" ? metrics::Vary::Malicious : metrics::Vary::Interval;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw metrics::RuntimeFault(fmt::format("cannot create '{}': {}", out_dir, ec.message()));
  const auto rows = metrics::sweep(cfg, vary, jobs);
  const auto stem = std::filesystem::path(out_dir) / fmt::format("{}_{}", cfg.name, vary_name);
  metrics::emit(rows, metrics::Format::Csv, stem.string() + ".csv", vary);
  metrics::emit(rows, metrics::Format::Svg, stem.string() + ".svg", vary);
  metrics::write_csv(std::cout, rows);
  bool ok = true;
  for (const auto& r : rows) ok = ok && r.metrics.conservation_ok;
  std::cerr << fmt::format("wrote {}.csv and {}.svg\n", stem.string(), stem.string());
  return ok ? 0 : kRuntimeFault;
}

int topo_cmd(const std::string& grid_path, std::optional<double> radius) {
  auto topo = grid::load_topology_file(grid_path);
  const auto r = radius ? radius : topo.radius_threshold;
  if (!r) throw metrics::ConfigError("no RADIUS line in the grid file; pass --radius");
  std::cout << metrics::topology_report(metrics::summarize(std::move(topo), *r));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SERMT smart-grid sensor network simulator"};
  app.require_subcommand(1);

  std::string config, trace_path, vary = "malicious", out_dir = "out", grid_path;
  unsigned jobs = 0;
  std::optional<double> radius;
  bool report = false;

  auto* run = app.add_subcommand("run", "run one scenario and print its metrics");
  run->add_option("config", config, "scenario file")->required();
  run->add_option("--trace", trace_path, "write the event log here");

  auto* sw = app.add_subcommand("sweep", "sweep malicious-node count or attack interval, SERMT vs. baseline");
  sw->add_option("config", config, "scenario file")->required();
  sw->add_option("--vary", vary, "malicious | interval")->check(CLI::IsMember({"malicious", "interval"}));
  sw->add_option("--out", out_dir, "output directory for CSV and SVG");
  sw->add_option("-j,--jobs", jobs, "parallel runs (default: hardware threads)");

  auto* topo = app.add_subcommand("topo", "substation, region and CC summary of a grid file");
  topo->add_option("grid", grid_path, "grid file")->required();
  topo->add_option("--radius", radius, "region radius in metres (overrides the file)");
  topo->add_flag("--report", report, "print the summary (default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return run_cmd(config, trace_path);
    if (*sw) return sweep_cmd(config, vary, out_dir, jobs);
    return topo_cmd(grid_path, radius);
  } catch (const metrics::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const grid::GridError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << '\n';
    return kRuntimeFault;
  }
}
