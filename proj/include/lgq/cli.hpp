#pragma once

// Subcommands of the `lgq` tool. Exit codes: 0 success, 1 verification
// failure, 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "lgq/config.hpp"
#include "lgq/quasiprob.hpp"
#include "lgq/scanner.hpp"
#include "lgq/verify.hpp"

namespace lgq::cli {

enum Exit : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericFailure = 3 };

inline json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline json kernels_json(const KernelSet& k) {
  return {{"a1", complex_json(k.a1)}, {"a2", complex_json(k.a2)}, {"b", complex_json(k.b)},
          {"e1", k.e1},           {"e2", k.e2},           {"det", complex_json(k.det)}};
}

inline json result_json(const QuasiProbResult& r) {
  return {{"q", r.q},
          {"est_error", r.est_error},
          {"residual_imag", r.residual_imag},
          {"engine_used", to_string(r.engine_used)},
          {"kernels", kernels_json(r.kernels)}};
}

inline int cmd_compute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const auto r = qp::quasi_prob(cfg.model, cfg.state, cfg.scheme, cfg.query(), cfg.quadrature);
    out << result_json(r).dump() << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  }
}

inline int cmd_kernels(const RunConfig& cfg, std::ostream& out) {
  const auto q = cfg.query();
  out << kernels_json(kernels::kernel_set(cfg.model, cfg.state, q.t1, q.t2)).dump() << "\n";
  return kOk;
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const ScanGrid& g, std::ostream& out) {
  out << "x_value,y_value,q,est_error,robust_negative\n";
  for (int ix = 0; ix < g.x.n; ++ix) {
    for (int iy = 0; iy < g.y.n; ++iy) {
      const auto i = g.index(ix, iy);
      out << format_double(g.x.value(ix)) << ',' << format_double(g.y.value(iy)) << ','
          << format_double(g.values[i]) << ',' << format_double(g.errors[i]) << ','
          << static_cast<int>(g.negative[i]) << '\n';
    }
  }
}

inline json grid_json(const ScanGrid& g) {
  json cells = json::array();
  for (int ix = 0; ix < g.x.n; ++ix) {
    for (int iy = 0; iy < g.y.n; ++iy) {
      const auto i = g.index(ix, iy);
      const bool ok = !std::isnan(g.values[i]);
      cells.push_back({{"x", g.x.value(ix)},
                       {"y", g.y.value(iy)},
                       {"q", ok ? json(g.values[i]) : json(nullptr)},
                       {"est_error", ok ? json(g.errors[i]) : json(nullptr)},
                       {"robust_negative", g.negative[i] != 0}});
    }
  }
  return cells;
}

inline json summary_json(const ScanGrid& g) {
  json result = {{"nx", g.x.n}, {"ny", g.y.n}, {"failed_cells", g.failed}};
  try {
    const auto s = violation_summary(g);
    const auto m = find_min(g);
    result["fraction_neg"] = s.fraction_neg;
    result["min_q"] = s.min_q;
    result["min_point"] = {{"x", m.x}, {"y", m.y}, {"q", m.q}};
    json crossings = json::array();
    for (const auto& c : s.crossings) {
      crossings.push_back({{"param", to_string(c.param)}, {"found", c.found}, {"value", c.found ? json(c.value) : json(nullptr)}});
    }
    result["threshold_crossings"] = crossings;
  } catch (const AllCellsFailed&) {
    result["min_point"] = nullptr;
  }
  return result;
}

struct ScanOptions {
  std::string out_path;  // overrides output.path
  bool allow_partial = false;
  int threads = -1;      // overrides scan.threads when >= 0
};

inline int cmd_scan(const RunConfig& cfg, const ScanOptions& opt, std::ostream& out, std::ostream& err) {
  if (!cfg.scan) {
    err << "config error: scan section with x and y axes is required\n";
    return kConfigError;
  }
  ScanGrid grid;
  try {
    const int threads = opt.threads >= 0 ? opt.threads : cfg.scan->threads;
    grid = scan_plane(cfg.base(), cfg.scan->x, cfg.scan->y, threads);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  const std::string path = opt.out_path.empty() ? cfg.output.path : opt.out_path;
  {
    std::ofstream file;
    if (!path.empty()) {
      file.open(path, std::ios::binary);
      if (!file) {
        err << "config error: cannot write '" << path << "'\n";
        return kConfigError;
      }
    }
    std::ostream& sink = path.empty() ? out : file;
    if (cfg.output.format == "json") {
      sink << grid_json(grid).dump() << "\n";
    } else {
      write_csv(grid, sink);
    }
  }
  const json sidecar = {{"tool_version", kToolVersion}, {"config", to_json(cfg)}, {"result", summary_json(grid)}};
  if (!path.empty()) {
    std::ofstream side(path + ".json", std::ios::binary);
    side << sidecar.dump(2) << "\n";
  } else {
    err << sidecar.dump() << "\n";
  }

  if (grid.failed > 0) {
    for (const auto& f : grid.failures) {
      if (!f.empty()) {
        err << grid.failed << " cell(s) failed; first failure: " << f << "\n";
        break;
      }
    }
    if (!opt.allow_partial) return kNumericFailure;
  }
  return kOk;
}

inline int cmd_verify(const verify::Options& opt, std::ostream& out) {
  const auto checks = verify::run_checks(opt);
  verify::print_table(checks, out);
  if (verify::all_passed(checks)) {
    out << "all checks passed\n";
    return kOk;
  }
  out << "failed checks:";
  for (const auto& c : checks) {
    if (!c.pass) out << " [" << c.name << "]";
  }
  out << "\n";
  return kVerifyFailed;
}

/// Full command line, with stdin used when --config is absent or "-".
inline int run(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Leggett-Garg quasi-probabilities of a coarse-grained Gaussian field"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string engine;
  std::string out_path;
  bool allow_partial = false;
  int threads = -1;
  std::uint64_t seed = verify::Options{}.seed;
  std::string level = "quick";

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file ('-' or absent: standard input)");
    sub->add_option("--engine", engine, "Quadrature engine override")
        ->check(CLI::IsMember({"cartesian", "polar", "auto"}));
  };
  auto* compute = app.add_subcommand("compute", "Evaluate one quasi-probability");
  add_config(compute);
  compute->add_option("--out", out_path, "Also write the JSON result here");
  auto* scan = app.add_subcommand("scan", "Sweep a 2D parameter plane");
  add_config(scan);
  scan->add_option("--out", out_path, "CSV output path (sidecar: <path>.json)");
  scan->add_flag("--allow-partial", allow_partial, "Exit 0 even if some cells failed");
  scan->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  auto* kern = app.add_subcommand("kernels", "Dump the kernel set at the query times");
  add_config(kern);
  kern->add_option("--out", out_path, "Also write the JSON here");
  auto* ver = app.add_subcommand("verify", "Run the oracle and property suite");
  ver->add_option("level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  ver->add_option("--seed", seed, "Seed for the randomized draws");
  ver->add_option("--threads", threads, "Accepted for symmetry; the suite is single-threaded");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  if (ver->parsed()) {
    verify::Options opt;
    opt.level = level == "full" ? verify::Level::Full : verify::Level::Quick;
    opt.seed = seed;
    return cmd_verify(opt, out);
  }

  RunConfig cfg;
  try {
    if (config_path.empty() || config_path == "-") {
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = parse_config(ss.str());
    } else {
      cfg = load_config(config_path);
    }
    if (!engine.empty()) cfg.quadrature.engine = config_detail::engine_from(engine, "--engine");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  auto tee = [&](auto body) {
    std::ostringstream buf;
    const int code = body(buf);
    out << buf.str();
    if (!out_path.empty() && code == kOk) std::ofstream(out_path, std::ios::binary) << buf.str();
    return code;
  };
  if (compute->parsed()) return tee([&](std::ostream& o) { return cmd_compute(cfg, o, err); });
  if (kern->parsed()) return tee([&](std::ostream& o) { return cmd_kernels(cfg, o); });
  ScanOptions so;
  so.out_path = out_path;
  so.allow_partial = allow_partial;
  so.threads = threads;
  return cmd_scan(cfg, so, out, err);
}

}  // namespace lgq::cli
