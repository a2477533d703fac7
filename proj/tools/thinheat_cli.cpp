// Command-line front end: runs configured experiments, writes reports
// (report.json / rows.csv / plot.txt per experiment), and validates configs.
//
//   thinheat run --config presets/growing_circle.toml --out out/
//   thinheat run --exp list
//   thinheat validate --config presets/growing_circle.toml
//
// Exit codes: 0 all criteria passed, 1 criteria failed, 2 config error,
// 3 wall-clock budget exceeded.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "thinheat/config.hpp"
#include "thinheat/export.hpp"
#include "thinheat/presets.hpp"

namespace fs = std::filesystem;
using namespace thinheat;

namespace {

struct RunFlags {
  std::string config_path;
  std::string exp;
  std::string out_dir = "out";
  int jobs = 1;
  double budget_seconds = 0.0;
  bool overwrite = false;
  bool dump_slices = false;
};

void write_report(const fs::path& dir, const std::string& stem,
                  const nlohmann::ordered_json& j, const std::string& csv,
                  const std::string& plot) {
  write_text_file((dir / (stem + ".json")).string(), j.dump(2) + "\n");
  write_text_file((dir / "rows.csv").string(), csv);
  write_text_file((dir / "plot.txt").string(), plot);
}

std::string pass_line(const ConvergenceReport& r) {
  char buf[256];
  if (r.fit)
    std::snprintf(buf, sizeof buf, "[%s] %s %s: slope=%.3f r2=%.5f", r.pass ? "PASS" : "FAIL",
                  r.experiment.c_str(), r.label.c_str(), r.fit->slope, r.fit->r2);
  else
    std::snprintf(buf, sizeof buf, "[%s] %s %s", r.pass ? "PASS" : "FAIL",
                  r.experiment.c_str(), r.label.c_str());
  return buf;
}

int run_experiment(const RunFlags& flags) {
  if (flags.exp == "list") {
    for (const auto& [kind, name] : experiment_names()) std::printf("%s\n", name.c_str());
    return 0;
  }
  if (flags.config_path.empty()) {
    std::fprintf(stderr, "error: --config is required (or use --exp list)\n");
    return 2;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(flags.config_path);
    if (!flags.exp.empty()) {
      bool found = false;
      for (const auto& [kind, name] : experiment_names())
        if (name == flags.exp) {
          cfg.kind = kind;
          found = true;
        }
      if (!found) throw ConfigError("unknown experiment kind '" + flags.exp + "'");
    }
    cfg.jobs = flags.jobs;
    cfg.validate();
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  fs::path dir = fs::path(flags.out_dir) / (cfg.label + "_" + to_string(cfg.kind));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "config error: cannot create output directory %s\n",
                 dir.string().c_str());
    return 2;
  }
  if (!flags.overwrite && fs::exists(dir / "report.json")) {
    std::fprintf(stderr, "config error: %s exists; pass --overwrite to replace it\n",
                 (dir / "report.json").string().c_str());
    return 2;
  }
  if (flags.budget_seconds > 0.0)
    cfg.deadline = std::chrono::steady_clock::now() +
                   std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(flags.budget_seconds));

  bool pass = false;
  try {
    switch (cfg.kind) {
      case ExperimentKind::mms_limit: {
        ConvergenceReport r = run_mms_limit(cfg);
        write_report(dir, "report", r.to_json(), r.to_csv(), r.to_plot_script());
        std::printf("%s\n", pass_line(r).c_str());
        pass = r.pass;
        break;
      }
      case ExperimentKind::mms_bulk: {
        ConvergenceReport r = run_mms_bulk(cfg);
        write_report(dir, "report", r.to_json(), r.to_csv(), r.to_plot_script());
        std::printf("%s\n", pass_line(r).c_str());
        pass = r.pass;
        break;
      }
      case ExperimentKind::convergence: {
        ConvergenceReport r = run_convergence(cfg);
        write_report(dir, "report", r.to_json(), r.to_csv(), r.to_plot_script());
        std::printf("%s\n", pass_line(r).c_str());
        pass = r.pass;
        if (flags.dump_slices) {
          std::function<double(double, double)> source;
          if (cfg.manufactured) source = manufactured_limit_source(cfg);
          std::vector<double> e0(static_cast<std::size_t>(cfg.n_theta));
          for (int j = 0; j < cfg.n_theta; ++j)
            e0[static_cast<std::size_t>(j)] = cfg.manufactured
                                                  ? cfg.mms.field().value(two_pi * j / cfg.n_theta, 0.0)
                                                  : cfg.eta0(two_pi * j / cfg.n_theta);
          LimitProblem lpb{cfg.family, cfg.profiles, cfg.k_d, e0, source};
          LimitSolution lim = LimitSolver({.n_theta = cfg.n_theta}).solve(lpb, cfg.t_end, cfg.n_steps);
          write_text_file((dir / "limit_slices.csv").string(), limit_slices_csv(lim));
          double eps = cfg.epsilons.back();
          ThinDomainSpec spec(cfg.family, cfg.profiles, eps, cfg.k_d);
          BulkProblem bpb{spec,
                          [&cfg](double th, double) {
                            return cfg.manufactured ? cfg.mms.field().value(th, 0.0) : cfg.eta0(th);
                          },
                          source ? std::function<double(double, double, double)>(
                                       [source](double th, double, double t) { return source(th, t); })
                                 : nullptr,
                          nullptr, nullptr, nullptr, nullptr};
          BulkSolution bs = BulkSolver({.n_theta = cfg.n_theta, .n_s = cfg.n_s})
                                .solve(bpb, cfg.t_end, cfg.n_steps);
          write_text_file((dir / "bulk_slices.csv").string(), bulk_slices_csv(bs, spec));
        }
        break;
      }
      case ExperimentKind::residual_orders: {
        ResidualOrdersResult r = run_residual_orders(cfg);
        nlohmann::ordered_json j;
        j["experiment"] = "residual_orders";
        j["label"] = cfg.label;
        j["reports"] = nlohmann::ordered_json::array();
        j["reports"].push_back(r.bulk.to_json());
        j["reports"].push_back(r.boundary.to_json());
        if (r.ablation) j["reports"].push_back(r.ablation->to_json());
        j["pass"] = r.pass();
        std::string csv = r.bulk.to_csv();
        csv += r.boundary.to_csv();
        if (r.ablation) csv += r.ablation->to_csv();
        write_text_file((dir / "report.json").string(), j.dump(2) + "\n");
        write_text_file((dir / "rows.csv").string(), csv);
        write_text_file((dir / "plot.txt").string(), r.boundary.to_plot_script());
        std::printf("%s\n", pass_line(r.bulk).c_str());
        std::printf("%s\n", pass_line(r.boundary).c_str());
        if (r.ablation) std::printf("%s\n", pass_line(*r.ablation).c_str());
        pass = r.pass();
        break;
      }
      case ExperimentKind::uniform_ratio: {
        ConvergenceReport r = run_uniform_ratio(cfg);
        write_report(dir, "report", r.to_json(), r.to_csv(), r.to_plot_script());
        std::printf("%s\n", pass_line(r).c_str());
        pass = r.pass;
        break;
      }
      case ExperimentKind::sharpness: {
        ConvergenceReport r = run_sharpness(cfg);
        write_report(dir, "report", r.to_json(), r.to_csv(), r.to_plot_script());
        std::printf("%s\n", pass_line(r).c_str());
        pass = r.pass;
        break;
      }
    }
  } catch (const BudgetExceeded& e) {
    nlohmann::ordered_json j;
    j["experiment"] = to_string(cfg.kind);
    j["label"] = cfg.label;
    j["pass"] = false;
    j["notes"] = {std::string("BudgetExceeded: ") + e.what()};
    write_text_file((dir / "report.json").string(), j.dump(2) + "\n");
    std::fprintf(stderr, "budget exceeded: %s (partial report flushed)\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "experiment error: %s\n", e.what());
    return 1;
  }
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical experiments for heat flow in moving thin domains"};
  app.require_subcommand(1);

  RunFlags flags;
  CLI::App* run = app.add_subcommand("run", "run experiments from a config file");
  run->add_option("--config", flags.config_path, "experiment config (TOML)");
  run->add_option("--exp", flags.exp, "experiment kind override, or 'list'");
  run->add_option("--out", flags.out_dir, "output directory");
  run->add_option("--jobs", flags.jobs, "sweep-member parallelism");
  run->add_option("--budget-seconds", flags.budget_seconds, "wall-clock budget");
  run->add_flag("--overwrite", flags.overwrite, "replace existing outputs");
  run->add_flag("--dump-slices", flags.dump_slices, "also export solution slices as CSV");

  std::string validate_path;
  CLI::App* val = app.add_subcommand("validate", "check a config without solving");
  val->add_option("--config", validate_path, "experiment config (TOML)")->required();

  CLI11_PARSE(app, argc, argv);

  if (val->parsed()) {
    auto diags = validate_config(validate_path);
    for (const auto& d : diags) std::printf("%s\n", d.c_str());
    if (diags.empty()) std::printf("config ok\n");
    return diags.empty() ? 0 : 2;
  }
  return run_experiment(flags);
}
