#pragma once

// Config-file (TOML key/value) front end for ExperimentConfig. Parsing is
// delegated to CLI11's config machinery so the same keys work as flags.

#include <CLI11.hpp>

#include <string>
#include <vector>

#include "thinheat/harness.hpp"

namespace thinheat {

struct RawConfig {
  std::string label = "experiment";
  std::string experiment = "convergence";
  std::string curve = "circle";
  double radius0 = 1.0, growth = 0.0;
  double a0 = 1.2, a_rate = 0.0, b0 = 0.9, b_rate = 0.0;
  double amp = 0.0;
  int mode = 1;
  std::string profile = "constant";
  double g0 = -0.5, g1 = 0.5;
  double g0_rate = 0.0, g1_rate = 0.0;
  double g0_amp = 0.0, g1_amp = 0.0;
  int g0_mode = 1, g1_mode = 1;
  double k_d = 1.0;
  double t_end = 0.4;
  std::vector<double> epsilons = {0.2, 0.1, 0.05, 0.025};
  int n_theta = 96, n_s = 24, n_steps = 240, limit_refine = 2;
  double eta0_base = 1.0, eta0_amp = 0.0;
  bool manufactured = false;
  double mms_base = 1.0, mms_amp = 0.5, mms_decay = 0.5;
  double floor_check = 0.0;
  std::uint64_t seed = 0;

  void register_options(CLI::App& app) {
    app.add_option("--label", label);
    app.add_option("--experiment", experiment);
    app.add_option("--curve", curve)->check(CLI::IsMember({"circle", "ellipse", "perturbed_circle"}));
    app.add_option("--radius0", radius0);
    app.add_option("--growth", growth);
    app.add_option("--a0", a0);
    app.add_option("--a_rate", a_rate);
    app.add_option("--b0", b0);
    app.add_option("--b_rate", b_rate);
    app.add_option("--amp", amp);
    app.add_option("--mode", mode);
    app.add_option("--profile", profile)->check(CLI::IsMember({"constant", "time_linear", "theta_cos"}));
    app.add_option("--g0", g0);
    app.add_option("--g1", g1);
    app.add_option("--g0_rate", g0_rate);
    app.add_option("--g1_rate", g1_rate);
    app.add_option("--g0_amp", g0_amp);
    app.add_option("--g1_amp", g1_amp);
    app.add_option("--g0_mode", g0_mode);
    app.add_option("--g1_mode", g1_mode);
    app.add_option("--k_d", k_d);
    app.add_option("--t_end", t_end);
    app.add_option("--epsilons", epsilons);
    app.add_option("--n_theta", n_theta);
    app.add_option("--n_s", n_s);
    app.add_option("--n_steps", n_steps);
    app.add_option("--limit_refine", limit_refine);
    app.add_option("--eta0_base", eta0_base);
    app.add_option("--eta0_amp", eta0_amp);
    app.add_option("--manufactured", manufactured);
    app.add_option("--mms_base", mms_base);
    app.add_option("--mms_amp", mms_amp);
    app.add_option("--mms_decay", mms_decay);
    app.add_option("--floor_check", floor_check);
    app.add_option("--seed", seed);
  }

  ExperimentConfig build() const {
    ExperimentConfig c;
    c.label = label;
    bool found = false;
    for (const auto& [kind, name] : experiment_names())
      if (name == experiment) {
        c.kind = kind;
        found = true;
      }
    if (!found) throw ConfigError("config: key 'experiment' has unknown value '" + experiment + "'");
    if (t_end <= 0.0) throw ConfigError("config: key 't_end' must be positive");
    if (curve == "circle") {
      c.family = CurveFamily::circle(radius0, growth, t_end);
    } else if (curve == "ellipse") {
      c.family = CurveFamily::ellipse(a0, a_rate, b0, b_rate, t_end);
    } else if (curve == "perturbed_circle") {
      c.family = CurveFamily::perturbed_circle(radius0, growth, amp, mode, t_end);
    } else {
      throw ConfigError("config: key 'curve' has unknown value '" + curve + "'");
    }
    if (profile == "constant") {
      c.profiles = ProfilePair::constants(g0, g1);
    } else if (profile == "time_linear") {
      c.profiles = ProfilePair::time_linear(g0, g0_rate, g1, g1_rate);
    } else if (profile == "theta_cos") {
      c.profiles = ProfilePair({g0, g0_rate, g0_amp, g0_mode}, {g1, g1_rate, g1_amp, g1_mode});
    } else {
      throw ConfigError("config: key 'profile' has unknown value '" + profile + "'");
    }
    c.k_d = k_d;
    c.t_end = t_end;
    c.epsilons = epsilons;
    c.n_theta = n_theta;
    c.n_s = n_s;
    c.n_steps = n_steps;
    c.limit_refine = limit_refine;
    c.eta0_base = eta0_base;
    c.eta0_amp = eta0_amp;
    c.manufactured = manufactured;
    c.mms = ManufacturedEta{mms_base, mms_amp, mms_decay};
    c.floor_check = floor_check;
    c.seed = seed;
    return c;
  }
};

// Parses a config file into an ExperimentConfig. Throws ConfigError with the
// offending key in the message.
inline ExperimentConfig load_config(const std::string& path) {
  CLI::App app{"config"};
  RawConfig raw;
  raw.register_options(app);
  app.set_config("--config")->required();
  app.allow_config_extras(false);
  try {
    std::vector<std::string> args = {"--config", path};
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return raw.build();
}

// Side-effect-free validation; returns per-key diagnostics (empty = valid).
inline std::vector<std::string> validate_config(const std::string& path) {
  std::vector<std::string> diags;
  try {
    ExperimentConfig cfg = load_config(path);
    cfg.validate();
  } catch (const Error& e) {
    diags.push_back(e.what());
  }
  return diags;
}

}  // namespace thinheat
