#pragma once

// Named experiment presets. Each shipped config file under presets/ mirrors
// one of these builders; a test keeps them in sync.

#include "thinheat/harness.hpp"

namespace thinheat {

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.label = name;
  if (name == "growing_circle") {
    c.kind = ExperimentKind::convergence;
    c.family = CurveFamily::circle(1.0, 0.5, 0.4);
    c.profiles = ProfilePair::constants(-0.5, 0.5);
    c.t_end = 0.4;
    c.epsilons = {0.2, 0.1, 0.05, 0.025};
    c.n_theta = 96;
    c.n_s = 24;
    c.n_steps = 240;
    c.eta0_base = 1.0;
    c.eta0_amp = 0.0;
  } else if (name == "ellipse_theta_profile") {
    c.kind = ExperimentKind::convergence;
    c.family = CurveFamily::ellipse(1.2, 0.1, 0.9, 0.0, 0.4);
    c.profiles = ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1);
    c.t_end = 0.4;
    c.epsilons = {0.2, 0.1, 0.05, 0.025};
    c.n_theta = 192;
    c.n_s = 24;
    c.n_steps = 320;
    c.eta0_base = 1.0;
    c.eta0_amp = 0.5;
  } else if (name == "stationary_control") {
    c.kind = ExperimentKind::convergence;
    c.family = CurveFamily::circle(1.0, 0.0, 0.4);
    c.profiles = ProfilePair::constants(-0.5, 0.5);
    c.t_end = 0.4;
    c.epsilons = {0.2, 0.1, 0.05};
    c.n_theta = 48;
    c.n_s = 12;
    c.n_steps = 80;
    c.eta0_base = 1.0;
    c.eta0_amp = 0.0;
    c.floor_check = 1e-7;
  } else if (name == "growing_circle_gt") {
    c.kind = ExperimentKind::residual_orders;
    c.family = CurveFamily::circle(1.0, 0.5, 0.4);
    c.profiles = ProfilePair::time_linear(-0.5, -0.1, 0.5, 0.05);
    c.t_end = 0.4;
    c.epsilons = {0.1, 0.05, 0.025};
    c.manufactured = true;
  } else if (name == "ellipse_theta_residuals") {
    c.kind = ExperimentKind::residual_orders;
    c.family = CurveFamily::ellipse(1.2, 0.1, 0.9, 0.0, 0.4);
    c.profiles = ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1);
    c.t_end = 0.4;
    c.epsilons = {0.1, 0.05, 0.025};
    c.manufactured = true;
  } else if (name == "uniform_ratio_circle") {
    c.kind = ExperimentKind::uniform_ratio;
    c.family = CurveFamily::circle(1.0, 0.5, 0.4);
    c.profiles = ProfilePair::constants(-0.5, 0.5);
    c.t_end = 0.4;
    c.epsilons = {0.1, 0.05, 0.025};
    c.n_theta = 64;
    c.n_s = 16;
    c.n_steps = 160;
    c.eta0_base = 1.0;
    c.eta0_amp = 0.5;
  } else if (name == "sharpness_circle") {
    c.kind = ExperimentKind::sharpness;
    c.family = CurveFamily::circle(1.0, 0.5, 0.4);
    c.profiles = ProfilePair::constants(-0.5, 0.5);
    c.t_end = 0.4;
    c.epsilons = {0.1, 0.05, 0.025};
    c.n_theta = 64;
    c.n_s = 16;
    c.n_steps = 160;
  } else if (name == "mms_limit_circle") {
    c.kind = ExperimentKind::mms_limit;
    c.family = CurveFamily::circle(1.0, 0.5, 0.4);
    c.profiles = ProfilePair::constants(-0.5, 0.5);
    c.t_end = 0.4;
    c.epsilons = {0.1};
    c.n_theta = 128;
    c.n_s = 16;
    c.n_steps = 160;
    c.manufactured = true;
  } else if (name == "mms_bulk_circle") {
    c.kind = ExperimentKind::mms_bulk;
    c.family = CurveFamily::circle(1.0, 0.5, 0.4);
    c.profiles = ProfilePair::constants(-0.5, 0.5);
    c.t_end = 0.4;
    c.epsilons = {0.1};
    c.n_theta = 96;
    c.n_s = 24;
    c.n_steps = 120;
    c.manufactured = true;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

inline std::vector<std::string> preset_names() {
  return {"growing_circle",        "ellipse_theta_profile", "stationary_control",
          "growing_circle_gt",     "ellipse_theta_residuals", "uniform_ratio_circle",
          "sharpness_circle",      "mms_limit_circle",      "mms_bulk_circle"};
}

}  // namespace thinheat
