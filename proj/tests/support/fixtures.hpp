#pragma once

#include <pdhj/scenario.hpp>

#include <cmath>
#include <string>

namespace fixtures {

// y' = y(tau - 1) from the history x = 1 on [-1, 0]; y(2) = 3.5.
inline std::string delay_config(double step = 0.01) {
  return R"({"name": "delay", "n": 1, "h": 1, "T": 2, "step": )" + std::to_string(step) + R"(,
    "delay_kind": "constant", "coefficients": {"lag": 1, "B": [[1]]},
    "controls": [[0]], "c": 1, "sigma_kind": "terminal_first", "g_kind": "zero", "seed": 7,
    "dp": {"coarse_step": 0.5, "max_depth": 10}})";
}

// y' = u, sigma = |y(T)|; value max(|x(t)| - (T - t), 0) in the limit of a dense control set.
inline std::string hopf_lax_config(const std::string& controls = "[[-1], [-0.3333333333333333], [0.3333333333333333], [1]]",
                                   double step = 0.01) {
  return R"({"name": "hopf_lax", "n": 1, "h": 0.5, "T": 1, "step": )" + std::to_string(step) + R"(,
    "delay_kind": "none", "coefficients": {}, "controls": )" + controls + R"(,
    "c": 1, "sigma_kind": "terminal_norm", "g_kind": "zero", "seed": 11,
    "dp": {"coarse_step": 0.1, "max_depth": 10}})";
}

// y' = b, sigma = sin(y(T)); value sin(x(t) + b (T - t)).
inline std::string transport_config(double b = 0.7, double step = 0.01) {
  return R"({"name": "transport", "n": 1, "h": 0.5, "T": 1, "step": )" + std::to_string(step) + R"(,
    "delay_kind": "none", "coefficients": {"b": [)" + std::to_string(b) + R"(]}, "controls": [[0]],
    "c": 1, "sigma_kind": "terminal_sine", "g_kind": "zero", "seed": 13,
    "dp": {"coarse_step": 0.1, "max_depth": 10}})";
}

inline double hopf_lax_exact(double t, double x, double T = 1.0) { return std::max(std::abs(x) - (T - t), 0.0); }

// Method-of-steps closed form for the delay scenario at tau in [0, 2].
inline double delay_exact(double tau) {
  if (tau <= 1.0) return 1.0 + tau;
  return 2.0 + (tau * tau - 1.0) / 2.0;
}

}  // namespace fixtures
