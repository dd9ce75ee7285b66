#pragma once

#include "pdhj/control.hpp"
#include "pdhj/path.hpp"
#include "pdhj/value.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace pdhj {

/// Invalid scenario configuration; the message names the field and, where it
/// can be located, the line in the source text.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what, int line = 0);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Finite-dimensional form H(t, x, s) = Hhat(t, x(t), s), sigma = sigmahat(x(T)),
/// available when the dynamics carry no delay term.
struct ClassicalForm {
  std::function<double(double, const Vector&, const Vector&)> H;
  std::function<double(const Vector&)> sigma;
};

/// A retarded control problem read from JSON:
///
///   f(tau, y, u) = A y(tau) + B d(tau, y) + U u + b,   d the configured delay term
///   g = 0 or a constant, sigma from sigma_kind on y(T)
///
/// together with its grid, initial history and DP settings.
struct Scenario {
  std::string name;
  TimeGrid grid;
  ControlProblem problem;
  Path initial;
  double start = 0.0;
  DPConfig dp;
  std::uint64_t seed = 0;
  std::optional<ClassicalForm> classical;
  /// The full configuration, for subcommand-specific sections.
  nlohmann::json config;

  HistoryPoint initial_point() const { return HistoryPoint(start, initial); }
};

/// Required fields: n, h, T, step, delay_kind, coefficients, controls, c,
/// sigma_kind, g_kind, seed.  `step_override` replaces `step` before validation.
Scenario load_scenario(const std::string& text, std::optional<double> step_override = std::nullopt);
Scenario load_scenario_file(const std::string& path, std::optional<double> step_override = std::nullopt);
Scenario scenario_from_json(const nlohmann::json& config, const std::string& source_text = {},
                            std::optional<double> step_override = std::nullopt);

}  // namespace pdhj
