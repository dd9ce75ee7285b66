#include "pdhj/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pdhj {

namespace {

std::string describe(const std::string& field, const std::string& what, int line) {
  std::ostringstream msg;
  if (line > 0) msg << "line " << line << ": ";
  msg << "field '" << field << "': " << what;
  return msg.str();
}

// Line of the first occurrence of the key in the source text, 0 if unknown.
int line_of_key(const std::string& text, const std::string& field) {
  if (text.empty()) return 0;
  const std::string leaf = field.substr(field.rfind('.') == std::string::npos ? 0 : field.rfind('.') + 1);
  const auto pos = text.find('"' + leaf + '"');
  if (pos == std::string::npos) return 0;
  int line = 1;
  for (std::size_t i = 0; i < pos; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

class Reader {
 public:
  Reader(const nlohmann::json& root, const std::string& text) : root_(root), text_(text) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ConfigError(field, what, line_of_key(text_, field));
  }

  const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path) const {
    if (!obj.contains(key)) fail(path, "missing required field");
    return obj.at(key);
  }

  double number(const nlohmann::json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }

  double positive(const nlohmann::json& v, const std::string& path) const {
    const double d = number(v, path);
    if (!(d > 0)) fail(path, "expected a positive number");
    return d;
  }

  Vector vector(const nlohmann::json& v, int size, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    if (size >= 0 && static_cast<int>(v.size()) != size) fail(path, "expected " + std::to_string(size) + " entries");
    Vector out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
  }

  Matrix matrix(const nlohmann::json& v, int rows, int cols, const std::string& path) const {
    if (!v.is_array() || static_cast<int>(v.size()) != rows) fail(path, "expected " + std::to_string(rows) + " rows");
    Matrix out(rows, cols);
    for (int r = 0; r < rows; ++r)
      out.row(r) = vector(v[static_cast<std::size_t>(r)], cols, path + "[" + std::to_string(r) + "]").transpose();
    return out;
  }

  const nlohmann::json& root() const { return root_; }

 private:
  const nlohmann::json& root_;
  const std::string& text_;
};

}  // namespace

ConfigError::ConfigError(const std::string& field, const std::string& what, int line)
    : std::runtime_error(describe(field, what, line)), field_(field), line_(line) {}

Scenario scenario_from_json(const nlohmann::json& config, const std::string& source_text,
                            std::optional<double> step_override) {
  Reader rd(config, source_text);
  if (!config.is_object() || config.empty()) rd.fail("<root>", "expected a non-empty JSON object");

  const auto& n_json = rd.require(config, "n", "n");
  if (!n_json.is_number_integer() || n_json.get<int>() < 1 || n_json.get<int>() > 3)
    rd.fail("n", "expected an integer between 1 and 3");
  const int n = n_json.get<int>();
  const double h = rd.positive(rd.require(config, "h", "h"), "h");
  const double T = rd.positive(rd.require(config, "T", "T"), "T");
  double step = rd.positive(rd.require(config, "step", "step"), "step");
  if (step_override) step = *step_override;
  std::optional<TimeGrid> grid;
  try {
    grid.emplace(n, h, T, step);
  } catch (const DomainError& e) {
    rd.fail("step", e.what());
  }

  const auto& seed_json = rd.require(config, "seed", "seed");
  if (!seed_json.is_number_unsigned() && !(seed_json.is_number_integer() && seed_json.get<long long>() >= 0))
    rd.fail("seed", "expected a non-negative integer");
  const auto seed = seed_json.get<std::uint64_t>();

  const auto& coeffs = rd.require(config, "coefficients", "coefficients");
  if (!coeffs.is_object()) rd.fail("coefficients", "expected an object");

  const auto& kind_json = rd.require(config, "delay_kind", "delay_kind");
  if (!kind_json.is_string()) rd.fail("delay_kind", "expected a string");
  DelayTerm delay;
  try {
    switch (delay_kind_from_string(kind_json.get<std::string>())) {
      case DelayKind::none: break;
      case DelayKind::constant:
        delay = DelayTerm::constant(rd.positive(rd.require(coeffs, "lag", "coefficients.lag"), "coefficients.lag"));
        if (delay.lag > h + 1e-12) rd.fail("coefficients.lag", "lag exceeds h");
        break;
      case DelayKind::time_varying:
        delay = DelayTerm::time_varying(
            rd.number(rd.require(coeffs, "lag_offset", "coefficients.lag_offset"), "coefficients.lag_offset"),
            rd.number(rd.require(coeffs, "lag_slope", "coefficients.lag_slope"), "coefficients.lag_slope"));
        break;
      case DelayKind::distributed:
        delay = DelayTerm::distributed(
            coeffs.contains("decay") ? rd.number(coeffs.at("decay"), "coefficients.decay") : 1.0);
        break;
    }
  } catch (const DomainError& e) {
    rd.fail("delay_kind", e.what());
  }

  const Matrix A = coeffs.contains("A") ? rd.matrix(coeffs.at("A"), n, n, "coefficients.A") : Matrix(Matrix::Zero(n, n));
  const Matrix B = coeffs.contains("B") ? rd.matrix(coeffs.at("B"), n, n, "coefficients.B") : Matrix(Matrix::Zero(n, n));
  const Vector b = coeffs.contains("b") ? rd.vector(coeffs.at("b"), n, "coefficients.b") : Vector(Vector::Zero(n));
  if (delay.kind == DelayKind::none && !B.isZero()) rd.fail("coefficients.B", "delay_kind none takes no B");

  const auto& controls_json = rd.require(config, "controls", "controls");
  if (!controls_json.is_array() || controls_json.empty()) rd.fail("controls", "expected a non-empty array of vectors");
  std::vector<Vector> controls;
  int m = -1;
  for (std::size_t i = 0; i < controls_json.size(); ++i) {
    Vector u = rd.vector(controls_json[i], m, "controls[" + std::to_string(i) + "]");
    if (m < 0) m = static_cast<int>(u.size());
    controls.push_back(std::move(u));
  }
  if (m < 1) rd.fail("controls", "control vectors must be non-empty");
  Matrix U;
  if (coeffs.contains("U")) {
    U = rd.matrix(coeffs.at("U"), n, m, "coefficients.U");
  } else {
    if (m != n) rd.fail("coefficients.U", "required when the control dimension differs from n");
    U = Matrix::Identity(n, n);
  }

  const double c = rd.positive(rd.require(config, "c", "c"), "c");

  const auto& sk = rd.require(config, "sigma_kind", "sigma_kind");
  if (!sk.is_string()) rd.fail("sigma_kind", "expected a string");
  const std::string sigma_kind = sk.get<std::string>();
  Vector weights = Vector::Zero(n);
  weights(0) = 1.0;
  if (config.contains("sigma_weights")) weights = rd.vector(config.at("sigma_weights"), n, "sigma_weights");
  std::function<double(const Vector&)> sigma_hat;
  if (sigma_kind == "terminal_first") {
    sigma_hat = [](const Vector& v) { return v(0); };
  } else if (sigma_kind == "terminal_norm") {
    sigma_hat = [](const Vector& v) { return v.norm(); };
  } else if (sigma_kind == "terminal_linear") {
    sigma_hat = [weights](const Vector& v) { return weights.dot(v); };
  } else if (sigma_kind == "terminal_quadratic") {
    sigma_hat = [](const Vector& v) { return 0.5 * v.squaredNorm(); };
  } else if (sigma_kind == "terminal_sine") {
    sigma_hat = [weights](const Vector& v) { return std::sin(weights.dot(v)); };
  } else {
    rd.fail("sigma_kind", "expected terminal_first, terminal_norm, terminal_linear, terminal_quadratic or terminal_sine");
  }

  const auto& gk = rd.require(config, "g_kind", "g_kind");
  if (!gk.is_string()) rd.fail("g_kind", "expected a string");
  double g_value = 0.0;
  if (gk == "constant") {
    g_value = rd.number(rd.require(config, "g_value", "g_value"), "g_value");
  } else if (gk != "zero") {
    rd.fail("g_kind", "expected zero or constant");
  }

  ControlProblem problem;
  problem.name = config.value("name", std::string("scenario"));
  problem.c = c;
  problem.delay = delay;
  problem.controls = controls;
  problem.f = [A, B, U, b, delay](double tau, const Path& y, const Vector& u) {
    Vector out = A * y.at(tau) + U * u + b;
    if (delay.kind != DelayKind::none) out += B * delay(tau, y);
    return out;
  };
  problem.g = [g_value](double, const Path&, const Vector&) { return g_value; };
  const double horizon = T;
  problem.sigma = [sigma_hat, horizon](const Path& y) { return sigma_hat(y.at(horizon)); };

  Path initial(*grid);
  double start = 0.0;
  if (config.contains("initial")) {
    const auto& init = config.at("initial");
    if (!init.is_object()) rd.fail("initial", "expected an object");
    if (init.contains("value")) initial = Path::constant(*grid, rd.vector(init.at("value"), n, "initial.value"));
    if (init.contains("t")) {
      start = rd.number(init.at("t"), "initial.t");
      if (!grid->is_node(start) || start < 0 || start >= T) rd.fail("initial.t", "expected a grid node in [0, T)");
    }
  } else {
    initial = Path::constant(*grid, Vector::Ones(n));
  }

  DPConfig dp;
  if (config.contains("dp")) {
    const auto& d = config.at("dp");
    if (!d.is_object()) rd.fail("dp", "expected an object");
    if (d.contains("coarse_step")) dp.coarse_step = rd.positive(d.at("coarse_step"), "dp.coarse_step");
    if (d.contains("max_depth")) {
      if (!d.at("max_depth").is_number_integer() || d.at("max_depth").get<int>() < 1)
        rd.fail("dp.max_depth", "expected a positive integer");
      dp.max_depth = d.at("max_depth").get<int>();
    }
    if (d.contains("leaf_cap")) {
      if (!d.at("leaf_cap").is_number_integer() || d.at("leaf_cap").get<long long>() < 1)
        rd.fail("dp.leaf_cap", "expected a positive integer");
      dp.leaf_cap = d.at("leaf_cap").get<std::int64_t>();
    }
  }
  const double ratio = dp.coarse_step / grid->step();
  if (std::abs(ratio - std::round(ratio)) > 1e-9) rd.fail("dp.coarse_step", "must be a multiple of step");

  std::optional<ClassicalForm> classical;
  if (delay.kind == DelayKind::none) {
    ClassicalForm form;
    form.H = [A, U, b, controls, g_value](double, const Vector& x, const Vector& s) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& u : controls) best = std::min(best, s.dot(A * x + U * u + b) - g_value);
      return best;
    };
    form.sigma = sigma_hat;
    classical = std::move(form);
  }

  return Scenario{problem.name, *grid, problem, initial, start, dp, seed, classical, config};
}

Scenario load_scenario(const std::string& text, std::optional<double> step_override) {
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError("<document>", e.what(), line);
  }
  return scenario_from_json(config, text, step_override);
}

Scenario load_scenario_file(const std::string& path, std::optional<double> step_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str(), step_override);
}

}  // namespace pdhj
