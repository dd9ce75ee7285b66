#include "pdhj/report.hpp"

#include <cmath>

namespace pdhj {

namespace {

using nlohmann::json;

// Non-finite values become strings instead of JSON null.
json num(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  return d;
}

json nums(const std::vector<double>& v) {
  json out = json::array();
  for (double d : v) out.push_back(num(d));
  return out;
}

}  // namespace

json to_json_value(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

json to_json_value(const DPConfig& c) {
  json out{{"coarse_step", c.coarse_step}, {"max_depth", c.max_depth}, {"leaf_cap", c.leaf_cap}};
  if (c.prune_tolerance) out["prune_tolerance"] = *c.prune_tolerance;
  return out;
}

json to_json_value(const ValueResult& r) {
  json controls = json::array();
  for (const auto& u : r.best_control) controls.push_back(to_json_value(u));
  return {{"t", r.t}, {"value", num(r.value)}, {"leaves_evaluated", r.leaves_evaluated}, {"best_control", controls}};
}

json to_json_value(const ConditionReport& r) {
  return {{"lambda", num(r.lambda)},
          {"lambda_source", r.lambda_source},
          {"a", {{"min_nu", num(r.min_nu)},
                 {"worst_identity_residual", num(r.worst_identity_residual)},
                 {"identity_tolerance", num(r.identity_tolerance)},
                 {"passed", r.a_passed}}},
          {"b", {{"worst_zero_history_excess", num(r.worst_zero_history_excess)},
                 {"worst_formula_error", num(r.worst_zero_history_formula_error)},
                 {"passed", r.b_passed}}},
          {"c", {{"eps", nums(r.c_eps)}, {"sequence", nums(r.c_sequence)}, {"passed", r.c_passed}}},
          {"d", {{"worst_violation", num(r.worst_violation)}, {"samples", r.d_samples}, {"passed", r.d_passed}}},
          {"passed", r.passed()}};
}

json to_json_value(const NonanticipationReport& r) {
  return {{"trials", r.trials}, {"violations", r.violations}, {"worst", num(r.worst)}, {"details", r.details},
          {"passed", r.passed()}};
}

json to_json_value(const CiDerivatives& r) {
  return {{"dt", num(r.dt)}, {"grad", to_json_value(r.grad)}, {"residual", num(r.residual)},
          {"schedule", nums(r.schedule)}, {"residuals", nums(r.residuals)}};
}

json to_json_value(const C4Report& r) {
  return {{"residuals", nums(r.residuals)}, {"worst", num(r.worst)}, {"empty_sets", r.empty_sets}};
}

json to_json_value(const GrowthReport& r) {
  return {{"estimated", num(r.estimated)}, {"declared", num(r.declared)}, {"samples", r.samples},
          {"passed", r.passed()}};
}

json to_json_value(const LipschitzReport& r) {
  return {{"lambda", num(r.lambda)}, {"pairs", r.pairs}, {"skipped", r.skipped}, {"source", "estimated on D"}};
}

json to_json_value(const HomogeneityReport& r) {
  return {{"worst", num(r.worst)}, {"worst_alpha", num(r.worst_alpha)}, {"samples", r.samples},
          {"passed", r.passed}};
}

json to_json_value(const BoundaryReport& r) {
  return {{"samples", r.samples},
          {"tolerance", num(r.tolerance)},
          {"worst_above", num(r.worst_above)},
          {"worst_below", num(r.worst_below)},
          {"upper_ok", r.upper_ok()},
          {"lower_ok", r.lower_ok()}};
}

json to_json_value(const MReport& r) {
  json witness = json::array();
  for (const auto& v : r.witness) witness.push_back(to_json_value(v));
  json out{{"passed", r.passed},   {"deviation", num(r.deviation)}, {"evaluations", r.evaluations},
           {"trials", r.trials},   {"witness", witness},            {"note", r.note}};
  if (r.boundary) out["boundary"] = to_json_value(*r.boundary);
  return out;
}

json to_json_value(const OneSidedReport& r) {
  return {{"passed", r.passed},         {"margin", num(r.margin)}, {"best", num(r.best)},
          {"evaluations", r.evaluations}, {"trials", r.trials},     {"witness_blocks", r.witness_blocks}};
}

json to_json_value(const MCReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) rows.push_back({{"upper", to_json_value(row.upper)}, {"lower", to_json_value(row.lower)}});
  return {{"rows", rows}, {"upper_failures", r.upper_failures}, {"lower_failures", r.lower_failures},
          {"passed", r.passed()}};
}

json to_json_value(const TouchReport& r) {
  json cases = json::array();
  for (const auto& c : r.cases)
    cases.push_back({{"a", num(c.a)},
                     {"b", to_json_value(c.b)},
                     {"c", num(c.c)},
                     {"kind", c.minimum ? "min" : "max"},
                     {"extremum", c.extremum},
                     {"lhs", num(c.lhs)},
                     {"failed", c.failed}});
  return {{"cases", cases}, {"extrema", r.extrema}, {"failures", r.failures}, {"passed", r.passed()}};
}

json to_json_value(const ConsistencyReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    json j{{"t", e.t}, {"state", to_json_value(e.state)}, {"dp", num(e.dp)}, {"classical", num(e.classical)},
           {"dp_vs_classical", num(e.dp_vs_classical)}};
    if (e.analytic) {
      j["analytic"] = num(*e.analytic);
      j["dp_vs_analytic"] = num(*e.dp_vs_analytic);
      j["classical_vs_analytic"] = num(*e.classical_vs_analytic);
    }
    entries.push_back(j);
  }
  return {{"entries", entries},
          {"worst_dp_vs_classical", num(r.worst_dp_vs_classical)},
          {"worst_dp_vs_analytic", num(r.worst_dp_vs_analytic)},
          {"worst_classical_vs_analytic", num(r.worst_classical_vs_analytic)},
          {"tolerance", r.tolerance},
          {"passed", r.passed()}};
}

json to_json_value(const StabilityReport& r) {
  return {{"family", r.family == StabilityFamily::boundary ? "boundary" : "hamiltonian_shift"},
          {"deltas", nums(r.deltas)},
          {"deviations", nums(r.deviations)},
          {"formula_errors", nums(r.formula_errors)},
          {"decreasing", r.decreasing},
          {"bounded", r.bounded},
          {"tolerance", r.tolerance},
          {"passed", r.passed()}};
}

std::string serialize(const nlohmann::json& report) { return report.dump(2) + "\n"; }

}  // namespace pdhj
