// JSON crosses the boundary as strings; the Python wrapper decodes them.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "odrs/bench.hpp"
#include "odrs/common.hpp"
#include "odrs/crs.hpp"
#include "odrs/exact.hpp"
#include "odrs/instance.hpp"
#include "odrs/level_set.hpp"
#include "odrs/odrs.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

odrs::ScalingParams params_for(odrs::Algorithm alg) {
  if (alg == odrs::Algorithm::warmup) return odrs::ScalingParams{};
  return odrs::optimal_params(alg == odrs::Algorithm::odrs_b ? odrs::Variant::b_matching : odrs::Variant::matching);
}

std::string optimize(const std::string& variant) {
  const auto o = odrs::optimize_params(odrs::parse_variant(variant));
  return json{{"eps", o.eps}, {"delta", o.delta}, {"alpha", o.alpha}}.dump();
}

std::string crs(const std::string& dist_json, const std::vector<double>& v) {
  const auto dist = odrs::SupportDistribution::from_json(json::parse(dist_json));
  const auto rule = odrs::build_selector(dist, v);
  return json{{"alpha", rule.alpha}, {"selection", odrs::selection_marginals(rule)}}.dump();
}

std::string round_instance(const std::string& inst_json, const std::string& alg_name, long runs,
                           std::uint64_t seed) {
  const auto inst = odrs::instance_from_json(json::parse(inst_json));
  const auto alg = odrs::parse_algorithm(alg_name);
  const auto rounder = odrs::odrs_rounder(alg, params_for(alg));
  const auto rep = runs <= 0 ? odrs::exact_edge_probs(rounder, inst)
                             : odrs::monte_carlo_edge_probs(rounder, inst, runs, seed);
  return rep.to_json().dump();
}

double exact_ratio(const std::string& inst_json, const std::string& alg_name) {
  const auto alg = odrs::parse_algorithm(alg_name);
  return odrs::rounding_ratio_exact(odrs::instance_from_json(json::parse(inst_json)), alg, params_for(alg));
}

std::string validate_instance(const std::string& inst_json) {
  const auto rep = odrs::validate(odrs::instance_from_json(json::parse(inst_json)));
  json out = json::array();
  for (const auto& v : rep.violations)
    out.push_back({{"kind", v.kind}, {"index", v.index}, {"magnitude", v.magnitude}, {"message", v.message}});
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_odrslab, m) {
  py::register_exception<odrs::ParamError>(m, "ParamError", PyExc_ValueError);
  py::register_exception<odrs::ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("online_round", &odrs::online_round, py::arg("x"), py::arg("seed"));
  m.def("offline_pivotal", &odrs::offline_pivotal, py::arg("x"), py::arg("seed"));
  m.def("threshold_round", &odrs::threshold_round, py::arg("x"), py::arg("tau"));
  m.def("selection_probability", &odrs::selection_probability, py::arg("s_prev"), py::arg("count"),
        py::arg("x"));
  m.def("ratio_bound", [](double eps, double delta, const std::string& variant) {
    return odrs::ratio_bound(odrs::ScalingParams::make(eps, delta, odrs::parse_variant(variant)));
  });
  m.def("lb_bound", &odrs::lb_bound, py::arg("n"));
  m.def("lb_root", &odrs::lb_root);
  m.def("_optimize_params", &optimize);
  m.def("_crs", &crs);
  m.def("_round", &round_instance);
  m.def("_exact_ratio", &exact_ratio);
  m.def("_validate", &validate_instance);
}
