#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "cmab/harness.hpp"

namespace py = pybind11;

namespace {

py::dict bound_dict(const cmab::BoundReport& b) {
  py::dict terms;
  for (const auto& t : b.terms) terms[py::str(t.label)] = t.value;
  py::dict d;
  d["name"] = b.name;
  d["horizon"] = b.horizon;
  d["value"] = b.value;
  d["terms"] = terms;
  d["parameters"] = b.parameters;
  return d;
}

py::list bound_list(const std::vector<cmab::BoundReport>& reports) {
  py::list out;
  for (const auto& b : reports) out.append(bound_dict(b));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Combinatorial bandits with probabilistically triggered arms";
  m.attr("rng_algorithm") = std::string(cmab::Rng::kAlgorithm);

  py::register_exception<cmab::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("ucb_adjust", py::overload_cast<double, std::uint64_t, std::uint64_t>(&cmab::ucb_adjust),
        py::arg("mu_hat"), py::arg("plays"), py::arg("t"));
  m.def("riemann_zeta", &cmab::riemann_zeta, py::arg("c"));
  m.def(
      "sampling_threshold",
      [](double delta, double p, std::uint64_t n, double gamma, double omega) {
        return cmab::sampling_threshold(delta, p, n, cmab::Smoothness::power_law(gamma, omega));
      },
      py::arg("delta"), py::arg("p"), py::arg("n"), py::arg("gamma") = 1.0, py::arg("omega") = 1.0);
  m.def(
      "classical_bound",
      [](const std::vector<double>& gaps, std::uint64_t n) { return bound_dict(cmab::classical_mab_bound(gaps, n)); },
      py::arg("gaps"), py::arg("n"));
  m.def(
      "theorem2_bound",
      [](std::size_t m_arms, std::uint64_t n, double gamma, double omega, double p_star,
         const std::vector<double>& p, double delta_max) {
        return bound_dict(cmab::theorem2_bound(m_arms, n, gamma, omega, p_star, p, delta_max));
      },
      py::arg("m"), py::arg("n"), py::arg("gamma") = 1.0, py::arg("omega") = 1.0, py::arg("p_star") = 1.0,
      py::arg("p") = std::vector<double>{}, py::arg("delta_max") = 1.0);

  m.def(
      "ic_spread",
      [](std::size_t nodes, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
         std::vector<std::size_t> seeds) {
        std::vector<cmab::WeightedEdge> list;
        for (const auto& [u, v, p] : edges) list.push_back({u, v, p});
        cmab::IcInstance ic(nodes, std::move(list), seeds.size());
        return ic.expected_reward(ic.means(), ic.super_arm_for_nodes(std::move(seeds)));
      },
      py::arg("nodes"), py::arg("edges"), py::arg("seeds"), "Exact expected influence spread of a seed set.");

  m.def(
      "validate",
      [](const std::filesystem::path& config) { return cmab::validate_config(cmab::Config::load(config)); },
      py::arg("config"));
  m.def(
      "bounds",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
        return bound_list(cmab::emit_bounds(cmab::Config::load(config), out));
      },
      py::arg("config"), py::arg("out") = py::none());
  m.def(
      "run",
      [](const std::filesystem::path& config, std::optional<std::uint64_t> seed,
         std::optional<std::filesystem::path> out) {
        const auto cfg = cmab::Config::load(config);
        cmab::ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = cmab::run_experiment(cfg, seed, out);
        }
        py::list aggregate;
        for (const auto& row : res.aggregate) {
          py::dict d;
          d["t"] = row.t;
          d["mean"] = row.mean;
          d["stderr"] = row.std_error;
          d["runs"] = row.runs;
          aggregate.append(d);
        }
        py::dict d;
        d["aggregate"] = aggregate;
        d["bounds"] = bound_list(res.bounds);
        d["output"] = res.output;
        return d;
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none(),
      "Runs a config file and returns the aggregate regret and bounds at the horizon.");
}
