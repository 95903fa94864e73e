// Copyright 2026 the rcsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "rcsim/harness.hpp"

namespace py = pybind11;
using namespace rcsim;

namespace {

PauliLetter letter_from_char(char c) {
  switch (c) {
    case 'I': return PauliLetter::I;
    case 'X': return PauliLetter::X;
    case 'Y': return PauliLetter::Y;
    case 'Z': return PauliLetter::Z;
    default:
      throw std::invalid_argument(std::string("invalid Pauli letter '") + c +
                                  "'");
  }
}

PauliString make_pauli(double coefficient, const std::string& letters) {
  PauliString p;
  p.coefficient = coefficient;
  for (char c : letters) p.letters.push_back(letter_from_char(c));
  return p;
}

std::vector<PauliString> make_paulis(
    const std::vector<std::pair<double, std::string>>& strings) {
  std::vector<PauliString> out;
  out.reserve(strings.size());
  for (const auto& [coeff, letters] : strings) {
    out.push_back(make_pauli(coeff, letters));
  }
  return out;
}

SamplingStrategy adaptive_strategy(const std::string& moment_source,
                                   double delta_var, int n_shots,
                                   int mom_batches) {
  SamplingStrategy s;
  s.kind = StrategyKind::FluctuationAdaptive;
  if (moment_source == "exact") {
    s.moment_source = MomentSource::Exact;
  } else if (moment_source == "shadows") {
    s.moment_source = MomentSource::Shadows;
  } else {
    throw std::invalid_argument("moment_source must be 'exact' or 'shadows'");
  }
  s.delta_var = delta_var;
  s.shadow_config = ShadowConfig{n_shots, mom_batches};
  return s;
}

py::object experiment_to_py(const ExperimentResult& result) {
  const std::string payload = result_to_json(result).dump();
  return py::module_::import("json").attr("loads")(payload);
}

}  // namespace

PYBIND11_MODULE(_rcsim, m) {
  m.doc() = "Randomized-compilation simulator for Hamiltonian dynamics";
  m.attr("__version__") = "0.1.0";

  py::class_<HilbertSpace>(m, "HilbertSpace")
      .def(py::init<std::vector<int>>(), py::arg("factors"))
      .def_property_readonly("factors", &HilbertSpace::factors)
      .def_property_readonly("total_dim", &HilbertSpace::total_dim)
      .def("__repr__", [](const HilbertSpace& s) {
        std::string out = "HilbertSpace([";
        for (size_t i = 0; i < s.factors().size(); ++i) {
          if (i) out += ", ";
          out += std::to_string(s.factors()[i]);
        }
        return out + "])";
      });

  py::class_<StateVector>(m, "StateVector")
      .def_static("basis_state", &StateVector::basis_state, py::arg("space"),
                  py::arg("index"))
      .def_static("superposition", &StateVector::superposition,
                  py::arg("space"), py::arg("indices"))
      .def_static(
          "normalized",
          [](const HilbertSpace& space, const Vector& amplitudes) {
            return StateVector::normalized(space, amplitudes);
          },
          py::arg("space"), py::arg("amplitudes"))
      .def_property_readonly(
          "amplitudes",
          [](const StateVector& s) -> Vector { return s.amplitudes(); })
      .def_property_readonly("space", &StateVector::space)
      .def("norm", &StateVector::norm);

  py::class_<HermitianOperator>(m, "HermitianOperator")
      .def(py::init<HilbertSpace, Matrix>(), py::arg("space"),
           py::arg("matrix"))
      .def_property_readonly(
          "matrix",
          [](const HermitianOperator& o) -> Matrix { return o.matrix(); })
      .def_property_readonly("space", &HermitianOperator::space);

  py::class_<HamiltonianTermSet>(m, "HamiltonianTermSet")
      .def_property_readonly("term_count", &HamiltonianTermSet::term_count)
      .def_property_readonly("space", &HamiltonianTermSet::space)
      .def("label",
           [](const HamiltonianTermSet& s, int j) { return s.term(j).label; })
      .def("weight",
           [](const HamiltonianTermSet& s, int j) -> std::optional<double> {
             return s.term(j).weight_h;
           })
      .def("term_operator",
           [](const HamiltonianTermSet& s, int j) { return s.term(j).op; })
      .def_property_readonly(
          "total", [](const HamiltonianTermSet& s) { return s.total(); });

  py::class_<ModelSpec>(m, "ModelSpec");

  m.def(
      "mfim",
      [](int chain_length, double coupling_j, double h_x, double h_z,
         const std::string& boundary, std::optional<std::string> bits) {
        MfimParams params{chain_length, coupling_j, h_x, h_z,
                          boundary == "open" ? Boundary::Open
                                             : Boundary::Periodic};
        if (boundary != "open" && boundary != "periodic") {
          throw std::invalid_argument("boundary must be 'periodic' or 'open'");
        }
        ModelSpec spec = ModelSpec::mfim(params);
        if (bits) spec.initial_state = BitstringState{*bits};
        return spec;
      },
      py::arg("chain_length") = 4, py::arg("J") = 1.0, py::arg("h_x") = 0.5,
      py::arg("h_z") = 0.3, py::arg("boundary") = "periodic",
      py::arg("initial_bits") = std::nullopt);

  m.def(
      "kerr",
      [](double detuning, double kerr, double drive, int fock_dim,
         std::optional<std::vector<int>> levels) {
        ModelSpec spec = ModelSpec::kerr(KerrParams{detuning, kerr, drive,
                                                    fock_dim});
        if (levels) spec.initial_state = FockLevelsState{*levels};
        return spec;
      },
      py::arg("detuning") = 0.3, py::arg("kerr") = 1.0, py::arg("drive") = 0.5,
      py::arg("fock_dim") = 50, py::arg("initial_levels") = std::nullopt);

  m.def(
      "rabi",
      [](double omega, double qubit_omega, double coupling, int fock_dim,
         std::optional<std::vector<std::pair<int, int>>> levels) {
        ModelSpec spec = ModelSpec::rabi(RabiParams{omega, qubit_omega,
                                                    coupling, fock_dim});
        if (levels) spec.initial_state = FockQubitState{*levels};
        return spec;
      },
      py::arg("omega") = 1.0, py::arg("qubit_omega") = 1.0,
      py::arg("coupling") = 0.2, py::arg("fock_dim") = 50,
      py::arg("initial_levels") = std::nullopt);

  m.def("build_model", &build_model, py::arg("spec"));
  m.def("initial_state", &initial_state, py::arg("spec"));
  m.def("model_tag", &model_tag, py::arg("spec"));

  m.def("apply_exp", &apply_exp, py::arg("term"), py::arg("tau"),
        py::arg("psi"));
  m.def("evolve_exact", &evolve_exact, py::arg("hamiltonian"), py::arg("psi0"),
        py::arg("t"));
  m.def("expectation", &expectation, py::arg("op"), py::arg("psi"));
  m.def("variance", &variance, py::arg("op"), py::arg("psi"));
  m.def("qfi", &qfi, py::arg("generator"), py::arg("psi"));
  m.def("fidelity_pure", &fidelity_pure, py::arg("a"), py::arg("b"));
  m.def("spectral_norm", &spectral_norm, py::arg("op"));

  m.def(
      "pauli_decompose",
      [](const HermitianOperator& op) {
        std::vector<std::pair<double, std::string>> out;
        for (const PauliString& p : pauli_decompose(op)) {
          out.emplace_back(p.coefficient, p.letters_str());
        }
        return out;
      },
      py::arg("op"));

  py::class_<SamplingStrategy>(m, "SamplingStrategy")
      .def_property_readonly("tag", [](const SamplingStrategy& s) {
        return std::string(strategy_tag(s));
      });
  m.def("fixed_qdrift_strategy",
        [] { return SamplingStrategy{StrategyKind::FixedQDrift}; });
  m.def("equal_weight_strategy",
        [] { return SamplingStrategy{StrategyKind::EqualWeight}; });
  m.def("hard_truncation_strategy",
        [] { return SamplingStrategy{StrategyKind::HardTruncation}; });
  m.def("adaptive_strategy", &adaptive_strategy,
        py::arg("moment_source") = "exact", py::arg("delta_var") = 1e-12,
        py::arg("n_shots") = 10000, py::arg("mom_batches") = 10);

  m.def(
      "fluctuation_probabilities",
      [](const StateVector& psi, const HamiltonianTermSet& terms,
         double delta_var) {
        return fluctuation_probabilities(psi, terms, delta_var).probs();
      },
      py::arg("psi"), py::arg("terms"), py::arg("delta_var") = 1e-12);
  m.def(
      "fixed_probabilities",
      [](const HamiltonianTermSet& terms, const SamplingStrategy& strategy) {
        return fixed_probabilities(terms, strategy).probs();
      },
      py::arg("terms"), py::arg("strategy"));
  m.def(
      "predicted_fidelity",
      [](const StateVector& psi, const HamiltonianTermSet& terms,
         const std::vector<double>& probs, double t, int n_steps) {
        return predicted_fidelity(psi, terms, ProbabilityVector(probs), t,
                                  n_steps);
      },
      py::arg("psi"), py::arg("terms"), py::arg("probs"), py::arg("t"),
      py::arg("n_steps"));

  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("step", &StepRecord::step)
      .def_readonly("sampled_index", &StepRecord::sampled_index)
      .def_readonly("tau", &StepRecord::tau)
      .def_readonly("probabilities", &StepRecord::probabilities);

  py::class_<TrajectoryResult>(m, "TrajectoryResult")
      .def_readonly("fidelity", &TrajectoryResult::fidelity)
      .def_readonly("seed", &TrajectoryResult::seed)
      .def_readonly("step_log", &TrajectoryResult::step_log)
      .def_property_readonly("final_state", [](const TrajectoryResult& r) {
        return r.final_state;
      });

  m.def(
      "run_trajectory",
      [](const HamiltonianTermSet& terms, const StateVector& psi0, double t,
         int n_steps, const SamplingStrategy& strategy, std::uint64_t seed,
         bool record_steps) {
        Rng rng(seed);
        TrajectoryOptions options;
        options.record_steps = record_steps;
        options.seed = seed;
        return run_trajectory(terms, psi0, t, n_steps, strategy, rng, options);
      },
      py::arg("terms"), py::arg("psi0"), py::arg("t"), py::arg("n_steps"),
      py::arg("strategy"), py::arg("seed"), py::arg("record_steps") = false);

  py::class_<ShadowSet>(m, "ShadowSet")
      .def_property_readonly("source_seed",
                             [](const ShadowSet& s) { return s.source_seed; })
      .def("__len__", [](const ShadowSet& s) { return s.snapshots.size(); });

  m.def(
      "sample_shadow_set",
      [](const StateVector& psi, int n_shots, std::uint64_t seed) {
        Rng rng(seed);
        return sample_shadow_set(psi, n_shots, rng, seed);
      },
      py::arg("psi"), py::arg("n_shots"), py::arg("seed"));
  m.def(
      "estimate_pauli",
      [](const ShadowSet& shadow, const std::string& letters,
         int mom_batches) {
        return estimate_pauli(shadow, make_pauli(1.0, letters), mom_batches);
      },
      py::arg("shadow"), py::arg("letters"), py::arg("mom_batches") = 1);
  m.def(
      "estimate_term_moments",
      [](const ShadowSet& shadow,
         const std::vector<std::pair<double, std::string>>& strings,
         int mom_batches) {
        const ShadowConfig config{static_cast<int>(shadow.snapshots.size()),
                                  mom_batches};
        const ShadowMoments mom =
            estimate_term_moments(shadow, make_paulis(strings), config);
        return py::make_tuple(mom.mean, mom.second_moment, mom.variance_se);
      },
      py::arg("shadow"), py::arg("strings"), py::arg("mom_batches") = 1);
  m.def("save_shadow_set", &save_shadow_set, py::arg("path"),
        py::arg("shadow"));
  m.def("load_shadow_set", &load_shadow_set, py::arg("path"));

  m.def(
      "run_experiment",
      [](const std::string& command, const std::string& config_json) {
        const RunConfig config =
            parse_run_config(nlohmann::json::parse(config_json));
        ExperimentResult result;
        if (command == "run") {
          result = monte_carlo_fidelity(config);
        } else if (command == "sweep-steps") {
          result = sweep_steps(config);
        } else if (command == "sweep-stepsize") {
          result = sweep_stepsize(config);
        } else if (command == "trace-probs") {
          result = trace_probabilities(config);
        } else if (command == "shadow-bench") {
          result = shadow_bench(config);
        } else {
          throw std::invalid_argument(
              "command must be run, sweep-steps, sweep-stepsize, trace-probs "
              "or shadow-bench");
        }
        return experiment_to_py(result);
      },
      py::arg("command"), py::arg("config_json"));

  m.def(
      "extrapolate_zero_step",
      [](const std::vector<std::pair<double, double>>& points) {
        const LinearFit fit = extrapolate_zero_step(points);
        return py::make_tuple(fit.intercept, fit.slope, fit.intercept_se);
      },
      py::arg("points"));

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ResourceLimitError>(m, "ResourceLimitError",
                                             PyExc_RuntimeError);
}
