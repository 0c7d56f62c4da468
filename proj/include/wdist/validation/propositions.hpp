#pragma once

#include <nlohmann/json.hpp>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wdist/core/parallel.hpp"
#include "wdist/features/extract.hpp"
#include "wdist/ml/model.hpp"
#include "wdist/quantum/gates.hpp"
#include "wdist/quantum/ops.hpp"
#include "wdist/validation/measurement.hpp"
#include "wdist/validation/noise.hpp"
#include "wdist/validation/report.hpp"

namespace wdist {

/// Predicts operation distances from Choi-state pairs with a trained model.
class ChoiDistanceModel {
 public:
  ChoiDistanceModel(const ml::RegressionModel& model, int gate_qubits) : model_(&model) {
    if (model.layout.n_qubits != 2 * gate_qubits)
      throw CompatibilityError("model layout is for " + std::to_string(model.layout.n_qubits) +
                               "-qubit states, " + std::to_string(gate_qubits) + "-qubit gates need " +
                               std::to_string(2 * gate_qubits));
  }

  /// One prediction per (a, b) pair, made in a single batch.
  std::vector<double> predict(const std::vector<std::pair<DensityMatrix, DensityMatrix>>& pairs) const {
    ml::Matrix x(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(model_->layout.total_length));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto fv = extract_features(pairs[i].first, pairs[i].second, model_->layout);
      for (std::size_t j = 0; j < fv.values.size(); ++j)
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fv.values[j];
    }
    const ml::Vector y = ml::predict(*model_, x, model_->layout_hash);
    return {y.data(), y.data() + y.size()};
  }

 private:
  const ml::RegressionModel* model_;
};

// ------------------------------------------------------------ operations bound

struct Prop1Config {
  int n_qubits = 1;
  std::size_t trials = 300;
  double eps_min = 0.01;
  double eps_max = 0.3;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const Prop1Config& c) {
  return {{"n_qubits", c.n_qubits}, {"trials", c.trials}, {"eps_min", c.eps_min}, {"eps_max", c.eps_max},
          {"seed", c.seed}};
}

/// Inputs of one operations-bound trial.
struct Prop1Inputs {
  UnitaryGate u, v;
  CVector psi;
  CMatrix povm;
  double lambda_max = 0.0;
  double epsilon = 0.0;
};

inline Prop1Inputs draw_prop1_inputs(const Prop1Config& c, std::size_t trial) {
  SeededRandomSource rng(derive_seed(c.seed, trial));
  Prop1Inputs in;
  in.u = random_unitary(c.n_qubits, rng);
  in.epsilon = rng.log_uniform(c.eps_min, c.eps_max);
  in.v = perturb_unitary(in.u, in.epsilon, rng);
  in.psi = random_state_vector(c.n_qubits, rng);
  in.lambda_max = rng.uniform_open_low();
  in.povm = sample_povm_element(c.n_qubits, rng, in.lambda_max);
  return in;
}

/// Gap |P_U − P_V| against 2·λ_max·D for the true distance and, when given,
/// the predicted one.
inline TrialRecord prop1_record(std::size_t trial, const Prop1Inputs& in, double d_true,
                                std::optional<double> d_pred) {
  TrialRecord t;
  t.trial = trial;
  t.gap = std::abs(measurement_probability(in.u, in.psi, in.povm) - measurement_probability(in.v, in.psi, in.povm));
  t.d_true = d_true;
  t.bound_true = 2.0 * in.lambda_max * d_true;
  const RatioCheck ct = check_bound(t.gap, t.bound_true);
  t.ratio_true = ct.ratio;
  t.slack_true = ct.slack;
  t.violation_true = ct.violation;
  if (d_pred) {
    t.d_pred = d_pred;
    t.bound_pred = 2.0 * in.lambda_max * *d_pred;
    const RatioCheck cp = check_bound(t.gap, *t.bound_pred);
    t.ratio_pred = cp.ratio;
    t.slack_pred = cp.slack;
    t.violation_pred = cp.violation;
  }
  t.extra = {{"epsilon", in.epsilon}, {"lambda_max", in.lambda_max}};
  return t;
}

/// Monte-Carlo check of |P_U(m) − P_V(m)| ≤ 2 λ_max(M) D(U, V) over random
/// gates, small perturbations, pure inputs and POVM elements. Trial t draws
/// from derive_seed(seed, t), so the report does not depend on `workers`.
inline ValidationReport validate_prop1(const Prop1Config& c, const ml::RegressionModel* model = nullptr,
                                       int workers = 1) {
  check_qubits(c.n_qubits, "validate_prop1");
  if (c.trials < 1) throw ParameterError("validate_prop1: trials must be >= 1");
  if (!(c.eps_min > 0.0) || c.eps_max < c.eps_min) throw ParameterError("validate_prop1: invalid epsilon range");
  std::optional<ChoiDistanceModel> predictor;
  if (model) predictor.emplace(*model, c.n_qubits);

  std::vector<TrialRecord> records(c.trials);
  std::vector<std::pair<double, double>> pairs(model ? c.trials : 0);
  parallel_for(c.trials, workers, [&](std::size_t i) {
    const Prop1Inputs in = draw_prop1_inputs(c, i);
    DensityMatrix phi_u = choi_state(in.u), phi_v = choi_state(in.v);
    const double d_true = trace_distance(phi_u, phi_v);
    std::optional<double> d_pred;
    if (predictor) {
      d_pred = predictor->predict({{std::move(phi_u), std::move(phi_v)}}).front();
      pairs[i] = {*d_pred, d_true};
    }
    records[i] = prop1_record(i, in, d_true, d_pred);
  });

  ValidationReport r;
  r.proposition = "prop1";
  r.config = to_json(c);
  r.records = std::move(records);
  summarize(r, pairs);
  return r;
}

// ------------------------------------------------------------ error-rate bound

struct Prop2Config {
  int n_qubits = 2;
  std::size_t trials = 200;
  int noise_unitaries = 32;
  int n_states = 64;
  double eps_min = 0.01;
  double eps_max = 0.3;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const Prop2Config& c) {
  return {{"n_qubits", c.n_qubits}, {"trials", c.trials},   {"noise_unitaries", c.noise_unitaries},
          {"n_states", c.n_states}, {"eps_min", c.eps_min}, {"eps_max", c.eps_max},
          {"seed", c.seed}};
}

struct Prop2Inputs {
  UnitaryGate u;
  MixedUnitaryChannel noise;
  std::vector<DensityMatrix> states;
};

inline Prop2Inputs draw_prop2_inputs(const Prop2Config& c, std::size_t trial) {
  SeededRandomSource rng(derive_seed(c.seed, trial));
  Prop2Inputs in;
  in.u = random_unitary(c.n_qubits, rng);
  const auto identity = UnitaryGate::identity(c.n_qubits);
  std::vector<UnitaryGate> vs;
  vs.reserve(static_cast<std::size_t>(c.noise_unitaries));
  for (int k = 0; k < c.noise_unitaries; ++k) vs.push_back(perturb_unitary(identity, rng.log_uniform(c.eps_min, c.eps_max), rng));
  const auto p = rng.simplex(vs.size());
  std::vector<MixedUnitaryChannel::Component> parts;
  for (std::size_t k = 0; k < vs.size(); ++k) parts.push_back({p[k], std::move(vs[k])});
  in.noise = MixedUnitaryChannel(std::move(parts));
  for (int s = 0; s < c.n_states; ++s) in.states.push_back(random_pure_state(c.n_qubits, rng));
  return in;
}

/// Choi pairs (Φ_I, Φ_{U V_k U†}) whose distances enter the bound.
inline std::vector<std::pair<DensityMatrix, DensityMatrix>> recovery_choi_pairs(const Prop2Inputs& in) {
  const DensityMatrix phi_i = choi_state(UnitaryGate::identity(in.u.n_qubits()));
  std::vector<std::pair<DensityMatrix, DensityMatrix>> out;
  for (const auto& comp : in.noise.components())
    out.emplace_back(phi_i, choi_state(in.u * comp.gate * in.u.adjoint()));
  return out;
}

/// Error rate against (1/n)·Σ p_k D(I, U V_k U†) for true and, when given,
/// predicted recovery distances (`d_pred` aligned with the channel components).
inline TrialRecord prop2_record(std::size_t trial, const Prop2Inputs& in, const std::vector<double>& d_true,
                                const std::vector<double>* d_pred) {
  const auto& comps = in.noise.components();
  const double n = in.u.n_qubits();
  TrialRecord t;
  t.trial = trial;
  t.gap = gate_error_rate(in.u, in.noise, in.states);
  double b_true = 0.0, mean_true = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    b_true += comps[k].probability * d_true[k];
    mean_true += d_true[k] / comps.size();
  }
  t.d_true = mean_true;
  t.bound_true = b_true / n;
  const RatioCheck ct = check_bound(t.gap, t.bound_true);
  t.ratio_true = ct.ratio;
  t.slack_true = ct.slack;
  t.violation_true = ct.violation;
  if (d_pred) {
    double b_pred = 0.0, mean_pred = 0.0;
    for (std::size_t k = 0; k < comps.size(); ++k) {
      b_pred += comps[k].probability * (*d_pred)[k];
      mean_pred += (*d_pred)[k] / comps.size();
    }
    t.d_pred = mean_pred;
    t.bound_pred = b_pred / n;
    const RatioCheck cp = check_bound(t.gap, *t.bound_pred);
    t.ratio_pred = cp.ratio;
    t.slack_pred = cp.slack;
    t.violation_pred = cp.violation;
  }
  t.extra = {{"noise_unitaries", comps.size()}};
  return t;
}

/// Monte-Carlo check of e(U, V) ≤ (1/n) Σ_k p_k D(I, U V_k U†) for random
/// gates under random mixed-unitary noise. e is estimated by maximizing over
/// `n_states` random pure states, which can only underestimate it.
inline ValidationReport validate_prop2(const Prop2Config& c, const ml::RegressionModel* model = nullptr,
                                       int workers = 1) {
  check_qubits(c.n_qubits, "validate_prop2");
  if (c.trials < 1) throw ParameterError("validate_prop2: trials must be >= 1");
  if (c.noise_unitaries < 1) throw ParameterError("validate_prop2: need at least one noise unitary");
  if (c.n_states < 1) throw ParameterError("validate_prop2: n_states must be >= 1");
  if (!(c.eps_min > 0.0) || c.eps_max < c.eps_min) throw ParameterError("validate_prop2: invalid epsilon range");
  std::optional<ChoiDistanceModel> predictor;
  if (model) predictor.emplace(*model, c.n_qubits);

  const std::size_t k = static_cast<std::size_t>(c.noise_unitaries);
  std::vector<TrialRecord> records(c.trials);
  std::vector<std::pair<double, double>> pairs(model ? c.trials * k : 0);
  parallel_for(c.trials, workers, [&](std::size_t i) {
    const Prop2Inputs in = draw_prop2_inputs(c, i);
    const auto choi_pairs = recovery_choi_pairs(in);
    std::vector<double> d_true;
    for (const auto& [a, b] : choi_pairs) d_true.push_back(trace_distance(a, b));
    if (predictor) {
      const auto d_pred = predictor->predict(choi_pairs);
      for (std::size_t j = 0; j < k; ++j) pairs[i * k + j] = {d_pred[j], d_true[j]};
      records[i] = prop2_record(i, in, d_true, &d_pred);
    } else {
      records[i] = prop2_record(i, in, d_true, nullptr);
    }
  });

  ValidationReport r;
  r.proposition = "prop2";
  r.config = to_json(c);
  r.records = std::move(records);
  summarize(r, pairs);
  return r;
}

// ---------------------------------------------------------- noise sensitivity

inline const std::vector<std::string>& default_sensitivity_gates() {
  static const std::vector<std::string> gates = {"swap", "cz", "cs", "toffoli", "fredkin"};
  return gates;
}

struct SensitivityConfig {
  std::vector<std::string> gates = default_sensitivity_gates();
  std::vector<NoiseKind> noises = all_noise_kinds();
  double strength = 0.1;
  double angle = 1.5707963267948966;
  int n_states = 64;
  std::uint64_t seed = 0;
};

struct GateSensitivityReport {
  std::vector<std::string> gates;
  std::vector<NoiseKind> noises;
  std::vector<std::vector<double>> error_rates;  ///< [gate][noise]
  std::string distance_source;
  nlohmann::json config;
};

/// Gate error rate for every (gate, noise) cell. Cell (g, k) draws its noise
/// and states from derive_seed(derive_seed(seed, g), k). With models given,
/// `models[n]` must predict distances between n-qubit states for each gate size n.
inline GateSensitivityReport gate_noise_sensitivity(const SensitivityConfig& c,
                                                    const std::map<int, const ml::RegressionModel*>& models = {},
                                                    int workers = 1) {
  if (c.n_states < 1) throw ParameterError("gate_noise_sensitivity: n_states must be >= 1");
  std::vector<UnitaryGate> gates;
  for (const auto& name : c.gates) {
    if (name == "identity") throw ParameterError("gate_noise_sensitivity: identity is not a sensitivity target");
    gates.push_back(named_gate(name));
  }
  for (const auto& g : gates) {
    if (models.empty()) break;
    const auto it = models.find(g.n_qubits());
    if (it == models.end() || !it->second)
      throw CompatibilityError("gate_noise_sensitivity: no model for " + std::to_string(g.n_qubits()) + "-qubit states");
    if (it->second->layout.n_qubits != g.n_qubits())
      throw CompatibilityError("gate_noise_sensitivity: model layout does not match its qubit slot");
  }

  GateSensitivityReport r;
  r.gates = c.gates;
  r.noises = c.noises;
  r.distance_source = models.empty() ? "true" : "model";
  r.error_rates.assign(gates.size(), std::vector<double>(c.noises.size(), 0.0));
  const std::size_t cols = c.noises.size();
  parallel_for(gates.size() * cols, workers, [&](std::size_t cell) {
    const std::size_t g = cell / cols, k = cell % cols;
    SeededRandomSource rng(derive_seed(derive_seed(c.seed, g), k));
    const NoiseSpec spec{c.noises[k], c.strength, c.angle};
    const auto channel = make_noise_channel(spec, gates[g].n_qubits(), rng);
    StateDistance distance = true_state_distance;
    if (!models.empty()) {
      const ml::RegressionModel* m = models.at(gates[g].n_qubits());
      distance = [m](const DensityMatrix& a, const DensityMatrix& b) {
        return ml::predict_one(*m, extract_features(a, b, m->layout).values, m->layout);
      };
    }
    r.error_rates[g][k] = gate_error_rate(gates[g], channel, c.n_states, rng, distance);
  });

  nlohmann::json noises = nlohmann::json::array();
  for (auto n : c.noises) noises.push_back(to_string(n));
  r.config = {{"gates", c.gates}, {"noises", noises},         {"strength", c.strength},
              {"angle", c.angle}, {"n_states", c.n_states},   {"seed", c.seed},
              {"distance", r.distance_source}};
  return r;
}

/// Rows are gates, columns noise kinds.
inline std::string sensitivity_csv(const GateSensitivityReport& r) {
  std::string out = "gate";
  for (auto n : r.noises) out += std::string(",") + to_string(n);
  out += '\n';
  for (std::size_t g = 0; g < r.gates.size(); ++g) {
    out += r.gates[g];
    for (double e : r.error_rates[g]) out += ',' + format_double(e);
    out += '\n';
  }
  return out;
}

inline nlohmann::json to_json(const GateSensitivityReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t g = 0; g < r.gates.size(); ++g) {
    nlohmann::json row = {{"gate", r.gates[g]}};
    for (std::size_t k = 0; k < r.noises.size(); ++k) row[to_string(r.noises[k])] = r.error_rates[g][k];
    rows.push_back(std::move(row));
  }
  return {{"proposition", "gates"}, {"config", r.config}, {"error_rates", rows}};
}

}  // namespace wdist
