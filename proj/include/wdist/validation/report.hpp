#pragma once

#include <nlohmann/json.hpp>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wdist/core/format.hpp"

namespace wdist {

/// One Monte-Carlo trial. `gap` is the measured side of the inequality (a
/// probability difference or an error rate) and each bound is the side the
/// inequality promises to dominate it.
struct TrialRecord {
  std::size_t trial = 0;
  double gap = 0.0;
  double d_true = 0.0;
  std::optional<double> d_pred;
  double bound_true = 0.0;
  std::optional<double> bound_pred;
  std::optional<double> ratio_true;
  std::optional<double> ratio_pred;
  double slack_true = 0.0;
  std::optional<double> slack_pred;
  bool violation_true = false;
  bool violation_pred = false;
  nlohmann::json extra = nlohmann::json::object();  ///< proposition-specific inputs (ε, λ_max, ...)
};

struct RatioCheck {
  std::optional<double> ratio;
  double slack = 0.0;
  bool violation = false;
};

/// gap/bound when bound > 0. With a non-positive bound the ratio is undefined
/// and the trial only counts as a violation if the gap itself is positive.
inline RatioCheck check_bound(double gap, double bound) {
  RatioCheck c;
  c.slack = bound - gap;
  if (bound > 0.0) {
    c.ratio = gap / bound;
    c.violation = *c.ratio > 1.0;
  } else {
    c.violation = gap > 0.0;
  }
  return c;
}

struct ValidationReport {
  std::string proposition;
  std::size_t trials = 0;
  std::size_t violations_true = 0;
  std::optional<std::size_t> violations_pred;
  std::optional<double> max_ratio_true;
  std::optional<double> max_ratio_pred;
  std::optional<double> min_slack_true;
  std::optional<double> min_slack_pred;
  std::optional<double> model_mse;
  std::optional<double> model_mae;
  nlohmann::json config = nlohmann::json::object();
  std::vector<TrialRecord> records;

  std::size_t total_violations() const { return violations_true + violations_pred.value_or(0); }
};

namespace detail {
inline void fold_max(std::optional<double>& acc, const std::optional<double>& v) {
  if (v && (!acc || *v > *acc)) acc = v;
}
inline void fold_min(std::optional<double>& acc, const std::optional<double>& v) {
  if (v && (!acc || *v < *acc)) acc = v;
}
template <typename T>
nlohmann::json opt_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
}  // namespace detail

/// Counts and extremes from the records; `distance_pairs` holds every
/// (predicted, true) distance the model produced.
inline void summarize(ValidationReport& r, const std::vector<std::pair<double, double>>& distance_pairs) {
  r.trials = r.records.size();
  r.violations_true = 0;
  const bool has_pred = !distance_pairs.empty();
  if (has_pred) r.violations_pred = 0;
  for (const auto& t : r.records) {
    r.violations_true += t.violation_true ? 1 : 0;
    if (has_pred) *r.violations_pred += t.violation_pred ? 1 : 0;
    detail::fold_max(r.max_ratio_true, t.ratio_true);
    detail::fold_max(r.max_ratio_pred, t.ratio_pred);
    detail::fold_min(r.min_slack_true, t.slack_true);
    detail::fold_min(r.min_slack_pred, t.slack_pred);
  }
  if (has_pred) {
    double se = 0.0, ae = 0.0;
    for (auto [pred, truth] : distance_pairs) {
      se += (pred - truth) * (pred - truth);
      ae += std::abs(pred - truth);
    }
    r.model_mse = se / static_cast<double>(distance_pairs.size());
    r.model_mae = ae / static_cast<double>(distance_pairs.size());
  }
}

inline nlohmann::json to_json(const TrialRecord& t) {
  using detail::opt_json;
  nlohmann::json j = {{"trial", t.trial},
                      {"gap", t.gap},
                      {"d_true", t.d_true},
                      {"d_pred", opt_json(t.d_pred)},
                      {"bound_true", t.bound_true},
                      {"bound_pred", opt_json(t.bound_pred)},
                      {"ratio_true", opt_json(t.ratio_true)},
                      {"ratio_pred", opt_json(t.ratio_pred)},
                      {"slack_true", t.slack_true},
                      {"slack_pred", opt_json(t.slack_pred)},
                      {"violation_true", t.violation_true},
                      {"violation_pred", t.violation_pred}};
  for (const auto& [k, v] : t.extra.items()) j[k] = v;
  return j;
}

inline nlohmann::json to_json(const ValidationReport& r, bool with_records = true) {
  using detail::opt_json;
  nlohmann::json j = {{"proposition", r.proposition},
                      {"trials", r.trials},
                      {"violations_true", r.violations_true},
                      {"violations_pred", opt_json(r.violations_pred)},
                      {"max_ratio_true", opt_json(r.max_ratio_true)},
                      {"max_ratio_pred", opt_json(r.max_ratio_pred)},
                      {"min_slack_true", opt_json(r.min_slack_true)},
                      {"min_slack_pred", opt_json(r.min_slack_pred)},
                      {"model_mse", opt_json(r.model_mse)},
                      {"model_mae", opt_json(r.model_mae)},
                      {"config", r.config}};
  if (with_records) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& t : r.records) recs.push_back(to_json(t));
    j["records"] = std::move(recs);
  }
  return j;
}

inline constexpr int kRatioHistogramBins = 20;

/// Ratio histogram: 20 bins of width 0.05 on [0, 1) and one overflow bin for
/// ratios ≥ 1. Undefined ratios are left out.
inline std::string ratio_histogram_csv(const ValidationReport& r) {
  std::vector<std::size_t> true_counts(kRatioHistogramBins + 1, 0), pred_counts(kRatioHistogramBins + 1, 0);
  auto bin_of = [](double ratio) {
    if (ratio >= 1.0) return kRatioHistogramBins;
    return std::clamp(static_cast<int>(ratio * kRatioHistogramBins), 0, kRatioHistogramBins - 1);
  };
  for (const auto& t : r.records) {
    if (t.ratio_true) ++true_counts[static_cast<std::size_t>(bin_of(*t.ratio_true))];
    if (t.ratio_pred) ++pred_counts[static_cast<std::size_t>(bin_of(*t.ratio_pred))];
  }
  std::string out = "bin_lo,bin_hi,count_true,count_pred\n";
  for (int b = 0; b <= kRatioHistogramBins; ++b) {
    const double lo = static_cast<double>(b) / kRatioHistogramBins;
    out += format_double(lo) + ',';
    out += b == kRatioHistogramBins ? std::string("inf") : format_double(static_cast<double>(b + 1) / kRatioHistogramBins);
    out += ',' + std::to_string(true_counts[static_cast<std::size_t>(b)]) + ',' +
           std::to_string(pred_counts[static_cast<std::size_t>(b)]) + '\n';
  }
  return out;
}

}  // namespace wdist
