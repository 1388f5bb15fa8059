#pragma once

// Evaluation and cost accounting: confusion counts with error slots excluded,
// precision/recall/F1, prevalence-shift projection and nearest-rank cost
// quantiles.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t errors = 0;   // excluded slots
  std::size_t blocked = 0;  // gated sessions that never cleared; reported, not scored
};

struct Prf {
  std::optional<double> precision;  // absent when tp+fp == 0
  std::optional<double> recall;     // absent when tp+fn == 0
  std::optional<double> f1;         // absent when either side is absent or P+R == 0
};

Prf prf(const ConfusionCounts& counts);
Prf prf_from_rates(double precision, double recall);

struct PriorShiftPoint {
  double prevalence = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Holds TPR/FPR fixed while varying the assumed phishing prevalence:
// precision = TPR*pi / (TPR*pi + FPR*(1-pi)), recall = TPR.
PriorShiftPoint prior_shift(double tpr, double fpr, double prevalence);

enum class Outcome { phishing, benign, error };

std::string_view outcome_name(Outcome o);
std::optional<Outcome> outcome_from_name(std::string_view name);

// Aligned predictions vs labels; error predictions are tallied separately and
// excluded from the matrix. Throws EvalError on length mismatch.
ConfusionCounts evaluate(const std::vector<Outcome>& predictions,
                         const std::vector<Outcome>& labels);

struct CostRecord {
  std::vector<double> per_item_usd;
  double fixed_operator_usd = 0.20;
  double p50 = 0.0;
  double p99 = 0.0;

  double total_p50() const { return p50 + fixed_operator_usd; }
  double total_p99() const { return p99 + fixed_operator_usd; }
};

// Nearest-rank on the sorted sample: the (floor(p/100*n)+1)-th smallest
// value, clamped to the largest. Exact, never interpolated. Throws EvalError
// on an empty sample.
double nearest_rank_quantile(std::vector<double> values, double percentile);
CostRecord cost_quantiles(const std::vector<double>& costs,
                          double fixed_operator_usd = 0.20);

// metrics.v1: tab-separated, headered, fixed 4-decimal formatting.
std::string metrics_v1(const ConfusionCounts& counts);

// One prior-shift curve row per grid point, same formatting contract.
std::string curve_tsv(double tpr, double fpr, double grid_start, double grid_end,
                      double grid_step);

std::string format4(double v);  // fixed 4-decimal rendering

}  // namespace triage
