#include "triage/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "triage/errors.hpp"

namespace triage {

std::string format4(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

Prf prf(const ConfusionCounts& c) {
  Prf out;
  if (c.tp + c.fp > 0)
    out.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0)
    out.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (out.precision && out.recall && (*out.precision + *out.recall) > 0)
    out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
  return out;
}

Prf prf_from_rates(double precision, double recall) {
  Prf out;
  out.precision = precision;
  out.recall = recall;
  if (precision + recall > 0) out.f1 = 2.0 * precision * recall / (precision + recall);
  return out;
}

PriorShiftPoint prior_shift(double tpr, double fpr, double prevalence) {
  PriorShiftPoint p;
  p.prevalence = prevalence;
  p.recall = tpr;
  double num = tpr * prevalence;
  double den = tpr * prevalence + fpr * (1.0 - prevalence);
  p.precision = den > 0 ? num / den : 0.0;
  p.f1 = (p.precision + p.recall) > 0
             ? 2.0 * p.precision * p.recall / (p.precision + p.recall)
             : 0.0;
  return p;
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::phishing: return "phishing";
    case Outcome::benign: return "benign";
    case Outcome::error: return "error";
  }
  return "error";
}

std::optional<Outcome> outcome_from_name(std::string_view name) {
  if (name == "phishing") return Outcome::phishing;
  if (name == "benign") return Outcome::benign;
  if (name == "error") return Outcome::error;
  return std::nullopt;
}

ConfusionCounts evaluate(const std::vector<Outcome>& predictions,
                         const std::vector<Outcome>& labels) {
  if (predictions.size() != labels.size())
    throw EvalError("evaluate: predictions and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (labels[i] == Outcome::error)
      throw EvalError("evaluate: labels must be phishing or benign");
    if (predictions[i] == Outcome::error) {
      ++c.errors;
      continue;
    }
    const bool truth = labels[i] == Outcome::phishing;
    const bool pred = predictions[i] == Outcome::phishing;
    if (pred && truth) ++c.tp;
    else if (pred && !truth) ++c.fp;
    else if (!pred && truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double nearest_rank_quantile(std::vector<double> values, double percentile) {
  if (values.empty()) throw EvalError("quantile of an empty sample");
  if (percentile < 0.0 || percentile > 100.0)
    throw EvalError("percentile out of [0,100]");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  std::size_t rank = static_cast<std::size_t>(
                         std::floor(percentile / 100.0 * static_cast<double>(n))) + 1;
  if (rank > n) rank = n;
  return values[rank - 1];
}

CostRecord cost_quantiles(const std::vector<double>& costs, double fixed_operator_usd) {
  if (costs.empty()) throw EvalError("cost_quantiles: empty cost list");
  CostRecord r;
  r.per_item_usd = costs;
  r.fixed_operator_usd = fixed_operator_usd;
  r.p50 = nearest_rank_quantile(costs, 50.0);
  r.p99 = nearest_rank_quantile(costs, 99.0);
  return r;
}

std::string metrics_v1(const ConfusionCounts& c) {
  Prf m = prf(c);
  auto cell = [](const std::optional<double>& v) {
    return v ? format4(*v) : std::string("absent");
  };
  std::string out;
  out += "precision\trecall\tf1\ttp\tfp\tfn\ttn\terrors\tblocked\n";
  out += cell(m.precision) + "\t" + cell(m.recall) + "\t" + cell(m.f1) + "\t" +
         std::to_string(c.tp) + "\t" + std::to_string(c.fp) + "\t" +
         std::to_string(c.fn) + "\t" + std::to_string(c.tn) + "\t" +
         std::to_string(c.errors) + "\t" + std::to_string(c.blocked) + "\n";
  return out;
}

std::string curve_tsv(double tpr, double fpr, double grid_start, double grid_end,
                      double grid_step) {
  if (grid_step <= 0 || grid_start <= 0 || grid_end >= 1 || grid_start > grid_end)
    throw EvalError("curve grid must lie inside (0,1) with positive step");
  std::string out = "prevalence\tprecision\trecall\tf1\n";
  // Integer stepping avoids accumulating float error across the grid.
  long steps = std::lround((grid_end - grid_start) / grid_step);
  for (long i = 0; i <= steps; ++i) {
    double pi = grid_start + grid_step * static_cast<double>(i);
    if (pi <= 0.0 || pi >= 1.0) continue;
    PriorShiftPoint p = prior_shift(tpr, fpr, pi);
    out += format4(p.prevalence) + "\t" + format4(p.precision) + "\t" +
           format4(p.recall) + "\t" + format4(p.f1) + "\n";
  }
  return out;
}

}  // namespace triage
