#include "mmm/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmm/error.hpp"

namespace mmm {

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strictly = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) strictly = true;
  }
  return strictly;
}

std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<std::vector<double>>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Lexicographic order guarantees no point is dominated by a later one.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

  std::vector<std::vector<std::size_t>> fronts;
  for (std::size_t p : order) {
    std::size_t k = 0;
    for (; k < fronts.size(); ++k) {
      const auto& f = fronts[k];
      const bool dominated = std::any_of(f.rbegin(), f.rend(), [&](std::size_t q) {
        return dominates(points[q], points[p]);
      });
      if (!dominated) break;
    }
    if (k == fronts.size()) fronts.emplace_back();
    fronts[k].push_back(p);
  }
  for (auto& f : fronts) std::sort(f.begin(), f.end());
  return fronts;
}

ParetoConfig pareto_config(const SearchResult& result) {
  return {result.config.weights, result.calibrated, result.config.calibration_constraint,
          result.config.min_candidates};
}

std::vector<std::size_t> ParetoResult::members() const {
  std::vector<std::size_t> out;
  for (const auto& f : fronts) out.insert(out.end(), f.begin(), f.end());
  return out;
}

std::size_t ParetoResult::size() const {
  std::size_t n = 0;
  for (const auto& f : fronts) n += f.size();
  return n;
}

std::vector<double> active_objectives(const CandidateModel& m, const ParetoConfig& cfg) {
  std::vector<double> v;
  if (cfg.weights.nrmse > 0.0) v.push_back(m.scores.nrmse);
  if (cfg.weights.decomp_rssd > 0.0) v.push_back(m.scores.decomp_rssd);
  if (cfg.calibrated) {
    if (!m.scores.mape_lift) throw InputError("search", "candidate lacks MAPE.LIFT under calibration");
    v.push_back(*m.scores.mape_lift);
  }
  return v;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("search", "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ParetoResult pareto_fronts(const std::vector<CandidateModel>& archive, const ParetoConfig& cfg) {
  ParetoResult out;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < archive.size(); ++i) {
    if (archive[i].ok) pool.push_back(i);
  }
  if (pool.empty()) return out;

  if (cfg.calibrated) {
    std::vector<double> mape;
    for (std::size_t i : pool) mape.push_back(*archive[i].scores.mape_lift);
    const double threshold = quantile(mape, cfg.calibration_constraint);
    out.mape_threshold = threshold;
    std::vector<std::size_t> kept;
    for (std::size_t i : pool) {
      if (*archive[i].scores.mape_lift <= threshold) kept.push_back(i);
    }
    out.calibration_excluded = pool.size() - kept.size();
    pool = std::move(kept);
  }

  std::vector<std::vector<double>> points;
  points.reserve(pool.size());
  for (std::size_t i : pool) points.push_back(active_objectives(archive[i], cfg));
  std::size_t retained = 0;
  for (auto& f : nondominated_sort(points)) {
    for (auto& j : f) j = pool[j];
    retained += f.size();
    out.fronts.push_back(std::move(f));
    if (retained >= cfg.min_candidates) break;
  }
  return out;
}

void assign_fronts(std::vector<CandidateModel>& archive, const ParetoResult& pareto) {
  for (auto& m : archive) m.pareto_front.reset();
  for (std::size_t k = 0; k < pareto.fronts.size(); ++k) {
    for (std::size_t i : pareto.fronts[k]) archive[i].pareto_front = static_cast<int>(k + 1);
  }
}

std::size_t select_best(const std::vector<CandidateModel>& archive, const ParetoResult& pareto) {
  if (pareto.fronts.empty() || pareto.fronts.front().empty()) {
    throw InputError("search", "no successful candidates to select from");
  }
  const auto& f = pareto.fronts.front();
  return *std::min_element(f.begin(), f.end(), [&](std::size_t a, std::size_t b) {
    const double sa = archive[a].scores.scalar;
    const double sb = archive[b].scores.scalar;
    return sa < sb || (sa == sb && a < b);
  });
}

}  // namespace mmm
