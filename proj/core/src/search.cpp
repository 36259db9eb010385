#include "mmm/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "mmm/error.hpp"

namespace mmm {

void SearchConfig::validate() const {
  if (trials < 1) throw InputError("search", "trials must be at least 1");
  if (iterations < population) {
    throw InputError("search", "iterations must be at least the population size (" +
                                   std::to_string(population) + ")");
  }
  weights.validate();
  if (!(calibration_constraint >= 0.01 && calibration_constraint <= 0.1)) {
    throw InputError("search", "calibration_constraint must lie in [0.01, 0.1]");
  }
  if (min_candidates < 1) throw InputError("search", "min_candidates must be at least 1");
}

std::size_t SearchConfig::resolved_workers() const {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 1 ? hw - 1 : 1;
}

std::size_t SearchResult::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < archive.size(); ++i) {
    if (archive[i].id == id) return i;
  }
  throw InputError("search", "unknown model id '" + std::string(id) + "'");
}

const CandidateModel& SearchResult::find(std::string_view id) const { return archive[index_of(id)]; }

std::size_t SearchResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(archive.begin(), archive.end(), [](const CandidateModel& m) { return !m.ok; }));
}

bool calibration_active(const ModelContext& ctx, const ObjectiveWeights& weights) {
  if (weights.mape_lift > 0.0 && !ctx.has_studies()) {
    throw InputError("search", "MAPE.LIFT weight is positive but no calibration input was given");
  }
  return ctx.has_studies() && weights.mape_lift > 0.0;
}

std::string candidate_id(int trial, int iteration, int index) {
  return std::to_string(trial) + "_" + std::to_string(iteration) + "_" + std::to_string(index);
}

namespace {

double scalar_of(const CandidateModel& m, const ObjectiveWeights& w, const ObjectiveRanges& r) {
  if (!m.ok) return std::numeric_limits<double>::infinity();
  return scalarize(m.scores, w, r);
}

std::vector<CandidateModel> evaluate_batch(const ModelContext& ctx, const HyperparameterSpace& space,
                                           const std::vector<std::vector<double>>& points,
                                           std::size_t workers) {
  std::vector<CandidateModel> out(points.size());
  auto work = [&](std::size_t i) { out[i] = evaluate_candidate(ctx, space, space.decode(points[i])); };
  workers = std::min(workers, points.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) work(i);
      });
    }
  }
  return out;
}

}  // namespace

void rescore_archive(SearchResult& result) {
  result.ranges = {};
  for (const auto& m : result.archive) {
    if (m.ok) result.ranges.include(m.scores);
  }
  for (auto& m : result.archive) m.scores.scalar = scalar_of(m, result.config.weights, result.ranges);
}

SearchResult run_search(const ModelContext& ctx, const HyperparameterSpace& space,
                        const SearchConfig& cfg, std::ostream* progress) {
  cfg.validate();
  SearchResult result;
  result.space = space;
  result.config = cfg;
  result.calibrated = calibration_active(ctx, cfg.weights);
  ObjectiveWeights weights = cfg.weights;
  if (!ctx.has_studies()) weights.mape_lift = 0.0;

  const std::size_t dim = space.dimension();
  const std::size_t np = SearchConfig::population;
  const std::size_t workers = cfg.resolved_workers();
  result.archive.reserve(static_cast<std::size_t>(cfg.iterations) * static_cast<std::size_t>(cfg.trials));

  for (int trial = 1; trial <= cfg.trials; ++trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, np - 1);
    std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);

    ObjectiveRanges ranges;
    std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
    for (auto& x : pop) {
      for (auto& v : x) v = unif(rng);
    }
    std::vector<CandidateModel> members;
    int remaining = cfg.iterations;
    int generation = 0;
    std::vector<std::vector<double>> batch = pop;

    while (remaining > 0) {
      ++generation;
      const std::size_t count = std::min<std::size_t>(np, static_cast<std::size_t>(remaining));
      batch.resize(count);
      auto evaluated = evaluate_batch(ctx, space, batch, workers);
      for (std::size_t i = 0; i < count; ++i) {
        auto& m = evaluated[i];
        m.trial = trial;
        m.iteration = generation;
        m.index = static_cast<int>(i + 1);
        m.id = candidate_id(trial, generation, m.index);
        if (m.ok) ranges.include(m.scores);
      }
      remaining -= static_cast<int>(count);

      if (generation == 1) {
        members = evaluated;
      } else {
        for (std::size_t i = 0; i < count; ++i) {
          const double trial_score = scalar_of(evaluated[i], weights, ranges);
          const double member_score = scalar_of(members[i], weights, ranges);
          if (trial_score <= member_score) {
            members[i] = evaluated[i];
            pop[i] = batch[i];
          }
        }
      }
      for (auto& m : evaluated) result.archive.push_back(std::move(m));

      if (progress) {
        double best = std::numeric_limits<double>::infinity();
        double best_nrmse = best;
        for (const auto& m : members) {
          const double s = scalar_of(m, weights, ranges);
          if (s < best) {
            best = s;
            best_nrmse = m.scores.nrmse;
          }
        }
        *progress << "trial " << trial << " generation " << generation << ": best scalar " << best
                  << ", nrmse " << best_nrmse << ", evaluations "
                  << (cfg.iterations - remaining) << "/" << cfg.iterations << '\n';
      }
      if (remaining <= 0) break;

      // rand/1/bin with bounce-back towards the base vector at the boundary.
      batch.assign(np, std::vector<double>(dim));
      for (std::size_t i = 0; i < np; ++i) {
        std::size_t a, b, c;
        do a = pick(rng); while (a == i);
        do b = pick(rng); while (b == i || b == a);
        do c = pick(rng); while (c == i || c == a || c == b);
        const std::size_t forced = pick_dim(rng);
        for (std::size_t d = 0; d < dim; ++d) {
          const double r = unif(rng);
          if (d != forced && r >= SearchConfig::crossover) {
            batch[i][d] = pop[i][d];
            continue;
          }
          double v = pop[a][d] + SearchConfig::mutation * (pop[b][d] - pop[c][d]);
          if (v < 0.0) v = pop[a][d] * unif(rng);
          if (v > 1.0) v = pop[a][d] + (1.0 - pop[a][d]) * unif(rng);
          batch[i][d] = v;
        }
      }
    }
  }
  rescore_archive(result);
  return result;
}

}  // namespace mmm
