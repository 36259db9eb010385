#include "mmm/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "mmm/error.hpp"

namespace mmm {

const ChannelResponse& ResponseModel::channel(std::string_view name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c;
  }
  throw InputError("allocator", "unknown channel '" + std::string(name) + "'");
}

std::pair<std::size_t, std::size_t> ResponseModel::range_rows(const std::optional<DateWindow>& range) const {
  if (!range) return {0, dates.size()};
  if (range->end < range->start) throw InputError("allocator", "date range end precedes its start");
  const auto a = std::lower_bound(dates.begin(), dates.end(), range->start);
  const auto b = std::upper_bound(dates.begin(), dates.end(), range->end);
  if (a >= b) {
    throw InputError("allocator", "date range " + range->start.iso() + ".." + range->end.iso() +
                                      " lies outside the modeling window");
  }
  return {static_cast<std::size_t>(a - dates.begin()), static_cast<std::size_t>(b - dates.begin())};
}

std::vector<double> ResponseModel::historical_means(const std::optional<DateWindow>& range) const {
  const auto [a, b] = range_rows(range);
  std::vector<double> out;
  for (const auto& c : channels) {
    if (c.spend_history.size() != dates.size()) {
      throw InputError("allocator", "spend history of '" + c.name + "' does not match the window");
    }
    double s = 0.0;
    for (std::size_t t = a; t < b; ++t) s += c.spend_history[t];
    out.push_back(s / static_cast<double>(b - a));
  }
  return out;
}

namespace {

const ResponseCurve& checked_curve(const ResponseModel& model, std::string_view channel, double spend) {
  const auto& c = model.channel(channel);
  if (!(spend >= 0.0) || !std::isfinite(spend)) {
    throw InputError("allocator", "spend must be a nonnegative number");
  }
  const bool history = std::any_of(c.spend_history.begin(), c.spend_history.end(),
                                   [](double v) { return v > 0.0; });
  if (!history || !std::isfinite(c.curve.adstock_ratio)) {
    throw InputError("allocator", "channel '" + c.name + "' has no historical spend");
  }
  return c.curve;
}

}  // namespace

double channel_response(const ResponseModel& model, std::string_view channel, double spend) {
  return checked_curve(model, channel, spend).value(spend);
}

double marginal_response(const ResponseModel& model, std::string_view channel, double spend) {
  return checked_curve(model, channel, spend).derivative(spend);
}

std::string to_string(Scenario s) {
  return s == Scenario::max_response ? "max_response" : "target_efficiency";
}

Scenario parse_scenario(std::string_view text) {
  if (text == "max_response") return Scenario::max_response;
  if (text == "target_efficiency") return Scenario::target_efficiency;
  throw InputError("allocator", "unknown scenario '" + std::string(text) + "'");
}

std::vector<double> project_budget(const std::vector<double>& y, const std::vector<double>& lower,
                                   const std::vector<double>& upper, double budget) {
  const std::size_t n = y.size();
  auto at = [&](double tau, std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::clamp(y[i] - tau, lower[i], upper[i]);
      s += x[i];
    }
    return s;
  };
  std::vector<double> x(n);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, y[i] - upper[i]);
    hi = std::max(hi, y[i] - lower[i]);
  }
  for (int it = 0; it < 200 && lo < hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (at(mid, x) > budget) lo = mid;
    else hi = mid;
  }
  double residual = budget - at(0.5 * (lo + hi), x);
  // Push the rounding residue onto channels with slack.
  for (std::size_t i = 0; i < n && residual != 0.0; ++i) {
    const double room = residual > 0.0 ? upper[i] - x[i] : lower[i] - x[i];
    const double step = residual > 0.0 ? std::min(residual, room) : std::max(residual, room);
    x[i] += step;
    residual -= step;
  }
  return x;
}

namespace {

constexpr double kViolationTol = 1e-10;
constexpr double kGradientTol = 1e-8;

/// Scaled problem: x = m / scale, objective -sum r_c(scale x_c) / norm.
struct Scaled {
  std::vector<ResponseCurve> curves;
  std::vector<double> lower;
  std::vector<double> upper;
  double budget = 0.0;
  double scale = 1.0;
  double norm = 1.0;

  double objective(const std::vector<double>& x) const {
    double f = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) f -= curves[c].value(scale * x[c]);
    return f / norm;
  }
  void gradient(const std::vector<double>& x, std::vector<double>& g) const {
    g.resize(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) {
      // Keep the derivative finite at zero spend for alpha < 1.
      const double m = std::max(scale * x[c], 1e-12 * scale);
      g[c] = -scale * curves[c].derivative(m) / norm;
    }
  }
};

double inf_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Projected-gradient residual on the feasible set.
double feasible_pg(const Scaled& p, const std::vector<double>& x) {
  std::vector<double> g;
  p.gradient(x, g);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - g[i];
  return inf_norm_diff(project_budget(y, p.lower, p.upper, p.budget), x);
}

template <class Value, class Grad, class Project>
double projected_descent(std::vector<double>& x, Value value, Grad grad, Project project, double tol,
                         int max_iter) {
  std::vector<double> g;
  std::vector<double> y(x.size());
  double step = 1.0;
  double pg = std::numeric_limits<double>::infinity();
  double fx = value(x);
  for (int it = 0; it < max_iter; ++it) {
    grad(x, g);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - g[i];
    pg = inf_norm_diff(project(y), x);
    if (pg < tol) break;
    bool moved = false;
    while (step > 1e-20) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - step * g[i];
      std::vector<double> xn = project(y);
      double decrease = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) decrease += g[i] * (xn[i] - x[i]);
      const double fn = value(xn);
      if (fn <= fx + 1e-4 * decrease) {
        moved = inf_norm_diff(xn, x) > 0.0;
        x = std::move(xn);
        fx = fn;
        step = std::min(step * 2.0, 1e12);
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return pg;
}

struct SolveResult {
  std::vector<double> x;
  double objective = 0.0;
  double violation = 0.0;
  double pg = 0.0;
  bool converged = false;
};

SolveResult solve_from(const Scaled& p, std::vector<double> x) {
  auto box = [&](const std::vector<double>& y) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::clamp(y[i], p.lower[i], p.upper[i]);
    return out;
  };
  auto violation = [&](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) - p.budget;
  };
  const double vscale = std::max(p.budget, 1.0);

  // Augmented Lagrangian on the budget equality, box handled by projection.
  double mu = 0.0;
  double rho = 10.0;
  SolveResult r;
  for (int outer = 0; outer < 30; ++outer) {
    auto value = [&](const std::vector<double>& v) {
      const double h = violation(v);
      return p.objective(v) - mu * h + 0.5 * rho * h * h;
    };
    auto grad = [&](const std::vector<double>& v, std::vector<double>& g) {
      p.gradient(v, g);
      const double h = violation(v);
      for (auto& gi : g) gi += -mu + rho * h;
    };
    const double pg = projected_descent(x, value, grad, box, 0.1 * kGradientTol, 2000);
    const double h = violation(x);
    mu -= rho * h;
    if (std::abs(h) < kViolationTol * vscale && pg < kGradientTol) {
      r.converged = true;
      break;
    }
    rho = std::min(rho * 10.0, 1e12);
  }

  // Exact feasibility, then descent on the feasible set itself.
  auto feasible = [&](const std::vector<double>& y) { return project_budget(y, p.lower, p.upper, p.budget); };
  x = feasible(x);
  auto value = [&](const std::vector<double>& v) { return p.objective(v); };
  auto grad = [&](const std::vector<double>& v, std::vector<double>& g) { p.gradient(v, g); };
  r.pg = projected_descent(x, value, grad, feasible, 0.1 * kGradientTol, 5000);
  r.x = std::move(x);
  r.objective = p.objective(r.x);
  r.violation = std::abs(violation(r.x)) / vscale;
  r.pg = feasible_pg(p, r.x);
  r.converged = r.converged || (r.violation < kViolationTol && r.pg < kGradientTol);
  if (r.pg >= kGradientTol) r.converged = false;
  return r;
}

std::vector<double> expand(const std::vector<double>& v, std::size_t n, double fallback, const char* what) {
  if (v.empty()) return std::vector<double>(n, fallback);
  if (v.size() == 1) return std::vector<double>(n, v[0]);
  if (v.size() != n) {
    throw InputError("allocator", std::string(what) + " needs one value or one per channel (" +
                                      std::to_string(n) + ")");
  }
  return v;
}

struct Bounds {
  std::vector<double> hist;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t periods = 0;
};

Bounds channel_bounds(const ResponseModel& model, const AllocationProblem& problem) {
  if (model.channels.empty()) throw InputError("allocator", "model has no channels");
  const std::size_t n = model.channels.size();
  const bool target = problem.scenario == Scenario::target_efficiency;
  const auto low = expand(problem.channel_constr_low, n, target ? 0.1 : 0.5, "channel_constr_low");
  const auto up = expand(problem.channel_constr_up, n, target ? 10.0 : 2.0, "channel_constr_up");
  Bounds b;
  b.hist = model.historical_means(problem.date_range);
  const auto [first, last] = model.range_rows(problem.date_range);
  b.periods = last - first;
  for (std::size_t c = 0; c < n; ++c) {
    if (!(low[c] > 0.0) || !(low[c] <= up[c]) || !std::isfinite(up[c])) {
      throw InputError("allocator", "channel constraints need 0 < low <= up for '" +
                                        model.channels[c].name + "'");
    }
    b.lower.push_back(low[c] * b.hist[c]);
    b.upper.push_back(up[c] * b.hist[c]);
  }
  return b;
}

AllocationPlan solve_budget(const ResponseModel& model, const AllocationProblem& problem,
                            const Bounds& bounds, double budget) {
  const std::size_t n = model.channels.size();
  const double sum_lo = std::accumulate(bounds.lower.begin(), bounds.lower.end(), 0.0);
  const double sum_up = std::accumulate(bounds.upper.begin(), bounds.upper.end(), 0.0);
  const double slack = 1e-12 * std::max(1.0, sum_up);
  if (!(budget > 0.0) || budget < sum_lo - slack || budget > sum_up + slack) {
    throw InputError("allocator", "budget " + format_number(budget) + " per period is infeasible for bounds [" +
                                      format_number(sum_lo) + ", " + format_number(sum_up) + "]");
  }
  budget = std::clamp(budget, sum_lo, sum_up);

  Scaled p;
  p.scale = budget / static_cast<double>(n);
  p.budget = budget / p.scale;
  p.norm = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    p.curves.push_back(model.channels[c].curve);
    p.lower.push_back(bounds.lower[c] / p.scale);
    p.upper.push_back(bounds.upper[c] / p.scale);
    p.norm += std::abs(model.channels[c].curve.coefficient);
  }
  if (!(p.norm > 0.0)) p.norm = 1.0;

  // Starts: lower corner, upper corner, one-hot corners, then random interior
  // points, each projected onto the feasible set.
  const int starts = std::max(1, problem.starts);
  std::vector<std::vector<double>> seeds;
  seeds.push_back(p.lower);
  if (static_cast<int>(seeds.size()) < starts) seeds.push_back(p.upper);
  for (std::size_t c = 0; c < n && static_cast<int>(seeds.size()) < starts; ++c) {
    auto v = p.lower;
    v[c] = p.upper[c];
    seeds.push_back(std::move(v));
  }
  std::mt19937_64 rng(problem.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (static_cast<int>(seeds.size()) < starts) {
    std::vector<double> v(n);
    for (std::size_t c = 0; c < n; ++c) v[c] = p.lower[c] + unif(rng) * (p.upper[c] - p.lower[c]);
    seeds.push_back(std::move(v));
  }

  AllocationPlan plan;
  SolveResult best;
  bool have = false;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    SolveResult r = solve_from(p, project_budget(seeds[s], p.lower, p.upper, p.budget));
    plan.restart_objectives.push_back(-r.objective * p.norm);
    if (!have || r.objective < best.objective) {
      best = std::move(r);
      plan.best_restart = static_cast<int>(s);
      have = true;
    }
  }

  plan.scenario = problem.scenario;
  plan.model_id = model.model_id;
  plan.dep_var_type = model.dep_var_type;
  plan.periods = bounds.periods;
  plan.restarts = static_cast<int>(seeds.size());
  plan.converged = best.converged;
  plan.kkt_residual = best.pg;
  plan.target_value = problem.target_value;
  double spend_sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const auto& ch = model.channels[c];
    ChannelAllocation a;
    a.name = ch.name;
    a.historical_spend = bounds.hist[c];
    a.lower = bounds.lower[c];
    a.upper = bounds.upper[c];
    a.spend = std::clamp(best.x[c] * p.scale, a.lower, a.upper);
    a.response = ch.curve.value(a.spend);
    a.historical_response = ch.curve.value(a.historical_spend);
    a.marginal = ch.curve.derivative(a.spend);
    const double tol = 1e-9 * std::max(1.0, a.upper);
    a.at_lower = a.spend <= a.lower + tol;
    a.at_upper = a.spend >= a.upper - tol;
    plan.total_response += a.response;
    plan.historical_response += a.historical_response;
    spend_sum += a.spend;
    plan.channels.push_back(std::move(a));
  }
  plan.budget = budget;
  plan.budget_violation = std::abs(spend_sum - budget) / std::max(1.0, budget);
  if (model.dep_var_type == DepVarType::revenue) {
    plan.efficiency = plan.total_response / budget;
  } else {
    plan.efficiency = plan.total_response > 0.0 ? budget / plan.total_response
                                                 : std::numeric_limits<double>::infinity();
  }
  if (!plan.converged) plan.status = "not converged";
  return plan;
}

}  // namespace

AllocationPlan allocate_max_response(const ResponseModel& model, const AllocationProblem& problem) {
  const Bounds bounds = channel_bounds(model, problem);
  double budget = std::accumulate(bounds.hist.begin(), bounds.hist.end(), 0.0);
  if (problem.total_budget) {
    if (!(*problem.total_budget > 0.0)) throw InputError("allocator", "total_budget must be positive");
    budget = *problem.total_budget / static_cast<double>(bounds.periods);
  }
  return solve_budget(model, problem, bounds, budget);
}

AllocationPlan allocate_target_efficiency(const ResponseModel& model, const AllocationProblem& problem) {
  if (!problem.target_value || !(*problem.target_value > 0.0)) {
    throw InputError("allocator", "target_efficiency needs a positive target_value");
  }
  const Bounds bounds = channel_bounds(model, problem);
  const bool revenue = model.dep_var_type == DepVarType::revenue;
  // A CPA ceiling T is a ROAS floor 1/T.
  const double roas_target = revenue ? *problem.target_value : 1.0 / *problem.target_value;
  const double hist = std::accumulate(bounds.hist.begin(), bounds.hist.end(), 0.0);
  const double sum_up = std::accumulate(bounds.upper.begin(), bounds.upper.end(), 0.0);
  double lo = std::accumulate(bounds.lower.begin(), bounds.lower.end(), 0.0);
  double hi = std::min(10.0 * hist, sum_up);

  auto solve = [&](double b) { return solve_budget(model, problem, bounds, b); };
  auto roas = [&](const AllocationPlan& p) { return p.total_response / p.budget; };

  AllocationPlan top = solve(hi);
  if (roas(top) >= roas_target) {
    top.status = "target exceeded everywhere";
    return top;
  }
  AllocationPlan best = solve(lo);
  if (roas(best) < roas_target) {
    best.status = "target unattainable";
    return best;
  }
  for (int it = 0; it < 200 && hi - lo >= 1e-6 * hist; ++it) {
    const double mid = 0.5 * (lo + hi);
    AllocationPlan p = solve(mid);
    const double r = roas(p);
    if (std::abs(r / roas_target - 1.0) <= 0.005) return p;
    if (r >= roas_target) {
      lo = mid;
      best = std::move(p);
    } else {
      hi = mid;
    }
  }
  return best;
}

AllocationPlan allocate(const ResponseModel& model, const AllocationProblem& problem) {
  return problem.scenario == Scenario::max_response ? allocate_max_response(model, problem)
                                                    : allocate_target_efficiency(model, problem);
}

std::string AllocationPlan::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["scenario"] = to_string(scenario);
  j["model_id"] = model_id;
  j["dep_var_type"] = to_string(dep_var_type);
  j["periods"] = periods;
  j["budget_per_period"] = num(budget);
  j["total_budget"] = num(budget * static_cast<double>(periods));
  j["total_response_per_period"] = num(total_response);
  j["historical_response_per_period"] = num(historical_response);
  j[dep_var_type == DepVarType::revenue ? "roas" : "cpa"] = num(efficiency);
  j["target_value"] = target_value ? num(*target_value) : nlohmann::json(nullptr);
  j["status"] = status;
  j["solver"] = {{"converged", converged},
                 {"kkt_residual", num(kkt_residual)},
                 {"budget_violation", num(budget_violation)},
                 {"restarts", restarts},
                 {"best_restart", best_restart},
                 {"restart_objectives", restart_objectives}};
  auto& arr = j["channels"] = nlohmann::json::array();
  for (const auto& c : channels) {
    arr.push_back({{"channel", c.name},
                   {"historical_spend", num(c.historical_spend)},
                   {"lower", num(c.lower)},
                   {"upper", num(c.upper)},
                   {"spend", num(c.spend)},
                   {"response", num(c.response)},
                   {"historical_response", num(c.historical_response)},
                   {"marginal_response", num(c.marginal)},
                   {"at_lower", c.at_lower},
                   {"at_upper", c.at_upper}});
  }
  return j.dump(2) + "\n";
}

}  // namespace mmm
