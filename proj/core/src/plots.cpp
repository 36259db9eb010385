#include "mmm/plots.hpp"

#include <algorithm>
#include <cmath>

#include "mmm/csv.hpp"

namespace mmm {

namespace {

constexpr double kW = 560.0;
constexpr double kH = 360.0;
constexpr double kLeft = 130.0;
constexpr double kRight = 30.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const std::array<const char*, 8> kPalette = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                             "#76b7b2", "#edc948", "#b07aa1", "#9c755f"};

const char* color(std::size_t i) { return kPalette[i % kPalette.size()]; }

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

svg::Document frame(std::string_view title) {
  svg::Document d(kW, kH);
  d.text(kW / 2.0, 22.0, title, 13.0, "middle", "bold");
  return d;
}

Panel make_panel(std::string file, std::string title) {
  svg::Document d = frame(title);
  return {std::move(file), std::move(title), std::move(d)};
}

void x_axis(svg::Document& d, const svg::Scale& x, double y, int ticks = 4) {
  d.line(kLeft, y, kW - kRight, y, "#333333");
  for (int i = 0; i <= ticks; ++i) {
    const double v = x.d0 + (x.d1 - x.d0) * i / ticks;
    d.line(x(v), y, x(v), y + 4.0, "#333333");
    d.text(x(v), y + 16.0, svg::label(v), 9.0, "middle");
  }
}

void y_axis(svg::Document& d, const svg::Scale& y, int ticks = 4) {
  d.line(kLeft, kTop, kLeft, kH - kBottom, "#333333");
  for (int i = 0; i <= ticks; ++i) {
    const double v = y.d0 + (y.d1 - y.d0) * i / ticks;
    d.line(kLeft - 4.0, y(v), kLeft, y(v), "#333333");
    d.text(kLeft - 6.0, y(v) + 3.0, svg::label(v), 9.0, "end");
  }
}

template <class Item, class Get>
std::pair<double, double> extent(const std::vector<Item>& items, Get get) {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& it : items) {
    for (double v : get(it)) {
      if (!std::isfinite(v)) continue;
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
  }
  return {lo, hi};
}

Panel waterfall_panel(const OnePager& p) {
  Panel panel = make_panel("waterfall.svg", "Response Decomposition Waterfall by Predictor");
  auto& d = panel.document;
  // Bars run from the running total before each predictor to the one after.
  double running = 0.0;
  std::vector<std::pair<double, double>> spans;
  for (const auto& w : p.waterfall) {
    spans.emplace_back(running, running + w.share);
    running += w.share;
  }
  double lo = 0.0;
  double hi = 0.0;
  for (auto [a, b] : spans) {
    lo = std::min({lo, a, b});
    hi = std::max({hi, a, b});
  }
  const auto [d0, d1] = svg::nice_range(lo, hi, true);
  const svg::Scale x{d0, d1, kLeft, kW - kRight};
  const double band = (kH - kTop - kBottom) / std::max<std::size_t>(1, p.waterfall.size());
  for (std::size_t i = 0; i < p.waterfall.size(); ++i) {
    const auto& w = p.waterfall[i];
    const double y = kTop + band * static_cast<double>(i);
    d.rect(x(spans[i].first), y + 0.15 * band, x(spans[i].second) - x(spans[i].first), 0.7 * band,
           w.total >= 0.0 ? "#59a14f" : "#e15759");
    d.text(kLeft - 6.0, y + 0.5 * band + 3.0, w.name, 9.0, "end");
    d.text(std::max(x(spans[i].first), x(spans[i].second)) + 4.0, y + 0.5 * band + 3.0,
           svg::label(w.total) + " (" + pct(w.share) + ")", 8.0);
  }
  x_axis(d, x, kH - kBottom);
  return panel;
}

Panel fit_panel(const OnePager& p) {
  Panel panel = make_panel("fit.svg", "Actual vs. Predicted Response");
  auto& d = panel.document;
  const std::size_t n = p.actual.size();
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    lo = t ? std::min({lo, p.actual[t], p.predicted[t]}) : std::min(p.actual[t], p.predicted[t]);
    hi = t ? std::max({hi, p.actual[t], p.predicted[t]}) : std::max(p.actual[t], p.predicted[t]);
  }
  const auto [y0, y1] = svg::nice_range(lo, hi);
  const svg::Scale x{0.0, static_cast<double>(std::max<std::size_t>(1, n - 1)), kLeft, kW - kRight};
  const svg::Scale y{y0, y1, kH - kBottom, kTop};
  std::vector<double> xs(n), ya(n), yp(n);
  for (std::size_t t = 0; t < n; ++t) {
    xs[t] = x(static_cast<double>(t));
    ya[t] = y(p.actual[t]);
    yp[t] = y(p.predicted[t]);
  }
  for (std::size_t cut : {p.split.train_end, p.split.val_end}) {
    if (cut > 0 && cut < n) d.line(x(static_cast<double>(cut)), kTop, x(static_cast<double>(cut)), kH - kBottom, "#999999", 1.0, "4,3");
  }
  d.polyline(xs, ya, "#333333");
  d.polyline(xs, yp, "#4e79a7");
  y_axis(d, y);
  d.line(kLeft, kH - kBottom, kW - kRight, kH - kBottom, "#333333");
  if (n > 0) {
    d.text(kLeft, kH - kBottom + 16.0, p.dates.front().iso(), 9.0, "start");
    d.text(kW - kRight, kH - kBottom + 16.0, p.dates.back().iso(), 9.0, "end");
  }
  d.text(kLeft + 10.0, kTop + 10.0, "actual", 9.0);
  d.text(kLeft + 60.0, kTop + 10.0, "predicted", 9.0);
  d.line(kLeft + 10.0, kTop + 14.0, kLeft + 50.0, kTop + 14.0, "#333333", 2.0);
  d.line(kLeft + 60.0, kTop + 14.0, kLeft + 110.0, kTop + 14.0, "#4e79a7", 2.0);
  return panel;
}

Panel share_panel(const OnePager& p) {
  Panel panel = make_panel("share.svg", "Share of Spend VS Share of Effect with total " + p.efficiency_label());
  auto& d = panel.document;
  double hi = 0.0;
  for (const auto& s : p.shares) hi = std::max({hi, s.spend_share, s.effect_share});
  const svg::Scale x{0.0, std::max(hi * 1.15, 1e-9), kLeft, kW - kRight};
  const double band = (kH - kTop - kBottom) / std::max<std::size_t>(1, p.shares.size());
  for (std::size_t i = 0; i < p.shares.size(); ++i) {
    const auto& s = p.shares[i];
    const double y = kTop + band * static_cast<double>(i);
    d.rect(kLeft, y + 0.15 * band, x(s.spend_share) - kLeft, 0.33 * band, "#bab0ac");
    d.rect(kLeft, y + 0.5 * band, x(s.effect_share) - kLeft, 0.33 * band, "#4e79a7");
    d.text(kLeft - 6.0, y + 0.5 * band + 3.0, s.channel, 9.0, "end");
    d.text(x(std::max(s.spend_share, s.effect_share)) + 4.0, y + 0.5 * band + 3.0,
           p.efficiency_label() + " " + svg::label(s.efficiency), 8.0);
  }
  x_axis(d, x, kH - kBottom);
  d.text(kW - kRight, kTop - 4.0, "total " + p.efficiency_label() + " = " + svg::label(p.total_efficiency), 9.0, "end");
  return panel;
}

Panel bootstrap_panel(const OnePager& p) {
  Panel panel = make_panel("bootstrap.svg", "In-cluster bootstrapped " + p.efficiency_label() + " with 95% CI & mean");
  auto& d = panel.document;
  if (!p.bootstrap) {
    d.text(kW / 2.0, kH / 2.0, "clustering disabled: no cluster to resample", 11.0, "middle");
    return panel;
  }
  const auto& items = *p.bootstrap;
  const auto [lo, hi] = extent(items, [](const BootstrapItem& b) { return std::vector<double>{b.lower, b.upper, b.mean}; });
  const auto [d0, d1] = svg::nice_range(lo, hi, true);
  const svg::Scale x{d0, d1, kLeft, kW - kRight};
  const double band = (kH - kTop - kBottom) / std::max<std::size_t>(1, items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& b = items[i];
    const double yc = kTop + band * (static_cast<double>(i) + 0.5);
    d.line(x(b.lower), yc, x(b.upper), yc, color(i), 2.0);
    d.line(x(b.lower), yc - 5.0, x(b.lower), yc + 5.0, color(i), 2.0);
    d.line(x(b.upper), yc - 5.0, x(b.upper), yc + 5.0, color(i), 2.0);
    d.circle(x(b.mean), yc, 4.0, color(i));
    d.text(kLeft - 6.0, yc + 3.0, b.channel, 9.0, "end");
    d.text(x(b.upper) + 6.0, yc + 3.0,
           svg::label(b.mean) + " [" + svg::label(b.lower) + ", " + svg::label(b.upper) + "]" +
               (b.min_max ? " min/max, n=" + std::to_string(b.cluster_size) : ""),
           8.0);
  }
  x_axis(d, x, kH - kBottom);
  if (p.cluster) d.text(kW - kRight, kTop - 4.0, "cluster " + std::to_string(*p.cluster), 9.0, "end");
  return panel;
}

Panel adstock_panel(const OnePager& p) {
  const std::string title = p.family == AdstockFamily::geometric ? "Geometric Adstock: Fixed Rate Over Time"
                                                                  : "Weibull Adstock: Flexible Rate Over Time";
  Panel panel = make_panel("adstock.svg", title);
  auto& d = panel.document;
  std::size_t lags = 1;
  for (const auto& c : p.decay) lags = std::max(lags, c.lag_weights.size());
  lags = std::min<std::size_t>(lags, 52);
  const svg::Scale x{0.0, static_cast<double>(lags - 1 > 0 ? lags - 1 : 1), kLeft, kW - kRight};
  const svg::Scale y{0.0, 1.05, kH - kBottom, kTop};
  for (std::size_t i = 0; i < p.decay.size(); ++i) {
    const auto& c = p.decay[i];
    std::vector<double> xs, ys;
    for (std::size_t l = 0; l < std::min(lags, c.lag_weights.size()); ++l) {
      xs.push_back(x(static_cast<double>(l)));
      ys.push_back(y(c.lag_weights[l]));
    }
    d.polyline(xs, ys, color(i));
    std::string tag = c.channel;
    tag += p.family == AdstockFamily::geometric ? " theta=" + svg::label(c.theta)
                                                : " shape=" + svg::label(c.shape) + " scale=" + svg::label(c.scale);
    d.text(kW - kRight, kTop + 12.0 * static_cast<double>(i + 1), tag, 8.0, "end");
    d.line(kW - kRight - 170.0, kTop + 12.0 * static_cast<double>(i + 1) - 3.0, kW - kRight - 155.0,
           kTop + 12.0 * static_cast<double>(i + 1) - 3.0, color(i), 2.0);
  }
  x_axis(d, x, kH - kBottom);
  y_axis(d, y);
  d.text((kLeft + kW - kRight) / 2.0, kH - 10.0, "lag (periods)", 9.0, "middle");
  return panel;
}

Panel immediate_panel(const OnePager& p) {
  Panel panel = make_panel("immediate.svg", "Immediate vs. Carryover Response Percentage");
  auto& d = panel.document;
  const svg::Scale x{0.0, 100.0, kLeft, kW - kRight};
  const double band = (kH - kTop - kBottom) / std::max<std::size_t>(1, p.immediate.size());
  for (std::size_t i = 0; i < p.immediate.size(); ++i) {
    const auto& im = p.immediate[i];
    const double y = kTop + band * static_cast<double>(i);
    d.rect(x(0.0), y + 0.2 * band, x(im.immediate_pct) - x(0.0), 0.6 * band, "#4e79a7");
    d.rect(x(im.immediate_pct), y + 0.2 * band, x(100.0) - x(im.immediate_pct), 0.6 * band, "#f28e2b");
    d.text(kLeft - 6.0, y + 0.5 * band + 3.0, im.channel, 9.0, "end");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f%% / %.1f%%", im.immediate_pct, im.carryover_pct);
    d.text(x(50.0), y + 0.5 * band + 3.0, buf, 8.0, "middle");
  }
  x_axis(d, x, kH - kBottom);
  d.text(kLeft, kTop - 4.0, "immediate", 9.0);
  d.text(kW - kRight, kTop - 4.0, "carryover", 9.0, "end");
  return panel;
}

Panel response_panel(const OnePager& p) {
  Panel panel = make_panel("response.svg", "Response Curves and Mean Spends by Channel");
  auto& d = panel.document;
  const auto [xl, xh] = extent(p.curves, [](const CurveItem& c) { return c.spend; });
  const auto [yl, yh] = extent(p.curves, [](const CurveItem& c) { return c.response; });
  const auto [x0, x1] = svg::nice_range(xl, xh, true);
  const auto [y0, y1] = svg::nice_range(yl, yh, true);
  const svg::Scale x{x0, x1, kLeft, kW - kRight};
  const svg::Scale y{y0, y1, kH - kBottom, kTop};
  for (std::size_t i = 0; i < p.curves.size(); ++i) {
    const auto& c = p.curves[i];
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < c.spend.size(); ++k) {
      xs.push_back(x(c.spend[k]));
      ys.push_back(y(c.response[k]));
    }
    d.polyline(xs, ys, color(i));
    d.circle(x(c.mean_spend), y(c.mean_response), 4.0, color(i));
    d.text(kLeft + 10.0, kTop + 12.0 * static_cast<double>(i + 1), c.channel, 8.0);
    d.line(kLeft + 80.0, kTop + 12.0 * static_cast<double>(i + 1) - 3.0, kLeft + 95.0,
           kTop + 12.0 * static_cast<double>(i + 1) - 3.0, color(i), 2.0);
  }
  x_axis(d, x, kH - kBottom);
  y_axis(d, y);
  d.text((kLeft + kW - kRight) / 2.0, kH - 10.0, "mean spend per period (dots: historical mean)", 9.0, "middle");
  return panel;
}

Panel residual_panel(const OnePager& p) {
  Panel panel = make_panel("residual.svg", "Fitted vs. Residual");
  auto& d = panel.document;
  double xl = 0.0, xh = 0.0, yl = 0.0, yh = 0.0;
  for (std::size_t t = 0; t < p.predicted.size(); ++t) {
    xl = t ? std::min(xl, p.predicted[t]) : p.predicted[t];
    xh = t ? std::max(xh, p.predicted[t]) : p.predicted[t];
    yl = t ? std::min(yl, p.residual[t]) : p.residual[t];
    yh = t ? std::max(yh, p.residual[t]) : p.residual[t];
  }
  const auto [x0, x1] = svg::nice_range(xl, xh);
  const auto [y0, y1] = svg::nice_range(yl, yh, true);
  const svg::Scale x{x0, x1, kLeft, kW - kRight};
  const svg::Scale y{y0, y1, kH - kBottom, kTop};
  d.line(kLeft, y(0.0), kW - kRight, y(0.0), "#999999", 1.0, "4,3");
  for (std::size_t t = 0; t < p.predicted.size(); ++t) d.circle(x(p.predicted[t]), y(p.residual[t]), 2.5, "#4e79a7");
  x_axis(d, x, kH - kBottom);
  y_axis(d, y);
  d.text((kLeft + kW - kRight) / 2.0, kH - 10.0, "fitted", 9.0, "middle");
  return panel;
}

}  // namespace

std::vector<Panel> onepager_panels(const OnePager& p) {
  return {waterfall_panel(p), fit_panel(p),       share_panel(p),    bootstrap_panel(p),
          adstock_panel(p),   immediate_panel(p), response_panel(p), residual_panel(p)};
}

svg::Document onepager_page(const OnePager& p, const std::vector<Panel>& panels) {
  const double gap = 10.0;
  const double head = 70.0;
  const std::size_t rows = (panels.size() + 1) / 2;
  svg::Document page(2.0 * kW + 3.0 * gap, head + static_cast<double>(rows) * (kH + gap) + gap);
  page.text(gap, 24.0, "Model one-pager for " + p.model_id, 16.0, "start", "bold");
  page.text(gap, 48.0, p.header(), 11.0);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double x = gap + static_cast<double>(i % 2) * (kW + gap);
    const double y = head + static_cast<double>(i / 2) * (kH + gap);
    page.embed(panels[i].document, x, y);
  }
  return page;
}

std::vector<std::filesystem::path> render_plots(const OnePager& p, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  const auto panels = onepager_panels(p);
  for (const auto& panel : panels) {
    out.push_back(dir / panel.file);
    write_text_file(out.back(), panel.document.str());
  }
  out.push_back(dir / "onepager.svg");
  write_text_file(out.back(), onepager_page(p, panels).str());
  out.push_back(dir / "onepager.json");
  write_text_file(out.back(), p.to_json());
  return out;
}

svg::Document allocation_chart(const AllocationPlan& plan) {
  svg::Document page(2.0 * kW + 30.0, kH + 60.0);
  page.text(10.0, 24.0,
            "Budget allocation (" + to_string(plan.scenario) + ") for " + plan.model_id + ": " + plan.status, 14.0,
            "start", "bold");
  auto bars = [&](std::string_view title, auto before, auto after) {
    svg::Document d = frame(title);
    double hi = 0.0;
    for (const auto& c : plan.channels) hi = std::max({hi, before(c), after(c)});
    const svg::Scale x{0.0, std::max(hi * 1.1, 1e-9), kLeft, kW - kRight};
    const double band = (kH - kTop - kBottom) / std::max<std::size_t>(1, plan.channels.size());
    for (std::size_t i = 0; i < plan.channels.size(); ++i) {
      const auto& c = plan.channels[i];
      const double y = kTop + band * static_cast<double>(i);
      d.rect(kLeft, y + 0.15 * band, x(before(c)) - kLeft, 0.33 * band, "#bab0ac");
      d.rect(kLeft, y + 0.5 * band, x(after(c)) - kLeft, 0.33 * band, "#4e79a7");
      d.text(kLeft - 6.0, y + 0.5 * band + 3.0, c.name, 9.0, "end");
      d.text(x(std::max(before(c), after(c))) + 4.0, y + 0.5 * band + 3.0,
             svg::label(before(c)) + " -> " + svg::label(after(c)), 8.0);
    }
    x_axis(d, x, kH - kBottom);
    d.text(kW - kRight, kTop - 4.0, "grey: historical, blue: optimized", 8.0, "end");
    return d;
  };
  page.embed(bars("Mean spend per period",
                  [](const ChannelAllocation& c) { return c.historical_spend; },
                  [](const ChannelAllocation& c) { return c.spend; }),
             10.0, 50.0);
  page.embed(bars("Predicted response per period",
                  [](const ChannelAllocation& c) { return c.historical_response; },
                  [](const ChannelAllocation& c) { return c.response; }),
             kW + 20.0, 50.0);
  return page;
}

}  // namespace mmm
