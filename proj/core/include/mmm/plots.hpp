#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mmm/allocator.hpp"
#include "mmm/onepager.hpp"
#include "mmm/svg.hpp"

namespace mmm {

struct Panel {
  std::string file;   // e.g. "waterfall.svg"
  std::string title;  // panel heading
  svg::Document document;
};

/// The eight one-pager panels in page order. The bootstrap panel states that
/// clustering was off when the one-pager has no cluster data.
std::vector<Panel> onepager_panels(const OnePager& p);

/// All panels on one page under the metrics header.
svg::Document onepager_page(const OnePager& p, const std::vector<Panel>& panels);

/// Writes one SVG per panel, the combined page and the metrics JSON into
/// `dir`; returns the written paths.
std::vector<std::filesystem::path> render_plots(const OnePager& p, const std::filesystem::path& dir);

/// Two panels: spend per channel before and after, and predicted response.
svg::Document allocation_chart(const AllocationPlan& plan);

}  // namespace mmm
