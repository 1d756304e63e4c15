#pragma once

#include <string>
#include <vector>

#include "tacpalm/grid.hpp"

namespace tacpalm::contact {

inline constexpr double kDefaultThreshold = 0.03;

// Thresholds the max-channel |D| of a signed difference image, then applies
// one 8-neighbor majority smoothing pass (a 3x3 window needs >= 5 set cells,
// out-of-range cells count as unset).
ContactMask segment(const TactileFrame& difference, double threshold = kDefaultThreshold);

struct Component {
    int label = 0;  // scan-order label, 1-based
    std::size_t area_px = 0;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;  // inclusive bounding box
};

// 8-connected components. Labels follow raster scan order of each
// component's first pixel; the list is sorted by area descending with ties
// broken by label.
std::vector<Component> components(const ContactMask& mask);

struct AreaEntry {
    std::string name;
    std::size_t area_px = 0;
};

struct AreaReport {
    std::vector<AreaEntry> entries;             // input order
    std::vector<std::string> ordering;          // by area descending
    std::vector<std::vector<std::string>> ties; // groups with equal areas
};

// Orders named masks by contact area, flagging exact ties.
AreaReport area_report(const std::vector<AreaEntry>& entries);

std::string to_json(const AreaReport& report);

}  // namespace tacpalm::contact
