#include "tacpalm/contact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <json.hpp>

#include "tacpalm/errors.hpp"

namespace tacpalm::contact {

ContactMask segment(const TactileFrame& difference, double threshold) {
    if (!(threshold > 0.0)) {
        throw UsageError("segment: threshold must be positive");
    }
    const int w = difference.width, h = difference.height;
    const int ch = difference.channels;

    ContactMask raw = ContactMask::zeros(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double dmax = 0.0;
            for (int c = 0; c < ch; ++c) {
                dmax = std::max(dmax, std::abs(difference.at(x, y, c)));
            }
            if (dmax >= threshold) raw.set(x, y, true);
        }
    }

    ContactMask smoothed = ContactMask::zeros(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int votes = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx >= 0 && nx < w && ny >= 0 && ny < h && raw.at(nx, ny)) ++votes;
                }
            }
            if (votes >= 5) smoothed.set(x, y, true);
        }
    }
    return smoothed;
}

std::vector<Component> components(const ContactMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
    std::vector<Component> out;

    int next_label = 1;
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!mask.mask[i] || labels[i] != 0) continue;

            Component comp;
            comp.label = next_label++;
            comp.min_x = comp.max_x = x;
            comp.min_y = comp.max_y = y;
            labels[i] = comp.label;
            queue.emplace_back(x, y);
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop_front();
                ++comp.area_px;
                comp.min_x = std::min(comp.min_x, cx);
                comp.max_x = std::max(comp.max_x, cx);
                comp.min_y = std::min(comp.min_y, cy);
                comp.max_y = std::max(comp.max_y, cy);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.mask[ni] && labels[ni] == 0) {
                            labels[ni] = comp.label;
                            queue.emplace_back(nx, ny);
                        }
                    }
                }
            }
            out.push_back(comp);
        }
    }

    std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
        if (a.area_px != b.area_px) return a.area_px > b.area_px;
        return a.label < b.label;
    });
    return out;
}

AreaReport area_report(const std::vector<AreaEntry>& entries) {
    if (entries.size() < 2) {
        throw UsageError("area_report: need at least two masks to compare");
    }
    AreaReport report;
    report.entries = entries;

    // Stable sort keeps input order within equal areas.
    std::vector<AreaEntry> sorted = entries;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const AreaEntry& a, const AreaEntry& b) { return a.area_px > b.area_px; });
    for (const auto& e : sorted) report.ordering.push_back(e.name);

    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j].area_px == sorted[i].area_px) ++j;
        if (j - i > 1) {
            std::vector<std::string> group;
            for (std::size_t k = i; k < j; ++k) group.push_back(sorted[k].name);
            report.ties.push_back(std::move(group));
        }
        i = j;
    }
    return report;
}

std::string to_json(const AreaReport& report) {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : report.entries) {
        j["entries"].push_back({{"name", e.name}, {"area_px", e.area_px}});
    }
    j["ordering"] = report.ordering;
    j["ties"] = report.ties;
    return j.dump(2);
}

}  // namespace tacpalm::contact
