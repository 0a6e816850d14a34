#include "evdn/core.hpp"

#include <algorithm>

namespace evdn {

namespace {

constexpr std::size_t kMaxListedViolations = 100;

void add_violation(ValidationReport& report, std::string message) {
    if (report.violations.size() < kMaxListedViolations) {
        report.violations.push_back(std::move(message));
    }
    ++report.total_violations;
}

}  // namespace

ValidationReport validate_packet(const EventPacket& packet) {
    ValidationReport report;

    if (packet.geometry.width == 0 || packet.geometry.height == 0) {
        add_violation(report, "geometry has zero extent");
    }

    std::uint64_t prev_t = 0;
    for (std::size_t i = 0; i < packet.events.size(); ++i) {
        const Event& e = packet.events[i];
        if (e.x >= packet.geometry.width) {
            add_violation(report, "x out of bounds at index " + std::to_string(i));
        }
        if (e.y >= packet.geometry.height) {
            add_violation(report, "y out of bounds at index " + std::to_string(i));
        }
        if (e.p != -1 && e.p != 1) {
            add_violation(report, "polarity not in {-1,+1} at index " + std::to_string(i));
        }
        if (i > 0 && e.t < prev_t) {
            add_violation(report, "timestamp order at index " + std::to_string(i));
        }
        prev_t = e.t;
    }
    return report;
}

std::vector<EventPacket> slice_by_count(const EventPacket& packet, std::size_t group_size,
                                        bool keep_partial) {
    if (group_size == 0) {
        throw std::invalid_argument("slice_by_count: group_size must be >= 1");
    }
    std::vector<EventPacket> groups;
    if (packet.empty()) {
        return groups;
    }
    const std::size_t n = packet.events.size();
    groups.reserve(n / group_size + 1);
    std::size_t begin = 0;
    while (begin < n) {
        const std::size_t remaining = n - begin;
        if (remaining < group_size && !keep_partial) {
            break;
        }
        const std::size_t take = std::min(group_size, remaining);
        EventPacket group;
        group.geometry = packet.geometry;
        group.events.assign(packet.events.begin() + static_cast<std::ptrdiff_t>(begin),
                            packet.events.begin() + static_cast<std::ptrdiff_t>(begin + take));
        groups.push_back(std::move(group));
        begin += take;
    }
    return groups;
}

std::vector<EventPacket> slice_by_time(const EventPacket& packet, std::uint64_t window_us) {
    if (window_us == 0) {
        throw std::invalid_argument("slice_by_time: window_us must be >= 1");
    }
    std::vector<EventPacket> windows;
    if (packet.empty()) {
        return windows;
    }
    const std::uint64_t t0 = packet.t_first();
    const std::uint64_t span = packet.t_last() - t0;
    const std::size_t window_count = static_cast<std::size_t>(span / window_us) + 1;
    windows.resize(window_count);
    for (auto& w : windows) {
        w.geometry = packet.geometry;
    }
    for (const Event& e : packet.events) {
        windows[static_cast<std::size_t>((e.t - t0) / window_us)].events.push_back(e);
    }
    return windows;
}

}  // namespace evdn
