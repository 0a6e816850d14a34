#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace evdn {

/// Raised when a metric is evaluated outside its domain (e.g. ESR on a
/// group with fewer events than the reference count M).
struct UndefinedMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on malformed input data (parse errors, bad magic, truncation).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Single DVS event. Timestamps are integer microseconds; polarity is
/// normalized to {-1,+1} in memory regardless of the on-disk encoding.
struct Event {
    std::uint64_t t = 0;  // microseconds
    std::uint16_t x = 0;  // column, 0-based
    std::uint16_t y = 0;  // row, 0-based
    std::int8_t p = 1;    // -1 or +1

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
    std::uint16_t width = 0;
    std::uint16_t height = 0;

    /// Total pixel count K.
    std::uint32_t pixel_count() const {
        return static_cast<std::uint32_t>(width) * static_cast<std::uint32_t>(height);
    }

    bool contains(std::uint32_t x, std::uint32_t y) const { return x < width && y < height; }

    /// Flattened pixel index (row-major).
    std::uint32_t index(std::uint16_t x, std::uint16_t y) const {
        return static_cast<std::uint32_t>(y) * width + x;
    }

    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// Time-ordered slice of events bound to a sensor geometry. Immutable by
/// convention after construction; all operations on packets are pure.
struct EventPacket {
    SensorGeometry geometry;
    std::vector<Event> events;

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }

    std::uint64_t t_first() const { return events.front().t; }
    std::uint64_t t_last() const { return events.back().t; }
};

/// Outcome of validate_packet. Violations are data, not errors; at most
/// the first 100 are listed, `total_violations` counts them all.
struct ValidationReport {
    std::vector<std::string> violations;
    std::size_t total_violations = 0;

    bool ok() const { return total_violations == 0; }
};

/// Checks geometry, bounds, polarity and timestamp ordering.
ValidationReport validate_packet(const EventPacket& packet);

/// Splits into consecutive non-overlapping groups of exactly `group_size`
/// events. The trailing partial group is dropped unless `keep_partial`.
std::vector<EventPacket> slice_by_count(const EventPacket& packet, std::size_t group_size,
                                        bool keep_partial = false);

/// Partitions [t_first, t_last] into half-open windows of `window_us`.
/// Empty windows yield empty packets so the time axis stays regular.
std::vector<EventPacket> slice_by_time(const EventPacket& packet, std::uint64_t window_us);

}  // namespace evdn
