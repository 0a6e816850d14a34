#pragma once

// Replay check for the scene generator: re-derives the expected event
// sequence of every pixel from the ground-truth intensity signal with an
// exhaustive full-frame scan (no banding, no shortcuts) and compares it
// against the generated packet event by event.

#include <string>
#include <vector>

#include "evdn/core.hpp"
#include "evdn/synth.hpp"

namespace evdn::testing {

/// Returns an empty string when the packet matches the crossing replay,
/// otherwise a description of the first mismatch.
inline std::string replay_mismatch(const SceneSpec& spec, std::uint64_t seed,
                                   const EventPacket& packet) {
    const ScenePlacement placement = scene_placement(spec, seed);
    const std::uint32_t k = spec.geometry.pixel_count();

    std::vector<std::vector<std::pair<std::uint64_t, std::int8_t>>> actual(k);
    for (const Event& e : packet.events) {
        if (!packet.geometry.contains(e.x, e.y)) {
            return "event out of bounds";
        }
        actual[spec.geometry.index(e.x, e.y)].emplace_back(e.t, e.p);
    }

    const double c = spec.contrast_threshold;
    for (std::uint16_t y = 0; y < spec.geometry.height; ++y) {
        for (std::uint16_t x = 0; x < spec.geometry.width; ++x) {
            const auto& events = actual[spec.geometry.index(x, y)];
            std::size_t next = 0;
            double ref = scene_log_intensity(spec, placement, x, y, 0);
            for (std::uint64_t ts = spec.step_us; ts <= spec.duration_us; ts += spec.step_us) {
                const double level = scene_log_intensity(spec, placement, x, y, ts);
                while (level - ref >= c || ref - level >= c) {
                    const std::int8_t pol = level > ref ? std::int8_t{1} : std::int8_t{-1};
                    if (next >= events.size()) {
                        return "missed crossing at pixel (" + std::to_string(x) + "," +
                               std::to_string(y) + ") t=" + std::to_string(ts);
                    }
                    if (events[next].first != ts || events[next].second != pol) {
                        return "event mismatch at pixel (" + std::to_string(x) + "," +
                               std::to_string(y) + "): got t=" +
                               std::to_string(events[next].first) + " p=" +
                               std::to_string(events[next].second) + ", expected t=" +
                               std::to_string(ts) + " p=" + std::to_string(pol);
                    }
                    ++next;
                    ref += pol > 0 ? c : -c;
                }
            }
            if (next != events.size()) {
                return "spurious event at pixel (" + std::to_string(x) + "," + std::to_string(y) +
                       ") t=" + std::to_string(events[next].first);
            }
        }
    }
    return {};
}

}  // namespace evdn::testing
