#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "evdn/core.hpp"

namespace evdn {

/// Uniform background-activity noise: adds round(ratio * N) events drawn
/// uniformly over the packet's geometry, time span and both polarities.
struct NoiseSpec {
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

enum class ScenePattern { translating_bar, translating_disk };

/// Moving-pattern scene for the contrast-trigger event model: a pixel fires
/// whenever its log intensity has moved by the contrast threshold since the
/// pixel's last event, with polarity following the sign of the change.
struct SceneSpec {
    SensorGeometry geometry;
    std::uint64_t duration_us = 0;
    ScenePattern pattern = ScenePattern::translating_bar;
    double vx = 0.0;  // px/s
    double vy = 0.0;  // px/s
    double contrast_threshold = 0.15;        // c
    double background_log_intensity = 0.0;   // L0
    double edge_log_intensity = 0.3;         // L1
    double pattern_size = 0.0;               // bar thickness / disk radius; <=0 picks a default
    double edge_ramp_px = 0.0;               // linear intensity ramp width at pattern edges
    bool bar_along_motion = false;           // stripe axis parallel to the velocity
    double texture_amplitude = 0.0;          // pattern-attached contrast spread, in [0, 1)
    double texture_cell_px = 1.0;            // texture cell size in pattern coordinates
    std::uint64_t step_us = 100;             // intensity sampling step

    double speed() const;
    double effective_pattern_size() const;
};

/// Seed-derived placement of the pattern at t = 0 and the key of its
/// per-pixel contrast texture.
struct ScenePlacement {
    double bar_lead0 = 0.0;   // leading-edge projection onto the motion axis (crossing bar)
    double bar_perp0 = 0.0;   // centerline offset across the motion axis (parallel bar)
    double disk_cx0 = 0.0;
    double disk_cy0 = 0.0;
    std::uint64_t texture_seed = 0;
};

ScenePlacement scene_placement(const SceneSpec& spec, std::uint64_t seed);

/// Ground-truth log intensity of the scene at pixel (x, y) and time t.
/// Piecewise linear in space through the edge ramps, evaluated at pixel
/// centers; this is the signal the generator thresholds.
double scene_log_intensity(const SceneSpec& spec, const ScenePlacement& placement, std::uint16_t x,
                           std::uint16_t y, std::uint64_t t_us);

/// Simulates the scene on the fixed step grid and emits threshold-crossing
/// events. Deterministic for a given spec and seed; events at the same step
/// are ordered row-major.
EventPacket generate_scene(const SceneSpec& spec, std::uint64_t seed);

EventPacket inject_uniform_noise(const EventPacket& packet, const NoiseSpec& spec);

struct HotPixelResult {
    EventPacket packet;
    std::vector<std::pair<std::uint16_t, std::uint16_t>> flagged;  // (x, y)
};

/// Flags pixels whose event count exceeds mean + sigma_k * stddev (statistics
/// over pixels with at least one event) and removes all their events.
HotPixelResult remove_hot_pixels(const EventPacket& packet, double sigma_k);

}  // namespace evdn
