#pragma once

// Frozen synthetic fixtures shared by the integration and acceptance
// suites. The standard fixture is a bar crossing the frame with ramped
// multi-crossing edges; the invariance fixture is a textured stripe
// streaming along its own axis, which gives stationary per-pixel rates.

#include "evdn/metrics.hpp"
#include "evdn/synth.hpp"

namespace evdn::testing {

inline constexpr std::uint64_t kStandardSceneSeed = 11;
inline constexpr std::size_t kStandardGroupSize = 30000;
inline constexpr std::uint64_t kStandardM = 20000;

inline SceneSpec standard_scene() {
    SceneSpec spec;
    spec.geometry = {320, 480};
    spec.pattern = ScenePattern::translating_bar;
    spec.vx = 700;
    spec.vy = 0;
    spec.duration_us = 650000;
    spec.contrast_threshold = 0.15;
    spec.background_log_intensity = 0.0;
    spec.edge_log_intensity = 1.875;  // 12 threshold crossings per edge
    spec.pattern_size = 48;
    spec.edge_ramp_px = 8.75;  // one crossing every 1000 us at this speed
    spec.step_us = 100;
    return spec;
}

inline WarpModel standard_warp() { return WarpModel::linear(700, 0); }

inline MetricParams standard_params() { return MetricParams{kStandardM}; }

inline SceneSpec invariance_scene() {
    SceneSpec spec;
    spec.geometry = {320, 240};
    spec.pattern = ScenePattern::translating_bar;
    spec.bar_along_motion = true;
    spec.vx = 500;
    spec.vy = 0;
    spec.duration_us = 5000000;
    spec.contrast_threshold = 0.15;
    spec.background_log_intensity = 0.0;
    spec.edge_log_intensity = 0.375;
    spec.pattern_size = 16;
    spec.texture_amplitude = 0.5;
    spec.texture_cell_px = 2.0;
    spec.step_us = 100;
    return spec;
}

}  // namespace evdn::testing
