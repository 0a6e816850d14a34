#include "evdn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evdn/rng.hpp"

namespace evdn {

namespace {

void check_scene(const SceneSpec& spec) {
    if (spec.geometry.pixel_count() == 0) {
        throw std::invalid_argument("generate_scene: geometry has zero extent");
    }
    if (spec.contrast_threshold <= 0 || !std::isfinite(spec.contrast_threshold)) {
        throw std::invalid_argument("generate_scene: contrast threshold must be positive");
    }
    if (spec.speed() == 0 || !std::isfinite(spec.speed())) {
        throw std::invalid_argument("generate_scene: zero velocity generates no events");
    }
    if (spec.duration_us == 0) {
        throw std::invalid_argument("generate_scene: duration must be positive");
    }
    if (spec.step_us == 0) {
        throw std::invalid_argument("generate_scene: step must be >= 1 us");
    }
    if (spec.texture_amplitude < 0 || spec.texture_amplitude >= 1) {
        throw std::invalid_argument("generate_scene: texture amplitude must be in [0, 1)");
    }
    if (spec.texture_cell_px <= 0) {
        throw std::invalid_argument("generate_scene: texture cell must be positive");
    }
}

/// 0..1 intensity profile of the pattern as a function of the distance `u`
/// into it, with a linear ramp of width `w` at both ends of `extent`.
double edge_profile(double u, double extent, double w) {
    if (u <= 0 || u >= extent) {
        return 0.0;
    }
    if (w <= 0) {
        return 1.0;
    }
    double f = 1.0;
    if (u < w) {
        f = u / w;
    }
    if (u > extent - w) {
        f = std::min(f, (extent - u) / w);
    }
    return f;
}

struct Band {
    int lo;
    int hi;  // inclusive; empty when lo > hi
};

/// Stateless texture-cell hash in [0, 1).
double cell_hash01(std::uint64_t seed, std::int64_t u, std::int64_t v) {
    SplitMix64 rng(seed ^ (static_cast<std::uint64_t>(u) * 0x9e3779b97f4a7c15ull) ^
                   (static_cast<std::uint64_t>(v) * 0xc2b2ae3d27d4eb4full));
    return rng.next_double();
}

}  // namespace

double SceneSpec::speed() const { return std::hypot(vx, vy); }

double SceneSpec::effective_pattern_size() const {
    if (pattern_size > 0) {
        return pattern_size;
    }
    const double side = std::min(geometry.width, geometry.height);
    return std::max(4.0, side / 8.0);
}

ScenePlacement scene_placement(const SceneSpec& spec, std::uint64_t seed) {
    check_scene(spec);
    SplitMix64 rng(seed);
    ScenePlacement placement;
    const double nx = spec.vx / spec.speed();
    const double ny = spec.vy / spec.speed();
    const double size = spec.effective_pattern_size();

    if (spec.pattern == ScenePattern::translating_bar && spec.bar_along_motion) {
        // Stripe slides along its own axis; its centerline sits near the
        // frame center, offset across the motion axis by the seed.
        const double center = (spec.geometry.width / 2.0) * -ny + (spec.geometry.height / 2.0) * nx;
        const double span = std::min(spec.geometry.width, spec.geometry.height) / 6.0;
        placement.bar_perp0 = center + (rng.next_double() - 0.5) * 2.0 * span;
    } else if (spec.pattern == ScenePattern::translating_bar) {
        // Leading edge starts just outside the frame's projection onto the
        // motion axis; the seed jitters the entry phase.
        double proj_min = 0.0;
        for (const double cx : {0.0, double(spec.geometry.width - 1)}) {
            for (const double cy : {0.0, double(spec.geometry.height - 1)}) {
                proj_min = std::min(proj_min, cx * nx + cy * ny);
            }
        }
        placement.bar_lead0 = proj_min - 2.0 - rng.next_double() * size;
    } else {
        // Disk crosses the frame center at mid-duration, with a seeded
        // offset perpendicular to the motion axis.
        const double half_t = static_cast<double>(spec.duration_us) / 2e6;
        const double perp_span = std::min(spec.geometry.width, spec.geometry.height) / 6.0;
        const double perp = (rng.next_double() - 0.5) * 2.0 * perp_span;
        placement.disk_cx0 = spec.geometry.width / 2.0 - spec.vx * half_t - ny * perp;
        placement.disk_cy0 = spec.geometry.height / 2.0 - spec.vy * half_t + nx * perp;
    }
    placement.texture_seed = rng.next();
    return placement;
}

double scene_log_intensity(const SceneSpec& spec, const ScenePlacement& placement, std::uint16_t x,
                           std::uint16_t y, std::uint64_t t_us) {
    const double t_s = static_cast<double>(t_us) / 1e6;
    const double size = spec.effective_pattern_size();
    const double nx = spec.vx / spec.speed();
    const double ny = spec.vy / spec.speed();
    double f = 0.0;
    if (spec.pattern == ScenePattern::translating_bar && spec.bar_along_motion) {
        const double s = x * -ny + y * nx - placement.bar_perp0;  // across-motion offset
        f = edge_profile(s + size / 2.0, size, spec.edge_ramp_px);
    } else if (spec.pattern == ScenePattern::translating_bar) {
        const double lead = placement.bar_lead0 + spec.speed() * t_s;
        const double u = lead - (x * nx + y * ny);  // distance behind the leading edge
        f = edge_profile(u, size, spec.edge_ramp_px);
    } else {
        const double cx = placement.disk_cx0 + spec.vx * t_s;
        const double cy = placement.disk_cy0 + spec.vy * t_s;
        const double dist = std::hypot(x - cx, y - cy);
        f = edge_profile(size - dist, size, std::min(spec.edge_ramp_px, size));
    }
    double contrast = spec.edge_log_intensity - spec.background_log_intensity;
    if (spec.texture_amplitude > 0) {
        // texture rides with the pattern, sampled on its own cell grid
        const double u = (x - spec.vx * t_s) / spec.texture_cell_px;
        const double v = (y - spec.vy * t_s) / spec.texture_cell_px;
        const double h = cell_hash01(placement.texture_seed, static_cast<std::int64_t>(std::floor(u)),
                                     static_cast<std::int64_t>(std::floor(v)));
        contrast *= 1.0 + spec.texture_amplitude * (2.0 * h - 1.0);
    }
    return spec.background_log_intensity + contrast * f;
}

EventPacket generate_scene(const SceneSpec& spec, std::uint64_t seed) {
    const ScenePlacement placement = scene_placement(spec, seed);
    const std::uint16_t width = spec.geometry.width;
    const std::uint16_t height = spec.geometry.height;
    const double c = spec.contrast_threshold;

    EventPacket packet;
    packet.geometry = spec.geometry;
    if (spec.edge_log_intensity == spec.background_log_intensity) {
        return packet;  // flat scene, nothing ever crosses the threshold
    }

    std::vector<double> reference(spec.geometry.pixel_count());
    for (std::uint16_t y = 0; y < height; ++y) {
        for (std::uint16_t x = 0; x < width; ++x) {
            reference[spec.geometry.index(x, y)] = scene_log_intensity(spec, placement, x, y, 0);
        }
    }

    // Only pixels the pattern touched between consecutive samples can fire,
    // so each step scans a band around the pattern's swept region.
    const double size = spec.effective_pattern_size();
    const double pad = 2.0;
    const auto clamp_band = [](double lo, double hi, int limit) {
        Band b{static_cast<int>(std::floor(lo)), static_cast<int>(std::ceil(hi))};
        b.lo = std::max(b.lo, 0);
        b.hi = std::min(b.hi, limit - 1);
        return b;
    };

    const auto process_pixel = [&](std::uint16_t x, std::uint16_t y, std::uint64_t ts) {
        const std::uint32_t idx = spec.geometry.index(x, y);
        const double level = scene_log_intensity(spec, placement, x, y, ts);
        double& r = reference[idx];
        while (level - r >= c) {
            packet.events.push_back(Event{ts, x, y, +1});
            r += c;
        }
        while (r - level >= c) {
            packet.events.push_back(Event{ts, x, y, -1});
            r -= c;
        }
    };

    const double nx = spec.vx / spec.speed();
    const double ny = spec.vy / spec.speed();
    for (std::uint64_t ts = spec.step_us; ts <= spec.duration_us; ts += spec.step_us) {
        const double t_prev = static_cast<double>(ts - spec.step_us) / 1e6;
        const double t_cur = static_cast<double>(ts) / 1e6;

        if (spec.pattern == ScenePattern::translating_bar) {
            // band axis: along-motion stripes live at a fixed across-motion
            // offset, crossing bars sweep their projection interval
            double ax = nx;
            double ay = ny;
            double lo;
            double hi;
            if (spec.bar_along_motion) {
                ax = -ny;
                ay = nx;
                lo = placement.bar_perp0 - size / 2.0 - pad;
                hi = placement.bar_perp0 + size / 2.0 + pad;
            } else {
                const double lead_prev = placement.bar_lead0 + spec.speed() * t_prev;
                const double lead_cur = placement.bar_lead0 + spec.speed() * t_cur;
                lo = std::min(lead_prev, lead_cur) - size - pad;
                hi = std::max(lead_prev, lead_cur) + pad;
            }
            for (std::uint16_t y = 0; y < height; ++y) {
                // pixels with projection x*ax + y*ay inside [lo, hi]
                Band b;
                if (ax > 1e-12 || ax < -1e-12) {
                    const double a = (lo - y * ay) / ax;
                    const double bnd = (hi - y * ay) / ax;
                    b = clamp_band(std::min(a, bnd), std::max(a, bnd), width);
                } else {
                    const double row = y * ay;
                    if (row < lo || row > hi) {
                        continue;
                    }
                    b = Band{0, width - 1};
                }
                for (int x = b.lo; x <= b.hi; ++x) {
                    process_pixel(static_cast<std::uint16_t>(x), y, ts);
                }
            }
        } else {
            const double cx_prev = placement.disk_cx0 + spec.vx * t_prev;
            const double cy_prev = placement.disk_cy0 + spec.vy * t_prev;
            const double cx_cur = placement.disk_cx0 + spec.vx * t_cur;
            const double cy_cur = placement.disk_cy0 + spec.vy * t_cur;
            const Band by = clamp_band(std::min(cy_prev, cy_cur) - size - pad,
                                       std::max(cy_prev, cy_cur) + size + pad, height);
            const Band bx = clamp_band(std::min(cx_prev, cx_cur) - size - pad,
                                       std::max(cx_prev, cx_cur) + size + pad, width);
            for (int y = by.lo; y <= by.hi; ++y) {
                for (int x = bx.lo; x <= bx.hi; ++x) {
                    process_pixel(static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), ts);
                }
            }
        }
    }
    return packet;
}

EventPacket inject_uniform_noise(const EventPacket& packet, const NoiseSpec& spec) {
    if (spec.ratio < 0 || !std::isfinite(spec.ratio)) {
        throw std::invalid_argument("inject_uniform_noise: ratio must be non-negative");
    }
    if (spec.ratio == 0) {
        return packet;
    }
    if (packet.empty()) {
        throw std::invalid_argument("inject_uniform_noise: packet is empty");
    }

    const auto count =
        static_cast<std::size_t>(std::llround(spec.ratio * static_cast<double>(packet.size())));
    SplitMix64 rng(spec.seed);
    const std::uint64_t t0 = packet.t_first();
    const std::uint64_t span = packet.t_last() - t0;

    std::vector<Event> noise;
    noise.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Event e;
        e.t = t0 + rng.next_below(span + 1);
        e.x = static_cast<std::uint16_t>(rng.next_below(packet.geometry.width));
        e.y = static_cast<std::uint16_t>(rng.next_below(packet.geometry.height));
        e.p = rng.next_bool() ? std::int8_t{1} : std::int8_t{-1};
        noise.push_back(e);
    }
    std::stable_sort(noise.begin(), noise.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });

    EventPacket out;
    out.geometry = packet.geometry;
    out.events.reserve(packet.size() + count);
    // original events come first on timestamp ties
    std::merge(packet.events.begin(), packet.events.end(), noise.begin(), noise.end(),
               std::back_inserter(out.events),
               [](const Event& a, const Event& b) { return a.t < b.t; });
    return out;
}

HotPixelResult remove_hot_pixels(const EventPacket& packet, double sigma_k) {
    HotPixelResult result;
    result.packet.geometry = packet.geometry;
    if (packet.empty()) {
        return result;
    }

    std::vector<std::uint32_t> counts(packet.geometry.pixel_count(), 0);
    for (const Event& e : packet.events) {
        ++counts[packet.geometry.index(e.x, e.y)];
    }

    double sum = 0;
    double sum_sq = 0;
    std::size_t active = 0;
    for (const std::uint32_t n : counts) {
        if (n > 0) {
            sum += n;
            sum_sq += static_cast<double>(n) * n;
            ++active;
        }
    }
    const double mean = sum / static_cast<double>(active);
    const double variance = std::max(0.0, sum_sq / static_cast<double>(active) - mean * mean);
    const double threshold = mean + sigma_k * std::sqrt(variance);

    std::vector<bool> hot(counts.size(), false);
    for (std::uint16_t y = 0; y < packet.geometry.height; ++y) {
        for (std::uint16_t x = 0; x < packet.geometry.width; ++x) {
            const std::uint32_t idx = packet.geometry.index(x, y);
            if (counts[idx] > 0 && static_cast<double>(counts[idx]) > threshold) {
                hot[idx] = true;
                result.flagged.emplace_back(x, y);
            }
        }
    }

    result.packet.events.reserve(packet.size());
    for (const Event& e : packet.events) {
        if (!hot[packet.geometry.index(e.x, e.y)]) {
            result.packet.events.push_back(e);
        }
    }
    return result;
}

}  // namespace evdn
