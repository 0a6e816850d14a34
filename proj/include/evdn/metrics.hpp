#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evdn/core.hpp"

namespace evdn {

/// Event warping model. `identity` accumulates events where they fired;
/// `linear` projects them along a constant pixel velocity to a reference
/// time. When `t_ref` is empty the warp anchors at each packet's first
/// event timestamp, which keeps per-group warps of a long sequence in frame.
struct WarpModel {
    enum class Kind { identity, linear };

    Kind kind = Kind::identity;
    double vx = 0.0;  // px/s
    double vy = 0.0;  // px/s
    std::optional<std::uint64_t> t_ref;

    static WarpModel identity() { return {}; }
    static WarpModel linear(double vx, double vy, std::optional<std::uint64_t> t_ref = {}) {
        return {Kind::linear, vx, vy, t_ref};
    }
};

/// Image of warped events: per-pixel accumulation counts n_i over the full
/// sensor grid. `total` is the number of accumulated events; warped
/// coordinates falling outside the sensor are counted in `discarded`.
struct PixelHistogram {
    SensorGeometry geometry;
    std::vector<std::uint32_t> counts;
    std::uint64_t total = 0;
    std::uint64_t discarded = 0;
};

/// Fixes the ESR evaluation contract: M is the reference event count that
/// the spatial support is interpolated to, held constant across an entire
/// evaluation.
struct MetricParams {
    std::uint64_t m = 20000;
};

/// Warps each event to the reference time, rounds to the nearest pixel and
/// accumulates with unit weight (polarity is ignored).
PixelHistogram warp_to_iwe(const EventPacket& packet, const WarpModel& model);

/// Total sum of squares of the pixel counts.
std::uint64_t tss(const PixelHistogram& h);

/// Number of pixels with at least one accumulated event.
std::uint32_t spatial_support(const PixelHistogram& h);

/// Normalized TSS: sum n_i(n_i - 1) / (N(N - 1)), the probability that two
/// events drawn without replacement share a pixel. Requires N >= 2.
double ntss(const PixelHistogram& h);

/// Interpolated spatial support K - sum (1 - M/N)^{n_i} with 0^0 = 1, so
/// at M = N it equals spatial_support exactly. Requires M <= N.
double l_n(const PixelHistogram& h, const MetricParams& params);

/// Event structural ratio sqrt(ntss * l_n) of an already-built histogram.
double esr(const PixelHistogram& h, const MetricParams& params);

/// Warps the packet and scores it. The N used by the preconditions is the
/// effective count after out-of-bounds discards.
double esr(const EventPacket& packet, const WarpModel& model, const MetricParams& params);

struct MesrResult {
    double mean = 0.0;
    std::vector<double> per_group;  // ESR of each group that passed the N >= max(2, M) gate
    std::size_t excluded = 0;       // groups that failed it
};

/// Mean ESR over event groups. Groups whose effective N falls below
/// max(2, M) are excluded and counted, never coerced to zero.
MesrResult mesr(std::span<const EventPacket> groups, const WarpModel& model,
                const MetricParams& params);

}  // namespace evdn
