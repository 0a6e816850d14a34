#include "evdn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace evdn {

namespace {

void check_params(const MetricParams& params) {
    if (params.m < 2) {
        throw std::invalid_argument("MetricParams: M must be >= 2");
    }
}

std::uint64_t effective_n(const PixelHistogram& h) { return h.total; }

}  // namespace

PixelHistogram warp_to_iwe(const EventPacket& packet, const WarpModel& model) {
    PixelHistogram h;
    h.geometry = packet.geometry;
    h.counts.assign(packet.geometry.pixel_count(), 0);
    if (packet.empty()) {
        return h;
    }

    if (model.kind == WarpModel::Kind::identity) {
        for (const Event& e : packet.events) {
            ++h.counts[packet.geometry.index(e.x, e.y)];
        }
        h.total = packet.size();
        return h;
    }

    const double t_ref = static_cast<double>(model.t_ref.value_or(packet.t_first()));
    for (const Event& e : packet.events) {
        const double dt = (static_cast<double>(e.t) - t_ref) / 1e6;
        const long wx = std::lround(e.x - model.vx * dt);
        const long wy = std::lround(e.y - model.vy * dt);
        if (wx < 0 || wy < 0 || wx >= packet.geometry.width || wy >= packet.geometry.height) {
            ++h.discarded;
            continue;
        }
        ++h.counts[packet.geometry.index(static_cast<std::uint16_t>(wx),
                                         static_cast<std::uint16_t>(wy))];
        ++h.total;
    }
    return h;
}

std::uint64_t tss(const PixelHistogram& h) {
    std::uint64_t sum = 0;
    for (const std::uint32_t n : h.counts) {
        sum += static_cast<std::uint64_t>(n) * n;
    }
    return sum;
}

std::uint32_t spatial_support(const PixelHistogram& h) {
    std::uint32_t support = 0;
    for (const std::uint32_t n : h.counts) {
        support += n > 0 ? 1 : 0;
    }
    return support;
}

double ntss(const PixelHistogram& h) {
    const std::uint64_t n_total = effective_n(h);
    if (n_total < 2) {
        throw UndefinedMetric("ntss: needs at least 2 events, got " + std::to_string(n_total));
    }
    std::uint64_t pairs = 0;
    for (const std::uint32_t n : h.counts) {
        pairs += static_cast<std::uint64_t>(n) * (n - (n > 0 ? 1 : 0));
    }
    return static_cast<double>(pairs) /
           (static_cast<double>(n_total) * static_cast<double>(n_total - 1));
}

double l_n(const PixelHistogram& h, const MetricParams& params) {
    check_params(params);
    const std::uint64_t n_total = effective_n(h);
    if (n_total == 0) {
        throw UndefinedMetric("l_n: empty histogram");
    }
    if (n_total < params.m) {
        throw UndefinedMetric("l_n: N=" + std::to_string(n_total) + " is below the reference M=" +
                              std::to_string(params.m));
    }
    const double alpha = 1.0 - static_cast<double>(params.m) / static_cast<double>(n_total);

    // counts are overwhelmingly small integers; memoize alpha^n for them
    constexpr std::size_t kCacheSize = 64;
    double cache[kCacheSize];
    cache[0] = 1.0;  // zero-count pixels contribute alpha^0 = 1
    for (std::size_t n = 1; n < kCacheSize; ++n) {
        cache[n] = -1.0;
    }

    double sum = 0.0;
    for (const std::uint32_t n : h.counts) {
        if (n < kCacheSize) {
            if (cache[n] < 0) {
                cache[n] = std::pow(alpha, static_cast<double>(n));
            }
            sum += cache[n];
        } else {
            sum += std::pow(alpha, static_cast<double>(n));
        }
    }
    return static_cast<double>(h.geometry.pixel_count()) - sum;
}

double esr(const PixelHistogram& h, const MetricParams& params) {
    return std::sqrt(ntss(h) * l_n(h, params));
}

double esr(const EventPacket& packet, const WarpModel& model, const MetricParams& params) {
    return esr(warp_to_iwe(packet, model), params);
}

MesrResult mesr(std::span<const EventPacket> groups, const WarpModel& model,
                const MetricParams& params) {
    check_params(params);
    MesrResult result;
    double sum = 0.0;
    for (const EventPacket& group : groups) {
        const PixelHistogram h = warp_to_iwe(group, model);
        if (h.total < std::max<std::uint64_t>(2, params.m)) {
            ++result.excluded;
            continue;
        }
        const double value = esr(h, params);
        result.per_group.push_back(value);
        sum += value;
    }
    if (result.per_group.empty()) {
        throw UndefinedMetric("mesr: every group has fewer than M=" + std::to_string(params.m) +
                              " effective events");
    }
    result.mean = sum / static_cast<double>(result.per_group.size());
    return result;
}

}  // namespace evdn
