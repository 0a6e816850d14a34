#pragma once

// Shared test utilities: random packet generation, independent metric
// oracles, and a categorical sampler for the statistical checks. Oracles
// here deliberately avoid the library's computation paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "evdn/core.hpp"
#include "evdn/rng.hpp"

namespace evdn::testing {

inline EventPacket random_packet(SplitMix64& rng, std::size_t max_events = 2000,
                                 std::uint16_t max_dim = 64) {
    EventPacket packet;
    packet.geometry.width = static_cast<std::uint16_t>(1 + rng.next_below(max_dim));
    packet.geometry.height = static_cast<std::uint16_t>(1 + rng.next_below(max_dim));
    const std::size_t n = rng.next_below(max_events + 1);
    packet.events.reserve(n);
    std::uint64_t t = rng.next_below(1000000);
    for (std::size_t i = 0; i < n; ++i) {
        Event e;
        t += rng.next_below(500);  // ties allowed
        e.t = t;
        e.x = static_cast<std::uint16_t>(rng.next_below(packet.geometry.width));
        e.y = static_cast<std::uint16_t>(rng.next_below(packet.geometry.height));
        e.p = rng.next_bool() ? std::int8_t{1} : std::int8_t{-1};
        packet.events.push_back(e);
    }
    return packet;
}

/// Probability that two events drawn without replacement share a pixel,
/// by direct enumeration of all unordered pairs.
inline double pair_sharing_probability(const EventPacket& packet) {
    const std::size_t n = packet.size();
    std::uint64_t shared = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (packet.events[i].x == packet.events[j].x &&
                packet.events[i].y == packet.events[j].y) {
                ++shared;
            }
        }
    }
    const double total = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return static_cast<double>(shared) / total;
}

/// Interpolated support K - sum (1 - M/N)^{n_i}, recounted from the raw
/// events into a map, with the zero-count pixels added explicitly.
inline double interpolated_support_oracle(const EventPacket& packet, std::uint64_t m) {
    std::map<std::pair<std::uint16_t, std::uint16_t>, std::uint64_t> counts;
    for (const Event& e : packet.events) {
        ++counts[{e.x, e.y}];
    }
    const double n = static_cast<double>(packet.size());
    const double alpha = 1.0 - static_cast<double>(m) / n;
    double sum = 0.0;
    for (const auto& [pixel, count] : counts) {
        sum += std::pow(alpha, static_cast<double>(count));
    }
    const double k = packet.geometry.pixel_count();
    sum += k - static_cast<double>(counts.size());  // never-hit pixels, alpha^0 = 1
    return k - sum;
}

/// Draws categorical samples by inverse CDF; independent of any library
/// sampling machinery.
class CategoricalSampler {
public:
    explicit CategoricalSampler(const std::vector<double>& weights) {
        cdf_.reserve(weights.size());
        double acc = 0;
        for (const double w : weights) {
            acc += w;
            cdf_.push_back(acc);
        }
        total_ = acc;
    }

    std::size_t draw(SplitMix64& rng) const {
        const double u = rng.next_double() * total_;
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

private:
    std::vector<double> cdf_;
    double total_ = 0;
};

/// Signal/noise mix with ground-truth labels (true = signal), merged in
/// timestamp order with signal first on ties.
struct LabeledMix {
    EventPacket packet;
    std::vector<bool> is_signal;
};

inline LabeledMix labeled_mix(const EventPacket& signal, const EventPacket& noise) {
    LabeledMix mix;
    mix.packet.geometry = signal.geometry;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < signal.size() || j < noise.size()) {
        const bool take_signal =
            j >= noise.size() || (i < signal.size() && signal.events[i].t <= noise.events[j].t);
        if (take_signal) {
            mix.packet.events.push_back(signal.events[i++]);
            mix.is_signal.push_back(true);
        } else {
            mix.packet.events.push_back(noise.events[j++]);
            mix.is_signal.push_back(false);
        }
    }
    return mix;
}

inline EventPacket uniform_noise_packet(const SensorGeometry& geometry, std::size_t count,
                                        std::uint64_t t_first, std::uint64_t t_last,
                                        std::uint64_t seed) {
    SplitMix64 rng(seed);
    EventPacket packet;
    packet.geometry = geometry;
    packet.events.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Event e;
        e.t = t_first + rng.next_below(t_last - t_first + 1);
        e.x = static_cast<std::uint16_t>(rng.next_below(geometry.width));
        e.y = static_cast<std::uint16_t>(rng.next_below(geometry.height));
        e.p = rng.next_bool() ? std::int8_t{1} : std::int8_t{-1};
        packet.events.push_back(e);
    }
    std::stable_sort(packet.events.begin(), packet.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    return packet;
}

}  // namespace evdn::testing
