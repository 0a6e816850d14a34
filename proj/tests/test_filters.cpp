#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evdn/core.hpp"
#include "evdn/filters.hpp"
#include "evdn/rng.hpp"
#include "evdn/synth.hpp"
#include "support/helpers.hpp"

using namespace evdn;

namespace {

EventPacket packet_of(std::uint16_t w, std::uint16_t h, std::initializer_list<Event> events) {
    EventPacket p;
    p.geometry = {w, h};
    p.events = events;
    return p;
}

/// Small labeled scene for keep-rate measurements: slow bar plus sparse
/// uniform noise over the same span.
testing::LabeledMix edge_plus_noise_mix() {
    SceneSpec spec;
    spec.geometry = {64, 48};
    spec.vx = 120;
    spec.vy = 0;
    spec.duration_us = 700000;
    spec.contrast_threshold = 0.25;
    spec.edge_log_intensity = 0.5;
    spec.pattern_size = 10;
    const EventPacket signal = generate_scene(spec, 41);
    const EventPacket noise = testing::uniform_noise_packet(
        spec.geometry, signal.size() / 5, signal.t_first(), signal.t_last(), 57);
    return testing::labeled_mix(signal, noise);
}

struct KeepRates {
    double signal = 0;
    double noise = 0;
};

KeepRates keep_rates(const testing::LabeledMix& mix, const FilterDecisionTrace& trace) {
    std::size_t kept_signal = 0;
    std::size_t kept_noise = 0;
    std::size_t total_signal = 0;
    for (std::size_t i = 0; i < mix.packet.size(); ++i) {
        total_signal += mix.is_signal[i] ? 1 : 0;
        if (trace.kept[i]) {
            (mix.is_signal[i] ? kept_signal : kept_noise) += 1;
        }
    }
    const std::size_t total_noise = mix.packet.size() - total_signal;
    return {static_cast<double>(kept_signal) / static_cast<double>(total_signal),
            static_cast<double>(kept_noise) / static_cast<double>(total_noise)};
}

}  // namespace

TEST_CASE("baf needs a recent neighbor") {
    SUBCASE("lone event is dropped") {
        const auto p = packet_of(8, 8, {{100, 4, 4, 1}});
        const auto trace = baf(p, BafConfig{});
        CHECK(trace.kept_count == 0);
        CHECK(trace.dropped_count == 1);
    }
    SUBCASE("adjacent pair inside the window: first dropped, second kept") {
        const auto p = packet_of(8, 8, {{1000, 4, 4, 1}, {2000, 5, 4, -1}});
        const auto trace = baf(p, BafConfig{2000});
        CHECK_FALSE(trace.kept[0]);
        CHECK(trace.kept[1]);
    }
    SUBCASE("stale neighbor does not help") {
        const auto p = packet_of(8, 8, {{1000, 4, 4, 1}, {9000, 5, 4, 1}});
        const auto trace = baf(p, BafConfig{2000});
        CHECK(trace.kept_count == 0);
    }
    SUBCASE("same pixel alone is not neighbor support") {
        const auto p = packet_of(8, 8, {{1000, 4, 4, 1}, {1500, 4, 4, 1}});
        CHECK(baf(p, BafConfig{2000}).kept_count == 0);
    }
    SUBCASE("edge events keep, isolated noise drops on the labeled fixture") {
        const auto mix = edge_plus_noise_mix();
        const auto rates = keep_rates(mix, baf(mix.packet, BafConfig{}));
        CHECK(rates.signal > 0.8);
        CHECK(rates.noise < 0.1);
    }
}

TEST_CASE("knoise row/column memories") {
    SUBCASE("lone event dropped") {
        const auto p = packet_of(8, 8, {{100, 4, 4, 1}});
        CHECK(knoise(p, KnoiseConfig{}).kept_count == 0);
    }
    SUBCASE("same-row adjacent pair keeps the second event") {
        const auto p = packet_of(8, 8, {{1000, 4, 4, 1}, {1500, 5, 4, -1}});
        const auto trace = knoise(p, KnoiseConfig{1000});
        CHECK_FALSE(trace.kept[0]);
        CHECK(trace.kept[1]);
    }
    SUBCASE("row memory forgets after a different column fires") {
        // row memory now points far away, column memory still matches
        const auto p = packet_of(8, 8, {{1000, 1, 4, 1}, {1100, 7, 4, 1}, {1200, 1, 5, 1}});
        const auto trace = knoise(p, KnoiseConfig{1000});
        CHECK(trace.kept[2]);  // column 1 memory holds y=4, adjacent to y=5
    }
    SUBCASE("sweeping vertical edge keeps well, noise drops") {
        const auto mix = edge_plus_noise_mix();
        const auto rates = keep_rates(mix, knoise(mix.packet, KnoiseConfig{}));
        CHECK(rates.signal > 0.6);
        CHECK(rates.noise < 0.15);
        CHECK(rates.signal > 3 * rates.noise);
    }
    SUBCASE("auxiliary state is one entry per row plus one per column") {
        CHECK(knoise_memory_entries({346, 260}) == 606);
    }
}

TEST_CASE("dwf double FIFO") {
    SUBCASE("first event ever is dropped") {
        const auto p = packet_of(64, 64, {{10, 32, 32, 1}});
        CHECK(dwf(p, DwfConfig{}).kept_count == 0);
    }
    SUBCASE("burst then one more at the same pixel keeps the last") {
        EventPacket p;
        p.geometry = {64, 64};
        for (int i = 0; i < 36; ++i) {
            p.events.push_back({static_cast<std::uint64_t>(i), 20, 20, 1});
        }
        p.events.push_back({100, 20, 20, 1});
        const auto trace = dwf(p, DwfConfig{});
        CHECK(trace.kept.back());
    }
    SUBCASE("decisions ignore timestamps entirely") {
        SplitMix64 rng(15);
        auto a = testing::random_packet(rng, 300, 32);
        auto b = a;
        std::uint64_t t = 5;
        for (auto& e : b.events) {
            e.t = t;
            t += 7919;  // same spatial sequence, different clock
        }
        CHECK(dwf(a, DwfConfig{}).kept == dwf(b, DwfConfig{}).kept);
    }
}

TEST_CASE("ts surface threshold") {
    SUBCASE("isolated event has zero surface") {
        const auto p = packet_of(16, 16, {{5000, 8, 8, 1}});
        CHECK(ts_filter(p, TsConfig{}).kept_count == 0);
    }
    SUBCASE("eight neighbors at exactly tau give e^-1") {
        EventPacket p;
        p.geometry = {16, 16};
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) {
                    continue;
                }
                p.events.push_back(
                    {1000, static_cast<std::uint16_t>(8 + dx), static_cast<std::uint16_t>(8 + dy), 1});
            }
        }
        p.events.push_back({1000 + 20000, 8, 8, 1});

        TsConfig cfg;  // threshold 0.3 < e^-1
        CHECK(ts_filter(p, cfg).kept.back());

        cfg.surface_threshold = 0.37;  // just above e^-1 = 0.3679
        CHECK_FALSE(ts_filter(p, cfg).kept.back());
    }
    SUBCASE("zero threshold keeps everything") {
        SplitMix64 rng(8);
        const auto p = testing::random_packet(rng, 300, 24);
        TsConfig cfg;
        cfg.surface_threshold = 0.0;
        CHECK(ts_filter(p, cfg).kept_count == p.size());
    }
}

TEST_CASE("iets keeps inceptive events only") {
    SUBCASE("three same-pixel events inside one window keep the first") {
        const auto p = packet_of(8, 8, {{1000, 2, 2, 1}, {1800, 2, 2, 1}, {2600, 2, 2, 1}});
        const auto trace = iets_filter(p, IetsConfig{2000});
        CHECK(trace.kept[0]);
        CHECK_FALSE(trace.kept[1]);
        CHECK_FALSE(trace.kept[2]);  // chained to the dropped predecessor
    }
    SUBCASE("separation beyond the window keeps both") {
        const auto p = packet_of(8, 8, {{1000, 2, 2, 1}, {3500, 2, 2, 1}});
        CHECK(iets_filter(p, IetsConfig{2000}).kept_count == 2);
    }
    SUBCASE("opposite polarities are tracked separately") {
        const auto p = packet_of(8, 8, {{1000, 2, 2, 1}, {1200, 2, 2, -1}});
        CHECK(iets_filter(p, IetsConfig{2000}).kept_count == 2);
    }
}

TEST_CASE("ynoise density gate") {
    SUBCASE("zero threshold is the identity") {
        SplitMix64 rng(3);
        const auto p = testing::random_packet(rng, 300, 24);
        YnoiseConfig cfg;
        cfg.density_threshold = 0;
        CHECK(ynoise_filter(p, cfg).kept_count == p.size());
    }
    SUBCASE("isolated event is dropped at any positive threshold") {
        const auto p = packet_of(16, 16, {{100, 8, 8, 1}});
        YnoiseConfig cfg;
        cfg.density_threshold = 1;
        CHECK(ynoise_filter(p, cfg).kept_count == 0);
    }
    SUBCASE("signal keep rate beats noise keep rate by 3x on the labeled fixture") {
        const auto mix = edge_plus_noise_mix();
        const auto rates = keep_rates(mix, ynoise_filter(mix.packet, YnoiseConfig{}));
        CHECK(rates.signal > 3 * rates.noise);
    }
}

TEST_CASE("evflow plane fit") {
    SUBCASE("isolated event lacks support") {
        const auto p = packet_of(16, 16, {{100, 8, 8, 1}});
        CHECK(evflow_filter(p, EvflowConfig{}).kept_count == 0);
    }
    SUBCASE("perfect timestamp plane is kept") {
        EventPacket p;
        p.geometry = {32, 32};
        // last-timestamp surface t = 100*x around (16,16)
        for (int x = 13; x <= 19; ++x) {
            for (int y = 13; y <= 19; ++y) {
                p.events.push_back({static_cast<std::uint64_t>(10000 + 100 * x),
                                    static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), 1});
            }
        }
        std::stable_sort(p.events.begin(), p.events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
        p.events.push_back({10000 + 100 * 16, 16, 16, 1});
        const auto trace = evflow_filter(p, EvflowConfig{});
        CHECK(trace.kept.back());
    }
    SUBCASE("collinear support is a degenerate fit and drops") {
        EventPacket p;
        p.geometry = {32, 32};
        for (int x = 13; x <= 19; ++x) {
            p.events.push_back({static_cast<std::uint64_t>(1000 + x), static_cast<std::uint16_t>(x),
                                16, 1});
        }
        p.events.push_back({2000, 16, 16, 1});
        CHECK_FALSE(evflow_filter(p, EvflowConfig{}).kept.back());
    }
    SUBCASE("random timestamps are dropped with high probability") {
        SplitMix64 rng(2718);
        int drops = 0;
        const int trials = 200;
        for (int trial = 0; trial < trials; ++trial) {
            EventPacket p;
            p.geometry = {32, 32};
            for (int x = 13; x <= 19; ++x) {
                for (int y = 13; y <= 19; ++y) {
                    if (x == 16 && y == 16) {
                        continue;
                    }
                    p.events.push_back({rng.next_below(9000),
                                        static_cast<std::uint16_t>(x),
                                        static_cast<std::uint16_t>(y), 1});
                }
            }
            std::stable_sort(p.events.begin(), p.events.end(),
                             [](const Event& a, const Event& b) { return a.t < b.t; });
            p.events.push_back({9500, 16, 16, 1});
            if (!evflow_filter(p, EvflowConfig{}).kept.back()) {
                ++drops;
            }
        }
        CHECK(drops >= trials * 95 / 100);
    }
}

TEST_CASE("apply_filter dispatch honors the contract") {
    SplitMix64 rng(555);
    const auto p = testing::random_packet(rng, 400, 24);

    SUBCASE("identity keeps everything") {
        const auto out = apply_filter(p, FilterId::identity, IdentityConfig{});
        CHECK(out.trace.kept_count == p.size());
        CHECK(out.packet.events == p.events);
    }
    SUBCASE("dispatch equals the direct call") {
        const auto direct = baf(p, BafConfig{});
        const auto via = apply_filter(p, FilterId::baf, BafConfig{});
        CHECK(direct.kept == via.trace.kept);
        CHECK(via.packet.events == filtered_packet(p, direct).events);
    }
    SUBCASE("config variant must match the id") {
        CHECK_THROWS_AS(apply_filter(p, FilterId::baf, DwfConfig{}), std::invalid_argument);
    }
    SUBCASE("unknown names are rejected") {
        CHECK_THROWS_AS(filter_id_from_string("median"), std::invalid_argument);
        CHECK(filter_id_from_string("evflow") == FilterId::evflow);
        CHECK(to_string(FilterId::ynoise) == "ynoise");
    }
}

TEST_CASE("every filter emits a sorted in-bounds subsequence") {
    SplitMix64 rng(31415);
    for (int iter = 0; iter < 12; ++iter) {
        const auto p = testing::random_packet(rng, 500, 32);
        for (const FilterId id : kAllFilters) {
            const auto out = apply_filter(p, id, default_config(id));
            CHECK(out.trace.kept_count + out.trace.dropped_count == p.size());
            CHECK(out.packet.size() == out.trace.kept_count);
            CHECK(validate_packet(out.packet).ok());
            // subsequence, bit-exact
            std::size_t idx = 0;
            for (const Event& e : p.events) {
                if (idx < out.packet.size() && out.packet.events[idx] == e) {
                    ++idx;
                }
            }
            CHECK(idx == out.packet.size());
        }
    }
}

TEST_CASE("filter parameters set by key") {
    FilterConfig cfg = default_config(FilterId::ts);
    set_filter_param(cfg, "decay_tau_us", 5000);
    set_filter_param(cfg, "surface_threshold", 0.5);
    const auto& ts_cfg = std::get<TsConfig>(cfg);
    CHECK(ts_cfg.decay_tau_us == 5000);
    CHECK(ts_cfg.surface_threshold == 0.5);
    CHECK_THROWS_AS(set_filter_param(cfg, "radius_typo", 1), std::invalid_argument);

    FilterConfig bad = default_config(FilterId::baf);
    set_filter_param(bad, "dt_us", -5);
    EventPacket p;
    p.geometry = {4, 4};
    CHECK_THROWS_AS(apply_filter(p, FilterId::baf, bad), std::invalid_argument);
}
