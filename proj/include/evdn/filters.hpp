#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evdn/core.hpp"

namespace evdn {

enum class FilterId { identity, baf, knoise, dwf, ts, iets, ynoise, evflow };

std::string_view to_string(FilterId id);
FilterId filter_id_from_string(std::string_view name);

/// All seven denoisers plus the pass-through.
constexpr FilterId kAllFilters[] = {FilterId::identity, FilterId::baf,    FilterId::knoise,
                                    FilterId::dwf,      FilterId::ts,     FilterId::iets,
                                    FilterId::ynoise,   FilterId::evflow};

// Per-filter parameter bundles. Field names double as the config-file and
// --param keys.

struct BafConfig {
    std::int64_t dt_us = 2000;  // neighbor support window
};

struct KnoiseConfig {
    std::int64_t dt_us = 1000;
};

struct DwfConfig {
    std::int64_t window_len = 36;  // per FIFO window
    std::int64_t radius = 9;       // L-inf distance
    std::int64_t threshold = 1;    // in-window matches required
};

struct TsConfig {
    std::int64_t decay_tau_us = 20000;
    std::int64_t radius = 1;
    double surface_threshold = 0.3;
};

struct IetsConfig {
    std::int64_t inceptive_window_us = 2000;
};

struct YnoiseConfig {
    std::int64_t radius = 2;
    std::int64_t dt_us = 10000;
    std::int64_t density_threshold = 2;
};

struct EvflowConfig {
    std::int64_t radius = 3;
    std::int64_t dt_us = 10000;
    std::int64_t min_neighbors = 4;
    double residual_threshold_us = 1000;
};

struct IdentityConfig {};

using FilterConfig = std::variant<IdentityConfig, BafConfig, KnoiseConfig, DwfConfig, TsConfig,
                                  IetsConfig, YnoiseConfig, EvflowConfig>;

FilterConfig default_config(FilterId id);

/// Sets a numeric field by its spec name; throws std::invalid_argument on
/// unknown keys for the config's filter.
void set_filter_param(FilterConfig& config, std::string_view key, double value);

/// Per-event keep/drop decisions aligned with the input packet.
struct FilterDecisionTrace {
    std::vector<bool> kept;
    std::size_t kept_count = 0;
    std::size_t dropped_count = 0;
};

FilterDecisionTrace baf(const EventPacket& packet, const BafConfig& config);
FilterDecisionTrace knoise(const EventPacket& packet, const KnoiseConfig& config);
FilterDecisionTrace dwf(const EventPacket& packet, const DwfConfig& config);
FilterDecisionTrace ts_filter(const EventPacket& packet, const TsConfig& config);
FilterDecisionTrace iets_filter(const EventPacket& packet, const IetsConfig& config);
FilterDecisionTrace ynoise_filter(const EventPacket& packet, const YnoiseConfig& config);
FilterDecisionTrace evflow_filter(const EventPacket& packet, const EvflowConfig& config);

/// Auxiliary state entries a KNoise instance allocates for this geometry
/// (one per row plus one per column).
std::size_t knoise_memory_entries(const SensorGeometry& geometry);

/// Applies the kept flags, preserving event order.
EventPacket filtered_packet(const EventPacket& packet, const FilterDecisionTrace& trace);

struct FilterOutput {
    EventPacket packet;
    FilterDecisionTrace trace;
};

/// Uniform dispatch. The config variant must match the filter id (identity
/// accepts IdentityConfig).
FilterOutput apply_filter(const EventPacket& packet, FilterId id, const FilterConfig& config);

}  // namespace evdn
