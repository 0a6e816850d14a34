#include "evdn/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace evdn {

namespace {

void require_positive(std::int64_t value, const char* name) {
    if (value <= 0) {
        throw std::invalid_argument(std::string(name) + " must be strictly positive");
    }
}

void require_positive(double value, const char* name) {
    if (!(value > 0)) {
        throw std::invalid_argument(std::string(name) + " must be strictly positive");
    }
}

void check_packet(const EventPacket& packet) {
    if (packet.geometry.pixel_count() == 0) {
        throw std::invalid_argument("filter input has zero-extent geometry");
    }
    for (const Event& e : packet.events) {
        if (!packet.geometry.contains(e.x, e.y)) {
            throw std::invalid_argument("filter input has out-of-bounds events");
        }
    }
}

/// Runs a streaming decision state over the packet. Every filter is causal:
/// state only ever reflects events already decided.
template <typename State>
FilterDecisionTrace run(const EventPacket& packet, State state) {
    check_packet(packet);
    FilterDecisionTrace trace;
    trace.kept.resize(packet.size());
    for (std::size_t i = 0; i < packet.events.size(); ++i) {
        const bool keep = state.process(packet.events[i]);
        trace.kept[i] = keep;
        trace.kept_count += keep ? 1 : 0;
    }
    trace.dropped_count = packet.size() - trace.kept_count;
    return trace;
}

constexpr std::int64_t kNever = -1;

struct TimestampMap {
    explicit TimestampMap(const SensorGeometry& g)
        : width(g.width), height(g.height), last(g.pixel_count(), kNever) {}

    std::int64_t at(int x, int y) const {
        return last[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
    }
    void set(int x, int y, std::uint64_t t) {
        last[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)] =
            static_cast<std::int64_t>(t);
    }

    int width;
    int height;
    std::vector<std::int64_t> last;
};

struct BafState {
    BafState(const SensorGeometry& g, const BafConfig& cfg) : map(g), dt(cfg.dt_us) {}

    bool process(const Event& e) {
        bool keep = false;
        for (int dy = -1; dy <= 1 && !keep; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) {
                    continue;
                }
                const int nx = e.x + dx;
                const int ny = e.y + dy;
                if (nx < 0 || ny < 0 || nx >= map.width || ny >= map.height) {
                    continue;
                }
                const std::int64_t tn = map.at(nx, ny);
                if (tn != kNever && static_cast<std::int64_t>(e.t) - tn <= dt) {
                    keep = true;
                    break;
                }
            }
        }
        map.set(e.x, e.y, e.t);
        return keep;
    }

    TimestampMap map;
    std::int64_t dt;
};

struct KnoiseState {
    struct Cell {
        std::int64_t t = kNever;
        std::uint16_t coord = 0;
        std::int8_t p = 0;
    };

    KnoiseState(const SensorGeometry& g, const KnoiseConfig& cfg)
        : rows(g.height), cols(g.width), dt(cfg.dt_us) {}

    bool process(const Event& e) {
        bool keep = false;
        const Cell& row = rows[e.y];
        if (row.t != kNever && std::abs(int(row.coord) - int(e.x)) <= 1 &&
            static_cast<std::int64_t>(e.t) - row.t <= dt) {
            keep = true;
        }
        const Cell& col = cols[e.x];
        if (!keep && col.t != kNever && std::abs(int(col.coord) - int(e.y)) <= 1 &&
            static_cast<std::int64_t>(e.t) - col.t <= dt) {
            keep = true;
        }
        rows[e.y] = Cell{static_cast<std::int64_t>(e.t), e.x, e.p};
        cols[e.x] = Cell{static_cast<std::int64_t>(e.t), e.y, e.p};
        return keep;
    }

    std::vector<Cell> rows;  // most recent event per row: its x, t, p
    std::vector<Cell> cols;  // most recent event per column: its y, t, p
    std::int64_t dt;
};

/// Fixed-capacity FIFO of recent events.
struct EventRing {
    explicit EventRing(std::size_t capacity) : slots(capacity) {}

    void push(const Event& e) {
        slots[next] = e;
        next = (next + 1) % slots.size();
        filled = std::min(filled + 1, slots.size());
    }

    std::size_t filled = 0;
    std::size_t next = 0;
    std::vector<Event> slots;
};

struct DwfState {
    DwfState(const SensorGeometry&, const DwfConfig& cfg)
        : signal(static_cast<std::size_t>(cfg.window_len)),
          noise(static_cast<std::size_t>(cfg.window_len)),
          radius(cfg.radius),
          threshold(static_cast<std::size_t>(cfg.threshold)) {}

    std::size_t matches(const EventRing& ring, const Event& e, std::size_t needed) const {
        std::size_t count = 0;
        for (std::size_t i = 0; i < ring.filled; ++i) {
            const Event& s = ring.slots[i];
            if (std::abs(int(s.x) - int(e.x)) <= radius && std::abs(int(s.y) - int(e.y)) <= radius) {
                if (++count >= needed) {
                    break;
                }
            }
        }
        return count;
    }

    bool process(const Event& e) {
        std::size_t support = matches(signal, e, threshold);
        if (support < threshold) {
            support += matches(noise, e, threshold - support);
        }
        const bool keep = support >= threshold;
        (keep ? signal : noise).push(e);
        return keep;
    }

    EventRing signal;
    EventRing noise;
    std::int64_t radius;
    std::size_t threshold;
};

struct TsState {
    TsState(const SensorGeometry& g, const TsConfig& cfg)
        : map(g),
          tau(static_cast<double>(cfg.decay_tau_us)),
          radius(static_cast<int>(cfg.radius)),
          threshold(cfg.surface_threshold) {}

    bool process(const Event& e) {
        // never-fired neighbors contribute 0; the mean is over the full
        // (2r+1)^2 - 1 neighborhood even at the border
        const double denom = static_cast<double>((2 * radius + 1) * (2 * radius + 1) - 1);
        double sum = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                if (dx == 0 && dy == 0) {
                    continue;
                }
                const int nx = e.x + dx;
                const int ny = e.y + dy;
                if (nx < 0 || ny < 0 || nx >= map.width || ny >= map.height) {
                    continue;
                }
                const std::int64_t tn = map.at(nx, ny);
                if (tn != kNever) {
                    sum += std::exp(-static_cast<double>(static_cast<std::int64_t>(e.t) - tn) / tau);
                }
            }
        }
        const bool keep = sum / denom >= threshold;
        map.set(e.x, e.y, e.t);
        return keep;
    }

    TimestampMap map;
    double tau;
    int radius;
    double threshold;
};

struct IetsState {
    IetsState(const SensorGeometry& g, const IetsConfig& cfg)
        : last_pos(g), last_neg(g), window(cfg.inceptive_window_us) {}

    bool process(const Event& e) {
        TimestampMap& map = e.p > 0 ? last_pos : last_neg;
        const std::int64_t tn = map.at(e.x, e.y);
        // inceptive iff no same-pixel same-polarity event (kept or not)
        // within the preceding window
        const bool keep = tn == kNever || static_cast<std::int64_t>(e.t) - tn > window;
        map.set(e.x, e.y, e.t);
        return keep;
    }

    TimestampMap last_pos;
    TimestampMap last_neg;
    std::int64_t window;
};

struct YnoiseState {
    YnoiseState(const SensorGeometry& g, const YnoiseConfig& cfg)
        : map(g),
          radius(static_cast<int>(cfg.radius)),
          dt(cfg.dt_us),
          threshold(cfg.density_threshold) {}

    bool process(const Event& e) {
        std::int64_t density = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                if (dx == 0 && dy == 0) {
                    continue;
                }
                const int nx = e.x + dx;
                const int ny = e.y + dy;
                if (nx < 0 || ny < 0 || nx >= map.width || ny >= map.height) {
                    continue;
                }
                const std::int64_t tn = map.at(nx, ny);
                if (tn != kNever && static_cast<std::int64_t>(e.t) - tn <= dt) {
                    ++density;
                }
            }
        }
        const bool keep = density >= threshold;
        map.set(e.x, e.y, e.t);
        return keep;
    }

    TimestampMap map;
    int radius;
    std::int64_t dt;
    std::int64_t threshold;
};

struct EvflowState {
    EvflowState(const SensorGeometry& g, const EvflowConfig& cfg)
        : map(g),
          radius(static_cast<int>(cfg.radius)),
          dt(cfg.dt_us),
          min_neighbors(static_cast<std::size_t>(cfg.min_neighbors)),
          residual_threshold(cfg.residual_threshold_us) {}

    bool process(const Event& e) {
        // gather (dx, dy, t) support from the last-timestamp surface,
        // including this pixel's own previous event
        samples.clear();
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                const int nx = e.x + dx;
                const int ny = e.y + dy;
                if (nx < 0 || ny < 0 || nx >= map.width || ny >= map.height) {
                    continue;
                }
                const std::int64_t tn = map.at(nx, ny);
                if (tn != kNever && static_cast<std::int64_t>(e.t) - tn <= dt) {
                    samples.push_back({double(dx), double(dy),
                                       static_cast<double>(tn - static_cast<std::int64_t>(e.t))});
                }
            }
        }
        const bool keep = fits_plane();
        map.set(e.x, e.y, e.t);
        return keep;
    }

    struct Sample {
        double dx, dy, t;
    };

    bool fits_plane() const {
        if (samples.size() < min_neighbors) {
            return false;
        }
        // normal equations for t = a*dx + b*dy + c; the moments are exact
        // integers for integer pixel offsets, so a vanishing determinant
        // detects collinear supports exactly
        double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0, n = 0;
        double sxt = 0, syt = 0, st = 0;
        for (const Sample& s : samples) {
            sxx += s.dx * s.dx;
            sxy += s.dx * s.dy;
            syy += s.dy * s.dy;
            sx += s.dx;
            sy += s.dy;
            n += 1;
            sxt += s.dx * s.t;
            syt += s.dy * s.t;
            st += s.t;
        }
        const double det = sxx * (syy * n - sy * sy) - sxy * (sxy * n - sy * sx) +
                           sx * (sxy * sy - syy * sx);
        if (std::abs(det) < 0.5) {
            return false;  // spatially degenerate support
        }
        const double a = ((syy * n - sy * sy) * sxt + (sx * sy - sxy * n) * syt +
                          (sxy * sy - syy * sx) * st) /
                         det;
        const double b = ((sy * sx - sxy * n) * sxt + (sxx * n - sx * sx) * syt +
                          (sxy * sx - sxx * sy) * st) /
                         det;
        const double c = ((sxy * sy - sx * syy) * sxt + (sxy * sx - sxx * sy) * syt +
                          (sxx * syy - sxy * sxy) * st) /
                         det;
        double abs_residual = 0;
        for (const Sample& s : samples) {
            abs_residual += std::abs(a * s.dx + b * s.dy + c - s.t);
        }
        return abs_residual / static_cast<double>(samples.size()) <= residual_threshold;
    }

    TimestampMap map;
    int radius;
    std::int64_t dt;
    std::size_t min_neighbors;
    double residual_threshold;
    mutable std::vector<Sample> samples;
};

struct IdentityState {
    bool process(const Event&) { return true; }
};

}  // namespace

std::string_view to_string(FilterId id) {
    switch (id) {
        case FilterId::identity: return "identity";
        case FilterId::baf: return "baf";
        case FilterId::knoise: return "knoise";
        case FilterId::dwf: return "dwf";
        case FilterId::ts: return "ts";
        case FilterId::iets: return "iets";
        case FilterId::ynoise: return "ynoise";
        case FilterId::evflow: return "evflow";
    }
    return "unknown";
}

FilterId filter_id_from_string(std::string_view name) {
    for (const FilterId id : kAllFilters) {
        if (to_string(id) == name) {
            return id;
        }
    }
    throw std::invalid_argument("unknown filter id: " + std::string(name));
}

FilterConfig default_config(FilterId id) {
    switch (id) {
        case FilterId::identity: return IdentityConfig{};
        case FilterId::baf: return BafConfig{};
        case FilterId::knoise: return KnoiseConfig{};
        case FilterId::dwf: return DwfConfig{};
        case FilterId::ts: return TsConfig{};
        case FilterId::iets: return IetsConfig{};
        case FilterId::ynoise: return YnoiseConfig{};
        case FilterId::evflow: return EvflowConfig{};
    }
    throw std::invalid_argument("unknown filter id");
}

void set_filter_param(FilterConfig& config, std::string_view key, double value) {
    const auto as_i64 = [value] { return static_cast<std::int64_t>(std::llround(value)); };
    bool ok = std::visit(
        [&](auto& cfg) {
            using T = std::decay_t<decltype(cfg)>;
            if constexpr (std::is_same_v<T, BafConfig> || std::is_same_v<T, KnoiseConfig>) {
                if (key == "dt_us") {
                    cfg.dt_us = as_i64();
                    return true;
                }
            } else if constexpr (std::is_same_v<T, DwfConfig>) {
                if (key == "window_len") {
                    cfg.window_len = as_i64();
                    return true;
                }
                if (key == "radius") {
                    cfg.radius = as_i64();
                    return true;
                }
                if (key == "threshold") {
                    cfg.threshold = as_i64();
                    return true;
                }
            } else if constexpr (std::is_same_v<T, TsConfig>) {
                if (key == "decay_tau_us") {
                    cfg.decay_tau_us = as_i64();
                    return true;
                }
                if (key == "radius") {
                    cfg.radius = as_i64();
                    return true;
                }
                if (key == "surface_threshold") {
                    cfg.surface_threshold = value;
                    return true;
                }
            } else if constexpr (std::is_same_v<T, IetsConfig>) {
                if (key == "inceptive_window_us") {
                    cfg.inceptive_window_us = as_i64();
                    return true;
                }
            } else if constexpr (std::is_same_v<T, YnoiseConfig>) {
                if (key == "radius") {
                    cfg.radius = as_i64();
                    return true;
                }
                if (key == "dt_us") {
                    cfg.dt_us = as_i64();
                    return true;
                }
                if (key == "density_threshold") {
                    cfg.density_threshold = as_i64();
                    return true;
                }
            } else if constexpr (std::is_same_v<T, EvflowConfig>) {
                if (key == "radius") {
                    cfg.radius = as_i64();
                    return true;
                }
                if (key == "dt_us") {
                    cfg.dt_us = as_i64();
                    return true;
                }
                if (key == "min_neighbors") {
                    cfg.min_neighbors = as_i64();
                    return true;
                }
                if (key == "residual_threshold_us") {
                    cfg.residual_threshold_us = value;
                    return true;
                }
            }
            return false;
        },
        config);
    if (!ok) {
        throw std::invalid_argument("unknown parameter '" + std::string(key) +
                                    "' for this filter");
    }
}

FilterDecisionTrace baf(const EventPacket& packet, const BafConfig& config) {
    require_positive(config.dt_us, "baf.dt_us");
    return run(packet, BafState(packet.geometry, config));
}

FilterDecisionTrace knoise(const EventPacket& packet, const KnoiseConfig& config) {
    require_positive(config.dt_us, "knoise.dt_us");
    return run(packet, KnoiseState(packet.geometry, config));
}

FilterDecisionTrace dwf(const EventPacket& packet, const DwfConfig& config) {
    require_positive(config.window_len, "dwf.window_len");
    require_positive(config.radius, "dwf.radius");
    require_positive(config.threshold, "dwf.threshold");
    return run(packet, DwfState(packet.geometry, config));
}

FilterDecisionTrace ts_filter(const EventPacket& packet, const TsConfig& config) {
    require_positive(config.decay_tau_us, "ts.decay_tau_us");
    require_positive(config.radius, "ts.radius");
    if (config.surface_threshold < 0 || config.surface_threshold >= 1) {
        throw std::invalid_argument("ts.surface_threshold must be in [0,1)");
    }
    return run(packet, TsState(packet.geometry, config));
}

FilterDecisionTrace iets_filter(const EventPacket& packet, const IetsConfig& config) {
    require_positive(config.inceptive_window_us, "iets.inceptive_window_us");
    return run(packet, IetsState(packet.geometry, config));
}

FilterDecisionTrace ynoise_filter(const EventPacket& packet, const YnoiseConfig& config) {
    require_positive(config.radius, "ynoise.radius");
    require_positive(config.dt_us, "ynoise.dt_us");
    if (config.density_threshold < 0) {
        throw std::invalid_argument("ynoise.density_threshold must be non-negative");
    }
    return run(packet, YnoiseState(packet.geometry, config));
}

FilterDecisionTrace evflow_filter(const EventPacket& packet, const EvflowConfig& config) {
    require_positive(config.radius, "evflow.radius");
    require_positive(config.dt_us, "evflow.dt_us");
    require_positive(config.min_neighbors, "evflow.min_neighbors");
    require_positive(config.residual_threshold_us, "evflow.residual_threshold_us");
    return run(packet, EvflowState(packet.geometry, config));
}

std::size_t knoise_memory_entries(const SensorGeometry& geometry) {
    return static_cast<std::size_t>(geometry.width) + geometry.height;
}

EventPacket filtered_packet(const EventPacket& packet, const FilterDecisionTrace& trace) {
    if (trace.kept.size() != packet.size()) {
        throw std::invalid_argument("trace does not match packet");
    }
    EventPacket out;
    out.geometry = packet.geometry;
    out.events.reserve(trace.kept_count);
    for (std::size_t i = 0; i < packet.events.size(); ++i) {
        if (trace.kept[i]) {
            out.events.push_back(packet.events[i]);
        }
    }
    return out;
}

FilterOutput apply_filter(const EventPacket& packet, FilterId id, const FilterConfig& config) {
    const auto mismatch = [] {
        return std::invalid_argument("filter config variant does not match filter id");
    };
    FilterDecisionTrace trace;
    switch (id) {
        case FilterId::identity: {
            if (!std::holds_alternative<IdentityConfig>(config)) throw mismatch();
            trace = run(packet, IdentityState{});
            break;
        }
        case FilterId::baf: {
            const auto* cfg = std::get_if<BafConfig>(&config);
            if (!cfg) throw mismatch();
            trace = baf(packet, *cfg);
            break;
        }
        case FilterId::knoise: {
            const auto* cfg = std::get_if<KnoiseConfig>(&config);
            if (!cfg) throw mismatch();
            trace = knoise(packet, *cfg);
            break;
        }
        case FilterId::dwf: {
            const auto* cfg = std::get_if<DwfConfig>(&config);
            if (!cfg) throw mismatch();
            trace = dwf(packet, *cfg);
            break;
        }
        case FilterId::ts: {
            const auto* cfg = std::get_if<TsConfig>(&config);
            if (!cfg) throw mismatch();
            trace = ts_filter(packet, *cfg);
            break;
        }
        case FilterId::iets: {
            const auto* cfg = std::get_if<IetsConfig>(&config);
            if (!cfg) throw mismatch();
            trace = iets_filter(packet, *cfg);
            break;
        }
        case FilterId::ynoise: {
            const auto* cfg = std::get_if<YnoiseConfig>(&config);
            if (!cfg) throw mismatch();
            trace = ynoise_filter(packet, *cfg);
            break;
        }
        case FilterId::evflow: {
            const auto* cfg = std::get_if<EvflowConfig>(&config);
            if (!cfg) throw mismatch();
            trace = evflow_filter(packet, *cfg);
            break;
        }
    }
    return FilterOutput{filtered_packet(packet, trace), std::move(trace)};
}

}  // namespace evdn
