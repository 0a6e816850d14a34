#include "evdn/bench.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "evdn/io.hpp"
#include "evdn/rng.hpp"

namespace evdn {

namespace {

using json = nlohmann::ordered_json;

unsigned worker_count(const BenchmarkPlan& plan) {
    if (plan.threads > 0) {
        return plan.threads;
    }
    if (const char* env = std::getenv("EVDN_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 0) {
            return static_cast<unsigned>(parsed);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

std::string format_double(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string format_noise_level(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

BenchmarkCell score_cell(const EventPacket& stream, const FilterEntry& entry,
                         const BenchmarkProtocol& protocol, bool record_wall_time) {
    BenchmarkCell cell;
    cell.filter = to_string(entry.id);

    const auto start = std::chrono::steady_clock::now();
    const FilterOutput out = apply_filter(stream, entry.id, entry.config);
    cell.kept_ratio = stream.empty() ? 0.0
                                     : static_cast<double>(out.trace.kept_count) /
                                           static_cast<double>(stream.size());
    const std::vector<EventPacket> groups = slice_by_count(out.packet, protocol.group_size);
    try {
        const MesrResult result = mesr(groups, protocol.warp, MetricParams{protocol.m});
        cell.mesr = result.mean;
        cell.per_group_esr = result.per_group;
        cell.groups = result.per_group.size();
        cell.excluded = result.excluded;
    } catch (const UndefinedMetric&) {
        cell.excluded = groups.size();
    }
    const auto stop = std::chrono::steady_clock::now();
    if (record_wall_time) {
        cell.wall_ms = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count());
    }
    return cell;
}

// ---- JSON helpers -------------------------------------------------------

json warp_to_json(const WarpModel& warp) {
    json j;
    j["kind"] = warp.kind == WarpModel::Kind::identity ? "identity" : "linear";
    if (warp.kind == WarpModel::Kind::linear) {
        j["vx"] = warp.vx;
        j["vy"] = warp.vy;
        if (warp.t_ref) {
            j["t_ref"] = *warp.t_ref;
        }
    }
    return j;
}

WarpModel warp_from_json(const json& j) {
    WarpModel warp;
    const std::string kind = j.value("kind", "identity");
    if (kind == "identity") {
        return warp;
    }
    if (kind != "linear") {
        throw FormatError("warp kind must be identity or linear");
    }
    warp.kind = WarpModel::Kind::linear;
    warp.vx = j.value("vx", 0.0);
    warp.vy = j.value("vy", 0.0);
    if (j.contains("t_ref")) {
        warp.t_ref = j.at("t_ref").get<std::uint64_t>();
    }
    return warp;
}

json protocol_to_json(const BenchmarkProtocol& p) {
    json j;
    j["group_size"] = p.group_size;
    j["m"] = p.m;
    j["warp"] = warp_to_json(p.warp);
    return j;
}

BenchmarkProtocol protocol_from_json(const json& j) {
    BenchmarkProtocol p;
    p.group_size = j.value("group_size", p.group_size);
    p.m = j.value("m", p.m);
    if (j.contains("warp")) {
        p.warp = warp_from_json(j.at("warp"));
    }
    return p;
}

SceneSpec scene_from_json(const json& j) {
    SceneSpec spec;
    spec.geometry.width = j.at("width").get<std::uint16_t>();
    spec.geometry.height = j.at("height").get<std::uint16_t>();
    spec.duration_us = j.at("duration_us").get<std::uint64_t>();
    const std::string pattern = j.value("pattern", "bar");
    if (pattern == "bar") {
        spec.pattern = ScenePattern::translating_bar;
    } else if (pattern == "disk") {
        spec.pattern = ScenePattern::translating_disk;
    } else {
        throw FormatError("scene pattern must be bar or disk");
    }
    spec.vx = j.at("vx").get<double>();
    spec.vy = j.at("vy").get<double>();
    spec.contrast_threshold = j.value("contrast_threshold", spec.contrast_threshold);
    spec.background_log_intensity = j.value("l0", spec.background_log_intensity);
    spec.edge_log_intensity = j.value("l1", spec.edge_log_intensity);
    spec.pattern_size = j.value("pattern_size", spec.pattern_size);
    spec.edge_ramp_px = j.value("edge_ramp_px", spec.edge_ramp_px);
    spec.bar_along_motion = j.value("bar_along_motion", spec.bar_along_motion);
    spec.texture_amplitude = j.value("texture_amplitude", spec.texture_amplitude);
    spec.texture_cell_px = j.value("texture_cell_px", spec.texture_cell_px);
    spec.step_us = j.value("step_us", spec.step_us);
    return spec;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkPlan& plan) {
    if (plan.inputs.empty() || plan.filters.empty()) {
        throw std::invalid_argument("benchmark plan needs at least one input and one filter");
    }
    if (plan.protocol.group_size <= plan.protocol.m) {
        throw std::invalid_argument("benchmark plan requires group_size > M");
    }

    BenchmarkReport report;
    report.version = kVersion;
    report.seed = plan.seed;
    report.protocol = plan.protocol;
    report.cells.reserve(plan.inputs.size() * plan.noise_levels.size() * plan.filters.size());

    const unsigned workers = worker_count(plan);

    for (std::size_t input_idx = 0; input_idx < plan.inputs.size(); ++input_idx) {
        const BenchmarkInput& input = plan.inputs[input_idx];
        EventPacket base;
        try {
            if (const auto* path = std::get_if<std::string>(&input.source)) {
                base = read_events_file(*path).packet;
            } else {
                const SceneInput& scene = std::get<SceneInput>(input.source);
                base = generate_scene(scene.spec, scene.seed);
            }
        } catch (const std::exception& e) {
            report.input_errors.push_back(input.name + ": " + e.what());
            continue;
        }

        for (std::size_t rho_idx = 0; rho_idx < plan.noise_levels.size(); ++rho_idx) {
            const double rho = plan.noise_levels[rho_idx];
            EventPacket stream;
            try {
                NoiseSpec noise;
                noise.ratio = rho;
                noise.seed = derive_seed(plan.seed, input_idx * 1024 + rho_idx);
                stream = inject_uniform_noise(base, noise);
            } catch (const std::exception& e) {
                report.input_errors.push_back(input.name + ": " + e.what());
                continue;
            }

            // cells of one stream are independent; run them on the pool
            std::vector<BenchmarkCell> cells(plan.filters.size());
            std::atomic<std::size_t> next{0};
            const auto work = [&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= plan.filters.size()) {
                        return;
                    }
                    cells[i] =
                        score_cell(stream, plan.filters[i], plan.protocol, plan.record_wall_time);
                    cells[i].input = input.name;
                    cells[i].noise_level = rho;
                }
            };
            if (workers <= 1 || plan.filters.size() <= 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                const unsigned n = std::min<unsigned>(workers, plan.filters.size());
                pool.reserve(n);
                for (unsigned w = 0; w < n; ++w) {
                    pool.emplace_back(work);
                }
                for (auto& t : pool) {
                    t.join();
                }
            }
            for (auto& cell : cells) {
                report.cells.push_back(std::move(cell));
            }
        }
    }

    if (report.cells.empty()) {
        throw std::runtime_error("benchmark produced no cells: " +
                                 (report.input_errors.empty() ? std::string("empty plan")
                                                              : report.input_errors.front()));
    }
    return report;
}

std::size_t emit_report_csv(const BenchmarkReport& report, std::ostream& sink) {
    std::string out = "input,noise_level,filter,mesr,groups,excluded,kept_ratio,wall_ms\n";
    for (const BenchmarkCell& cell : report.cells) {
        out += cell.input;
        out += ',';
        out += format_noise_level(cell.noise_level);
        out += ',';
        out += cell.filter;
        out += ',';
        if (cell.mesr) {
            out += format_double(*cell.mesr, 6);
        }
        out += ',';
        out += std::to_string(cell.groups);
        out += ',';
        out += std::to_string(cell.excluded);
        out += ',';
        out += format_double(cell.kept_ratio, 6);
        out += ',';
        out += std::to_string(cell.wall_ms);
        out += '\n';
    }
    sink.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!sink) {
        throw FormatError("write to sink failed");
    }
    return out.size();
}

std::size_t emit_report_json(const BenchmarkReport& report, std::ostream& sink) {
    json j;
    j["version"] = report.version;
    j["seed"] = report.seed;
    j["protocol"] = protocol_to_json(report.protocol);
    j["input_errors"] = report.input_errors;
    j["cells"] = json::array();
    for (const BenchmarkCell& cell : report.cells) {
        json c;
        c["input"] = cell.input;
        c["noise_level"] = cell.noise_level;
        c["filter"] = cell.filter;
        if (cell.mesr) {
            c["mesr"] = *cell.mesr;
        } else {
            c["mesr"] = nullptr;
        }
        c["per_group_esr"] = cell.per_group_esr;
        c["groups"] = cell.groups;
        c["excluded"] = cell.excluded;
        c["kept_ratio"] = cell.kept_ratio;
        c["wall_ms"] = cell.wall_ms;
        j["cells"].push_back(std::move(c));
    }
    const std::string out = j.dump(2) + "\n";
    sink.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!sink) {
        throw FormatError("write to sink failed");
    }
    return out.size();
}

BenchmarkReport report_from_json(std::istream& source) {
    json j;
    try {
        source >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("report parse error: ") + e.what());
    }
    BenchmarkReport report;
    try {
        report.version = j.at("version").get<std::string>();
        report.seed = j.at("seed").get<std::uint64_t>();
        report.protocol = protocol_from_json(j.at("protocol"));
        report.input_errors = j.at("input_errors").get<std::vector<std::string>>();
        for (const json& c : j.at("cells")) {
            BenchmarkCell cell;
            cell.input = c.at("input").get<std::string>();
            cell.noise_level = c.at("noise_level").get<double>();
            cell.filter = c.at("filter").get<std::string>();
            if (!c.at("mesr").is_null()) {
                cell.mesr = c.at("mesr").get<double>();
            }
            cell.per_group_esr = c.at("per_group_esr").get<std::vector<double>>();
            cell.groups = c.at("groups").get<std::size_t>();
            cell.excluded = c.at("excluded").get<std::size_t>();
            cell.kept_ratio = c.at("kept_ratio").get<double>();
            cell.wall_ms = c.at("wall_ms").get<std::uint64_t>();
            report.cells.push_back(std::move(cell));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("report schema error: ") + e.what());
    }
    return report;
}

BenchmarkPlan plan_from_json(std::istream& source) {
    json j;
    try {
        source >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("plan parse error: ") + e.what());
    }
    BenchmarkPlan plan;
    try {
        plan.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("noise_levels")) {
            plan.noise_levels = j.at("noise_levels").get<std::vector<double>>();
        }
        if (j.contains("protocol")) {
            plan.protocol = protocol_from_json(j.at("protocol"));
        }
        plan.record_wall_time = j.value("record_wall_time", true);
        plan.threads = j.value("threads", 0u);

        for (const json& in : j.at("inputs")) {
            BenchmarkInput input;
            input.name = in.at("name").get<std::string>();
            if (in.contains("path")) {
                input.source = in.at("path").get<std::string>();
            } else if (in.contains("scene")) {
                SceneInput scene;
                scene.spec = scene_from_json(in.at("scene"));
                scene.seed = in.at("scene").value("seed", derive_seed(plan.seed, 0x5ce7e));
                input.source = scene;
            } else {
                throw FormatError("input '" + input.name + "' needs a path or a scene");
            }
            plan.inputs.push_back(std::move(input));
        }

        for (const json& f : j.at("filters")) {
            FilterEntry entry;
            entry.id = filter_id_from_string(f.at("id").get<std::string>());
            entry.config = default_config(entry.id);
            if (f.contains("params")) {
                for (const auto& [key, value] : f.at("params").items()) {
                    set_filter_param(entry.config, key, value.get<double>());
                }
            }
            plan.filters.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("plan schema error: ") + e.what());
    }
    return plan;
}

BenchmarkPlan plan_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open plan file " + path);
    }
    return plan_from_json(in);
}

}  // namespace evdn
