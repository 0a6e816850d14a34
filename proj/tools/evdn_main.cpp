#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evdn/bench.hpp"
#include "evdn/core.hpp"
#include "evdn/filters.hpp"
#include "evdn/io.hpp"
#include "evdn/metrics.hpp"
#include "evdn/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string format6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

evdn::WarpModel parse_warp(const std::string& text) {
    if (text == "identity") {
        return evdn::WarpModel::identity();
    }
    const std::string prefix = "linear:";
    if (text.rfind(prefix, 0) != 0) {
        throw CLI::ValidationError("--warp", "expected identity or linear:vx,vy[,tref]");
    }
    std::vector<std::string> parts;
    std::string rest = text.substr(prefix.size());
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = rest.find(',', pos);
        parts.push_back(rest.substr(pos, comma == std::string::npos ? comma : comma - pos));
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    if (parts.size() != 2 && parts.size() != 3) {
        throw CLI::ValidationError("--warp", "expected linear:vx,vy[,tref]");
    }
    try {
        const double vx = std::stod(parts[0]);
        const double vy = std::stod(parts[1]);
        std::optional<std::uint64_t> t_ref;
        if (parts.size() == 3) {
            t_ref = std::stoull(parts[2]);
        }
        return evdn::WarpModel::linear(vx, vy, t_ref);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--warp", "could not parse warp parameters");
    }
}

void apply_cli_params(evdn::FilterConfig& config, const std::vector<std::string>& params) {
    for (const std::string& kv : params) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
        }
        const std::string key = kv.substr(0, eq);
        double value = 0;
        try {
            value = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--param", "non-numeric value in '" + kv + "'");
        }
        evdn::set_filter_param(config, key, value);
    }
}

int cmd_score(const std::string& path, std::uint64_t m, std::size_t group_size,
              const std::string& warp_text) {
    const evdn::WarpModel warp = parse_warp(warp_text);
    const evdn::EventPacket packet = evdn::read_events_file(path).packet;
    const auto groups = evdn::slice_by_count(packet, group_size);
    if (groups.empty()) {
        std::cerr << "error: " << packet.size() << " events do not fill one group of "
                  << group_size << "\n";
        return kExitData;
    }
    const evdn::MesrResult result = evdn::mesr(groups, warp, evdn::MetricParams{m});
    std::cout << "MESR: " << format6(result.mean) << "\n";
    std::cout << "groups: " << result.per_group.size() << " scored, " << result.excluded
              << " excluded\n";
    for (std::size_t i = 0; i < result.per_group.size(); ++i) {
        std::cout << "group[" << i << "]: " << format6(result.per_group[i]) << "\n";
    }
    return kExitOk;
}

int cmd_denoise(const std::string& path, const std::string& filter_name,
                const std::vector<std::string>& params, const std::string& out_path) {
    const evdn::FilterId id = evdn::filter_id_from_string(filter_name);
    evdn::FilterConfig config = evdn::default_config(id);
    apply_cli_params(config, params);

    const evdn::EventPacket packet = evdn::read_events_file(path).packet;
    const evdn::FilterOutput out = evdn::apply_filter(packet, id, config);
    evdn::write_events_file(out.packet, out_path, evdn::detect_file_format(path));

    const double ratio = packet.empty() ? 0.0
                                        : static_cast<double>(out.trace.kept_count) /
                                              static_cast<double>(packet.size());
    std::cout << "kept " << out.trace.kept_count << "/" << packet.size() << " ("
              << format6(ratio) << ")\n";
    return kExitOk;
}

int cmd_bench(const std::string& plan_path, const std::string& out_path,
              const std::string& format) {
    const evdn::BenchmarkPlan plan = evdn::plan_from_json_file(plan_path);
    const evdn::BenchmarkReport report = evdn::run_benchmark(plan);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw evdn::FormatError("cannot open " + out_path + " for writing");
    }
    if (format == "json") {
        evdn::emit_report_json(report, out);
    } else {
        evdn::emit_report_csv(report, out);
    }
    for (const std::string& err : report.input_errors) {
        std::cerr << "warning: input failed: " << err << "\n";
    }
    std::cout << report.cells.size() << " cells written to " << out_path << "\n";
    return kExitOk;
}

int cmd_validate(const std::string& path) {
    const evdn::ReadResult result = evdn::read_events_file(path);
    if (result.reorder_warnings > 0) {
        std::cerr << "warning: " << result.reorder_warnings
                  << " events were out of order and re-sorted\n";
    }
    const evdn::ValidationReport report = evdn::validate_packet(result.packet);
    if (report.ok()) {
        std::cout << "ok\n";
        return kExitOk;
    }
    for (const std::string& violation : report.violations) {
        std::cout << violation << "\n";
    }
    std::cout << report.total_violations << " violations\n";
    return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"event stream denoising metrics and benchmark harness"};
    app.require_subcommand(1);

    // score
    auto* score = app.add_subcommand("score", "compute MESR and per-group ESR for a file");
    std::string score_file;
    std::uint64_t score_m = 20000;
    std::size_t score_group = 30000;
    std::string score_warp = "identity";
    score->add_option("file", score_file, "events file (text or EVT1 binary)")->required();
    score->add_option("--m", score_m, "reference event count M");
    score->add_option("--group", score_group, "events per group");
    score->add_option("--warp", score_warp, "identity or linear:vx,vy[,tref]");

    // denoise
    auto* denoise = app.add_subcommand("denoise", "run a filter over a file");
    std::string dn_file, dn_filter, dn_out;
    std::vector<std::string> dn_params;
    denoise->add_option("file", dn_file, "events file")->required();
    denoise->add_option("--filter", dn_filter, "filter id")->required();
    denoise->add_option("--param", dn_params, "filter parameter override key=value");
    denoise->add_option("-o,--output", dn_out, "output events file")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark plan");
    std::string bench_plan, bench_out, bench_format = "csv";
    bench->add_option("--plan", bench_plan, "plan JSON file")->required();
    bench->add_option("-o,--output", bench_out, "report output file")->required();
    bench->add_option("--format", bench_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    std::string sy_pattern = "bar", sy_size, sy_velocity, sy_out;
    std::uint64_t sy_duration = 0, sy_seed = 0, sy_step = 100;
    double sy_contrast = 0.15, sy_l0 = 0.0, sy_l1 = 0.3, sy_pattern_size = 0, sy_ramp = 0;
    double sy_texture = 0, sy_texture_cell = 1.0;
    bool sy_binary = false, sy_along = false;
    synth->add_option("--pattern", sy_pattern, "bar or disk")
        ->check(CLI::IsMember({"bar", "disk"}));
    synth->add_option("--size", sy_size, "sensor size WxH")->required();
    synth->add_option("--velocity", sy_velocity, "vx,vy in px/s")->required();
    synth->add_option("--duration", sy_duration, "duration in us")->required();
    synth->add_option("--seed", sy_seed, "placement seed");
    synth->add_option("--contrast", sy_contrast, "contrast threshold c");
    synth->add_option("--l0", sy_l0, "background log intensity");
    synth->add_option("--l1", sy_l1, "pattern log intensity");
    synth->add_option("--pattern-size", sy_pattern_size, "bar thickness / disk radius");
    synth->add_option("--ramp", sy_ramp, "edge ramp width in px");
    synth->add_option("--texture", sy_texture, "pattern-attached contrast spread in [0,1)");
    synth->add_option("--texture-cell", sy_texture_cell, "texture cell size in px");
    synth->add_flag("--bar-along-motion", sy_along, "stripe axis parallel to velocity");
    synth->add_option("--step", sy_step, "simulation step in us");
    synth->add_flag("--binary", sy_binary, "write EVT1 binary instead of text");
    synth->add_option("-o,--output", sy_out, "output events file")->required();

    // inject-noise
    auto* inject = app.add_subcommand("inject-noise", "add uniform noise events");
    std::string in_file, in_out;
    double in_ratio = 0;
    std::uint64_t in_seed = 0;
    inject->add_option("file", in_file, "events file")->required();
    inject->add_option("--ratio", in_ratio, "noise count as a fraction of N")->required();
    inject->add_option("--seed", in_seed, "noise seed");
    inject->add_option("-o,--output", in_out, "output events file")->required();

    // validate
    auto* validate = app.add_subcommand("validate", "check packet invariants");
    std::string va_file;
    validate->add_option("file", va_file, "events file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (score->parsed()) {
            return cmd_score(score_file, score_m, score_group, score_warp);
        }
        if (denoise->parsed()) {
            return cmd_denoise(dn_file, dn_filter, dn_params, dn_out);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_plan, bench_out, bench_format);
        }
        if (synth->parsed()) {
            evdn::SceneSpec spec;
            unsigned w = 0, h = 0;
            if (std::sscanf(sy_size.c_str(), "%ux%u", &w, &h) != 2 || w == 0 || h == 0 ||
                w > 65535 || h > 65535) {
                std::cerr << "error: --size expects WxH\n";
                return kExitUsage;
            }
            spec.geometry = {static_cast<std::uint16_t>(w), static_cast<std::uint16_t>(h)};
            if (std::sscanf(sy_velocity.c_str(), "%lf,%lf", &spec.vx, &spec.vy) != 2) {
                std::cerr << "error: --velocity expects vx,vy\n";
                return kExitUsage;
            }
            spec.pattern = sy_pattern == "disk" ? evdn::ScenePattern::translating_disk
                                                : evdn::ScenePattern::translating_bar;
            spec.duration_us = sy_duration;
            spec.contrast_threshold = sy_contrast;
            spec.background_log_intensity = sy_l0;
            spec.edge_log_intensity = sy_l1;
            spec.pattern_size = sy_pattern_size;
            spec.edge_ramp_px = sy_ramp;
            spec.bar_along_motion = sy_along;
            spec.texture_amplitude = sy_texture;
            spec.texture_cell_px = sy_texture_cell;
            spec.step_us = sy_step;
            const evdn::EventPacket packet = evdn::generate_scene(spec, sy_seed);
            evdn::write_events_file(packet, sy_out,
                                    sy_binary ? evdn::FileFormat::binary : evdn::FileFormat::text);
            std::cout << packet.size() << " events (step " << spec.step_us << " us) written to "
                      << sy_out << "\n";
            return kExitOk;
        }
        if (inject->parsed()) {
            const evdn::EventPacket packet = evdn::read_events_file(in_file).packet;
            const evdn::EventPacket noisy =
                evdn::inject_uniform_noise(packet, evdn::NoiseSpec{in_ratio, in_seed});
            evdn::write_events_file(noisy, in_out, evdn::detect_file_format(in_file));
            std::cout << "added " << noisy.size() - packet.size() << " noise events ("
                      << noisy.size() << " total)\n";
            return kExitOk;
        }
        if (validate->parsed()) {
            return cmd_validate(va_file);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
