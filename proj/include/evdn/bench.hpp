#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "evdn/core.hpp"
#include "evdn/filters.hpp"
#include "evdn/metrics.hpp"
#include "evdn/synth.hpp"

namespace evdn {

inline constexpr const char* kVersion = "0.1.0";

/// Scoring protocol applied to every benchmark cell.
struct BenchmarkProtocol {
    std::size_t group_size = 30000;
    std::uint64_t m = 20000;
    WarpModel warp;
};

/// A synthetic input carries the scene and the seed it is generated with.
struct SceneInput {
    SceneSpec spec;
    std::uint64_t seed = 0;
};

struct BenchmarkInput {
    std::string name;
    std::variant<std::string, SceneInput> source;  // file path or synthetic scene
};

struct FilterEntry {
    FilterId id = FilterId::identity;
    FilterConfig config = IdentityConfig{};
};

struct BenchmarkPlan {
    std::vector<BenchmarkInput> inputs;
    std::vector<double> noise_levels = {0.0, 0.1, 0.2, 0.4};
    std::vector<FilterEntry> filters;
    BenchmarkProtocol protocol;
    std::uint64_t seed = 0;
    /// Cell wall times make CSV output run-dependent; disable to get
    /// byte-identical reports for a fixed plan and seed.
    bool record_wall_time = true;
    /// Worker threads for cell execution; 0 picks EVDN_THREADS or the
    /// hardware concurrency.
    unsigned threads = 0;
};

struct BenchmarkCell {
    std::string input;
    double noise_level = 0.0;
    std::string filter;
    std::optional<double> mesr;        // absent when every group was excluded
    std::vector<double> per_group_esr;
    std::size_t groups = 0;            // groups that entered the mean
    std::size_t excluded = 0;
    double kept_ratio = 0.0;
    std::uint64_t wall_ms = 0;
};

struct BenchmarkReport {
    std::string version;
    std::uint64_t seed = 0;
    BenchmarkProtocol protocol;
    std::vector<BenchmarkCell> cells;
    std::vector<std::string> input_errors;
};

/// Runs every (input x noise level x filter) cell: load or synthesize,
/// inject noise, filter, slice into fixed-size groups, score with MESR.
/// Unreadable inputs are recorded and skipped; cells are independent and
/// may run on several threads, assembled in plan order.
BenchmarkReport run_benchmark(const BenchmarkPlan& plan);

/// CSV, one row per cell:
/// input,noise_level,filter,mesr,groups,excluded,kept_ratio,wall_ms
/// MESR and kept_ratio use 6 decimal places; absent MESR is an empty field.
std::size_t emit_report_csv(const BenchmarkReport& report, std::ostream& sink);

/// JSON with the full structure including per-group ESR series.
std::size_t emit_report_json(const BenchmarkReport& report, std::ostream& sink);

BenchmarkReport report_from_json(std::istream& source);

/// Plan files are flat declarative JSON; see the README for the key set.
BenchmarkPlan plan_from_json(std::istream& source);
BenchmarkPlan plan_from_json_file(const std::string& path);

}  // namespace evdn
