#include "evdn/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace evdn {

namespace {

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

/// Parses an unsigned decimal field, rejecting junk and overflow.
template <typename T>
T parse_unsigned(std::string_view field, const char* what, std::size_t line) {
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw FormatError(std::string("malformed ") + what + at_line(line));
    }
    return value;
}

std::array<std::string_view, 4> split4(std::string_view text, std::size_t line, std::size_t want) {
    std::array<std::string_view, 4> out{};
    std::size_t count = 0;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = text.find(',', pos);
        if (count >= want) {
            throw FormatError("too many fields" + at_line(line));
        }
        out[count++] = text.substr(pos, comma == std::string_view::npos ? comma : comma - pos);
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    if (count != want) {
        throw FormatError("expected " + std::to_string(want) + " fields" + at_line(line));
    }
    return out;
}

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    return s;
}

/// Shared post-read pass: bounds/polarity were checked per record, ordering
/// is repaired here so readers always hand back a valid packet.
std::size_t restore_order(EventPacket& packet) {
    std::size_t inversions = 0;
    for (std::size_t i = 1; i < packet.events.size(); ++i) {
        if (packet.events[i].t < packet.events[i - 1].t) {
            ++inversions;
        }
    }
    if (inversions > 0) {
        std::stable_sort(packet.events.begin(), packet.events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
    }
    return inversions;
}

void check_bounds(const SensorGeometry& g, std::uint16_t x, std::uint16_t y, std::size_t where,
                  const char* unit) {
    if (x >= g.width) {
        throw FormatError("x out of bounds at " + std::string(unit) + " " + std::to_string(where));
    }
    if (y >= g.height) {
        throw FormatError("y out of bounds at " + std::string(unit) + " " + std::to_string(where));
    }
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    out.write(bytes, 2);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(bytes, 8);
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

}  // namespace

ReadResult read_events_text(std::istream& source) {
    ReadResult result;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;

    while (std::getline(source, line)) {
        ++line_no;
        std::string_view text = strip(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        if (!have_header) {
            const auto fields = split4(text, line_no, 2);
            result.packet.geometry.width = parse_unsigned<std::uint16_t>(fields[0], "width", line_no);
            result.packet.geometry.height =
                parse_unsigned<std::uint16_t>(fields[1], "height", line_no);
            if (result.packet.geometry.pixel_count() == 0) {
                throw FormatError("geometry has zero extent" + at_line(line_no));
            }
            have_header = true;
            continue;
        }
        const auto fields = split4(text, line_no, 4);
        Event e;
        e.t = parse_unsigned<std::uint64_t>(fields[0], "timestamp", line_no);
        e.x = parse_unsigned<std::uint16_t>(fields[1], "x", line_no);
        e.y = parse_unsigned<std::uint16_t>(fields[2], "y", line_no);
        const auto p = parse_unsigned<std::uint32_t>(fields[3], "polarity", line_no);
        if (p > 1) {
            throw FormatError("polarity out of range" + at_line(line_no));
        }
        e.p = p == 1 ? std::int8_t{1} : std::int8_t{-1};
        check_bounds(result.packet.geometry, e.x, e.y, line_no, "line");
        result.packet.events.push_back(e);
    }
    if (!have_header) {
        throw FormatError("missing width,height header");
    }
    result.reorder_warnings = restore_order(result.packet);
    return result;
}

std::size_t write_events_text(const EventPacket& packet, std::ostream& sink) {
    std::string buffer;
    buffer.reserve(packet.events.size() * 20 + 16);
    buffer += std::to_string(packet.geometry.width);
    buffer += ',';
    buffer += std::to_string(packet.geometry.height);
    buffer += '\n';
    for (const Event& e : packet.events) {
        buffer += std::to_string(e.t);
        buffer += ',';
        buffer += std::to_string(e.x);
        buffer += ',';
        buffer += std::to_string(e.y);
        buffer += ',';
        buffer += e.p > 0 ? '1' : '0';
        buffer += '\n';
    }
    sink.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!sink) {
        throw FormatError("write to sink failed");
    }
    return buffer.size();
}

ReadResult read_events_binary(std::istream& source) {
    constexpr std::size_t kHeaderSize = 4 + 2 + 2 + 8;
    constexpr std::size_t kRecordSize = 8 + 2 + 2 + 1;

    unsigned char header[kHeaderSize];
    source.read(reinterpret_cast<char*>(header), kHeaderSize);
    if (static_cast<std::size_t>(source.gcount()) != kHeaderSize) {
        throw FormatError("truncated header: expected " + std::to_string(kHeaderSize) +
                          " bytes, got " + std::to_string(source.gcount()));
    }
    if (std::memcmp(header, "EVT1", 4) != 0) {
        throw FormatError("bad magic: expected EVT1");
    }

    ReadResult result;
    result.packet.geometry.width = get_u16(header + 4);
    result.packet.geometry.height = get_u16(header + 6);
    if (result.packet.geometry.pixel_count() == 0) {
        throw FormatError("geometry has zero extent");
    }
    const std::uint64_t count = get_u64(header + 8);

    result.packet.events.reserve(static_cast<std::size_t>(count));
    std::vector<unsigned char> body(static_cast<std::size_t>(count) * kRecordSize);
    source.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()));
    const std::size_t got = static_cast<std::size_t>(source.gcount());
    if (got != body.size()) {
        throw FormatError("truncated payload: expected " + std::to_string(body.size()) +
                          " record bytes, got " + std::to_string(got));
    }
    if (source.peek() != std::char_traits<char>::eof()) {
        throw FormatError("trailing bytes after " + std::to_string(count) + " records");
    }

    for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned char* rec = body.data() + static_cast<std::size_t>(i) * kRecordSize;
        Event e;
        e.t = get_u64(rec);
        e.x = get_u16(rec + 8);
        e.y = get_u16(rec + 10);
        const auto p = static_cast<std::int8_t>(rec[12]);
        if (p != -1 && p != 1) {
            throw FormatError("polarity not in {-1,+1} at record " + std::to_string(i));
        }
        e.p = p;
        check_bounds(result.packet.geometry, e.x, e.y, static_cast<std::size_t>(i), "record");
        result.packet.events.push_back(e);
    }
    result.reorder_warnings = restore_order(result.packet);
    return result;
}

std::size_t write_events_binary(const EventPacket& packet, std::ostream& sink) {
    sink.write("EVT1", 4);
    put_u16(sink, packet.geometry.width);
    put_u16(sink, packet.geometry.height);
    put_u64(sink, packet.events.size());
    for (const Event& e : packet.events) {
        put_u64(sink, e.t);
        put_u16(sink, e.x);
        put_u16(sink, e.y);
        sink.put(static_cast<char>(e.p));
    }
    if (!sink) {
        throw FormatError("write to sink failed");
    }
    return 16 + packet.events.size() * 13;
}

ReadResult read_events_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path);
    }
    char magic[4] = {};
    in.read(magic, 4);
    const bool binary = in.gcount() == 4 && std::memcmp(magic, "EVT1", 4) == 0;
    in.clear();
    in.seekg(0);
    return binary ? read_events_binary(in) : read_events_text(in);
}

FileFormat detect_file_format(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path);
    }
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::memcmp(magic, "EVT1", 4) == 0 ? FileFormat::binary
                                                                  : FileFormat::text;
}

void write_events_file(const EventPacket& packet, const std::string& path, FileFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open " + path + " for writing");
    }
    if (format == FileFormat::binary) {
        write_events_binary(packet, out);
    } else {
        write_events_text(packet, out);
    }
}

}  // namespace evdn
