#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "evdn/core.hpp"

namespace evdn {

/// Result of a read: the validated packet plus the number of events that
/// arrived out of timestamp order and had to be stably re-sorted.
struct ReadResult {
    EventPacket packet;
    std::size_t reorder_warnings = 0;
};

// Text format: UTF-8 lines, '#' starts a comment. First data line is the
// header "width,height", then one event per line as "t,x,y,p" with
// p in {0,1} (0 -> -1, 1 -> +1).
ReadResult read_events_text(std::istream& source);
std::size_t write_events_text(const EventPacket& packet, std::ostream& sink);

// Binary "EVT1" format, little-endian: magic "EVT1", width u16, height u16,
// count u64, then `count` records of {t u64, x u16, y u16, p i8 in {-1,+1}}.
ReadResult read_events_binary(std::istream& source);
std::size_t write_events_binary(const EventPacket& packet, std::ostream& sink);

/// Reads a file in either format, sniffing the EVT1 magic.
ReadResult read_events_file(const std::string& path);

enum class FileFormat { text, binary };

FileFormat detect_file_format(const std::string& path);
void write_events_file(const EventPacket& packet, const std::string& path, FileFormat format);

}  // namespace evdn
