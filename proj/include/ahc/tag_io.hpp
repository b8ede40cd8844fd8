#pragma once

#include <string>

#include "ahc/event_simulator.hpp"

namespace ahc {

// Binary layout (little endian):
//   0   8 bytes  magic "AHCTAGS\0"
//   8   u32      format version
//   12  u32      header length L
//   16  L bytes  JSON header
//   16+L u64     record count N
//   24+L N x 9   records {u8 channel, u64 tick}
void write_tags(const TimeTagStream& stream, const std::string& path);
TimeTagStream read_tags(const std::string& path);

// Debug format: '#'-prefixed JSON header line, then "channel,tick" rows.
void write_tags_csv(const TimeTagStream& stream, const std::string& path);
TimeTagStream read_tags_csv(const std::string& path);

}  // namespace ahc
