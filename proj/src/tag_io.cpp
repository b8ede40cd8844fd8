#include "ahc/tag_io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "ahc/errors.hpp"
#include "binary_io.hpp"

namespace ahc {

namespace {

constexpr char kMagic[8] = {'A', 'H', 'C', 'T', 'A', 'G', 'S', '\0'};
constexpr std::size_t kRecordBytes = 9;

nlohmann::json header_json(const TimeTagStream& s) {
  return {{"format", "ahc-tags"},
          {"version", s.header.version},
          {"tick_seconds", s.header.tick_seconds},
          {"channels", s.header.channel_names},
          {"start_time", s.header.start_time},
          {"duration", s.header.duration},
          {"seed", s.header.seed},
          {"config_digest", s.header.config_digest},
          {"record_count", s.records.size()}};
}

TagHeader header_from_json(const nlohmann::json& j, std::uint64_t offset) {
  try {
    TagHeader h;
    h.version = j.at("version").get<int>();
    if (h.version != kTagFormatVersion)
      throw ParseError("unsupported tag file version " + std::to_string(h.version), offset);
    h.tick_seconds = j.at("tick_seconds").get<double>();
    h.channel_names = j.at("channels").get<std::vector<std::string>>();
    h.start_time = j.value("start_time", 0.0);
    h.duration = j.value("duration", 0.0);
    h.seed = j.at("seed").get<std::uint64_t>();
    h.config_digest = j.value("config_digest", "");
    if (!(h.tick_seconds > 0.0)) throw ParseError("tick_seconds must be positive", offset);
    if (h.channel_names.empty() || h.channel_names.size() > 256)
      throw ParseError("channel list must hold 1 to 256 names", offset);
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corrupt tag header: ") + e.what(), offset);
  }
}

void check_record(const TagHeader& h, const TagRecord& r, const TagRecord* prev, std::uint64_t offset,
                  std::int64_t index) {
  if (r.channel >= h.channel_names.size())
    throw ParseError("record on unknown channel " + std::to_string(r.channel), offset, index);
  if (prev && r.tick < prev->tick) throw ParseError("non-monotone ticks", offset, index);
}

}  // namespace

void write_tags(const TimeTagStream& stream, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  const std::string text = header_json(stream).dump();
  os.write(kMagic, sizeof kMagic);
  detail::put_le<std::uint32_t>(os, kTagFormatVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  detail::put_le<std::uint64_t>(os, stream.records.size());
  std::vector<char> buf;
  constexpr std::size_t kChunk = 1 << 16;
  buf.reserve(kChunk * kRecordBytes);
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    char rec[kRecordBytes];
    rec[0] = static_cast<char>(stream.records[i].channel);
    detail::put_le_bytes(rec + 1, stream.records[i].tick, 8);
    buf.insert(buf.end(), rec, rec + kRecordBytes);
    if (buf.size() >= kChunk * kRecordBytes) {
      os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw Error("write failed for " + path);
}

TimeTagStream read_tags(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  const std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const std::uint64_t size = bytes.size();
  auto need = [&](std::uint64_t offset, std::uint64_t n, const char* what) {
    if (offset + n > size) throw ParseError(std::string("truncated ") + what, offset);
  };
  auto u32 = [&](std::uint64_t off) {
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + off, 4);
    return v;
  };
  need(0, 8, "magic");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw ParseError("bad tag file magic", 0);
  need(8, 8, "header prefix");
  const std::uint32_t version = u32(8);
  if (version != kTagFormatVersion)
    throw ParseError("unsupported tag file version " + std::to_string(version), 8);
  const std::uint32_t len = u32(12);
  need(16, len, "header");
  nlohmann::json hj;
  try {
    hj = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + len);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("corrupt tag header: ") + e.what(), 16 + (e.byte > 0 ? e.byte - 1 : 0));
  }
  TimeTagStream s;
  s.header = header_from_json(hj, 16);
  const std::uint64_t count_off = 16 + len;
  need(count_off, 8, "record count");
  std::uint64_t n;
  std::memcpy(&n, bytes.data() + count_off, 8);
  const std::uint64_t base = count_off + 8;
  const std::uint64_t available = (size - base) / kRecordBytes;
  s.records.reserve(std::min(n, available));
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t off = base + i * kRecordBytes;
    if (off + kRecordBytes > size)
      throw ParseError("truncated record", off, static_cast<std::int64_t>(i));
    TagRecord r;
    r.channel = static_cast<std::uint8_t>(bytes[off]);
    std::memcpy(&r.tick, bytes.data() + off + 1, 8);
    check_record(s.header, r, s.records.empty() ? nullptr : &s.records.back(), off,
                 static_cast<std::int64_t>(i));
    s.records.push_back(r);
  }
  if (base + n * kRecordBytes != size)
    throw ParseError("trailing bytes after the last record", base + n * kRecordBytes,
                     static_cast<std::int64_t>(n));
  return s;
}

void write_tags_csv(const TimeTagStream& stream, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << '#' << header_json(stream).dump() << "\nchannel,tick\n";
  for (const TagRecord& r : stream.records) os << static_cast<int>(r.channel) << ',' << r.tick << '\n';
  if (!os) throw Error("write failed for " + path);
}

TimeTagStream read_tags_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  std::string line;
  std::uint64_t offset = 0;
  if (!std::getline(is, line) || line.empty() || line[0] != '#')
    throw ParseError("missing CSV header line", 0);
  TimeTagStream s;
  try {
    s.header = header_from_json(nlohmann::json::parse(line.substr(1)), 1);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("corrupt tag header: ") + e.what(), 1 + e.byte);
  }
  offset += line.size() + 1;
  if (!std::getline(is, line) || line != "channel,tick") throw ParseError("missing column line", offset);
  offset += line.size() + 1;
  std::int64_t index = 0;
  while (std::getline(is, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    const auto comma = line.find(',');
    TagRecord r;
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      const unsigned long ch = std::stoul(line.substr(0, comma));
      if (ch > 255) throw std::out_of_range("channel");
      r.channel = static_cast<std::uint8_t>(ch);
      r.tick = std::stoull(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("malformed CSV record", offset, index);
    }
    check_record(s.header, r, s.records.empty() ? nullptr : &s.records.back(), offset, index);
    s.records.push_back(r);
    offset += line.size() + 1;
    ++index;
  }
  return s;
}

}  // namespace ahc
