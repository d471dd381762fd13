#pragma once

#include <zlib.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "extscan/common.hpp"

namespace extscan {

// Self-contained ZIP access: extension packages only ever need stored and
// deflate entries, read from an in-memory buffer.

struct ZipEntry {
  std::string name;
  std::uint64_t compressed_size = 0;
  std::uint64_t uncompressed_size = 0;
  std::uint16_t method = 0;  // 0 = stored, 8 = deflate
  std::uint64_t local_header_offset = 0;
};

namespace zipmagic {
constexpr std::uint32_t kLocalFile = 0x04034b50;
constexpr std::uint32_t kCentralDir = 0x02014b50;
constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
}  // namespace zipmagic

inline bool looks_like_zip(BytesView data) {
  if (data.size() < 4) return false;
  std::uint32_t sig = read_u32le(data.data());
  return sig == zipmagic::kLocalFile || sig == zipmagic::kEndOfCentralDir;
}

class ZipReader {
 public:
  explicit ZipReader(Bytes payload) : data_(std::move(payload)) { parse_directory(); }

  const std::vector<ZipEntry>& entries() const { return entries_; }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  Bytes extract(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InputError("ZipEntryMissing", name);
    return extract(entries_[it->second]);
  }

  Bytes extract(const ZipEntry& e) const {
    if (e.local_header_offset + 30 > data_.size()) {
      throw InputError("ZipCorrupt", "local header out of range: " + e.name);
    }
    const std::uint8_t* lh = data_.data() + e.local_header_offset;
    if (read_u32le(lh) != zipmagic::kLocalFile) {
      throw InputError("ZipCorrupt", "bad local header: " + e.name);
    }
    std::uint16_t name_len = read_u16le(lh + 26);
    std::uint16_t extra_len = read_u16le(lh + 28);
    std::uint64_t data_off = e.local_header_offset + 30 + name_len + extra_len;
    if (data_off + e.compressed_size > data_.size()) {
      throw InputError("ZipCorrupt", "entry data out of range: " + e.name);
    }
    const std::uint8_t* src = data_.data() + data_off;
    if (e.method == 0) {
      return Bytes(src, src + e.compressed_size);
    }
    if (e.method == 8) {
      return inflate_raw(src, e.compressed_size, e.uncompressed_size, e.name);
    }
    throw InputError("ZipUnsupportedMethod",
                     e.name + " method " + std::to_string(e.method));
  }

 private:
  void parse_directory() {
    if (data_.size() < 22) throw InputError("ZipCorrupt", "too small for end record");
    // End-of-central-directory record: scan back over a possible comment.
    std::size_t scan_limit = std::min<std::size_t>(data_.size(), 22 + 65535);
    std::size_t eocd = data_.size();
    for (std::size_t back = 22; back <= scan_limit; ++back) {
      std::size_t pos = data_.size() - back;
      if (read_u32le(data_.data() + pos) == zipmagic::kEndOfCentralDir) {
        eocd = pos;
        break;
      }
    }
    if (eocd == data_.size()) throw InputError("ZipCorrupt", "end record not found");
    const std::uint8_t* p = data_.data() + eocd;
    std::uint16_t count = read_u16le(p + 10);
    std::uint32_t dir_size = read_u32le(p + 12);
    std::uint32_t dir_off = read_u32le(p + 16);
    if (static_cast<std::uint64_t>(dir_off) + dir_size > data_.size()) {
      throw InputError("ZipCorrupt", "central directory out of range");
    }
    std::size_t pos = dir_off;
    for (std::uint16_t i = 0; i < count; ++i) {
      if (pos + 46 > data_.size()) throw InputError("ZipCorrupt", "truncated central entry");
      const std::uint8_t* c = data_.data() + pos;
      if (read_u32le(c) != zipmagic::kCentralDir) {
        throw InputError("ZipCorrupt", "bad central entry signature");
      }
      ZipEntry e;
      e.method = read_u16le(c + 10);
      e.compressed_size = read_u32le(c + 20);
      e.uncompressed_size = read_u32le(c + 24);
      std::uint16_t name_len = read_u16le(c + 28);
      std::uint16_t extra_len = read_u16le(c + 30);
      std::uint16_t comment_len = read_u16le(c + 32);
      e.local_header_offset = read_u32le(c + 42);
      if (pos + 46 + name_len > data_.size()) {
        throw InputError("ZipCorrupt", "truncated entry name");
      }
      e.name.assign(reinterpret_cast<const char*>(c + 46), name_len);
      pos += 46 + name_len + extra_len + comment_len;
      index_.emplace(e.name, entries_.size());
      entries_.push_back(std::move(e));
    }
  }

  static Bytes inflate_raw(const std::uint8_t* src, std::uint64_t src_len,
                           std::uint64_t dst_len, const std::string& name) {
    Bytes out(dst_len);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) {
      throw InputError("ZipCorrupt", "inflate init failed");
    }
    zs.next_in = const_cast<Bytef*>(src);
    zs.avail_in = static_cast<uInt>(src_len);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != dst_len) {
      throw InputError("ZipCorrupt", "inflate failed for " + name);
    }
    return out;
  }

  Bytes data_;
  std::vector<ZipEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Writes stored (uncompressed) entries; enough for fixtures and the
/// synthetic corpus, and every reader understands method 0.
class ZipWriter {
 public:
  void add(const std::string& name, BytesView content) {
    Central c;
    c.name = name;
    c.crc = static_cast<std::uint32_t>(
        crc32(0L, content.data(), static_cast<uInt>(content.size())));
    c.size = static_cast<std::uint32_t>(content.size());
    c.offset = static_cast<std::uint32_t>(buf_.size());
    append_u32le(buf_, zipmagic::kLocalFile);
    append_u16le(buf_, 20);  // version needed
    append_u16le(buf_, 0);   // flags
    append_u16le(buf_, 0);   // method: stored
    append_u16le(buf_, 0);   // mod time
    append_u16le(buf_, 0x21);  // mod date (1980-01-01)
    append_u32le(buf_, c.crc);
    append_u32le(buf_, c.size);
    append_u32le(buf_, c.size);
    append_u16le(buf_, static_cast<std::uint16_t>(name.size()));
    append_u16le(buf_, 0);  // extra len
    buf_.insert(buf_.end(), name.begin(), name.end());
    buf_.insert(buf_.end(), content.begin(), content.end());
    entries_.push_back(std::move(c));
  }

  void add_text(const std::string& name, std::string_view text) {
    add(name, BytesView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }

  Bytes finish() const {
    Bytes out = buf_;
    std::uint32_t dir_off = static_cast<std::uint32_t>(out.size());
    for (const Central& c : entries_) {
      append_u32le(out, zipmagic::kCentralDir);
      append_u16le(out, 20);  // version made by
      append_u16le(out, 20);  // version needed
      append_u16le(out, 0);
      append_u16le(out, 0);
      append_u16le(out, 0);
      append_u16le(out, 0x21);
      append_u32le(out, c.crc);
      append_u32le(out, c.size);
      append_u32le(out, c.size);
      append_u16le(out, static_cast<std::uint16_t>(c.name.size()));
      append_u16le(out, 0);
      append_u16le(out, 0);
      append_u16le(out, 0);
      append_u16le(out, 0);
      append_u32le(out, 0);
      append_u32le(out, c.offset);
      out.insert(out.end(), c.name.begin(), c.name.end());
    }
    std::uint32_t dir_size = static_cast<std::uint32_t>(out.size()) - dir_off;
    append_u32le(out, zipmagic::kEndOfCentralDir);
    append_u16le(out, 0);
    append_u16le(out, 0);
    append_u16le(out, static_cast<std::uint16_t>(entries_.size()));
    append_u16le(out, static_cast<std::uint16_t>(entries_.size()));
    append_u32le(out, dir_size);
    append_u32le(out, dir_off);
    append_u16le(out, 0);
    return out;
  }

 private:
  struct Central {
    std::string name;
    std::uint32_t crc = 0;
    std::uint32_t size = 0;
    std::uint32_t offset = 0;
  };
  Bytes buf_;
  std::vector<Central> entries_;
};

}  // namespace extscan
