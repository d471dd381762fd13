#pragma once

#include <cstdint>
#include <string>

#include "extscan/common.hpp"
#include "extscan/zip.hpp"

namespace extscan {

enum class CrxFormat { crx2, crx3, zip };

inline const char* to_string(CrxFormat f) {
  switch (f) {
    case CrxFormat::crx2: return "crx2";
    case CrxFormat::crx3: return "crx3";
    case CrxFormat::zip: return "zip";
  }
  return "?";
}

struct CrxArchive {
  CrxFormat format = CrxFormat::zip;
  Bytes zip_payload;
  // Bytes between the fixed 16-byte prefix and the ZIP payload: the CRX3
  // header-length field, or key length + signature length for CRX2. 0 for
  // a bare ZIP.
  std::uint64_t declared_header_length = 0;
};

enum class CrxError { none, bad_magic, truncated_header, unsupported_version };

inline const char* to_string(CrxError e) {
  switch (e) {
    case CrxError::none: return "none";
    case CrxError::bad_magic: return "BadMagic";
    case CrxError::truncated_header: return "TruncatedHeader";
    case CrxError::unsupported_version: return "UnsupportedVersion";
  }
  return "?";
}

struct CrxParseResult {
  CrxError error = CrxError::none;
  std::string detail;
  CrxArchive archive;
  bool ok() const { return error == CrxError::none; }
};

// "Cr24" magic, little-endian version, then a version-specific header:
//   v2: u32 key length, u32 signature length, key bytes, signature bytes
//   v3: u32 header length, opaque header bytes (not verified)
// followed by the ZIP payload. A bare ZIP is accepted as format=zip.
inline CrxParseResult parse_crx(BytesView bytes) {
  CrxParseResult r;
  auto fail = [&](CrxError e, std::string detail) {
    r.error = e;
    r.detail = std::move(detail);
    return r;
  };
  if (bytes.empty()) return fail(CrxError::bad_magic, "empty input");
  if (looks_like_zip(bytes)) {
    r.archive.format = CrxFormat::zip;
    r.archive.zip_payload.assign(bytes.begin(), bytes.end());
    r.archive.declared_header_length = 0;
    return r;
  }
  if (bytes.size() < 4 || bytes[0] != 'C' || bytes[1] != 'r' || bytes[2] != '2' ||
      bytes[3] != '4') {
    return fail(CrxError::bad_magic, "neither Cr24 nor ZIP magic");
  }
  if (bytes.size() < 12) return fail(CrxError::truncated_header, "fixed header cut short");
  std::uint32_t version = read_u32le(bytes.data() + 4);
  std::uint64_t header_len = 0;
  std::uint64_t payload_off = 0;
  if (version == 2) {
    if (bytes.size() < 16) return fail(CrxError::truncated_header, "fixed header cut short");
    std::uint32_t key_len = read_u32le(bytes.data() + 8);
    std::uint32_t sig_len = read_u32le(bytes.data() + 12);
    header_len = static_cast<std::uint64_t>(key_len) + sig_len;
    payload_off = 16 + header_len;
  } else if (version == 3) {
    header_len = read_u32le(bytes.data() + 8);
    payload_off = 12 + header_len;
  } else {
    return fail(CrxError::unsupported_version, "version " + std::to_string(version));
  }
  if (payload_off > bytes.size()) {
    return fail(CrxError::truncated_header, "declared lengths exceed input");
  }
  BytesView payload = bytes.subspan(payload_off);
  if (!looks_like_zip(payload)) {
    return fail(CrxError::bad_magic, "payload is not a ZIP stream");
  }
  r.archive.format = version == 2 ? CrxFormat::crx2 : CrxFormat::crx3;
  r.archive.declared_header_length = header_len;
  r.archive.zip_payload.assign(payload.begin(), payload.end());
  return r;
}

inline CrxParseResult parse_crx(const Bytes& bytes) {
  return parse_crx(BytesView(bytes.data(), bytes.size()));
}

inline Bytes build_crx2(BytesView zip, BytesView key, BytesView signature) {
  Bytes out;
  out.insert(out.end(), {'C', 'r', '2', '4'});
  append_u32le(out, 2);
  append_u32le(out, static_cast<std::uint32_t>(key.size()));
  append_u32le(out, static_cast<std::uint32_t>(signature.size()));
  out.insert(out.end(), key.begin(), key.end());
  out.insert(out.end(), signature.begin(), signature.end());
  out.insert(out.end(), zip.begin(), zip.end());
  return out;
}

inline Bytes build_crx3(BytesView zip, BytesView opaque_header) {
  Bytes out;
  out.insert(out.end(), {'C', 'r', '2', '4'});
  append_u32le(out, 3);
  append_u32le(out, static_cast<std::uint32_t>(opaque_header.size()));
  out.insert(out.end(), opaque_header.begin(), opaque_header.end());
  out.insert(out.end(), zip.begin(), zip.end());
  return out;
}

}  // namespace extscan
