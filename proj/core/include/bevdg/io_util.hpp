#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "bevdg/common.hpp"

namespace bevdg::io {

// Little-endian primitive readers/writers shared by all binary formats.

inline void write_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  for (size_t i = 0; i < sizeof(T) / 2; ++i) {
    std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
#endif
  write_bytes(os, buf, sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  for (size_t i = 0; i < sizeof(T) / 2; ++i) {
    std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
#endif
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

inline void write_u8(std::ostream& os, uint8_t v) { write_le(os, v); }
inline void write_u16(std::ostream& os, uint16_t v) { write_le(os, v); }
inline void write_u32(std::ostream& os, uint32_t v) { write_le(os, v); }
inline void write_u64(std::ostream& os, uint64_t v) { write_le(os, v); }
inline void write_f32(std::ostream& os, float v) { write_le(os, v); }
inline void write_f64(std::ostream& os, double v) { write_le(os, v); }

inline uint8_t read_u8(std::istream& is) { return read_le<uint8_t>(is); }
inline uint16_t read_u16(std::istream& is) { return read_le<uint16_t>(is); }
inline uint32_t read_u32(std::istream& is) { return read_le<uint32_t>(is); }
inline uint64_t read_u64(std::istream& is) { return read_le<uint64_t>(is); }
inline float read_f32(std::istream& is) { return read_le<float>(is); }
inline double read_f64(std::istream& is) { return read_le<double>(is); }

inline void write_magic(std::ostream& os, const char magic[5]) {
  os.write(magic, 4);
}

inline void expect_magic(std::istream& is, const char magic[5],
                         const std::string& path) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0) {
    throw IoError("bad magic (expected " + std::string(magic, 4) + "): " +
                  path);
  }
}

inline void expect_version(std::istream& is, uint16_t version,
                           const std::string& path) {
  const uint16_t got = read_u16(is);
  if (got != version) {
    throw IoError("unsupported format version " + std::to_string(got) + ": " +
                  path);
  }
}

}  // namespace bevdg::io
