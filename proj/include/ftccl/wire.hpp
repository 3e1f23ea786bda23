#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ftccl/errors.hpp"

namespace ftccl::wire {

inline void put_u8(std::vector<std::byte>& out, std::uint8_t v) {
  out.push_back(static_cast<std::byte>(v));
}

template <class T>
void put_le(std::vector<std::byte>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

/// Bounds-checked little-endian reader advancing an external offset.
struct Reader {
  std::span<const std::byte> buf;
  std::size_t& off;

  std::uint8_t u8() {
    if (off + 1 > buf.size()) throw InputError("wire: truncated buffer");
    return static_cast<std::uint8_t>(buf[off++]);
  }

  template <class T>
  T le() {
    if (off + sizeof(T) > buf.size()) throw InputError("wire: truncated buffer");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<std::uint8_t>(buf[off + i])) << (8 * i);
    off += sizeof(T);
    return v;
  }
};

}  // namespace ftccl::wire
