#include "rrsb/common/byte_io.h"

#include <zlib.h>

#include <algorithm>

namespace rrsb {

uint32_t Crc32(ByteView data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded pieces.
  constexpr std::size_t kMaxPiece = 1u << 30;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t n = std::min(kMaxPiece, data.size() - pos);
    crc = crc32(crc, data.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<uint32_t>(crc);
}

}  // namespace rrsb
