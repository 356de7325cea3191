#include "rrsb/media/pattern.h"

#include <cstring>
#include <random>

namespace rrsb::media {

void FillPattern(uint64_t seed, int64_t seq, PatternDomain domain,
                 std::span<uint8_t> out) {
  const auto useq = static_cast<uint64_t>(seq);
  std::seed_seq key{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(useq), static_cast<uint32_t>(useq >> 32),
                    static_cast<uint32_t>(domain)};
  std::mt19937_64 gen(key);
  std::size_t pos = 0;
  const std::size_t whole = out.size() / 8 * 8;
  for (; pos < whole; pos += 8) {
    uint64_t word = gen();
    std::memcpy(out.data() + pos, &word, 8);
  }
  if (pos < out.size()) {
    uint64_t word = gen();
    std::memcpy(out.data() + pos, &word, out.size() - pos);
  }
}

}  // namespace rrsb::media
