#ifndef RRSB_MEDIA_PATTERN_H_
#define RRSB_MEDIA_PATTERN_H_

#include <cstdint>
#include <span>

namespace rrsb::media {

// Independent pseudorandom byte streams share a (seed, seq) key but differ by
// domain, so raw pixels and encoded padding never alias.
enum class PatternDomain : uint32_t {
  kRawPixels = 0x52415721,
  kAuPadding = 0x50414421,
};

// Deterministically fills `out` from (seed, seq, domain). mt19937_64 and
// seed_seq are fully specified, so output only depends on host byte order.
void FillPattern(uint64_t seed, int64_t seq, PatternDomain domain,
                 std::span<uint8_t> out);

}  // namespace rrsb::media

#endif  // RRSB_MEDIA_PATTERN_H_
