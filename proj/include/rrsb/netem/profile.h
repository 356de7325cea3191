#ifndef RRSB_NETEM_PROFILE_H_
#define RRSB_NETEM_PROFILE_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace rrsb::netem {

struct NetProfile {
  std::string name = "custom";
  int64_t one_way_delay_us = 0;
  int64_t jitter_us = 0;  // uniform in [-jitter, +jitter]
  double loss_rate = 0;
  double reorder_rate = 0;
  int64_t bandwidth_bps = 1'000'000'000;
  uint64_t seed = 1;

  void Validate() const;
  bool operator==(const NetProfile&) const = default;
};

// Presets: "wifi" and "fiveg". Unknown names raise kUnknownProfile.
NetProfile Profile(std::string_view name);
// Fixed delay, no jitter/loss/reordering.
NetProfile ZeroImpairment(int64_t one_way_delay_us = 2000,
                          int64_t bandwidth_bps = 300'000'000);

// JSON form: {"base": "wifi", "loss_rate": 0.005, ...}. "base" is optional;
// fields not given keep the base (or default) values.
NetProfile ProfileFromJson(const nlohmann::json& j);
nlohmann::json ProfileToJson(const NetProfile& p);

}  // namespace rrsb::netem

#endif  // RRSB_NETEM_PROFILE_H_
