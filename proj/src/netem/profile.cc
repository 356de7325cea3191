#include "rrsb/netem/profile.h"

#include "rrsb/common/error.h"

namespace rrsb::netem {

void NetProfile::Validate() const {
  if (one_way_delay_us < 0 || jitter_us < 0) {
    throw Error(ErrorCode::kPrecondition, "delay and jitter must be non-negative");
  }
  if (!(loss_rate >= 0 && loss_rate <= 1) || !(reorder_rate >= 0 && reorder_rate <= 1)) {
    throw Error(ErrorCode::kPrecondition, "loss and reorder rates must lie in [0, 1]");
  }
  if (bandwidth_bps <= 0) throw Error(ErrorCode::kPrecondition, "bandwidth must be positive");
}

NetProfile Profile(std::string_view name) {
  NetProfile p;
  p.name = std::string(name);
  if (name == "wifi") {
    p.one_way_delay_us = 2000;
    p.jitter_us = 1000;
    p.loss_rate = 0.001;
    p.bandwidth_bps = 300'000'000;
  } else if (name == "fiveg") {
    p.one_way_delay_us = 15000;
    p.jitter_us = 5000;
    p.loss_rate = 0.005;
    p.bandwidth_bps = 75'000'000;
  } else {
    throw Error(ErrorCode::kUnknownProfile, "unknown profile '" + std::string(name) + "'");
  }
  return p;
}

NetProfile ZeroImpairment(int64_t one_way_delay_us, int64_t bandwidth_bps) {
  NetProfile p;
  p.name = "clean";
  p.one_way_delay_us = one_way_delay_us;
  p.bandwidth_bps = bandwidth_bps;
  return p;
}

NetProfile ProfileFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformed, "profile must be a JSON object");
  NetProfile p = j.contains("base") ? Profile(j.at("base").get<std::string>()) : NetProfile{};
  try {
    p.name = j.value("name", p.name);
    p.one_way_delay_us = j.value("one_way_delay_us", p.one_way_delay_us);
    p.jitter_us = j.value("jitter_us", p.jitter_us);
    p.loss_rate = j.value("loss_rate", p.loss_rate);
    p.reorder_rate = j.value("reorder_rate", p.reorder_rate);
    p.bandwidth_bps = j.value("bandwidth_bps", p.bandwidth_bps);
    p.seed = j.value("seed", p.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("profile field: ") + e.what());
  }
  p.Validate();
  return p;
}

nlohmann::json ProfileToJson(const NetProfile& p) {
  return {{"name", p.name},
          {"one_way_delay_us", p.one_way_delay_us},
          {"jitter_us", p.jitter_us},
          {"loss_rate", p.loss_rate},
          {"reorder_rate", p.reorder_rate},
          {"bandwidth_bps", p.bandwidth_bps},
          {"seed", p.seed}};
}

}  // namespace rrsb::netem
