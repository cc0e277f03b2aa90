#pragma once

#include <fstream>

#include "fgsfrql/trainer.hpp"

namespace fgsfrql {

// Checkpoint layout: magic, version, kind, then either the whole policy
// library (per-task parameter blocks + reward weights, manifest first) or a
// single scalar-Q net.

inline constexpr uint32_t kCheckpointMagic = 0x46475346;  // "FGSF"
inline constexpr uint32_t kCheckpointVersion = 1;
inline constexpr uint32_t kKindLibrary = 0;
inline constexpr uint32_t kKindQNet = 1;

inline void save_library(std::ostream& os, const PolicyLibrary& lib) {
  detail::put_u32(os, kCheckpointMagic);
  detail::put_u32(os, kCheckpointVersion);
  detail::put_u32(os, kKindLibrary);
  detail::put_u32(os, static_cast<uint32_t>(lib.active_count()));
  detail::put_u32(os, static_cast<uint32_t>(lib.num_actions));
  detail::put_u32(os, static_cast<uint32_t>(lib.feature_dim));
  for (int j = 0; j < lib.active_count(); ++j) detail::put_u32(os, static_cast<uint32_t>(j));
  for (int j = 0; j < lib.active_count(); ++j) {
    save_params(os, lib.nets[static_cast<size_t>(j)].params);
    const RewardModel& rm = lib.rewards[static_cast<size_t>(j)];
    detail::put_u32(os, static_cast<uint32_t>(rm.weights.size()));
    for (double w : rm.weights) detail::put_f64(os, w);
    detail::put_u32(os, rm.learned ? 1u : 0u);
  }
}

inline void save_qnet(std::ostream& os, const QNet& qnet) {
  detail::put_u32(os, kCheckpointMagic);
  detail::put_u32(os, kCheckpointVersion);
  detail::put_u32(os, kKindQNet);
  detail::put_u32(os, static_cast<uint32_t>(qnet.num_actions));
  save_params(os, qnet.params);
}

struct Checkpoint {
  uint32_t kind = kKindLibrary;
  PolicyLibrary library;
  QNet qnet;
};

inline Checkpoint load_checkpoint(std::istream& is) {
  if (detail::get_u32(is) != kCheckpointMagic) throw UsageError("not a checkpoint file");
  if (detail::get_u32(is) != kCheckpointVersion) throw UsageError("unsupported checkpoint version");
  Checkpoint ck;
  ck.kind = detail::get_u32(is);
  if (ck.kind == kKindLibrary) {
    const uint32_t n = detail::get_u32(is);
    const int num_actions = static_cast<int>(detail::get_u32(is));
    const int feature_dim = static_cast<int>(detail::get_u32(is));
    for (uint32_t j = 0; j < n; ++j) {
      const uint32_t id = detail::get_u32(is);
      if (id != j) throw UsageError("checkpoint manifest: unexpected task id");
    }
    PolicyLibrary lib;
    lib.num_actions = num_actions;
    lib.feature_dim = feature_dim;
    for (uint32_t j = 0; j < n; ++j) {
      ParamVector p = load_params(is);
      if (j == 0) lib.layout = p.layout;
      lib.nets.push_back(XiNet{std::move(p), num_actions, feature_dim});
      RewardModel rm;
      rm.weights.resize(detail::get_u32(is));
      for (double& w : rm.weights) w = detail::get_f64(is);
      rm.learned = detail::get_u32(is) != 0;
      lib.rewards.push_back(std::move(rm));
    }
    ck.library = std::move(lib);
  } else if (ck.kind == kKindQNet) {
    const int num_actions = static_cast<int>(detail::get_u32(is));
    ck.qnet = QNet{load_params(is), num_actions};
  } else {
    throw UsageError("unknown checkpoint kind");
  }
  return ck;
}

inline void save_checkpoint_file(const std::string& path, const RunRecord& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open for writing: " + path);
  if (rec.has_library)
    save_library(out, rec.library);
  else if (rec.has_qnet)
    save_qnet(out, rec.qnet);
  else
    throw UsageError("run record holds no model to checkpoint");
}

inline Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open: " + path);
  return load_checkpoint(in);
}

}  // namespace fgsfrql
