#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "linext/core/config.hpp"
#include "linext/core/types.hpp"

namespace linext {

using TensorTable = std::map<std::string, Tensor>;

struct Checkpoint {
  TensorTable params;
  RunConfig config;
};

inline constexpr char kCheckpointMagic[4] = {'L', 'N', 'X', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout (all integers little-endian):
///   "LNXT" | u32 version | u32 config_len | config JSON (UTF-8)
///   | u32 entry_count | entries...
/// entry: u32 name_len | name | u32 rank | u64 dims[rank] | f64 payload[numel]
std::string encode_checkpoint(const TensorTable& params, const RunConfig& cfg);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const TensorTable& params, const RunConfig& cfg, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::size_t parameter_count(const TensorTable& params);

}  // namespace linext
