#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "wsnet/nn.hpp"

namespace wsnet {

/// Binary checkpoint, little-endian, version 1:
///
///   char[8]  magic "WSNETCKP"
///   u32      version
///   i64      epoch
///   str      config hash          (str = u32 length + bytes)
///   u32      tensor count T
///   T x      { str name, i64 rows, i64 cols, f64[rows*cols] column-major }
///   f64 x 5  lr, beta1, beta2, eps, weight_decay
///   i64      optimizer step
///
/// Tensors are the six encoder parameters followed by the Adam first and
/// second moments, named "m/<param>" and "v/<param>".
struct Checkpoint {
  EncoderParams params;
  OptimizerState optimizer;
  std::int64_t epoch = 0;
  std::string config_hash;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wsnet
