#pragma once

#include <filesystem>

#include "proofmatch/corpus.hpp"
#include "proofmatch/encoder.hpp"

namespace proofmatch {

// Binary container, little-endian throughout:
//   "PMCKPT\0\0", u32 version (1)
//   config: u64 vocab_size, embed_dim, layers, model_dim, heads, key_dim,
//           ffn_dim, max_len; f64 dropout; u8 positional
//   u64 vocabulary entries, each u32 length + UTF-8 bytes
//   u64 tensors, each u32 name length + name, u64 rows, u64 cols,
//           rows*cols float32 in row-major order
// Loading rebuilds the parameter layout from the config and rejects any
// tensor whose name or shape disagrees with it.
struct Checkpoint {
  EncoderModel model;
  Vocabulary vocabulary;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const EncoderModel& model, const Vocabulary& vocabulary,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace proofmatch
