#pragma once

// Binary checkpoint layout (all integers and floats little-endian):
//
//   "SYNPRIME"            8-byte magic
//   u32 version           kCheckpointVersion
//   u32 backend           Backend tag
//   LSTM hyper            i32 nhid, nlayers, emb_dim; f64 learning_rate; i32 bptt_len, epochs;
//                         u64 seed, corpus_tokens; i32 batch_size; f64 init_scale, clip_norm;
//                         i32 min_count
//   k-gram hyper          i32 order; f64 alpha; i32 min_count
//   vocabulary            u32 n, then n strings in id order
//   provenance            string corpus_id; u32 n, then n adaptation set ids
//   payload, LSTM         u32 n_tensors, then per tensor: string name, u32 rows, u32 cols,
//                         rows*cols f32 values in column-major order. Tensors appear in
//                         for_each_tensor order.
//   payload, k-gram       u32 n_entries, then per entry: `order` u32 ids (context then next)
//                         and one f64 count. Entries are sorted by ids.
//
// Strings are a u32 byte length followed by UTF-8 bytes.

#include <cstdint>
#include <filesystem>
#include <string>

#include "synprime/language_model.hpp"

namespace synprime {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const ModelSnapshot& snapshot);
// Throws DataError on a bad magic, unknown version, truncation or trailing bytes.
ModelSnapshot decode_checkpoint(const std::string& bytes);

// Written through a temporary file and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const ModelSnapshot& snapshot);
ModelSnapshot load_checkpoint(const std::filesystem::path& path);

}  // namespace synprime
