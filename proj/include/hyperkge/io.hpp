#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hyperkge/graph.hpp"
#include "hyperkge/model.hpp"

namespace hyperkge {

// Binary checkpoint layout (all integers little-endian):
//   magic   "QKGE"
//   u32     format version (1)
//   u32     variant tag
//   u32     component count (4 or 8)
//   u32     reciprocal flag (0 or 1)
//   u64     N entities, u64 M relations, u64 k dimensions
//   payload float32 coordinate planes: entities (all component-0 values,
//           then component-1, ...), then relations, then tail relations
//   u64     FNV-1a checksum of the payload bytes
// Training math is double precision; persistence quantizes to float32
// (relative error at most 2^-24 per coordinate).
struct Checkpoint {
  EmbeddingTable table;
  bool reciprocal = false;
};

void save_checkpoint(const std::filesystem::path& path,
                     const EmbeddingTable& table, bool reciprocal);

// Throws DataError on bad magic, unknown version or variant tag, truncated
// payload, or checksum mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Text dump, one row per line: name<TAB>then one comma-joined component
// group per dimension, tab-separated. Values are printed from the float32
// quantization, so dump -> import -> dump is byte-identical. Sections are
// marked with "# section <entities|relations|tail-relations>" lines; a
// header line records variant, reciprocal flag, k.
void export_tsv(std::ostream& out, const EmbeddingTable& table,
                bool reciprocal, const Vocabulary* vocab);

Checkpoint import_tsv(std::istream& in);

}  // namespace hyperkge
