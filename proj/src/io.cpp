#include "hyperkge/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace hyperkge {
namespace {

constexpr char kMagic[4] = {'Q', 'K', 'G', 'E'};
constexpr std::uint32_t kFormatVersion = 1;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const unsigned char* bytes, std::size_t size) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
  return h;
}

std::uint32_t variant_tag(ModelVariant v) {
  return static_cast<std::uint32_t>(v);
}

ModelVariant variant_from_tag(std::uint32_t tag) {
  if (tag > static_cast<std::uint32_t>(ModelVariant::kOctonionE)) {
    throw DataError("checkpoint: unknown variant tag " + std::to_string(tag));
  }
  return static_cast<ModelVariant>(tag);
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
}

void put_f32(std::vector<unsigned char>& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes)
      : bytes_(std::move(bytes)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f32() { return std::bit_cast<float>(u32()); }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos() const { return pos_; }
  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  void need(std::size_t n) {
    if (remaining() < n) {
      throw DataError("checkpoint: truncated file");
    }
  }

  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

// Appends the coordinate planes of one table: every row's component-c slice,
// c-major, as float32.
void append_planes(std::vector<unsigned char>& out,
                   const std::vector<double>& data, std::size_t rows,
                   int components, std::size_t k) {
  for (int c = 0; c < components; ++c) {
    for (std::size_t n = 0; n < rows; ++n) {
      const double* row = data.data() + n * components * k;
      for (std::size_t d = 0; d < k; ++d) {
        put_f32(out, row[c * k + d]);
      }
    }
  }
}

void read_planes(ByteReader& in, std::vector<double>& data, std::size_t rows,
                 int components, std::size_t k) {
  for (int c = 0; c < components; ++c) {
    for (std::size_t n = 0; n < rows; ++n) {
      double* row = data.data() + n * components * k;
      for (std::size_t d = 0; d < k; ++d) {
        row[c * k + d] = in.f32();
      }
    }
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const EmbeddingTable& table, bool reciprocal) {
  std::vector<unsigned char> payload;
  const std::size_t rows_e = table.num_entities();
  const std::size_t rows_r = table.num_relations();
  const int comps = table.components();
  const std::size_t k = table.dim();
  payload.reserve((rows_e + rows_r * (table.has_tail_relations() ? 2 : 1)) *
                  comps * k * 4);
  append_planes(payload, table.entity_data(), rows_e, comps, k);
  append_planes(payload, table.relation_data(), rows_r, comps, k);
  if (table.has_tail_relations()) {
    append_planes(payload, table.tail_relation_data(), rows_r, comps, k);
  }

  std::vector<unsigned char> header;
  header.insert(header.end(), kMagic, kMagic + 4);
  put_u32(header, kFormatVersion);
  put_u32(header, variant_tag(table.variant()));
  put_u32(header, static_cast<std::uint32_t>(comps));
  put_u32(header, reciprocal ? 1 : 0);
  put_u64(header, rows_e);
  put_u64(header, rows_r);
  put_u64(header, k);

  std::vector<unsigned char> footer;
  put_u64(footer, fnv1a(payload.data(), payload.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot open checkpoint for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(header.data()),
            static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  out.write(reinterpret_cast<const char*>(footer.data()),
            static_cast<std::streamsize>(footer.size()));
  if (!out) {
    throw DataError("checkpoint write failed: " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open checkpoint: " + path.string());
  }
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  ByteReader reader(std::move(bytes));

  if (reader.remaining() < 4 ||
      std::memcmp(reader.bytes().data(), kMagic, 4) != 0) {
    throw DataError("checkpoint: bad magic bytes");
  }
  // Skip the magic.
  reader.u32();
  const std::uint32_t version = reader.u32();
  if (version != kFormatVersion) {
    throw DataError("checkpoint: unsupported format version " +
                    std::to_string(version));
  }
  const ModelVariant variant = variant_from_tag(reader.u32());
  const std::uint32_t comps = reader.u32();
  if (comps != static_cast<std::uint32_t>(components_for(variant))) {
    throw DataError("checkpoint: component count " + std::to_string(comps) +
                    " does not match variant " + variant_name(variant));
  }
  const std::uint32_t reciprocal = reader.u32();
  if (reciprocal > 1) {
    throw DataError("checkpoint: bad reciprocal flag");
  }
  const std::uint64_t n = reader.u64();
  const std::uint64_t m = reader.u64();
  const std::uint64_t k = reader.u64();
  if (k == 0) {
    throw DataError("checkpoint: zero embedding dimension");
  }
  // Ids are 32-bit; the k bound keeps the payload size product below 2^64.
  if (n >= (1ULL << 31) || m >= (1ULL << 31) || k >= (1ULL << 24)) {
    throw DataError("checkpoint: implausible header counts");
  }

  const std::uint64_t tables = has_tail_relations(variant) ? 2 : 1;
  const std::uint64_t payload_size = (n + tables * m) * comps * k * 4;
  if (reader.remaining() != payload_size + 8) {
    throw DataError("checkpoint: header counts do not match file size");
  }
  const std::size_t payload_begin = reader.pos();

  Checkpoint result{EmbeddingTable(variant, n, m, k), reciprocal == 1};
  read_planes(reader, result.table.entity_data(), n, comps, k);
  read_planes(reader, result.table.relation_data(), m, comps, k);
  if (has_tail_relations(variant)) {
    read_planes(reader, result.table.tail_relation_data(), m, comps, k);
  }

  const std::uint64_t expected =
      fnv1a(reader.bytes().data() + payload_begin, payload_size);
  if (reader.u64() != expected) {
    throw DataError("checkpoint: checksum mismatch");
  }
  return result;
}

namespace {

// Shortest decimal that reparses to the same float32.
std::string f32_string(double v) {
  const float f = static_cast<float>(v);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(f));
  return buf;
}

void export_rows(std::ostream& out, const std::vector<double>& data,
                 std::size_t rows, int components, std::size_t k,
                 const char* section,
                 const std::function<std::string(std::size_t)>& name_of) {
  out << "# section " << section << '\n';
  for (std::size_t n = 0; n < rows; ++n) {
    const double* row = data.data() + n * components * k;
    out << name_of(n);
    for (std::size_t d = 0; d < k; ++d) {
      out << '\t';
      for (int c = 0; c < components; ++c) {
        if (c > 0) {
          out << ',';
        }
        out << f32_string(row[c * k + d]);
      }
    }
    out << '\n';
  }
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void export_tsv(std::ostream& out, const EmbeddingTable& table,
                bool reciprocal, const Vocabulary* vocab) {
  const std::size_t n = table.num_entities();
  const std::size_t m = table.num_relations();
  if (vocab != nullptr && (vocab->num_entities() != n ||
                           vocab->num_relations() != m)) {
    throw DataError("vocabulary sizes do not match the embedding table");
  }
  out << "# hyperkge embeddings 1 variant " << variant_name(table.variant())
      << " reciprocal " << (reciprocal ? 1 : 0) << " entities " << n
      << " relations " << m << " k " << table.dim() << '\n';
  const auto entity_name = [&](std::size_t i) {
    return vocab != nullptr ? vocab->entity_name(static_cast<EntityId>(i))
                            : "e" + std::to_string(i);
  };
  const auto relation_name = [&](std::size_t i) {
    return vocab != nullptr ? vocab->relation_name(static_cast<RelationId>(i))
                            : "r" + std::to_string(i);
  };
  export_rows(out, table.entity_data(), n, table.components(), table.dim(),
              "entities", entity_name);
  export_rows(out, table.relation_data(), m, table.components(), table.dim(),
              "relations", relation_name);
  if (table.has_tail_relations()) {
    export_rows(out, table.tail_relation_data(), m, table.components(),
                table.dim(), "tail-relations", relation_name);
  }
}

Checkpoint import_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("embedding dump: empty input");
  }
  std::istringstream header(line);
  std::string hash, tool, kind;
  int version = 0;
  std::string key;
  std::string variant_str;
  int reciprocal = 0;
  std::size_t n = 0, m = 0, k = 0;
  header >> hash >> tool >> kind >> version;
  if (hash != "#" || tool != "hyperkge" || kind != "embeddings" ||
      version != 1) {
    throw DataError("embedding dump: bad header line");
  }
  while (header >> key) {
    if (key == "variant") {
      header >> variant_str;
    } else if (key == "reciprocal") {
      header >> reciprocal;
    } else if (key == "entities") {
      header >> n;
    } else if (key == "relations") {
      header >> m;
    } else if (key == "k") {
      header >> k;
    } else {
      throw DataError("embedding dump: unknown header key '" + key + "'");
    }
  }
  const auto variant = variant_from_name(variant_str);
  if (!variant.has_value()) {
    throw DataError("embedding dump: unknown variant '" + variant_str + "'");
  }
  if (k == 0) {
    throw DataError("embedding dump: missing or zero k");
  }

  Checkpoint result{EmbeddingTable(*variant, n, m, k), reciprocal == 1};
  const int comps = result.table.components();

  std::vector<double>* data = nullptr;
  std::size_t expected_rows = 0;
  std::size_t row = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    if (line.starts_with("# section ")) {
      const std::string section = line.substr(10);
      if (row != expected_rows) {
        throw DataError("embedding dump: section ended early at line " +
                        std::to_string(line_no));
      }
      row = 0;
      if (section == "entities") {
        data = &result.table.entity_data();
        expected_rows = n;
      } else if (section == "relations") {
        data = &result.table.relation_data();
        expected_rows = m;
      } else if (section == "tail-relations") {
        if (!result.table.has_tail_relations()) {
          throw DataError("embedding dump: variant has no tail relations");
        }
        data = &result.table.tail_relation_data();
        expected_rows = m;
      } else {
        throw DataError("embedding dump: unknown section '" + section + "'");
      }
      continue;
    }
    if (line.starts_with('#')) {
      continue;
    }
    if (data == nullptr || row >= expected_rows) {
      throw DataError("embedding dump: unexpected row at line " +
                      std::to_string(line_no));
    }
    const std::vector<std::string> fields = split_fields(line, '\t');
    if (fields.size() != k + 1) {
      throw DataError("embedding dump: line " + std::to_string(line_no) +
                      ": expected " + std::to_string(k + 1) + " fields, got " +
                      std::to_string(fields.size()));
    }
    double* out_row = data->data() + row * comps * k;
    for (std::size_t d = 0; d < k; ++d) {
      const std::vector<std::string> parts = split_fields(fields[d + 1], ',');
      if (parts.size() != static_cast<std::size_t>(comps)) {
        throw DataError("embedding dump: line " + std::to_string(line_no) +
                        ": expected " + std::to_string(comps) +
                        " components");
      }
      for (int c = 0; c < comps; ++c) {
        std::size_t used = 0;
        double value = 0.0;
        try {
          value = std::stod(parts[c], &used);
        } catch (const std::exception&) {
          throw DataError("embedding dump: line " + std::to_string(line_no) +
                          ": bad number '" + parts[c] + "'");
        }
        if (used != parts[c].size()) {
          throw DataError("embedding dump: line " + std::to_string(line_no) +
                          ": bad number '" + parts[c] + "'");
        }
        // Values live on the float32 grid so a re-export is byte-identical.
        out_row[c * k + d] = static_cast<double>(static_cast<float>(value));
      }
    }
    ++row;
  }
  if (row != expected_rows) {
    throw DataError("embedding dump: truncated final section");
  }
  return result;
}

}  // namespace hyperkge
