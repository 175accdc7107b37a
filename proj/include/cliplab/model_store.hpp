#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cliplab/error.hpp"

namespace cliplab {

using TokenId = std::int64_t;

struct NeuronId {
  int layer = 0;
  int neuron = 0;
  auto operator<=>(const NeuronId&) const = default;
};

/// Dense float32 tensor as stored on disk (row-major).
struct TensorBlob {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<float> data;

  std::size_t rank() const { return shape.size(); }
  std::size_t element_count() const;
  float at(std::size_t row, std::size_t col) const { return data[row * shape[1] + col]; }

  bool operator==(const TensorBlob&) const = default;
};

/// Throws NonFiniteValue (with name and flat index) or ShapeMismatch when
/// product(shape) disagrees with the payload length.
void validate_blob(const TensorBlob& blob);

// Blob file: "CLIPTNS1", u32 rank, rank x u64 dims, little-endian f32 payload.
TensorBlob read_blob(const std::filesystem::path& path, std::string name);
void write_blob(const std::filesystem::path& path, const TensorBlob& blob);

struct LayerTensors {
  int layer_index = 0;
  TensorBlob c_fc;      // [d_model, d_hidden]
  TensorBlob c_proj;    // [d_hidden, d_model]
  TensorBlob ln2_gain;  // [d_model]

  std::size_t d_model() const { return c_fc.shape.at(0); }
  std::size_t d_hidden() const { return c_fc.shape.at(1); }

  bool operator==(const LayerTensors&) const = default;
};

struct ActivationEntry {
  TokenId token_id = 0;
  std::string token_text;
  double mean_activation = 0.0;

  bool operator==(const ActivationEntry&) const = default;
};

/// A neuron's ranked top tokens. Construction validates the record and puts
/// equal activations in ascending token_id order, so every prefix of
/// `entries()` is a deterministic top-k.
class NeuronActivationRecord {
 public:
  NeuronActivationRecord(NeuronId id, std::vector<ActivationEntry> entries);

  NeuronId id() const { return id_; }
  const std::vector<ActivationEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  bool operator==(const NeuronActivationRecord&) const = default;

 private:
  NeuronId id_;
  std::vector<ActivationEntry> entries_;
};

inline constexpr std::size_t kDefaultCoreTokens = 100;

/// The first min(k, |record|) token ids of the record ("core-tokens").
std::vector<TokenId> core_tokens(const NeuronActivationRecord& record,
                                 std::size_t k = kDefaultCoreTokens);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string name, std::size_t dim, std::vector<float> rows);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool contains(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < vocab_size(); }

  /// Throws MissingEmbedding for ids outside the table.
  std::span<const float> row(TokenId id) const;
  const std::vector<float>& data() const { return data_; }

  bool operator==(const EmbeddingTable&) const = default;

 private:
  std::string name_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct LayerRef {
  int layer = 0;
  std::filesystem::path c_fc;
  std::filesystem::path c_proj;
  std::filesystem::path ln2_gain;
  std::optional<std::uint64_t> d_hidden;

  bool operator==(const LayerRef&) const = default;
};

struct EmbeddingRef {
  std::string name;
  std::uint64_t dim = 0;
  std::filesystem::path path;

  bool operator==(const EmbeddingRef&) const = default;
};

inline constexpr std::string_view kFormatVersion = "1";

struct Manifest {
  std::string format_version{kFormatVersion};
  std::string model_name;
  std::uint64_t d_model = 0;
  std::vector<LayerRef> layers;
  std::filesystem::path activations;
  std::vector<EmbeddingRef> embeddings;
  std::filesystem::path vocabulary;

  bool operator==(const Manifest&) const = default;
};

/// Parses manifest.json. Relative paths are kept as written; they resolve
/// against the manifest's directory at load time.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct ValidationIssue {
  ErrorKind kind;
  std::string detail;
};

/// Raised by load_store/Store construction; lists every violated invariant.
class StoreValidationError : public Error {
 public:
  explicit StoreValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// Immutable, validated view over all inputs of an analysis run.
class Store {
 public:
  Store(std::string model_name, std::uint64_t d_model, std::vector<LayerTensors> layers,
        std::vector<NeuronActivationRecord> records, std::vector<EmbeddingTable> embeddings,
        std::map<TokenId, std::string> vocabulary);

  const std::string& model_name() const { return model_name_; }
  std::uint64_t d_model() const { return d_model_; }

  const std::vector<LayerTensors>& layers() const { return layers_; }
  bool has_layer(int layer) const;
  /// Throws IndexOutOfRange when the layer is absent.
  const LayerTensors& layer(int layer) const;

  const std::vector<NeuronActivationRecord>& records() const { return records_; }
  const NeuronActivationRecord* record(NeuronId id) const;
  /// Neuron indices of `layer` that have an activation record, ascending.
  std::vector<int> neurons_with_records(int layer) const;

  const std::vector<EmbeddingTable>& embeddings() const { return embeddings_; }
  /// Throws InvalidArgument when no table has that name.
  const EmbeddingTable& embedding(std::string_view name) const;

  const std::map<TokenId, std::string>& vocabulary() const { return vocabulary_; }
  std::string token_text(TokenId id) const;

  bool operator==(const Store&) const = default;

 private:
  std::string model_name_;
  std::uint64_t d_model_ = 0;
  std::vector<LayerTensors> layers_;              // ascending layer_index
  std::vector<NeuronActivationRecord> records_;   // ascending (layer, neuron)
  std::vector<EmbeddingTable> embeddings_;
  std::map<TokenId, std::string> vocabulary_;
};

Store load_store(const std::filesystem::path& manifest_path);

/// Writes the store in the canonical on-disk layout under `dir` and returns
/// the manifest path.
std::filesystem::path write_store(const Store& store, const std::filesystem::path& dir);

}  // namespace cliplab
