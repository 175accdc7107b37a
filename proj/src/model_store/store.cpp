#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cliplab/model_store.hpp"

namespace cliplab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::UnsortedActivations: return "UnsortedActivations";
    case ErrorKind::InvalidRecord: return "InvalidRecord";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::DegenerateActivations: return "DegenerateActivations";
    case ErrorKind::LayerOrderError: return "LayerOrderError";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::EmptyCore: return "EmptyCore";
    case ErrorKind::ZeroNormVector: return "ZeroNormVector";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::TooFewTokens: return "TooFewTokens";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ConstantSample: return "ConstantSample";
    case ErrorKind::SampleSizeOutOfRange: return "SampleSizeOutOfRange";
    case ErrorKind::ConstantGroup: return "ConstantGroup";
    case ErrorKind::TooFewGroups: return "TooFewGroups";
    case ErrorKind::NonPositiveExpected: return "NonPositiveExpected";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateMargins: return "DegenerateMargins";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorKind::SingularCorrelation: return "SingularCorrelation";
    case ErrorKind::AxisNotFound: return "AxisNotFound";
    case ErrorKind::PerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NoEligibleClusters: return "NoEligibleClusters";
    case ErrorKind::SpecTooSmall: return "SpecTooSmall";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Records and embeddings

NeuronActivationRecord::NeuronActivationRecord(NeuronId id, std::vector<ActivationEntry> entries)
    : id_(id), entries_(std::move(entries)) {
  const std::string where =
      "record (" + std::to_string(id.layer) + "," + std::to_string(id.neuron) + ")";
  if (entries_.empty()) throw Error(ErrorKind::InvalidRecord, where + " has no tokens");
  std::set<TokenId> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!std::isfinite(e.mean_activation)) {
      throw Error(ErrorKind::NonFiniteValue, where + ": activation at rank " + std::to_string(i));
    }
    if (!seen.insert(e.token_id).second) {
      throw Error(ErrorKind::InvalidRecord,
                  where + ": duplicate token id " + std::to_string(e.token_id));
    }
    if (i > 0 && e.mean_activation > entries_[i - 1].mean_activation) {
      throw Error(ErrorKind::UnsortedActivations, where + ": rank " + std::to_string(i) +
                                                      " exceeds the activation above it");
    }
  }
  // Already descending; this only reorders runs of equal activations.
  std::stable_sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
    if (a.mean_activation != b.mean_activation) return a.mean_activation > b.mean_activation;
    return a.token_id < b.token_id;
  });
}

std::vector<TokenId> core_tokens(const NeuronActivationRecord& record, std::size_t k) {
  const std::size_t n = std::min(k, record.size());
  std::vector<TokenId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(record.entries()[i].token_id);
  return out;
}

EmbeddingTable::EmbeddingTable(std::string name, std::size_t dim, std::vector<float> rows)
    : name_(std::move(name)), dim_(dim), data_(std::move(rows)) {
  if (dim_ == 0) throw Error(ErrorKind::ShapeMismatch, name_ + ": embedding dim must be positive");
  if (data_.size() % dim_ != 0) {
    throw Error(ErrorKind::ShapeMismatch,
                name_ + ": " + std::to_string(data_.size()) + " values is not a multiple of dim " +
                    std::to_string(dim_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorKind::NonFiniteValue, name_ + ": non-finite value at flat index " +
                                                 std::to_string(i));
    }
  }
}

std::span<const float> EmbeddingTable::row(TokenId id) const {
  if (!contains(id)) {
    throw Error(ErrorKind::MissingEmbedding, name_ + ": no row for token " + std::to_string(id));
  }
  return {data_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

template <typename T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::ParseError, where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, where + ": field '" + key + "': " + e.what());
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

}  // namespace

Manifest read_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  const std::string where = path.filename().string();
  Manifest m;
  m.format_version = required<std::string>(j, "format_version", where);
  if (m.format_version != kFormatVersion) {
    throw Error(ErrorKind::UnsupportedFormat, where + ": format_version " + m.format_version);
  }
  m.model_name = required<std::string>(j, "model_name", where);
  m.d_model = required<std::uint64_t>(j, "d_model", where);
  for (const auto& l : required<json>(j, "layers", where)) {
    LayerRef ref;
    ref.layer = required<int>(l, "layer", where + " layers[]");
    ref.c_fc = required<std::string>(l, "c_fc", where + " layers[]");
    ref.c_proj = required<std::string>(l, "c_proj", where + " layers[]");
    ref.ln2_gain = required<std::string>(l, "ln2_gain", where + " layers[]");
    if (l.contains("d_hidden")) ref.d_hidden = l.at("d_hidden").get<std::uint64_t>();
    m.layers.push_back(std::move(ref));
  }
  m.activations = required<std::string>(j, "activations", where);
  for (const auto& e : required<json>(j, "embeddings", where)) {
    EmbeddingRef ref;
    ref.name = required<std::string>(e, "name", where + " embeddings[]");
    ref.dim = required<std::uint64_t>(e, "dim", where + " embeddings[]");
    ref.path = required<std::string>(e, "path", where + " embeddings[]");
    m.embeddings.push_back(std::move(ref));
  }
  m.vocabulary = required<std::string>(j, "vocabulary", where);
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["model_name"] = m.model_name;
  j["d_model"] = m.d_model;
  j["layers"] = json::array();
  for (const auto& l : m.layers) {
    json e = {{"layer", l.layer},
              {"c_fc", l.c_fc.generic_string()},
              {"c_proj", l.c_proj.generic_string()},
              {"ln2_gain", l.ln2_gain.generic_string()}};
    if (l.d_hidden) e["d_hidden"] = *l.d_hidden;
    j["layers"].push_back(std::move(e));
  }
  j["activations"] = m.activations.generic_string();
  j["embeddings"] = json::array();
  for (const auto& e : m.embeddings) {
    j["embeddings"].push_back({{"name", e.name}, {"dim", e.dim}, {"path", e.path.generic_string()}});
  }
  j["vocabulary"] = m.vocabulary.generic_string();
  write_text(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Store

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues) {
  std::string s = std::to_string(issues.size()) + " validation issue(s)";
  for (const auto& i : issues) s += "\n  " + std::string(to_string(i.kind)) + ": " + i.detail;
  return s;
}

std::string shape_str(const std::vector<std::uint64_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

void expect_shape(std::vector<ValidationIssue>& issues, const TensorBlob& blob,
                  const std::vector<std::uint64_t>& expected) {
  if (blob.shape != expected) {
    issues.push_back({ErrorKind::ShapeMismatch, blob.name + ": expected " + shape_str(expected) +
                                                    ", found " + shape_str(blob.shape)});
  }
}

}  // namespace

StoreValidationError::StoreValidationError(std::vector<ValidationIssue> issues)
    : Error(issues.empty() ? ErrorKind::InvalidRecord : issues.front().kind, join_issues(issues)),
      issues_(std::move(issues)) {}

Store::Store(std::string model_name, std::uint64_t d_model, std::vector<LayerTensors> layers,
             std::vector<NeuronActivationRecord> records, std::vector<EmbeddingTable> embeddings,
             std::map<TokenId, std::string> vocabulary)
    : model_name_(std::move(model_name)),
      d_model_(d_model),
      layers_(std::move(layers)),
      records_(std::move(records)),
      embeddings_(std::move(embeddings)),
      vocabulary_(std::move(vocabulary)) {
  std::vector<ValidationIssue> issues;
  if (d_model_ == 0) issues.push_back({ErrorKind::ShapeMismatch, "d_model must be positive"});

  std::ranges::sort(layers_, {}, &LayerTensors::layer_index);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.layer_index < 0) {
      issues.push_back({ErrorKind::InvalidRecord, "negative layer index " + std::to_string(l.layer_index)});
    }
    if (i > 0 && layers_[i - 1].layer_index == l.layer_index) {
      issues.push_back({ErrorKind::InvalidRecord, "duplicate layer " + std::to_string(l.layer_index)});
    }
    for (const auto* blob : {&l.c_fc, &l.c_proj, &l.ln2_gain}) {
      try {
        validate_blob(*blob);
      } catch (const Error& e) {
        issues.push_back({e.kind(), e.what()});
      }
    }
    const std::uint64_t hidden = l.c_proj.rank() == 2 ? l.c_proj.shape[0] : 0;
    expect_shape(issues, l.c_fc, {d_model_, hidden});
    expect_shape(issues, l.c_proj, {hidden, d_model_});
    expect_shape(issues, l.ln2_gain, {d_model_});
  }

  std::ranges::sort(records_, {}, &NeuronActivationRecord::id);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const NeuronId id = records_[i].id();
    const std::string where = "record (" + std::to_string(id.layer) + "," + std::to_string(id.neuron) + ")";
    if (i > 0 && records_[i - 1].id() == id) {
      issues.push_back({ErrorKind::InvalidRecord, "duplicate " + where});
    }
    if (id.neuron < 0) issues.push_back({ErrorKind::InvalidRecord, where + ": negative neuron"});
    if (has_layer(id.layer)) {
      const auto& l = layer(id.layer);
      if (l.c_fc.rank() == 2 && static_cast<std::uint64_t>(id.neuron) >= l.c_fc.shape[1]) {
        issues.push_back({ErrorKind::InvalidRecord, where + ": neuron beyond layer width"});
      }
    }
  }

  std::set<std::string> names;
  for (const auto& e : embeddings_) {
    if (!names.insert(e.name()).second) {
      issues.push_back({ErrorKind::InvalidRecord, "duplicate embedding name " + e.name()});
    }
  }
  if (!issues.empty()) throw StoreValidationError(std::move(issues));
}

bool Store::has_layer(int layer) const {
  return std::ranges::any_of(layers_, [&](const auto& l) { return l.layer_index == layer; });
}

const LayerTensors& Store::layer(int layer) const {
  for (const auto& l : layers_) {
    if (l.layer_index == layer) return l;
  }
  throw Error(ErrorKind::IndexOutOfRange, "layer " + std::to_string(layer) + " not loaded");
}

const NeuronActivationRecord* Store::record(NeuronId id) const {
  auto it = std::ranges::lower_bound(records_, id, {}, &NeuronActivationRecord::id);
  return it != records_.end() && it->id() == id ? &*it : nullptr;
}

std::vector<int> Store::neurons_with_records(int layer) const {
  std::vector<int> out;
  for (const auto& r : records_) {
    if (r.id().layer == layer) out.push_back(r.id().neuron);
  }
  return out;
}

const EmbeddingTable& Store::embedding(std::string_view name) const {
  for (const auto& e : embeddings_) {
    if (e.name() == name) return e;
  }
  throw Error(ErrorKind::InvalidArgument, "no embedding table named " + std::string(name));
}

std::string Store::token_text(TokenId id) const {
  auto it = vocabulary_.find(id);
  return it == vocabulary_.end() ? std::string() : it->second;
}

// ---------------------------------------------------------------------------
// load / write

namespace {

template <typename Fn>
void for_each_jsonl(const fs::path& path, std::vector<ValidationIssue>& issues, Fn&& fn) {
  std::ifstream in(path);
  if (!in) {
    issues.push_back({ErrorKind::MissingFile, path.string()});
    return;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    try {
      fn(json::parse(line), where);
    } catch (const json::exception& e) {
      issues.push_back({ErrorKind::ParseError, where + ": " + e.what()});
    } catch (const Error& e) {
      issues.push_back({e.kind(), where + ": " + e.what()});
    }
  }
}

}  // namespace

Store load_store(const fs::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::vector<ValidationIssue> issues;

  auto load_blob = [&](const fs::path& p, std::string name) -> std::optional<TensorBlob> {
    try {
      return read_blob(resolve(base, p), std::move(name));
    } catch (const Error& e) {
      issues.push_back({e.kind(), e.what()});
      return std::nullopt;
    }
  };

  std::vector<LayerTensors> layers;
  for (const auto& ref : m.layers) {
    const std::string prefix = "h" + std::to_string(ref.layer);
    auto fc = load_blob(ref.c_fc, prefix + ".mlp.c_fc.w");
    auto proj = load_blob(ref.c_proj, prefix + ".mlp.c_proj.w");
    auto gain = load_blob(ref.ln2_gain, prefix + ".ln_2.g");
    if (!fc || !proj || !gain) continue;
    if (ref.d_hidden) {
      const std::uint64_t h = *ref.d_hidden;
      expect_shape(issues, *fc, {m.d_model, h});
      expect_shape(issues, *proj, {h, m.d_model});
    }
    layers.push_back({ref.layer, std::move(*fc), std::move(*proj), std::move(*gain)});
  }

  std::vector<NeuronActivationRecord> records;
  for_each_jsonl(resolve(base, m.activations), issues, [&](const json& j, const std::string& where) {
    NeuronId id{required<int>(j, "layer", where), required<int>(j, "neuron", where)};
    std::vector<ActivationEntry> entries;
    for (const auto& t : required<json>(j, "tokens", where)) {
      ActivationEntry e;
      e.token_id = required<TokenId>(t, "id", where);
      e.token_text = t.value("text", std::string());
      e.mean_activation = required<double>(t, "act", where);
      entries.push_back(std::move(e));
    }
    records.emplace_back(id, std::move(entries));
  });

  std::vector<EmbeddingTable> embeddings;
  for (const auto& ref : m.embeddings) {
    auto blob = load_blob(ref.path, ref.name);
    if (!blob) continue;
    if (blob->rank() != 2 || blob->shape[1] != ref.dim) {
      issues.push_back({ErrorKind::ShapeMismatch, ref.name + ": expected [vocab," +
                                                      std::to_string(ref.dim) + "], found " +
                                                      shape_str(blob->shape)});
      continue;
    }
    embeddings.emplace_back(ref.name, static_cast<std::size_t>(ref.dim), std::move(blob->data));
  }

  std::map<TokenId, std::string> vocabulary;
  for_each_jsonl(resolve(base, m.vocabulary), issues, [&](const json& j, const std::string& where) {
    const auto id = required<TokenId>(j, "id", where);
    if (!vocabulary.emplace(id, j.value("text", std::string())).second) {
      throw Error(ErrorKind::InvalidRecord, "duplicate vocabulary id " + std::to_string(id));
    }
  });

  if (!issues.empty()) throw StoreValidationError(std::move(issues));
  return Store(m.model_name, m.d_model, std::move(layers), std::move(records),
               std::move(embeddings), std::move(vocabulary));
}

fs::path write_store(const Store& store, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "tensors", ec);
  fs::create_directories(dir / "embeddings", ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());

  Manifest m;
  m.model_name = store.model_name();
  m.d_model = store.d_model();
  for (const auto& l : store.layers()) {
    const std::string prefix = "tensors/h" + std::to_string(l.layer_index);
    LayerRef ref{l.layer_index, prefix + ".mlp.c_fc.w.bin", prefix + ".mlp.c_proj.w.bin",
                 prefix + ".ln_2.g.bin", l.d_hidden()};
    write_blob(dir / ref.c_fc, l.c_fc);
    write_blob(dir / ref.c_proj, l.c_proj);
    write_blob(dir / ref.ln2_gain, l.ln2_gain);
    m.layers.push_back(std::move(ref));
  }

  m.activations = "activations.jsonl";
  std::string acts;
  for (const auto& r : store.records()) {
    json tokens = json::array();
    for (const auto& e : r.entries()) {
      tokens.push_back({{"id", e.token_id}, {"text", e.token_text}, {"act", e.mean_activation}});
    }
    acts += json{{"layer", r.id().layer}, {"neuron", r.id().neuron}, {"tokens", std::move(tokens)}}.dump();
    acts += '\n';
  }
  write_text(dir / m.activations, acts);

  for (const auto& e : store.embeddings()) {
    EmbeddingRef ref{e.name(), e.dim(), "embeddings/" + e.name() + ".bin"};
    write_blob(dir / ref.path, TensorBlob{e.name(), {e.vocab_size(), e.dim()}, e.data()});
    m.embeddings.push_back(std::move(ref));
  }

  m.vocabulary = "vocabulary.jsonl";
  std::string vocab;
  for (const auto& [id, text] : store.vocabulary()) vocab += json{{"id", id}, {"text", text}}.dump() + "\n";
  write_text(dir / m.vocabulary, vocab);

  const fs::path manifest_path = dir / "manifest.json";
  write_manifest(manifest_path, m);
  return manifest_path;
}

}  // namespace cliplab
