#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "cliplab/pipeline.hpp"
#include "cliplab/rng.hpp"

namespace cliplab::pipeline {

namespace {

constexpr std::size_t kTopicSize = 20;
constexpr std::size_t kBackgroundPerCore = 80;
constexpr std::size_t kFillersPerCore = 20;
constexpr std::size_t kTailSize = 20;

// Stream tags for derive_seed.
enum Stream : std::uint64_t { kWeights = 1, kContributors, kBackground, kFillers, kTail, kEmbedding, kDirection };

std::string_view structure_name(PlantedStructure s) {
  switch (s) {
    case PlantedStructure::Cone: return "cone";
    case PlantedStructure::Separable: return "separable";
    default: return "null";
  }
}

void check(const SynthSpec& s) {
  if (s.vocab < 24) throw Error(ErrorKind::SpecTooSmall, "vocab must be at least 24");
  if (s.d_model < 4) throw Error(ErrorKind::SpecTooSmall, "d_model must be at least 4");
  if (s.n_neurons < 1) throw Error(ErrorKind::SpecTooSmall, "n_neurons must be at least 1");
  if (s.embedding_dim < 2) throw Error(ErrorKind::SpecTooSmall, "embedding_dim must be at least 2");
  if (s.contributors < 1 || s.contributors > s.n_neurons) {
    throw Error(ErrorKind::SpecTooSmall, "contributors must be between 1 and n_neurons");
  }
  if (s.separable_dims > s.embedding_dim) throw Error(ErrorKind::SpecTooSmall, "separable_dims exceeds embedding_dim");
  if (!(s.cone_half_angle >= 0.0 && s.cone_half_angle <= std::numbers::pi / 2)) {
    throw Error(ErrorKind::InvalidArgument, "cone_half_angle must lie in [0, pi/2]");
  }
  if (!std::isfinite(s.separation)) throw Error(ErrorKind::InvalidArgument, "separation must be finite");
}

// First `count` entries of a seeded Fisher-Yates shuffle of `pool`.
std::vector<TokenId> sample(std::vector<TokenId> pool, std::size_t count, Rng& rng) {
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<TokenId> range(std::size_t lo, std::size_t hi) {
  std::vector<TokenId> out;
  for (std::size_t t = lo; t < hi; ++t) out.push_back(static_cast<TokenId>(t));
  return out;
}

struct Layout {
  std::size_t topic_size = 0;
  std::size_t n_topics = 0;
  std::size_t topic_end = 0;       // tokens [0, topic_end) form disjoint topic blocks
  std::size_t background_end = 0;  // [topic_end, background_end) background pool
  std::size_t vocab = 0;           // [background_end, vocab) filler pool

  std::vector<TokenId> topic(std::size_t precursor) const {
    const std::size_t b = precursor % n_topics;
    return range(b * topic_size, (b + 1) * topic_size);
  }
  // Block owning a token, or n_topics for tokens outside every topic.
  std::size_t block_of(std::size_t token) const { return token < topic_end ? token / topic_size : n_topics; }
};

Layout layout_for(const SynthSpec& s) {
  Layout l;
  l.vocab = s.vocab;
  const std::size_t topic_region = std::min(s.n_neurons * kTopicSize, s.vocab * 8 / 13);
  l.topic_size = std::min(kTopicSize, std::max<std::size_t>(1, topic_region));
  l.n_topics = std::max<std::size_t>(1, topic_region / l.topic_size);
  l.topic_end = l.n_topics * l.topic_size;
  l.background_end = l.topic_end + (s.vocab - l.topic_end) / 2;
  return l;
}

NeuronActivationRecord make_record(NeuronId id, const std::vector<std::vector<TokenId>>& tiers, std::size_t vocab,
                                   Rng& tail_rng) {
  std::vector<ActivationEntry> entries;
  std::set<TokenId> seen;
  double top = 10.0 * static_cast<double>(tiers.size() + 1);
  for (const auto& tier : tiers) {
    double act = top;
    for (TokenId t : tier) {
      if (!seen.insert(t).second) continue;
      entries.push_back({t, "tok" + std::to_string(t), act});
      act -= 0.001;
    }
    top -= 10.0;
  }
  std::vector<TokenId> rest;
  for (std::size_t t = 0; t < vocab; ++t) {
    if (!seen.contains(static_cast<TokenId>(t))) rest.push_back(static_cast<TokenId>(t));
  }
  double act = top;
  for (TokenId t : sample(std::move(rest), kTailSize, tail_rng)) {
    entries.push_back({t, "tok" + std::to_string(t), act});
    act -= 0.001;
  }
  return NeuronActivationRecord(id, std::move(entries));
}

TensorBlob blob(std::string name, std::vector<std::uint64_t> shape, std::vector<float> data) {
  return TensorBlob{std::move(name), std::move(shape), std::move(data)};
}

std::vector<double> unit_normal(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  while (!(norm > 1e-12)) {
    norm = 0.0;
    for (auto& x : v) x = rng.normal(), norm += x * x;
    norm = std::sqrt(norm);
  }
  for (auto& x : v) x /= norm;
  return v;
}

EmbeddingTable make_embeddings(const SynthSpec& s, const Layout& l) {
  const std::size_t dim = s.embedding_dim;
  std::vector<float> rows(s.vocab * dim);
  std::vector<std::vector<double>> directions;
  for (std::size_t b = 0; b < l.n_topics; ++b) {
    Rng rng(derive_seed(s.seed, kDirection, b));
    directions.push_back(unit_normal(dim, rng));
  }
  for (std::size_t t = 0; t < s.vocab; ++t) {
    Rng rng(derive_seed(s.seed, kEmbedding, t));
    std::vector<double> e(dim);
    for (auto& x : e) x = rng.normal();
    const std::size_t block = l.block_of(t);
    if (block < l.n_topics) {
      if (s.structure == PlantedStructure::Cone) {
        // Unit vector at a uniform angle in [0, half_angle] from the topic direction.
        const auto& u = directions[block];
        double along = 0.0;
        for (std::size_t k = 0; k < dim; ++k) along += e[k] * u[k];
        double norm = 0.0;
        for (std::size_t k = 0; k < dim; ++k) e[k] -= along * u[k], norm += e[k] * e[k];
        norm = std::sqrt(norm);
        const double theta = s.cone_half_angle * rng.uniform();
        for (std::size_t k = 0; k < dim; ++k) {
          const double ortho = norm > 0.0 ? e[k] / norm : 0.0;
          e[k] = std::cos(theta) * u[k] + std::sin(theta) * ortho;
        }
      } else if (s.structure == PlantedStructure::Separable) {
        for (std::size_t k = 0; k < s.separable_dims; ++k) e[k] += s.separation;
      }
    }
    for (std::size_t k = 0; k < dim; ++k) rows[t * dim + k] = static_cast<float>(e[k]);
  }
  return EmbeddingTable("synth", dim, std::move(rows));
}

}  // namespace

SynthSpec synth_spec_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "synth spec: expected a JSON object");
  static const std::set<std::string> known{"d_model",  "n_neurons",       "vocab",          "embedding_dim",
                                           "planted_structure", "seed", "contributors", "cone_half_angle",
                                           "separable_dims", "separation"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorKind::ConfigError, "synth spec: unknown field " + key);
  }
  SynthSpec s;
  auto count = [&](const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_unsigned()) throw Error(ErrorKind::ConfigError, std::string("synth spec: ") + key + " must be a non-negative integer");
    out = v.get<std::size_t>();
  };
  auto real = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(ErrorKind::ConfigError, std::string("synth spec: ") + key + " must be a number");
    out = v.get<double>();
  };
  count("d_model", s.d_model);
  count("n_neurons", s.n_neurons);
  count("vocab", s.vocab);
  count("embedding_dim", s.embedding_dim);
  count("contributors", s.contributors);
  count("separable_dims", s.separable_dims);
  real("cone_half_angle", s.cone_half_angle);
  real("separation", s.separation);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw Error(ErrorKind::ConfigError, "synth spec: seed must be a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("planted_structure")) {
    const auto& v = j.at("planted_structure");
    const std::string name = v.is_string() ? v.get<std::string>() : "";
    if (name == "cone") {
      s.structure = PlantedStructure::Cone;
    } else if (name == "separable") {
      s.structure = PlantedStructure::Separable;
    } else if (name == "null") {
      s.structure = PlantedStructure::Null;
    } else {
      throw Error(ErrorKind::ConfigError, "synth spec: planted_structure must be \"cone\", \"separable\" or \"null\"");
    }
  }
  return s;
}

Json synth_spec_to_json(const SynthSpec& s) {
  return Json{{"d_model", s.d_model},
              {"n_neurons", s.n_neurons},
              {"vocab", s.vocab},
              {"embedding_dim", s.embedding_dim},
              {"planted_structure", structure_name(s.structure)},
              {"seed", s.seed},
              {"contributors", s.contributors},
              {"cone_half_angle", s.cone_half_angle},
              {"separable_dims", s.separable_dims},
              {"separation", s.separation}};
}

Store synth_store(const SynthSpec& s) {
  check(s);
  const Layout l = layout_for(s);
  const std::size_t d = s.d_model;
  const std::size_t n = s.n_neurons;

  // Precursor p writes to residual direction p mod d, so the connection
  // strength p -> t is the c_fc entry of target t at that direction.
  std::vector<float> proj(n * d, 0.0f);
  for (std::size_t p = 0; p < n; ++p) proj[p * d + p % d] = 1.0f;

  std::vector<float> fc0(d * n);
  {
    Rng rng(derive_seed(s.seed, kWeights, 0));
    for (auto& v : fc0) v = static_cast<float>(0.1 * rng.normal());
  }

  std::vector<float> fc1(d * n);
  std::vector<std::vector<std::size_t>> contributors(n);
  for (std::size_t t = 0; t < n; ++t) {
    Rng noise(derive_seed(s.seed, kWeights, t + 1));
    for (std::size_t m = 0; m < d; ++m) fc1[m * n + t] = static_cast<float>(0.1 * (noise.uniform() - 0.5));
    Rng pick(derive_seed(s.seed, kContributors, t));
    std::vector<std::size_t> chosen;
    while (chosen.size() < s.contributors) {
      const auto c = static_cast<std::size_t>(pick.below(n));
      if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
    }
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      const double w = 1.0 - 0.5 * static_cast<double>(j) / static_cast<double>(chosen.size());
      fc1[(chosen[j] % d) * n + t] = static_cast<float>(w);
    }
    contributors[t] = std::move(chosen);
  }

  std::vector<LayerTensors> layers;
  layers.push_back({0, blob("h0.mlp.c_fc.w", {d, n}, fc0), blob("h0.mlp.c_proj.w", {n, d}, proj),
                    blob("h0.ln_2.g", {d}, std::vector<float>(d, 1.0f))});
  layers.push_back({1, blob("h1.mlp.c_fc.w", {d, n}, fc1), blob("h1.mlp.c_proj.w", {n, d}, proj),
                    blob("h1.ln_2.g", {d}, std::vector<float>(d, 1.0f))});

  const auto background_pool = range(l.topic_end, l.background_end);
  const auto filler_pool = range(l.background_end, l.vocab);
  std::vector<NeuronActivationRecord> records;
  for (std::size_t p = 0; p < n; ++p) {
    Rng bg(derive_seed(s.seed, kBackground, p));
    Rng tail(derive_seed(s.seed, kTail, p));
    records.push_back(make_record({0, static_cast<int>(p)},
                                  {l.topic(p), sample(background_pool, kBackgroundPerCore, bg)}, l.vocab, tail));
  }
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<TokenId> absorbed;
    for (std::size_t c : contributors[t]) {
      const auto topic = l.topic(c);
      absorbed.insert(absorbed.end(), topic.begin(), topic.end());
    }
    Rng fill(derive_seed(s.seed, kFillers, t));
    Rng tail(derive_seed(s.seed, kTail, n + t));
    records.push_back(make_record({1, static_cast<int>(t)},
                                  {absorbed, sample(filler_pool, kFillersPerCore, fill)}, l.vocab, tail));
  }

  std::map<TokenId, std::string> vocabulary;
  for (std::size_t t = 0; t < s.vocab; ++t) vocabulary.emplace(static_cast<TokenId>(t), "tok" + std::to_string(t));

  std::vector<EmbeddingTable> embeddings;
  embeddings.push_back(make_embeddings(s, l));
  return Store("synth-" + std::string(structure_name(s.structure)), d, std::move(layers), std::move(records),
               std::move(embeddings), std::move(vocabulary));
}

std::filesystem::path synth_fixture(const SynthSpec& spec, const std::filesystem::path& dir) {
  return write_store(synth_store(spec), dir);
}

}  // namespace cliplab::pipeline
