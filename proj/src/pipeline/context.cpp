#include <algorithm>

#include <spdlog/spdlog.h>

#include "cliplab/pipeline.hpp"
#include "cliplab/rng.hpp"

namespace cliplab::pipeline {

namespace {

std::uint64_t pack(NeuronId id) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(id.layer)) << 32) |
         static_cast<std::uint32_t>(id.neuron);
}

}  // namespace

RunContext prepare_run(const RunConfig& config) {
  validate(config);
  return prepare_run(config, load_store(config.manifest));
}

RunContext prepare_run(const RunConfig& config, Store store) {
  validate(config);
  RunContext ctx{config, std::move(store), {}, {}};
  if (config.embeddings.empty()) {
    for (const auto& e : ctx.store.embeddings()) ctx.embeddings.push_back(e.name());
  } else {
    for (const auto& name : config.embeddings) {
      try {
        ctx.store.embedding(name);
      } catch (const Error&) {
        throw Error(ErrorKind::ConfigError, "embeddings: the store has no table named \"" + name + "\"");
      }
      ctx.embeddings.push_back(name);
    }
  }
  if (ctx.embeddings.empty()) throw Error(ErrorKind::ConfigError, "embeddings: the store has no embedding table");

  SweepOptions opt;
  opt.k_precursors = config.k_precursors;
  opt.core_k = config.core_k;
  opt.ordering = config.ordering;
  opt.rule = {config.min_cluster, config.band_lo, config.band_hi};
  ctx.sweep = enumerate_partitions(config.layer, opt, ctx.store);
  spdlog::info("sweep: {} pair(s) over layers {}-{}", ctx.sweep.items.size(), config.layer, config.layer + 1);
  return ctx;
}

std::string pair_id(const TakenLeftPartition& p) {
  return std::to_string(p.precursor.layer) + ":" + std::to_string(p.precursor.neuron) + ">" +
         std::to_string(p.target.layer) + ":" + std::to_string(p.target.neuron);
}

std::uint64_t pair_seed(std::uint64_t master, NeuronId target, NeuronId precursor) {
  return derive_seed(master, pack(target), pack(precursor));
}

}  // namespace cliplab::pipeline
