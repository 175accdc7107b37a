#include <unordered_set>

#include <spdlog/spdlog.h>

#include "cliplab/partition.hpp"

namespace cliplab {

std::vector<TokenId> TakenLeftPartition::core() const {
  std::vector<TokenId> out(taken);
  out.insert(out.end(), left.begin(), left.end());
  return out;
}

EligibilityFlags eligibility(const TakenLeftPartition& p, const EligibilityRule& rule) {
  EligibilityFlags f;
  f.min6_both = p.taken.size() >= rule.min_cluster && p.left.size() >= rule.min_cluster;
  f.band_15_85 = p.core_size() > 0 && p.taken_fraction >= rule.band_lo &&
                 p.taken_fraction <= rule.band_hi;
  return f;
}

TakenLeftPartition partition_tokens(std::span<const TokenId> precursor_core,
                                    std::span<const TokenId> target_core) {
  if (precursor_core.empty()) throw Error(ErrorKind::EmptyCore, "precursor core is empty");
  const std::unordered_set<TokenId> target(target_core.begin(), target_core.end());
  std::unordered_set<TokenId> seen;

  TakenLeftPartition p;
  for (TokenId id : precursor_core) {
    if (!seen.insert(id).second) continue;
    (target.contains(id) ? p.taken : p.left).push_back(id);
  }
  p.taken_fraction = static_cast<double>(p.taken.size()) / static_cast<double>(p.core_size());
  return p;
}

PartitionSweep enumerate_partitions(int lower, const SweepOptions& options, const Store& store) {
  const int upper = lower + 1;
  // Resolve both layers up front so a missing layer fails the sweep, not a pair.
  store.layer(lower);
  store.layer(upper);

  PartitionSweep sweep;
  const auto& upper_layer = store.layer(upper);
  for (std::size_t n = 0; n < upper_layer.d_hidden(); ++n) {
    const NeuronId target{upper, static_cast<int>(n)};
    const auto* target_record = store.record(target);
    if (target_record == nullptr) {
      sweep.skipped_targets.push_back(target.neuron);
      continue;
    }
    const auto target_core = core_tokens(*target_record, options.core_k);
    const auto precursors = top_k_precursors(target, options.k_precursors, options.ordering, store);

    for (std::size_t rank = 0; rank < precursors.connections.size(); ++rank) {
      const auto& c = precursors.connections[rank];
      PartitionSweepItem item;
      item.precursor_rank = rank;
      item.weight = c.weight;
      if (const auto* rec = store.record(c.precursor)) {
        item.partition = partition_tokens(core_tokens(*rec, options.core_k), target_core);
      } else {
        item.precursor_missing = true;
        sweep.warnings.push_back("precursor (" + std::to_string(c.precursor.layer) + "," +
                                 std::to_string(c.precursor.neuron) + ") has no activation record");
      }
      item.partition.precursor = c.precursor;
      item.partition.target = target;
      item.flags = eligibility(item.partition, options.rule);
      sweep.items.push_back(std::move(item));
    }
  }
  if (!sweep.skipped_targets.empty()) {
    sweep.warnings.push_back(std::to_string(sweep.skipped_targets.size()) + " target neuron(s) of layer " +
                             std::to_string(upper) + " have no activation record and were skipped");
    spdlog::warn("{}", sweep.warnings.back());
  }
  return sweep;
}

}  // namespace cliplab
