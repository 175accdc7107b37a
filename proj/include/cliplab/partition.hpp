#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cliplab/category_graph.hpp"
#include "cliplab/model_store.hpp"

namespace cliplab {

/// Split of a precursor's core-tokens by membership in a target's core.
/// Both lists keep the precursor's rank order.
struct TakenLeftPartition {
  NeuronId precursor;
  NeuronId target;
  std::vector<TokenId> taken;
  std::vector<TokenId> left;
  double taken_fraction = 0.0;

  std::size_t core_size() const { return taken.size() + left.size(); }
  /// taken followed by left, i.e. the precursor core as a set.
  std::vector<TokenId> core() const;
};

struct EligibilityFlags {
  bool min6_both = false;   // |taken| >= min_cluster and |left| >= min_cluster
  bool band_15_85 = false;  // band.lo <= taken_fraction <= band.hi
};

struct EligibilityRule {
  std::size_t min_cluster = 6;
  double band_lo = 0.15;
  double band_hi = 0.85;
};

EligibilityFlags eligibility(const TakenLeftPartition& p, const EligibilityRule& rule = {});

/// taken = precursor_core ∩ target_core, left = precursor_core \ target_core.
/// Throws EmptyCore when the precursor core is empty.
TakenLeftPartition partition_tokens(std::span<const TokenId> precursor_core,
                                    std::span<const TokenId> target_core);

struct PartitionSweepItem {
  TakenLeftPartition partition;
  EligibilityFlags flags;
  std::size_t precursor_rank = 0;  // position in the target's PrecursorSet
  double weight = 0.0;             // connection strength precursor -> target
  bool precursor_missing = false;  // precursor has no activation record
};

struct SweepOptions {
  std::size_t k_precursors = 10;
  std::size_t core_k = kDefaultCoreTokens;
  ConnectionOrdering ordering = ConnectionOrdering::Signed;
  EligibilityRule rule;
};

struct PartitionSweep {
  std::vector<PartitionSweepItem> items;  // ordered (target asc, precursor rank asc)
  std::vector<int> skipped_targets;       // targets of the upper layer without records
  std::vector<std::string> warnings;
};

/// Every (target, top-k precursor) partition between layer `lower` and
/// `lower + 1`. Emits min(k, d_hidden(lower)) items per target that has a
/// record; targets without records are skipped with a warning.
PartitionSweep enumerate_partitions(int lower, const SweepOptions& options, const Store& store);

}  // namespace cliplab
