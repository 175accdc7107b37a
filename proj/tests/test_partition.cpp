#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "cliplab/partition.hpp"
#include "fixtures.hpp"

using namespace cliplab;
using namespace cliplab::testing;

namespace {

std::vector<TokenId> random_core(Rng& rng, std::size_t n, TokenId vocab) {
  std::vector<TokenId> out;
  std::set<TokenId> seen;
  while (out.size() < n) {
    const auto t = static_cast<TokenId>(rng.below(static_cast<std::uint64_t>(vocab)));
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

// Two layers of width `hidden`, each neuron recorded with a random core of
// `core` tokens out of `vocab`, except targets listed in `unrecorded`.
Store sweep_store(std::size_t hidden, std::size_t core, TokenId vocab, std::uint64_t seed,
                  const std::set<int>& unrecorded = {}) {
  Rng rng(seed);
  std::vector<LayerTensors> layers{random_layer(0, 4, hidden, rng), random_layer(1, 4, hidden, rng)};
  std::vector<NeuronActivationRecord> records;
  for (int layer = 0; layer < 2; ++layer) {
    for (std::size_t n = 0; n < hidden; ++n) {
      if (layer == 1 && unrecorded.contains(static_cast<int>(n))) continue;
      records.push_back(ranked_record({layer, static_cast<int>(n)}, random_core(rng, core, vocab)));
    }
  }
  return Store("sweep", 4, std::move(layers), std::move(records), {}, {});
}

}  // namespace

TEST(Partition, WorkedExample) {
  const std::vector<TokenId> pre{1, 2, 3, 4};  // a b c d
  const std::vector<TokenId> tgt{2, 4, 5};     // b d e
  const auto p = partition_tokens(pre, tgt);
  EXPECT_EQ(p.taken, (std::vector<TokenId>{2, 4}));
  EXPECT_EQ(p.left, (std::vector<TokenId>{1, 3}));
  EXPECT_EQ(p.taken_fraction, 0.5);
}

TEST(Partition, DisjointAndContained) {
  const std::vector<TokenId> pre{1, 2, 3};
  const auto disjoint = partition_tokens(pre, std::vector<TokenId>{7, 8});
  EXPECT_TRUE(disjoint.taken.empty());
  EXPECT_EQ(disjoint.left, pre);
  EXPECT_EQ(disjoint.taken_fraction, 0.0);

  const auto inside = partition_tokens(pre, std::vector<TokenId>{3, 2, 1, 9});
  EXPECT_TRUE(inside.left.empty());
  EXPECT_EQ(inside.taken_fraction, 1.0);
}

TEST(Partition, EmptyCoreThrows) {
  try {
    partition_tokens(std::vector<TokenId>{}, std::vector<TokenId>{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCore);
  }
}

TEST(Partition, IsASetPartition) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto pre = random_core(rng, 1 + rng.below(60), 120);
    const auto tgt = random_core(rng, rng.below(60), 120);
    const auto p = partition_tokens(pre, tgt);
    const std::set<TokenId> taken(p.taken.begin(), p.taken.end());
    const std::set<TokenId> left(p.left.begin(), p.left.end());
    const std::set<TokenId> core(pre.begin(), pre.end());
    const std::set<TokenId> target(tgt.begin(), tgt.end());

    std::vector<TokenId> both;
    std::set_intersection(taken.begin(), taken.end(), left.begin(), left.end(), std::back_inserter(both));
    EXPECT_TRUE(both.empty());
    std::set<TokenId> uni(taken);
    uni.insert(left.begin(), left.end());
    EXPECT_EQ(uni, core);
    for (TokenId t : taken) EXPECT_TRUE(target.contains(t));
    for (TokenId t : left) EXPECT_FALSE(target.contains(t));
    EXPECT_DOUBLE_EQ(p.taken_fraction, static_cast<double>(taken.size()) / static_cast<double>(core.size()));

    // Both groups keep the precursor's rank order.
    auto rank = [&](TokenId t) { return std::find(pre.begin(), pre.end(), t) - pre.begin(); };
    for (std::size_t i = 1; i < p.taken.size(); ++i) EXPECT_LT(rank(p.taken[i - 1]), rank(p.taken[i]));
    for (std::size_t i = 1; i < p.left.size(); ++i) EXPECT_LT(rank(p.left[i - 1]), rank(p.left[i]));
  }
}

TEST(Partition, EligibilityFlags) {
  TakenLeftPartition p;
  p.taken.resize(6);
  p.left.resize(6);
  p.taken_fraction = 0.5;
  EXPECT_TRUE(eligibility(p).min6_both);
  EXPECT_TRUE(eligibility(p).band_15_85);
  p.left.resize(5);
  EXPECT_FALSE(eligibility(p).min6_both);

  p.taken.assign(15, 0);
  p.left.assign(85, 0);
  p.taken_fraction = 0.15;
  EXPECT_TRUE(eligibility(p).band_15_85);
  p.taken_fraction = 0.14;
  EXPECT_FALSE(eligibility(p).band_15_85);
  p.taken_fraction = 0.85;
  EXPECT_TRUE(eligibility(p).band_15_85);
  p.taken_fraction = 0.86;
  EXPECT_FALSE(eligibility(p).band_15_85);
}

TEST(Partition, MinClusterImpliesCoreOfTwelve) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = partition_tokens(random_core(rng, 1 + rng.below(40), 60), random_core(rng, rng.below(40), 60));
    if (eligibility(p).min6_both) EXPECT_GE(p.core_size(), 12u);
  }
}

TEST(Partition, SweepCountIsTargetsTimesK) {
  const Store s = sweep_store(4, 20, 50, 13);
  SweepOptions opt;
  opt.k_precursors = 3;
  const auto sweep = enumerate_partitions(0, opt, s);
  EXPECT_EQ(sweep.items.size(), 12u);
  EXPECT_TRUE(sweep.skipped_targets.empty());

  for (std::size_t k : {1u, 2u, 4u}) {
    opt.k_precursors = k;
    EXPECT_EQ(enumerate_partitions(0, opt, s).items.size(), 4 * k);
  }
}

TEST(Partition, SweepOrderAndDeterminism) {
  const Store s = sweep_store(6, 30, 80, 14);
  SweepOptions opt;
  opt.k_precursors = 4;
  const auto a = enumerate_partitions(0, opt, s);
  const auto b = enumerate_partitions(0, opt, s);
  ASSERT_EQ(a.items.size(), 24u);
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const auto& x = a.items[i];
    EXPECT_EQ(x.partition.target.neuron, static_cast<int>(i / 4));
    EXPECT_EQ(x.precursor_rank, i % 4);
    EXPECT_EQ(x.partition.taken, b.items[i].partition.taken);
    EXPECT_EQ(x.partition.left, b.items[i].partition.left);
    const auto expected = top_k_precursors(x.partition.target, 4, ConnectionOrdering::Signed, s);
    EXPECT_EQ(x.partition.precursor, expected.connections[x.precursor_rank].precursor);
    EXPECT_EQ(x.weight, expected.connections[x.precursor_rank].weight);
  }
}

TEST(Partition, UnrecordedTargetsAreSkipped) {
  const Store s = sweep_store(5, 10, 30, 15, {1, 3});
  SweepOptions opt;
  opt.k_precursors = 2;
  const auto sweep = enumerate_partitions(0, opt, s);
  EXPECT_EQ(sweep.items.size(), 6u);
  EXPECT_EQ(sweep.skipped_targets, (std::vector<int>{1, 3}));
  EXPECT_FALSE(sweep.warnings.empty());
}

TEST(Partition, IdenticalCoresGiveFullFraction) {
  // Every neuron shares one core, so every pair has fraction 1 and no left-tokens.
  Rng rng(16);
  std::vector<TokenId> core{5, 9, 1, 7, 3, 8};
  std::vector<NeuronActivationRecord> records;
  for (int layer = 0; layer < 2; ++layer) {
    for (int n = 0; n < 3; ++n) records.push_back(ranked_record({layer, n}, core));
  }
  const Store s("same", 4, {random_layer(0, 4, 3, rng), random_layer(1, 4, 3, rng)}, std::move(records), {}, {});
  SweepOptions opt;
  opt.k_precursors = 3;
  const auto sweep = enumerate_partitions(0, opt, s);
  ASSERT_EQ(sweep.items.size(), 9u);
  for (const auto& item : sweep.items) {
    EXPECT_EQ(item.partition.taken_fraction, 1.0);
    EXPECT_TRUE(item.partition.left.empty());
    EXPECT_FALSE(item.flags.min6_both);
    EXPECT_FALSE(item.flags.band_15_85);
  }
}

TEST(Partition, MissingPrecursorRecordIsFlagged) {
  Rng rng(17);
  std::vector<NeuronActivationRecord> records{ranked_record({1, 0}, {1, 2, 3})};
  const Store s("m", 4, {random_layer(0, 4, 2, rng), random_layer(1, 4, 1, rng)}, std::move(records), {}, {});
  SweepOptions opt;
  opt.k_precursors = 2;
  const auto sweep = enumerate_partitions(0, opt, s);
  ASSERT_EQ(sweep.items.size(), 2u);
  for (const auto& item : sweep.items) {
    EXPECT_TRUE(item.precursor_missing);
    EXPECT_EQ(item.partition.core_size(), 0u);
    EXPECT_FALSE(item.flags.band_15_85);
  }
}

TEST(Partition, MissingLayerFails) {
  const Store s = sweep_store(3, 5, 20, 18);
  EXPECT_THROW(enumerate_partitions(1, SweepOptions{}, s), Error);
}
