#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "cliplab/model_store.hpp"

namespace cliplab {

// ---------------------------------------------------------------------------
// Fuzzy-set view of a neuron's category

enum class MembershipNormalization { Max, MinMax };

struct FuzzyCategory {
  NeuronId neuron;
  std::map<TokenId, double> membership;  // mu in [0, 1]
  double height = 0.0;
  std::set<TokenId> support;  // tokens with mu > 0
  const NeuronActivationRecord* raw = nullptr;

  /// Tokens with mu == 1 (the kernel).
  std::set<TokenId> kernel() const;
};

/// Max mode: mu = act / max(act), negative activations clamp to 0.
/// MinMax mode: mu = (act - min) / (max - min).
/// Throws DegenerateActivations when max <= 0 (Max) or all activations are
/// equal (MinMax).
FuzzyCategory fuzzy_category(const NeuronActivationRecord& record,
                             MembershipNormalization normalization = MembershipNormalization::Max);

/// {x | mu(x) >= alpha}. alpha must lie in (0, 1].
std::set<TokenId> alpha_cut(const FuzzyCategory& category, double alpha);

// ---------------------------------------------------------------------------
// Precursor -> target connection graph

struct ConnectionStrength {
  NeuronId precursor;
  NeuronId target;
  double weight = 0.0;
};

enum class ConnectionOrdering { Signed, Absolute };

struct PrecursorSet {
  NeuronId anchor;  // the target (for precursors) or the precursor (for targets)
  std::vector<ConnectionStrength> connections;
};

/// sum_m c_proj[l1][n1, m] * ln2_gain[l2][m] * c_fc[l2][m, n2], accumulated in
/// ascending m with Kahan compensation. Requires l1 < l2.
double connection_strength(NeuronId precursor, NeuronId target, const Store& store);

/// The k neurons of layer l2-1 with the highest key (signed or absolute
/// weight); ties fall back to ascending neuron index.
PrecursorSet top_k_precursors(NeuronId target, std::size_t k, ConnectionOrdering ordering,
                              const Store& store);

/// Mirror of top_k_precursors: the k neurons of layer l1+1 fed most strongly
/// by `precursor`.
PrecursorSet top_k_targets(NeuronId precursor, std::size_t k, ConnectionOrdering ordering,
                           const Store& store);

}  // namespace cliplab
