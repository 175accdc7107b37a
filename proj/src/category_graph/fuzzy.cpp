#include <algorithm>

#include "cliplab/category_graph.hpp"

namespace cliplab {

std::set<TokenId> FuzzyCategory::kernel() const {
  std::set<TokenId> out;
  for (const auto& [id, mu] : membership) {
    if (mu == 1.0) out.insert(id);
  }
  return out;
}

FuzzyCategory fuzzy_category(const NeuronActivationRecord& record,
                             MembershipNormalization normalization) {
  const auto& entries = record.entries();
  // Records are sorted descending.
  const double hi = entries.front().mean_activation;
  const double lo = entries.back().mean_activation;

  FuzzyCategory cat;
  cat.neuron = record.id();
  cat.raw = &record;
  if (normalization == MembershipNormalization::Max) {
    if (!(hi > 0.0)) {
      throw Error(ErrorKind::DegenerateActivations, "max activation is not positive");
    }
    for (const auto& e : entries) {
      cat.membership[e.token_id] = std::clamp(e.mean_activation / hi, 0.0, 1.0);
    }
  } else {
    if (!(hi > lo)) throw Error(ErrorKind::DegenerateActivations, "all activations are equal");
    for (const auto& e : entries) {
      cat.membership[e.token_id] = std::clamp((e.mean_activation - lo) / (hi - lo), 0.0, 1.0);
    }
  }

  for (const auto& [id, mu] : cat.membership) {
    cat.height = std::max(cat.height, mu);
    if (mu > 0.0) cat.support.insert(id);
  }
  return cat;
}

std::set<TokenId> alpha_cut(const FuzzyCategory& category, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  }
  std::set<TokenId> out;
  for (const auto& [id, mu] : category.membership) {
    if (mu >= alpha) out.insert(id);
  }
  return out;
}

}  // namespace cliplab
