#include <algorithm>
#include <cmath>
#include <numeric>

#include "cliplab/category_graph.hpp"

namespace cliplab {
namespace {

// Single-pair queries and the top-k sweeps share this kernel so they agree
// to the last bit.
double contract(const LayerTensors& from, std::size_t n1, const LayerTensors& to, std::size_t n2) {
  const std::size_t d_model = to.d_model();
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t m = 0; m < d_model; ++m) {
    const double term = static_cast<double>(from.c_proj.at(n1, m)) *
                        static_cast<double>(to.ln2_gain.data[m]) *
                        static_cast<double>(to.c_fc.at(m, n2));
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

void check_pair(NeuronId precursor, NeuronId target, const Store& store) {
  if (precursor.layer >= target.layer) {
    throw Error(ErrorKind::LayerOrderError, "precursor layer " + std::to_string(precursor.layer) +
                                                " must be below target layer " +
                                                std::to_string(target.layer));
  }
  const auto& from = store.layer(precursor.layer);
  const auto& to = store.layer(target.layer);
  if (precursor.neuron < 0 || static_cast<std::size_t>(precursor.neuron) >= from.d_hidden()) {
    throw Error(ErrorKind::IndexOutOfRange, "precursor neuron " + std::to_string(precursor.neuron));
  }
  if (target.neuron < 0 || static_cast<std::size_t>(target.neuron) >= to.d_hidden()) {
    throw Error(ErrorKind::IndexOutOfRange, "target neuron " + std::to_string(target.neuron));
  }
  if (from.d_model() != to.d_model()) {
    throw Error(ErrorKind::ShapeMismatch, "layers disagree on d_model");
  }
}

double ranking_key(double w, ConnectionOrdering ordering) {
  return ordering == ConnectionOrdering::Absolute ? std::fabs(w) : w;
}

std::vector<ConnectionStrength> select_top(std::vector<ConnectionStrength> all, std::size_t k,
                                           ConnectionOrdering ordering, bool by_precursor) {
  auto index = [by_precursor](const ConnectionStrength& c) {
    return by_precursor ? c.precursor.neuron : c.target.neuron;
  };
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [&](const ConnectionStrength& a, const ConnectionStrength& b) {
                      const double ka = ranking_key(a.weight, ordering);
                      const double kb = ranking_key(b.weight, ordering);
                      if (ka != kb) return ka > kb;
                      return index(a) < index(b);
                    });
  all.resize(n);
  return all;
}

}  // namespace

double connection_strength(NeuronId precursor, NeuronId target, const Store& store) {
  check_pair(precursor, target, store);
  return contract(store.layer(precursor.layer), static_cast<std::size_t>(precursor.neuron),
                  store.layer(target.layer), static_cast<std::size_t>(target.neuron));
}

PrecursorSet top_k_precursors(NeuronId target, std::size_t k, ConnectionOrdering ordering,
                              const Store& store) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  const int l1 = target.layer - 1;
  check_pair({l1, 0}, target, store);
  const auto& from = store.layer(l1);
  const auto& to = store.layer(target.layer);

  std::vector<ConnectionStrength> all;
  all.reserve(from.d_hidden());
  for (std::size_t n1 = 0; n1 < from.d_hidden(); ++n1) {
    all.push_back({{l1, static_cast<int>(n1)}, target,
                   contract(from, n1, to, static_cast<std::size_t>(target.neuron))});
  }
  return {target, select_top(std::move(all), k, ordering, true)};
}

PrecursorSet top_k_targets(NeuronId precursor, std::size_t k, ConnectionOrdering ordering,
                           const Store& store) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  const int l2 = precursor.layer + 1;
  check_pair(precursor, {l2, 0}, store);
  const auto& from = store.layer(precursor.layer);
  const auto& to = store.layer(l2);

  std::vector<ConnectionStrength> all;
  all.reserve(to.d_hidden());
  for (std::size_t n2 = 0; n2 < to.d_hidden(); ++n2) {
    all.push_back({precursor, {l2, static_cast<int>(n2)},
                   contract(from, static_cast<std::size_t>(precursor.neuron), to, n2)});
  }
  return {precursor, select_top(std::move(all), k, ordering, false)};
}

}  // namespace cliplab
