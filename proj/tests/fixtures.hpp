#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cliplab/model_store.hpp"
#include "cliplab/rng.hpp"

namespace cliplab::testing {

inline TensorBlob blob(std::string name, std::vector<std::uint64_t> shape, std::vector<float> data) {
  return TensorBlob{std::move(name), std::move(shape), std::move(data)};
}

/// c_fc [d_model, hidden], c_proj [hidden, d_model], gain [d_model].
inline LayerTensors make_layer(int index, std::size_t d_model, std::size_t hidden, std::vector<float> c_fc,
                               std::vector<float> c_proj, std::vector<float> gain) {
  const std::string p = "h" + std::to_string(index);
  return LayerTensors{index, blob(p + ".mlp.c_fc.w", {d_model, hidden}, std::move(c_fc)),
                      blob(p + ".mlp.c_proj.w", {hidden, d_model}, std::move(c_proj)),
                      blob(p + ".ln_2.g", {d_model}, std::move(gain))};
}

inline LayerTensors random_layer(int index, std::size_t d_model, std::size_t hidden, Rng& rng) {
  std::vector<float> fc(d_model * hidden), proj(hidden * d_model), gain(d_model);
  for (auto& v : fc) v = static_cast<float>(rng.normal());
  for (auto& v : proj) v = static_cast<float>(rng.normal());
  for (auto& v : gain) v = static_cast<float>(0.5 + rng.uniform());
  return make_layer(index, d_model, hidden, std::move(fc), std::move(proj), std::move(gain));
}

/// Record with activations strictly decreasing in list order.
inline NeuronActivationRecord ranked_record(NeuronId id, const std::vector<TokenId>& tokens) {
  std::vector<ActivationEntry> entries;
  double act = 10.0;
  for (TokenId t : tokens) {
    entries.push_back({t, "t" + std::to_string(t), act});
    act -= 0.01;
  }
  return NeuronActivationRecord(id, std::move(entries));
}

inline std::map<TokenId, std::string> vocabulary(std::size_t n) {
  std::map<TokenId, std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.emplace(static_cast<TokenId>(i), "t" + std::to_string(i));
  return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cliplab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cliplab::testing
