#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cliplab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace cliplab;
using pipeline::Json;

namespace {

std::vector<std::string> split_ids(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  std::string id;
  while (std::getline(in, id, ',')) {
    if (!id.empty()) out.push_back(id);
  }
  return out;
}

std::pair<int, int> parse_layer_pair(const std::string& s) {
  int lo = 0, hi = 0;
  char sep = 0;
  std::istringstream in(s);
  if (!(in >> lo >> sep >> hi) || sep != ':' || !in.eof()) {
    throw Error(ErrorKind::ConfigError, "layer pair must look like 0:1");
  }
  if (hi != lo + 1) throw Error(ErrorKind::ConfigError, "layer pair must be consecutive layers");
  return {lo, hi};
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
}

int cmd_ingest(const fs::path& manifest) {
  const Store store = load_store(manifest);
  std::printf("model %s, d_model %llu\n", store.model_name().c_str(),
              static_cast<unsigned long long>(store.d_model()));
  for (const auto& l : store.layers()) {
    std::printf("layer %d: d_hidden %zu, %zu neuron(s) with records\n", l.layer_index, l.d_hidden(),
                store.neurons_with_records(l.layer_index).size());
  }
  std::printf("records %zu\n", store.records().size());
  for (const auto& e : store.embeddings()) {
    std::printf("embedding %s: %zu x %zu\n", e.name().c_str(), e.vocab_size(), e.dim());
  }
  std::printf("vocabulary %zu\n", store.vocabulary().size());
  return pipeline::kExitOk;
}

int cmd_connections(const fs::path& manifest, const std::string& layer_pair, std::size_t k,
                    const std::string& ordering, std::optional<int> target) {
  const auto [lo, hi] = parse_layer_pair(layer_pair);
  ConnectionOrdering order = ConnectionOrdering::Signed;
  if (ordering == "absolute") {
    order = ConnectionOrdering::Absolute;
  } else if (ordering != "signed") {
    throw Error(ErrorKind::ConfigError, "ordering must be signed or absolute");
  }
  const Store store = load_store(manifest);
  std::vector<int> targets;
  if (target) {
    targets.push_back(*target);
  } else {
    for (std::size_t n = 0; n < store.layer(hi).d_hidden(); ++n) targets.push_back(static_cast<int>(n));
  }
  std::printf("target_layer,target,rank,precursor_layer,precursor,weight\n");
  for (int t : targets) {
    const auto set = top_k_precursors({hi, t}, k, order, store);
    for (std::size_t r = 0; r < set.connections.size(); ++r) {
      const auto& c = set.connections[r];
      std::printf("%d,%d,%zu,%d,%d,%.17g\n", hi, t, r, lo, c.precursor.neuron, c.weight);
    }
  }
  return pipeline::kExitOk;
}

int cmd_run(const fs::path& config_path, const std::string& analyses, const fs::path& out,
            std::optional<std::size_t> threads) {
  auto config = pipeline::load_config(config_path);
  if (!out.empty()) config.output_dir = out;
  if (threads) config.threads = *threads;
  if (config.output_dir.empty()) throw Error(ErrorKind::ConfigError, "output_dir: required (or pass --out)");
  const auto ids = split_ids(analyses);
  if (ids.empty()) throw Error(ErrorKind::ConfigError, "no analysis requested");
  for (const auto& id : ids) {
    if (id != "A" && id != "B" && id != "C" && id != "D" && id != "E") {
      throw Error(ErrorKind::ConfigError, "unknown analysis \"" + id + "\"");
    }
  }

  const auto ctx = pipeline::prepare_run(config);
  const auto report = pipeline::run_all(ctx, ids);
  pipeline::write_report_bundle(report, config.output_dir);
  std::printf("report written to %s\n", config.output_dir.string().c_str());

  int code = pipeline::kExitOk;
  for (const auto& a : report.analyses) {
    if (a.error) {
      std::fprintf(stderr, "analysis %s failed: %s\n", a.id.c_str(), a.message.c_str());
      code = pipeline::kExitAnalysis;
    }
  }
  return code;
}

int cmd_synth(const fs::path& spec_path, const fs::path& out) {
  const auto spec = pipeline::synth_spec_from_json(read_json(spec_path));
  const auto manifest = pipeline::synth_fixture(spec, out);
  std::printf("%s\n", manifest.string().c_str());
  return pipeline::kExitOk;
}

int cmd_report(const fs::path& dir) {
  const auto check = pipeline::verify_manifest(dir);
  std::ifstream in(dir / "report.json");
  if (!in) throw Error(ErrorKind::IoError, "cannot read report.json in " + dir.string());
  Json report;
  try {
    report = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("report.json: ") + e.what());
  }
  std::printf("%zu file(s) listed, %zu mismatched\n", check.files, check.mismatched.size());
  for (const auto& m : check.mismatched) std::printf("  mismatch: %s\n", m.c_str());
  std::printf("counts: %s\n", report.at("counts").dump().c_str());
  for (const auto& a : report.at("analyses")) {
    std::printf("analysis %s: %s", a.at("id").get<std::string>().c_str(), a.at("status").get<std::string>().c_str());
    if (a.contains("summary")) std::printf(" %s", a.at("summary").dump().c_str());
    if (a.contains("error")) std::printf(" %s", a.at("error").dump().c_str());
    std::printf("\n");
  }
  return check.mismatched.empty() ? pipeline::kExitOk : pipeline::kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("cliplab"));

  CLI::App app{"Neuron category analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* ingest = app.add_subcommand("ingest", "Validate a store and print its shape");
  fs::path ingest_manifest;
  ingest->add_option("manifest", ingest_manifest)->required();

  auto* conn = app.add_subcommand("connections", "Print top-k precursors per target as CSV");
  fs::path conn_manifest;
  std::string layer_pair = "0:1";
  std::size_t k = 10;
  std::string ordering = "signed";
  std::optional<int> target;
  conn->add_option("--manifest", conn_manifest)->required();
  conn->add_option("--layer-pair", layer_pair);
  conn->add_option("--k", k);
  conn->add_option("--ordering", ordering);
  conn->add_option("--target", target);

  auto* run = app.add_subcommand("run", "Run analyses and write a report bundle");
  fs::path config_path;
  std::string analyses = "A,B,C,D,E";
  fs::path run_out;
  std::optional<std::size_t> threads;
  run->add_option("--config", config_path)->required();
  run->add_option("--analyses", analyses);
  run->add_option("--out", run_out, "overrides output_dir");
  run->add_option("--threads", threads);

  auto* synth = app.add_subcommand("synth", "Write a synthetic store");
  fs::path spec_path, synth_out;
  synth->add_option("--spec", spec_path)->required();
  synth->add_option("--out", synth_out)->required();

  auto* report = app.add_subcommand("report", "Verify a report bundle and summarize it");
  fs::path report_in;
  report->add_option("--in", report_in)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pipeline::kExitOk : pipeline::kExitConfig;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*ingest) return cmd_ingest(ingest_manifest);
    if (*conn) return cmd_connections(conn_manifest, layer_pair, k, ordering, target);
    if (*run) return cmd_run(config_path, analyses, run_out, threads);
    if (*synth) return cmd_synth(spec_path, synth_out);
    if (*report) return cmd_report(report_in);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(to_string(e.kind())).c_str(), e.what());
    return pipeline::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return pipeline::kExitData;
  }
  return pipeline::kExitConfig;
}
