#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "cliplab/pipeline.hpp"

namespace cliplab::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "MANIFEST.sha256";

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }
  return v.dump();
}

std::string to_csv(const Table& t) {
  std::ostringstream o;
  for (std::size_t i = 0; i < t.columns.size(); ++i) o << (i ? "," : "") << csv_cell(t.columns[i]);
  o << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) o << (i ? "," : "") << csv_cell(row[i]);
    o << '\n';
  }
  return o.str();
}

Json table_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) rows.push_back(Json(r));
  return Json{{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}};
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> list_files(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel != kManifestName) out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

RunReport run_all(const RunContext& ctx, const std::vector<std::string>& ids) {
  static const std::set<std::string> known{"A", "B", "C", "D", "E"};
  for (const auto& id : ids) {
    if (!known.contains(id)) throw Error(ErrorKind::ConfigError, "unknown analysis \"" + id + "\"");
  }
  RunReport report;
  report.config = ctx.config;
  report.counts = counts_ledger(ctx);
  for (const auto& id : ids) {
    AnalysisOutcome outcome;
    outcome.id = id;
    try {
      outcome.result = run_analysis(ctx, id);
      spdlog::info("analysis {}: done", id);
    } catch (const Error& e) {
      outcome.error = e.kind();
      outcome.message = e.what();
      spdlog::error("analysis {}: {} ({})", id, e.what(), to_string(e.kind()));
    }
    report.analyses.push_back(std::move(outcome));
  }
  return report;
}

Json counts_ledger(const RunContext& ctx) {
  const int upper = ctx.config.layer + 1;
  std::size_t missing = 0, min6 = 0, band = 0;
  for (const auto& item : ctx.sweep.items) {
    if (item.precursor_missing) {
      ++missing;
      continue;
    }
    min6 += item.flags.min6_both ? 1 : 0;
    band += item.flags.band_15_85 ? 1 : 0;
  }
  const std::size_t hidden = ctx.store.has_layer(upper) ? ctx.store.layer(upper).d_hidden() : 0;
  const std::size_t lower_hidden =
      ctx.store.has_layer(ctx.config.layer) ? ctx.store.layer(ctx.config.layer).d_hidden() : 0;
  const std::size_t with_records = ctx.store.neurons_with_records(upper).size();
  return Json{{"layer_pair", {ctx.config.layer, upper}},
              {"n_target_neurons", hidden},
              {"n_targets_with_records", with_records},
              {"n_targets_skipped", ctx.sweep.skipped_targets.size()},
              {"precursors_per_target", std::min(ctx.config.k_precursors, lower_hidden)},
              {"n_sweep", ctx.sweep.items.size()},
              {"n_precursor_missing", missing},
              {"n_min_cluster_both", min6},
              {"n_band", band},
              {"n_embeddings", ctx.embeddings.size()},
              {"embeddings", ctx.embeddings}};
}

Json report_json(const RunReport& report) {
  Json config = config_to_json(report.config);
  config.erase("output_dir");
  config.erase("threads");

  Json analyses = Json::array();
  for (const auto& a : report.analyses) {
    Json j{{"id", a.id}, {"status", a.result ? "ok" : "failed"}};
    if (a.error) j["error"] = {{"kind", std::string(to_string(*a.error))}, {"message", a.message}};
    if (a.result) {
      const auto& r = *a.result;
      j["title"] = r.title;
      j["summary"] = r.summary;
      Json tables = Json::array();
      for (const auto& t : r.tables) tables.push_back(table_json(t));
      j["tables"] = std::move(tables);
      Json figures = Json::array();
      for (const auto& f : r.figures) figures.push_back("figures/" + f.name + ".svg");
      j["figures"] = std::move(figures);
      Json failures = Json::array();
      for (const auto& f : r.failures) {
        failures.push_back({{"pair", f.pair},
                            {"embedding", f.embedding},
                            {"kind", std::string(to_string(f.kind))},
                            {"message", f.message}});
      }
      j["failures"] = std::move(failures);
    }
    analyses.push_back(std::move(j));
  }

  return Json{{"software", {{"name", "cliplab"}, {"version", std::string(kVersion)}}},
              {"config", std::move(config)},
              {"seeds",
               {{"master_seed", report.config.master_seed},
                {"lilliefors_seed", stats::kLillieforsSeed},
                {"pair_seed_rule", "derive_seed(master_seed, target, precursor)"}}},
              {"counts", report.counts},
              {"analyses", std::move(analyses)}};
}

void write_report_bundle(const RunReport& report, const fs::path& dir) {
  if (report.analyses.empty()) throw Error(ErrorKind::InvalidArgument, "no analysis to report");
  if (dir.empty()) throw Error(ErrorKind::IoError, "empty output directory");

  std::set<std::string> names;
  for (const auto& a : report.analyses) {
    if (!a.result) continue;
    for (const auto& t : a.result->tables) {
      if (!names.insert("t/" + t.name).second) throw Error(ErrorKind::InvalidArgument, "duplicate table " + t.name);
    }
    for (const auto& f : a.result->figures) {
      if (!names.insert("f/" + f.name).second) throw Error(ErrorKind::InvalidArgument, "duplicate figure " + f.name);
    }
  }

  fs::path target = fs::absolute(dir).lexically_normal();
  if (!target.has_filename()) target = target.parent_path();
  const fs::path staging = target.parent_path() / (target.filename().string() + ".partial");
  try {
    fs::create_directories(target.parent_path());
    fs::remove_all(staging);
    fs::create_directories(staging / "tables");
    fs::create_directories(staging / "figures");

    write_file(staging / "report.json", report_json(report).dump(2) + "\n");
    for (const auto& a : report.analyses) {
      if (!a.result) continue;
      for (const auto& t : a.result->tables) write_file(staging / "tables" / (t.name + ".csv"), to_csv(t));
      for (const auto& f : a.result->figures) write_file(staging / "figures" / (f.name + ".svg"), f.svg);
    }
    std::string manifest;
    for (const auto& rel : list_files(staging)) manifest += sha256_hex(read_file(staging / rel)) + "  " + rel + "\n";
    write_file(staging / kManifestName, manifest);

    fs::remove_all(target);
    fs::rename(staging, target);
  } catch (const fs::filesystem_error& e) {
    std::error_code ignored;
    fs::remove_all(staging, ignored);
    throw Error(ErrorKind::IoError, e.what());
  } catch (...) {
    std::error_code ignored;
    fs::remove_all(staging, ignored);
    throw;
  }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

ManifestCheck verify_manifest(const fs::path& dir) {
  std::istringstream in(read_file(dir / kManifestName));
  ManifestCheck check;
  std::set<std::string> listed;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto sep = line.find("  ");
    if (sep == std::string::npos) throw Error(ErrorKind::ParseError, "malformed manifest line: " + line);
    const std::string hash = line.substr(0, sep);
    const std::string rel = line.substr(sep + 2);
    listed.insert(rel);
    ++check.files;
    std::error_code ec;
    if (!fs::is_regular_file(dir / rel, ec) || sha256_hex(read_file(dir / rel)) != hash) {
      check.mismatched.push_back(rel);
    }
  }
  for (const auto& rel : list_files(dir)) {
    if (!listed.contains(rel)) check.mismatched.push_back(rel);
  }
  return check;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::SpecTooSmall:
    case ErrorKind::LayerOrderError:
      return kExitConfig;
    case ErrorKind::MissingFile:
    case ErrorKind::ParseError:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::NonFiniteValue:
    case ErrorKind::UnsortedActivations:
    case ErrorKind::InvalidRecord:
    case ErrorKind::UnsupportedFormat:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::MissingEmbedding:
    case ErrorKind::IoError:
      return kExitData;
    default:
      return kExitAnalysis;
  }
}

}  // namespace cliplab::pipeline
