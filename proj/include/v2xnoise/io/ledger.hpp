#ifndef V2XNOISE_IO_LEDGER_HPP
#define V2XNOISE_IO_LEDGER_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "v2xnoise/errors.hpp"

namespace v2xnoise::io {

using nlohmann::json;

/// One record per (scenario, agent, sensor, frame, noise_kind). Sensor- or
/// agent-scope records (systematic offsets, vibration phases, desync delay)
/// leave `frame` empty. `params` holds every sampled or derived value with
/// units encoded in the key names.
struct LedgerEntry {
  std::string scenario;
  std::string agent;
  std::string sensor;
  std::string frame;
  std::string noise_kind;
  json params;
  // (relative path, sha256) pairs.
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, std::string>> outputs;
};

struct CorruptionLedger {
  std::uint64_t root_seed = 0;
  std::string tool_version;
  json config;  // full RunConfig snapshot; makes the ledger self-contained
  std::vector<LedgerEntry> entries;
};

inline void write_ledger(const CorruptionLedger& ledger,
                         const std::filesystem::path& path) {
  json j;
  j["schema_version"] = 1;
  j["tool_version"] = ledger.tool_version;
  j["root_seed"] = ledger.root_seed;
  j["config"] = ledger.config;
  j["entries"] = json::array();
  for (const LedgerEntry& e : ledger.entries) {
    json je;
    je["scenario"] = e.scenario;
    je["agent"] = e.agent;
    je["sensor"] = e.sensor;
    je["frame"] = e.frame;
    je["noise_kind"] = e.noise_kind;
    je["params"] = e.params;
    auto files = [](const std::vector<std::pair<std::string, std::string>>& v) {
      json out = json::array();
      for (const auto& [file, digest] : v) {
        out.push_back(json{{"file", file}, {"sha256", digest}});
      }
      return out;
    };
    je["inputs"] = files(e.inputs);
    je["outputs"] = files(e.outputs);
    j["entries"].push_back(std::move(je));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

inline CorruptionLedger read_ledger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ledger: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("ledger JSON error in " + path.string() + ": " + e.what(),
                     static_cast<std::size_t>(e.byte));
  }
  CorruptionLedger ledger;
  try {
    if (j.at("schema_version").get<int>() != 1) {
      throw ParseError("unsupported ledger schema_version in " +
                       path.string());
    }
    ledger.tool_version = j.at("tool_version").get<std::string>();
    ledger.root_seed = j.at("root_seed").get<std::uint64_t>();
    ledger.config = j.at("config");
    for (const json& je : j.at("entries")) {
      LedgerEntry e;
      e.scenario = je.at("scenario").get<std::string>();
      e.agent = je.at("agent").get<std::string>();
      e.sensor = je.at("sensor").get<std::string>();
      e.frame = je.at("frame").get<std::string>();
      e.noise_kind = je.at("noise_kind").get<std::string>();
      e.params = je.at("params");
      for (const json& f : je.at("inputs")) {
        e.inputs.emplace_back(f.at("file").get<std::string>(),
                              f.at("sha256").get<std::string>());
      }
      for (const json& f : je.at("outputs")) {
        e.outputs.emplace_back(f.at("file").get<std::string>(),
                               f.at("sha256").get<std::string>());
      }
      ledger.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ParseError("ledger schema error in " + path.string() + ": " +
                     e.what());
  }
  return ledger;
}

}  // namespace v2xnoise::io

#endif  // V2XNOISE_IO_LEDGER_HPP
