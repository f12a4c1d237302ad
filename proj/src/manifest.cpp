#include "econsim/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "econsim/errors.hpp"

namespace econsim {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for digest");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  return fnv1a64(data.data(), data.size());
}

std::string digest_hex(std::uint64_t digest) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

void write_manifest(const RunManifest& m, const std::string& directory) {
  nlohmann::json j;
  j["subcommand"] = m.subcommand;
  j["tool_version"] = m.tool_version;
  j["config_path"] = m.config_path;
  j["config_digest"] = m.config_digest;
  j["seed"] = m.seed;
  j["wall_ms"] = m.wall_ms;
  j["status"] = m.status;
  if (!m.error.empty()) j["error"] = m.error;
  j["solver_stats"] = m.solver_stats;
  j["outputs"] = nlohmann::json::array();
  for (const auto& out : m.outputs) {
    j["outputs"].push_back({{"path", out.path}, {"bytes", out.bytes}, {"digest", out.digest}});
  }
  fs::create_directories(directory);
  const std::string tmp = directory + "/manifest.json.tmp";
  const std::string final_path = directory + "/manifest.json";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write manifest to '" + directory + "'");
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, final_path);
}

OutputStager::OutputStager(std::string directory) : dir_(std::move(directory)) {
  fs::create_directories(dir_);
}

OutputStager::~OutputStager() {
  if (!done_) {
    try {
      abort();
    } catch (...) {
    }
  }
}

std::string OutputStager::stage(const std::string& name) {
  names_.push_back(name);
  return dir_ + "/" + name + ".tmp";
}

std::vector<ManifestOutput> OutputStager::commit() {
  std::vector<ManifestOutput> outputs;
  for (const std::string& name : names_) {
    const std::string tmp = dir_ + "/" + name + ".tmp";
    const std::string final_path = dir_ + "/" + name;
    fs::rename(tmp, final_path);
    ManifestOutput out;
    out.path = name;
    out.bytes = static_cast<std::uint64_t>(fs::file_size(final_path));
    out.digest = digest_hex(fnv1a64_file(final_path));
    outputs.push_back(std::move(out));
  }
  done_ = true;
  return outputs;
}

void OutputStager::abort() {
  for (const std::string& name : names_) {
    std::error_code ec;
    fs::remove(dir_ + "/" + name + ".tmp", ec);
  }
  done_ = true;
}

}  // namespace econsim
