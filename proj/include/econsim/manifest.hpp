#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace econsim {

// 64-bit FNV-1a over raw bytes; used for config and output digests.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);
std::string digest_hex(std::uint64_t digest);

struct ManifestOutput {
  std::string path;  // relative to the output directory
  std::uint64_t bytes = 0;
  std::string digest;
};

// Reproducibility record written (atomically, last) next to a run's
// outputs. The wall-clock field is the only value that varies between
// identical runs.
struct RunManifest {
  std::string subcommand;
  std::string tool_version;
  std::string config_path;
  std::string config_digest;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  std::string status = "ok";  // or "failed"
  std::string error;
  std::map<std::string, double> solver_stats;
  std::vector<ManifestOutput> outputs;
};

// Serializes to JSON and writes via a temp file + rename.
void write_manifest(const RunManifest& manifest, const std::string& directory);

// Stages output files as "<name>.tmp" inside a directory; commit() renames
// everything into place, abort() removes the temporaries. Guarantees the
// directory never holds truncated data files.
class OutputStager {
 public:
  explicit OutputStager(std::string directory);
  ~OutputStager();

  // Returns the temporary path to write; records the final name.
  std::string stage(const std::string& name);
  std::vector<ManifestOutput> commit();
  void abort();

  const std::string& directory() const { return dir_; }

 private:
  std::string dir_;
  std::vector<std::string> names_;
  bool done_ = false;
};

}  // namespace econsim
