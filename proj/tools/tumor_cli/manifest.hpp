#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tumor_cli {

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

// Collects every emitted file and closes the run by writing manifest.json
// last.  The manifest lists each file with its content digest, echoes the
// resolved config, and carries the run's warnings.
class ManifestWriter {
 public:
  explicit ManifestWriter(std::string dir);

  // Writes dir/name and records its digest.
  void emit(const std::string& name, const std::string& content);
  void note(const std::string& text);

  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

  void write_manifest(const std::string& command, std::uint64_t seed,
                      const std::string& config_echo);

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, digest
  std::vector<std::string> notes_;
};

}  // namespace tumor_cli
