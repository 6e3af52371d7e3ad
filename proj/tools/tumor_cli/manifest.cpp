#include "tumor_cli/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tumor_cli/config.hpp"

namespace tumor_cli {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

ManifestWriter::ManifestWriter(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir_ + "': " + ec.message());
}

void ManifestWriter::emit(const std::string& name, const std::string& content) {
  const std::filesystem::path path = std::filesystem::path(dir_) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw ConfigError("short write on '" + path.string() + "'");
  files_.emplace_back(name, fnv1a64_hex(content));
}

void ManifestWriter::note(const std::string& text) { notes_.push_back(text); }

void ManifestWriter::write_manifest(const std::string& command, std::uint64_t seed,
                                    const std::string& config_echo) {
  nlohmann::json doc;
  doc["tool"] = "tumor-sde";
  doc["version"] = "0.1.0";
  doc["format"] = 1;
  doc["command"] = command;
  doc["generator"] = "splitmix64";
  doc["seed"] = seed;
  doc["config"] = config_echo;
  auto files = nlohmann::json::array();
  for (const auto& [name, digest] : files_) files.push_back({{"name", name}, {"fnv1a64", digest}});
  doc["files"] = files;
  doc["notes"] = notes_;

  const std::filesystem::path path = std::filesystem::path(dir_) / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << "\n";
}

}  // namespace tumor_cli
