#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cece/report.hpp"

namespace cece {

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);

struct ManifestInput {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::vector<std::string> arguments;  // argv[1..]
  std::vector<ManifestInput> inputs;
  std::optional<std::uint64_t> seed;
  std::string version;
  std::string started_at;  // UTC, ISO 8601
  std::string finished_at;
  std::vector<std::string> outputs;  // file names relative to the output directory

  // Digest of everything but timestamps, outputs and the output directory:
  // equal ids mean equal results.
  std::string run_id() const;
};

inline constexpr std::string_view kManifestName = "manifest.json";

std::string utc_timestamp();
Json to_json(const RunManifest& manifest);

}  // namespace cece
