#include "cece/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <memory>
#include <system_error>

#include "cece/error.hpp"

namespace cece {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("unreadable-input", "cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return sha256_hex(bytes);
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  auto temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("unwritable-output", "cannot write " + temp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("unwritable-output", "write failed for " + temp.string());
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw InputError("unwritable-output", "cannot rename into " + path.string());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string RunManifest::run_id() const {
  Json key;
  Json args = Json::array();
  // The output directory does not change results.
  for (std::size_t i = 0; i < arguments.size(); ++i) {
    if (arguments[i] == "--out-dir" && i + 1 < arguments.size()) {
      ++i;
      continue;
    }
    if (arguments[i].rfind("--out-dir=", 0) == 0) continue;
    args.push_back(arguments[i]);
  }
  key["arguments"] = std::move(args);
  Json digests = Json::array();
  for (const auto& input : inputs) digests.push_back(input.sha256);
  key["inputs"] = std::move(digests);
  key["seed"] = seed ? Json(*seed) : Json(nullptr);
  key["version"] = version;
  return sha256_hex(key.dump()).substr(0, 16);
}

Json to_json(const RunManifest& m) {
  Json j;
  j["run_id"] = m.run_id();
  j["version"] = m.version;
  j["command_line"] = m.arguments;
  Json inputs = Json::array();
  for (const auto& input : m.inputs) inputs.push_back({{"path", input.path}, {"sha256", input.sha256}});
  j["inputs"] = std::move(inputs);
  j["seed"] = m.seed ? Json(*m.seed) : Json(nullptr);
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["outputs"] = m.outputs;
  return j;
}

}  // namespace cece
