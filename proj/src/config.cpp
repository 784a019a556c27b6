#include "tscreen/config.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

std::string hex(const unsigned char* data, unsigned len) {
  static const char* kDigits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xF]);
  }
  return out;
}

std::string utc_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  return hex(digest, len);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

RunManifest RunManifest::start(std::string command, const nlohmann::json& config,
                               const std::vector<std::string>& inputs) {
  RunManifest m;
  m.command = std::move(command);
  m.config = config;
  m.config_digest = sha256_hex(config.dump() + "\n" + std::string(kToolVersion));
  m.inputs = inputs;
  for (const auto& p : inputs) m.input_digests.push_back(sha256_file(p));
  m.created = utc_timestamp();
  return m;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["created"] = created;
  j["config"] = config;
  j["config_digest"] = config_digest;
  auto& in = j["inputs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) in.push_back({{"path", inputs[i]}, {"sha256", input_digests[i]}});
  j["outputs"] = outputs;
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write manifest '" + path + "'");
  out << to_json().dump(2) << '\n';
}

}  // namespace tscreen
