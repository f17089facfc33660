#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"

namespace tnet {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over a byte stream; a fingerprint for reproducibility checks, not a
// cryptographic digest.
inline std::uint64_t fnv1a64(std::istream& in) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

inline std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot hash missing file: " + path);
  std::uint64_t h = fnv1a64(in);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a:") + buf;
}

// Everything needed to reproduce one CLI run: parameters plus content hashes
// of every input and output file.
struct RunManifest {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::map<std::string, std::string> inputs;   // path -> hash
  std::map<std::string, std::string> outputs;  // path -> hash

  void add_input(const std::string& path) { inputs[path] = hash_file(path); }
  void add_output(const std::string& path) { outputs[path] = hash_file(path); }

  nlohmann::json to_json() const {
    return {{"tool", "tradenet"},
            {"version", kToolVersion},
            {"command", command},
            {"params", params},
            {"inputs", inputs},
            {"outputs", outputs}};
  }
};

}  // namespace tnet
