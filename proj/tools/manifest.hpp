#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace vsq::cli {

std::string sha256_hex(const std::string& data);

// Library and toolchain versions baked in at compile time.
nlohmann::json versions();

// Run manifest keyed by the SHA-256 of the effective config. Nothing time- or host-dependent
// is recorded, so reruns are byte-identical.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                             const std::vector<std::string>& artifacts);

// Pretty-printed JSON followed by a newline.
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace vsq::cli
