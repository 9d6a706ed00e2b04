#include "manifest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

namespace vsq::cli {

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    std::string hex;
    for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", digest[k]);
    return hex;
}

nlohmann::json versions() {
    return {
        {"vsq", VSQ_VERSION},
        {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
        {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                      NLOHMANN_JSON_VERSION_PATCH)},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"compiler", __VERSION__},
    };
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                             const std::vector<std::string>& artifacts) {
    return {
        {"command", command},
        {"config_sha256", sha256_hex(config.dump())},
        {"seed", seed},
        {"versions", versions()},
        {"artifacts", artifacts},
        {"config", config},
    };
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace vsq::cli
