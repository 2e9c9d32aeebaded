#pragma once

// Report assembly. Every file starts with the tool version, the SHA-256 of the
// canonical config and the seed; nothing depends on thread count or paths.

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "nlt/certificate.hpp"
#include "nlt/types.hpp"

namespace nltm {

struct ReportMeta {
    std::string command;
    std::string version;
    std::string config_sha256;
    std::uint64_t seed = 0;
};

nlohmann::json meta_json(const ReportMeta& meta);

/// "# nltm <version> <command> config_sha256=<hash> seed=<seed>" plus newline.
std::string csv_preamble(const ReportMeta& meta);

nlohmann::json certificate_json(const nlt::BoundCertificate& cert);

nlohmann::json complex_array(const nlt::CVector& v);
nlohmann::json real_array(const nlt::RVector& v);

/// Pretty JSON with a trailing newline.
std::string render(const nlohmann::json& doc);

/// Creates `dir` as needed and writes `content` to dir/name.
void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content);

}  // namespace nltm
