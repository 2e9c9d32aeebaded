#include "report.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nltm {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json meta_json(const ReportMeta& meta) {
    return json{{"tool", "nltm"},
                {"version", meta.version},
                {"command", meta.command},
                {"config_sha256", meta.config_sha256},
                {"seed", meta.seed}};
}

std::string csv_preamble(const ReportMeta& meta) {
    return "# nltm " + meta.version + " " + meta.command + " config_sha256=" + meta.config_sha256 +
           " seed=" + std::to_string(meta.seed) + "\n";
}

json certificate_json(const nlt::BoundCertificate& cert) {
    json lhs = json::array();
    json rhs = json::array();
    for (double v : cert.lhs) lhs.push_back(finite_or_null(v));
    for (double v : cert.rhs) rhs.push_back(finite_or_null(v));
    return json{{"name", cert.name},
                {"provenance", cert.provenance},
                {"samples", cert.inputs},
                {"lhs", std::move(lhs)},
                {"rhs", std::move(rhs)},
                {"margin", finite_or_null(cert.margin)},
                {"failures", cert.failures()},
                {"pass", cert.pass}};
}

json complex_array(const nlt::CVector& v) {
    json out = json::array();
    for (const nlt::Complex& z : v) out.push_back(json::array({z.real(), z.imag()}));
    return out;
}

json real_array(const nlt::RVector& v) {
    json out = json::array();
    for (double x : v) out.push_back(x);
    return out;
}

std::string render(const json& doc) { return doc.dump(2) + "\n"; }

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace nltm
