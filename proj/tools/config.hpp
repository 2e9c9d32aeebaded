#pragma once

// Run configuration for nltm: one JSON document with blocks potential, grid,
// evolution, transfer, scatter, verify, output and an optional seed. Unknown
// keys are errors.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlt/evolution.hpp"
#include "nlt/potential.hpp"

namespace nltm {

/// Validation failure; `field` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct PotentialConfig {
    nlt::Family family = nlt::Family::GaussGauss;
    nlt::FamilyParams params;
    double alpha = 1.0;
    std::optional<double> beta;  ///< derived when absent
    double sigma = 0.0;
};

struct GridConfig {
    double k = 1.0;
    int n = 32;
    nlt::QuadratureRule rule = nlt::QuadratureRule::GaussLegendreTheta;
};

struct TransferConfig {
    double eps = 1e-8;
    std::vector<int> refine;          ///< extra node counts for the refinement table
    std::vector<double> widening;     ///< symmetric half-widths for the widening table
};

struct ScatterConfig {
    std::vector<double> theta0;
    double eps = 1e-8;
};

struct VerifyConfig {
    std::vector<std::string> certificates;
    int samples = 20;       ///< x samples for pointwise certificates
    int tuples = 50;        ///< ordered tuples per order for b-product
    int states = 10;        ///< random initial states for dyson-partial-sums
    double x_min = -6.0;    ///< evolution range for state certificates
    double x_max = 6.0;
    double x_far = 1e3;     ///< outer |x| for envelope and tail-constants samples
};

struct OutputConfig {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
};

struct RunConfig {
    PotentialConfig potential;
    GridConfig grid;
    nlt::EvolutionOptions evolution;
    TransferConfig transfer;
    ScatterConfig scatter;
    VerifyConfig verify;
    OutputConfig output;
    std::uint64_t seed = 0;
    std::string canonical;  ///< normalized JSON text the hash is taken over

    nlt::PotentialModel model(bool transfer_ready) const;
    nlt::GridPtr build_grid() const;
    nlt::GridPtr build_grid(int n) const;
};

/// Certificate tags accepted in verify.certificates.
const std::vector<std::string>& certificate_tags();

RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Checks the constraints a command adds on top of parsing.
void require_transfer_ready(const RunConfig& config);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace nltm
