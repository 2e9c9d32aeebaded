#pragma once

#include <filesystem>
#include <string>

#include "config.hpp"
#include "report.hpp"

namespace nltm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  ///< a certificate or internal check failed
inline constexpr int kExitUsage = 2;   ///< invalid flags or config

struct RunContext {
    RunConfig config;
    std::filesystem::path out_dir;
    ReportMeta meta;
};

/// Output directory precedence: --out, then NLTM_OUT_DIR, then output.directory.
std::filesystem::path resolve_out_dir(const std::string& flag, const RunConfig& config);

RunContext make_context(RunConfig config, const std::string& command, const std::string& out_flag);

/// transfer.json plus refinement.csv and widening.csv when requested.
int cmd_transfer(const RunContext& ctx);

/// scatter.json and one cross-section CSV per incidence angle.
int cmd_scatter(const RunContext& ctx);

/// verify.json; returns kExitOk iff every certificate passes.
int cmd_verify(const RunContext& ctx);

std::string tool_version();

}  // namespace nltm
