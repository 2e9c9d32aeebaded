#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"

using namespace nltm;
namespace fs = std::filesystem;

namespace {

const char* kGaussConfig = R"({
  "potential": {"family": "gauss-gauss", "v0": 1.0, "alpha": 1.0, "sigma": 12},
  "grid": {"k": 1.0, "n": 12},
  "evolution": {"scheme": "product", "tol": 1e-9},
  "transfer": {"eps": 1e-6},
  "scatter": {"theta0": [0.3, 3.0], "eps": 1e-6},
  "verify": {"certificates": ["nilpotency", "b-product"], "samples": 5, "tuples": 4, "states": 2},
  "seed": 7
})";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("nltm_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string expect_config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    ADD_FAILURE() << "no ConfigError for " << text;
    return {};
}

RunContext context(const std::string& text, const std::string& command, const fs::path& out) {
    return make_context(parse_config_text(text), command, out.string());
}

}  // namespace

TEST(Config, ParsesFullDocument) {
    const RunConfig c = parse_config_text(kGaussConfig);
    EXPECT_EQ(c.potential.family, nlt::Family::GaussGauss);
    EXPECT_EQ(c.potential.sigma, 12.0);
    EXPECT_FALSE(c.potential.beta.has_value());
    EXPECT_EQ(c.grid.n, 12);
    EXPECT_EQ(c.evolution.tol, 1e-9);
    EXPECT_EQ(c.scatter.theta0.size(), 2u);
    EXPECT_EQ(c.verify.certificates.size(), 2u);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_GT(c.model(true).beta(), 0.0);
}

TEST(Config, FieldLevelErrors) {
    EXPECT_EQ(expect_config_error(R"({"potential": {"family": "gauss-gauss"}})"), "potential.sigma");
    EXPECT_EQ(expect_config_error(R"({"potential": {"family": "gauss-gauss", "sigma": 12, "colour": 1}})"),
              "potential.colour");
    EXPECT_EQ(expect_config_error(R"({"potential": {"family": "nope", "sigma": 12}})"), "potential.family");
    EXPECT_EQ(expect_config_error(R"({"potential": {"family": "gauss-gauss", "sigma": 12}, "extra": {}})"), "extra");
    EXPECT_EQ(expect_config_error(
                  R"({"potential": {"family": "gauss-gauss", "sigma": 12}, "evolution": {"tol": 0}})"),
              "evolution.tol");
    EXPECT_EQ(expect_config_error(
                  R"({"potential": {"family": "gauss-gauss", "sigma": 12}, "scatter": {"eps": -1}})"),
              "scatter.eps");
    EXPECT_EQ(expect_config_error(
                  R"({"potential": {"family": "gauss-gauss", "sigma": 12}, "grid": {"n": 1}})"),
              "grid.n");
    EXPECT_EQ(expect_config_error(
                  R"({"potential": {"family": "gauss-gauss", "sigma": 12}, "verify": {"certificates": ["bogus"]}})"),
              "verify.certificates[0]");
    EXPECT_EQ(expect_config_error("{not json"), "<document>");
    EXPECT_EQ(expect_config_error("{}"), "potential");
}

TEST(Config, TransferRequiresSigmaAboveThree) {
    const auto c = parse_config_text(R"({"potential": {"family": "gauss-gauss", "sigma": 3}})");
    try {
        require_transfer_ready(c);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "potential.sigma");
    }
    const fs::path out = scratch("sigma3");
    EXPECT_THROW(cmd_transfer(make_context(c, "transfer", out.string())), ConfigError);
}

TEST(Config, Sha256KnownVectorAndCanonicalHash) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // Whitespace and key order do not change the canonical text.
    const auto a = parse_config_text(R"({"seed": 1, "potential": {"sigma": 12, "family": "gauss-gauss"}})");
    const auto b = parse_config_text("{\n \"potential\": {\"family\":\"gauss-gauss\",\"sigma\":12},\"seed\":1}");
    EXPECT_EQ(sha256_hex(a.canonical), sha256_hex(b.canonical));
}

TEST(Cli, OutputDirectoryPrecedence) {
    const auto c = parse_config_text(R"({"potential": {"family": "gauss-gauss", "sigma": 12},
                                         "output": {"directory": "from-config"}})");
    ::unsetenv("NLTM_OUT_DIR");
    EXPECT_EQ(resolve_out_dir("", c), fs::path("from-config"));
    ::setenv("NLTM_OUT_DIR", "from-env", 1);
    EXPECT_EQ(resolve_out_dir("", c), fs::path("from-env"));
    EXPECT_EQ(resolve_out_dir("from-flag", c), fs::path("from-flag"));
    ::unsetenv("NLTM_OUT_DIR");
}

TEST(Cli, TransferFreeConfigReportsZero) {
    const fs::path out = scratch("transfer_free");
    const std::string text = R"({"potential": {"family": "gauss-gauss", "v0": 0, "sigma": 12},
                                 "grid": {"n": 8}, "transfer": {"refine": [12]}})";
    EXPECT_EQ(cmd_transfer(context(text, "transfer", out)), kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out / "transfer.json"));
    EXPECT_LE(doc["transfer"]["block_norms"]["T"].get<double>(), 1e-12);
    EXPECT_EQ(doc["version"], tool_version());
    EXPECT_EQ(doc["config_sha256"].get<std::string>().size(), 64u);
    EXPECT_EQ(doc["refinement"].size(), 2u);
    EXPECT_TRUE(fs::exists(out / "refinement.csv"));
}

TEST(Cli, ScatterFreeConfigWritesZeroTable) {
    const fs::path out = scratch("scatter_free");
    const std::string text = R"({"potential": {"family": "gauss-gauss", "v0": 0, "sigma": 12},
                                 "grid": {"n": 8}, "scatter": {"theta0": [0.1234]}})";
    EXPECT_EQ(cmd_scatter(context(text, "scatter", out)), kExitOk);
    std::istringstream csv(slurp(out / "cross_section_0.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line.rfind("# nltm ", 0), 0u);
    std::getline(csv, line);
    EXPECT_EQ(line, "theta,re_f,im_f,dcs");
    int rows = 0;
    while (std::getline(csv, line)) {
        EXPECT_NE(line.find(",0,0,0"), std::string::npos) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 16);
    const auto doc = nlohmann::json::parse(slurp(out / "scatter.json"));
    const auto& run = doc["scattering"][0];
    EXPECT_TRUE(run.contains("snap_distance"));
    EXPECT_NEAR(run["snap_distance"].get<double>(), std::abs(run["theta0"].get<double>() - 0.1234), 1e-15);
}

TEST(Cli, ScatterIsByteIdentical) {
    const fs::path a = scratch("scatter_a");
    const fs::path b = scratch("scatter_b");
    EXPECT_EQ(cmd_scatter(context(kGaussConfig, "scatter", a)), kExitOk);
    EXPECT_EQ(cmd_scatter(context(kGaussConfig, "scatter", b)), kExitOk);
    for (const char* f : {"scatter.json", "cross_section_0.csv", "cross_section_1.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, VerifyEmptyListIsVacuousPass) {
    const fs::path out = scratch("verify_empty");
    const std::string text = R"({"potential": {"family": "gauss-gauss", "sigma": 12},
                                 "verify": {"certificates": []}})";
    EXPECT_EQ(cmd_verify(context(text, "verify", out)), kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out / "verify.json"));
    EXPECT_TRUE(doc["certificates"].empty());
    EXPECT_TRUE(doc["pass"].get<bool>());
}

TEST(Cli, VerifyPassesAndFalsificationFails) {
    const fs::path ok = scratch("verify_ok");
    EXPECT_EQ(cmd_verify(context(kGaussConfig, "verify", ok)), kExitOk);
    const auto doc = nlohmann::json::parse(slurp(ok / "verify.json"));
    EXPECT_EQ(doc["certificates"].size(), 2u);
    EXPECT_EQ(doc["certificates"][0]["name"], "nilpotency");

    // Declared beta a tenth of the admissible value at k = 3.
    RunConfig c = parse_config_text(R"({"potential": {"family": "gauss-gauss", "sigma": 12},
                                        "grid": {"k": 3.0, "n": 24},
                                        "verify": {"certificates": ["envelope"]}})");
    c.potential.beta = c.model(false).beta() / 10.0;
    const fs::path bad = scratch("verify_bad");
    EXPECT_EQ(cmd_verify(make_context(c, "verify", bad.string())), kExitFailed);
    const auto report = nlohmann::json::parse(slurp(bad / "verify.json"));
    EXPECT_FALSE(report["pass"].get<bool>());
    EXPECT_LT(report["certificates"][0]["margin"].get<double>(), 0.0);
}

TEST(Cli, VerifyRecordsJobErrors) {
    const fs::path out = scratch("verify_error");
    const std::string text = R"({"potential": {"family": "gauss-gauss", "sigma": 3},
                                 "verify": {"certificates": ["tail-constants"]}})";
    EXPECT_EQ(cmd_verify(context(text, "verify", out)), kExitFailed);
    const auto doc = nlohmann::json::parse(slurp(out / "verify.json"));
    EXPECT_TRUE(doc["certificates"][0].contains("error"));
}
