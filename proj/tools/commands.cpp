#include "commands.hpp"

#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <random>

#include "nlt/bounds.hpp"
#include "nlt/scatter.hpp"

namespace nltm {

using nlohmann::json;

namespace {

/// Independent stream per job so results do not depend on scheduling.
std::mt19937_64 job_rng(std::uint64_t seed, std::uint64_t job) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(job)};
    return std::mt19937_64(seq);
}

nlt::StateVector random_state(const nlt::GridPtr& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    nlt::CVector v(2 * grid->size());
    for (auto& z : v) z = {normal(rng), normal(rng)};
    nlt::StateVector s(grid, std::move(v));
    s.values /= s.norm();
    return s;
}

std::vector<double> uniform_samples(double lo, double hi, int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> xs(static_cast<std::size_t>(count));
    for (double& x : xs) x = u(rng);
    return xs;
}

void append(nlt::BoundCertificate& into, const nlt::BoundCertificate& from, const std::string& prefix) {
    if (into.name.empty()) {
        into.name = from.name;
        into.provenance = from.provenance;
    }
    for (std::size_t i = 0; i < from.lhs.size(); ++i)
        into.add(prefix + from.inputs[i], from.lhs[i], from.rhs[i]);
}

json block_norms(const nlt::BlockOperator& t) {
    const auto& grid = *t.grid;
    json out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            out["T" + std::to_string(r + 1) + std::to_string(c + 1)] =
                nlt::operator_norm(nlt::CMatrix(t.block(r, c)), grid).value;
    out["T"] = nlt::operator_norm(t).value;
    return out;
}

json transfer_json(const nlt::TransferMatrix& tm) {
    return json{{"n", tm.grid->size()},
                {"x_minus", tm.x_minus},
                {"x_plus", tm.x_plus},
                {"tail_estimate", tm.tail_estimate},
                {"scheme", nlt::to_string(tm.scheme)},
                {"converged", tm.converged},
                {"error_estimate", tm.error_estimate},
                {"steps", tm.steps},
                {"block_norms", block_norms(tm.T)}};
}

std::string incidence_name(nlt::Incidence inc) { return inc == nlt::Incidence::Left ? "left" : "right"; }

using CertificateJob = std::function<nlt::BoundCertificate(std::mt19937_64&)>;

CertificateJob make_job(const std::string& tag, const RunConfig& cfg) {
    const VerifyConfig& v = cfg.verify;
    if (tag == "nilpotency")
        return [&cfg, &v](std::mt19937_64& rng) {
            return nlt::certify_nilpotency(cfg.model(false), cfg.build_grid(),
                                           uniform_samples(v.x_min, v.x_max, v.samples, rng));
        };
    if (tag == "envelope")
        return [&cfg, &v](std::mt19937_64&) {
            const nlt::PotentialModel model = cfg.model(false);
            return nlt::certify_lemma2(model, cfg.build_grid(),
                                       nlt::envelope_samples(model.alpha(), v.samples, v.x_far));
        };
    if (tag == "b-product")
        return [&cfg, &v](std::mt19937_64& rng) {
            std::vector<std::vector<double>> tuples;
            for (int order = 1; order <= 3; ++order)
                for (int t = 0; t < v.tuples; ++t) {
                    auto xs = uniform_samples(v.x_min, v.x_max, order, rng);
                    std::sort(xs.begin(), xs.end());
                    tuples.push_back(std::move(xs));
                }
            return nlt::certify_lemma5(cfg.model(false), cfg.build_grid(), tuples);
        };
    if (tag == "dyson-partial-sums" || tag == "refined-orders")
        return [&cfg, &v, tag](std::mt19937_64& rng) {
            const nlt::PotentialModel model = cfg.model(false);
            const nlt::GridPtr grid = cfg.build_grid();
            const nlt::Hamiltonian h(model, grid);
            nlt::BoundCertificate cert;
            for (int s = 0; s < v.states; ++s) {
                const nlt::StateVector phi0 = random_state(grid, rng);
                const nlt::StateEvolution evo = nlt::evolve_state(h, v.x_min, v.x_max, phi0, cfg.evolution);
                const std::string prefix = "state=" + std::to_string(s) + " ";
                if (tag == "dyson-partial-sums")
                    append(cert, nlt::certify_theorem3(evo), prefix);
                else
                    append(cert, nlt::certify_refined_orders(model, *grid, evo), prefix);
            }
            return cert;
        };
    if (tag == "tail-constants")
        return [&cfg, &v](std::mt19937_64& rng) {
            const nlt::PotentialModel model = cfg.model(true);
            const nlt::GridPtr grid = cfg.build_grid();
            return nlt::certify_theorem4(model, grid, random_state(grid, rng),
                                         nlt::widening_sequence(model.alpha(), v.x_far));
        };
    if (tag == "zeta-growth")
        return [&cfg, &v](std::mt19937_64& rng) {
            const nlt::GridPtr grid = cfg.build_grid();
            const nlt::StateVector phi0 = random_state(grid, rng);
            return nlt::certify_zeta_growth(phi0, uniform_samples(-v.x_far, v.x_far, v.samples, rng));
        };
    throw ConfigError("verify.certificates", "unknown certificate '" + tag + "'");
}

}  // namespace

std::string tool_version() { return NLT_VERSION; }

std::filesystem::path resolve_out_dir(const std::string& flag, const RunConfig& config) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("NLTM_OUT_DIR"); env && *env) return env;
    return config.output.directory;
}

RunContext make_context(RunConfig config, const std::string& command, const std::string& out_flag) {
    RunContext ctx;
    ctx.out_dir = resolve_out_dir(out_flag, config);
    ctx.meta.command = command;
    ctx.meta.version = tool_version();
    ctx.meta.config_sha256 = sha256_hex(config.canonical);
    ctx.meta.seed = config.seed;
    ctx.config = std::move(config);
    return ctx;
}

int cmd_transfer(const RunContext& ctx) {
    const RunConfig& cfg = ctx.config;
    require_transfer_ready(cfg);
    const nlt::PotentialModel model = cfg.model(true);
    const nlt::GridPtr grid = cfg.build_grid();
    const nlt::TransferMatrix tm = nlt::assemble_transfer(model, grid, cfg.transfer.eps, cfg.evolution);
    const nlt::TruncationBounds tb = nlt::truncation_bounds(model, cfg.transfer.eps);
    bool ok = tm.converged;

    json doc = meta_json(ctx.meta);
    doc["potential"] = {{"family", nlt::to_string(model.family())},
                        {"alpha", model.alpha()},
                        {"beta", model.beta()},
                        {"sigma", model.sigma()}};
    doc["transfer"] = transfer_json(tm);
    doc["truncation"] = {{"eps", cfg.transfer.eps},
                         {"x_minus", tb.x_minus},
                         {"x_plus", tb.x_plus},
                         {"tail_estimate", tb.tail_estimate},
                         {"gamma", tb.gamma},
                         {"delta", tb.delta},
                         {"f_minus_bound", tb.f_minus_bound}};

    std::string refinement_csv = csv_preamble(ctx.meta) + "n,t_norm,kernel_change\n";
    json refinement = json::array();
    refinement.push_back({{"n", grid->size()}, {"t_norm", doc["transfer"]["block_norms"]["T"]}, {"kernel_change", nullptr}});
    refinement_csv += std::to_string(grid->size()) + "," +
                      nlt::format_double(doc["transfer"]["block_norms"]["T"].get<double>()) + ",\n";
    const nlt::TransferMatrix* previous = &tm;
    std::vector<nlt::TransferMatrix> refined;
    refined.reserve(cfg.transfer.refine.size());
    for (int n : cfg.transfer.refine) {
        refined.push_back(nlt::assemble_transfer(model, cfg.build_grid(n), cfg.transfer.eps, cfg.evolution));
        const nlt::TransferMatrix& fine = refined.back();
        ok = ok && fine.converged;
        const double norm = nlt::operator_norm(fine.T).value;
        const double change = nlt::refinement_change(*previous, fine);
        refinement.push_back({{"n", n}, {"t_norm", norm}, {"kernel_change", change}});
        refinement_csv += std::to_string(n) + "," + nlt::format_double(norm) + "," + nlt::format_double(change) + "\n";
        previous = &fine;
    }
    doc["refinement"] = std::move(refinement);

    std::string widening_csv = csv_preamble(ctx.meta) + "x_plus,t_norm,change_to_widest\n";
    json widening = json::array();
    if (!cfg.transfer.widening.empty()) {
        const nlt::Hamiltonian h(model, grid);
        const auto shells = nlt::transfer_widening(h, cfg.transfer.widening, cfg.evolution);
        const nlt::BlockOperator& widest = shells.back().T;
        for (const auto& m : shells) {
            ok = ok && m.converged;
            const double norm = nlt::operator_norm(m.T).value;
            const double change = nlt::operator_norm(nlt::BlockOperator(grid, m.T.matrix - widest.matrix)).value;
            widening.push_back({{"x_plus", m.x_plus}, {"t_norm", norm}, {"change_to_widest", change}});
            widening_csv += nlt::format_double(m.x_plus) + "," + nlt::format_double(norm) + "," +
                            nlt::format_double(change) + "\n";
        }
    }
    doc["widening"] = std::move(widening);
    doc["ok"] = ok;

    if (cfg.output.json) write_file(ctx.out_dir, "transfer.json", render(doc));
    if (cfg.output.csv) {
        if (!cfg.transfer.refine.empty()) write_file(ctx.out_dir, "refinement.csv", refinement_csv);
        if (!cfg.transfer.widening.empty()) write_file(ctx.out_dir, "widening.csv", widening_csv);
    }
    if (!ok) std::cerr << "nltm transfer: evolution did not reach the requested tolerance\n";
    return ok ? kExitOk : kExitFailed;
}

int cmd_scatter(const RunContext& ctx) {
    const RunConfig& cfg = ctx.config;
    require_transfer_ready(cfg);
    const nlt::PotentialModel model = cfg.model(true);
    const nlt::GridPtr grid = cfg.build_grid();
    const nlt::TransferMatrix tm = nlt::assemble_transfer(model, grid, cfg.scatter.eps, cfg.evolution);
    bool ok = tm.converged;

    json doc = meta_json(ctx.meta);
    doc["transfer"] = transfer_json(tm);
    json runs = json::array();
    for (std::size_t i = 0; i < cfg.scatter.theta0.size(); ++i) {
        const double theta0 = cfg.scatter.theta0[i];
        const std::string csv_name = "cross_section_" + std::to_string(i) + ".csv";
        json entry{{"theta0_requested", theta0}};
        try {
            const nlt::ScatteringResult r = nlt::scatter(tm, theta0);
            entry["incidence"] = incidence_name(r.incidence);
            entry["theta0"] = r.theta0;
            entry["snap_distance"] = r.snap_distance;
            entry["node"] = r.node;
            entry["p0"] = r.p0;
            entry["residual"] = r.residual;
            entry["m22_smin"] = r.m22_smin;
            entry["m22_norm"] = r.m22_norm;
            entry["tail_estimate"] = r.tail_estimate;
            entry["theta_forward"] = real_array(r.theta_forward);
            entry["theta_backward"] = real_array(r.theta_backward);
            entry["f_forward"] = complex_array(r.f_forward);
            entry["f_backward"] = complex_array(r.f_backward);
            if (cfg.output.csv) {
                entry["csv"] = csv_name;
                write_file(ctx.out_dir, csv_name, csv_preamble(ctx.meta) + nlt::emit_cross_section(r));
            }
        } catch (const nlt::KernelNontrivialError& e) {
            entry["error"] = e.what();
            ok = false;
        }
        runs.push_back(std::move(entry));
    }
    doc["scattering"] = std::move(runs);
    doc["ok"] = ok;
    if (cfg.output.json) write_file(ctx.out_dir, "scatter.json", render(doc));
    if (!ok) std::cerr << "nltm scatter: one or more scattering problems failed\n";
    return ok ? kExitOk : kExitFailed;
}

int cmd_verify(const RunContext& ctx) {
    const RunConfig& cfg = ctx.config;
    const auto& tags = cfg.verify.certificates;
    const int count = static_cast<int>(tags.size());
    std::vector<nlt::BoundCertificate> results(tags.size());
    std::vector<std::string> errors(tags.size());
    std::vector<CertificateJob> jobs;
    for (const std::string& tag : tags) jobs.push_back(make_job(tag, cfg));

#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < count; ++i) {
        try {
            std::mt19937_64 rng = job_rng(cfg.seed, static_cast<std::uint64_t>(i));
            results[i] = jobs[i](rng);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }

    bool pass = true;
    json certs = json::array();
    for (int i = 0; i < count; ++i) {
        json entry;
        if (!errors[i].empty()) {
            entry = json{{"name", tags[i]}, {"error", errors[i]}, {"pass", false}};
            pass = false;
        } else {
            results[i].name = tags[i];
            entry = certificate_json(results[i]);
            pass = pass && results[i].pass;
        }
        certs.push_back(std::move(entry));
    }
    json doc = meta_json(ctx.meta);
    doc["certificates"] = std::move(certs);
    doc["pass"] = pass;
    write_file(ctx.out_dir, "verify.json", render(doc));
    for (int i = 0; i < count; ++i) {
        const bool ok = errors[i].empty() && results[i].pass;
        std::cout << (ok ? "pass " : "FAIL ") << tags[i];
        if (!errors[i].empty()) std::cout << " (" << errors[i] << ")";
        std::cout << "\n";
    }
    return pass ? kExitOk : kExitFailed;
}

}  // namespace nltm
