#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace nltm {

using nlohmann::json;

namespace {

/// Strict view of one JSON object: every key must be consumed.
class Block {
public:
    Block(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = find(key);
        if (!v) throw ConfigError(field(key), "required field is missing");
        return *v;
    }

    double number(const std::string& key, double fallback) {
        const json* v = find(key);
        return v ? as_number(*v, field(key)) : fallback;
    }

    double positive(const std::string& key, double fallback) {
        const double x = number(key, fallback);
        if (!(x > 0.0)) throw ConfigError(field(key), "must be positive");
        return x;
    }

    long integer(const std::string& key, long fallback, long lo) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
        const long x = v->get<long>();
        if (x < lo) throw ConfigError(field(key), "must be >= " + std::to_string(lo));
        return x;
    }

    std::string string(const std::string& key, const std::string& fallback) {
        const json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(field(key), "expected a string");
        return v->get<std::string>();
    }

    void finish() const {
        for (const auto& item : node_.items())
            if (!seen_.count(item.key())) throw ConfigError(field(item.key()), "unknown key");
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigError(where, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(where, "must be finite");
        return x;
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
auto parse_as(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(where, e.what());
    }
}

nlt::Complex parse_v0(const json& v, const std::string& where) {
    if (v.is_number()) return {Block::as_number(v, where), 0.0};
    if (v.is_array() && v.size() == 2)
        return {Block::as_number(v[0], where + "[0]"), Block::as_number(v[1], where + "[1]")};
    throw ConfigError(where, "expected a number or [re, im]");
}

std::vector<double> number_list(Block& b, const std::string& key) {
    std::vector<double> out;
    const json* v = b.find(key);
    if (!v) return out;
    if (!v->is_array()) throw ConfigError(b.field(key), "expected an array of numbers");
    for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(Block::as_number((*v)[i], b.field(key) + "[" + std::to_string(i) + "]"));
    return out;
}

PotentialConfig parse_potential(const json& node) {
    Block b(node, "potential");
    PotentialConfig p;
    const json& fam = b.require("family");
    if (!fam.is_string()) throw ConfigError(b.field("family"), "expected a string");
    p.family = parse_as(b.field("family"), [&] { return nlt::parse_family(fam.get<std::string>()); });
    if (const json* v = b.find("v0")) p.params.v0 = parse_v0(*v, b.field("v0"));
    p.params.a = b.positive("a", p.params.a);
    p.params.profile_sigma = b.positive("profile_sigma", p.params.profile_sigma);
    p.alpha = b.positive("alpha", 1.0);
    if (const json* v = b.find("beta")) {
        const double beta = Block::as_number(*v, b.field("beta"));
        if (beta < 0.0) throw ConfigError(b.field("beta"), "must be nonnegative");
        p.beta = beta;
    }
    p.sigma = Block::as_number(b.require("sigma"), b.field("sigma"));
    if (!(p.sigma > 0.0)) throw ConfigError(b.field("sigma"), "must be positive");
    b.finish();
    return p;
}

GridConfig parse_grid(const json& node) {
    Block b(node, "grid");
    GridConfig g;
    g.k = b.positive("k", g.k);
    g.n = static_cast<int>(b.integer("n", g.n, 2));
    const std::string rule = b.string("rule", nlt::to_string(g.rule));
    g.rule = parse_as(b.field("rule"), [&] { return nlt::parse_rule(rule); });
    b.finish();
    return g;
}

nlt::EvolutionOptions parse_evolution(const json& node) {
    Block b(node, "evolution");
    nlt::EvolutionOptions o;
    const std::string scheme = b.string("scheme", nlt::to_string(o.scheme));
    o.scheme = parse_as(b.field("scheme"), [&] { return nlt::parse_scheme(scheme); });
    o.tol = b.positive("tol", o.tol);
    o.order_cap = static_cast<int>(b.integer("order_cap", o.order_cap, 1));
    o.steps_per_unit = b.positive("steps_per_unit", o.steps_per_unit);
    o.min_steps = static_cast<int>(b.integer("min_steps", o.min_steps, 1));
    o.max_steps = b.integer("max_steps", o.max_steps, 1);
    if (o.max_steps < o.min_steps) throw ConfigError(b.field("max_steps"), "must be >= min_steps");
    o.memory_budget = static_cast<std::size_t>(b.integer("memory_budget", static_cast<long>(o.memory_budget), 1));
    b.finish();
    return o;
}

TransferConfig parse_transfer(const json& node) {
    Block b(node, "transfer");
    TransferConfig t;
    t.eps = b.positive("eps", t.eps);
    if (const json* v = b.find("refine")) {
        if (!v->is_array()) throw ConfigError(b.field("refine"), "expected an array of integers");
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& e = (*v)[i];
            const std::string where = b.field("refine") + "[" + std::to_string(i) + "]";
            if (!e.is_number_integer() || e.get<long>() < 2) throw ConfigError(where, "expected an integer >= 2");
            t.refine.push_back(e.get<int>());
        }
    }
    t.widening = number_list(b, "widening");
    for (std::size_t i = 0; i < t.widening.size(); ++i)
        if (!(t.widening[i] > 0.0) || (i > 0 && !(t.widening[i] > t.widening[i - 1])))
            throw ConfigError(b.field("widening"), "expected positive, strictly increasing half-widths");
    b.finish();
    return t;
}

ScatterConfig parse_scatter(const json& node) {
    Block b(node, "scatter");
    ScatterConfig s;
    s.theta0 = number_list(b, "theta0");
    s.eps = b.positive("eps", s.eps);
    b.finish();
    return s;
}

VerifyConfig parse_verify(const json& node) {
    Block b(node, "verify");
    VerifyConfig v;
    if (const json* list = b.find("certificates")) {
        if (!list->is_array()) throw ConfigError(b.field("certificates"), "expected an array of strings");
        const auto& tags = certificate_tags();
        for (std::size_t i = 0; i < list->size(); ++i) {
            const json& e = (*list)[i];
            const std::string where = b.field("certificates") + "[" + std::to_string(i) + "]";
            if (!e.is_string()) throw ConfigError(where, "expected a string");
            const std::string tag = e.get<std::string>();
            if (std::find(tags.begin(), tags.end(), tag) == tags.end())
                throw ConfigError(where, "unknown certificate '" + tag + "'");
            v.certificates.push_back(tag);
        }
    } else {
        v.certificates = certificate_tags();
    }
    v.samples = static_cast<int>(b.integer("samples", v.samples, 1));
    v.tuples = static_cast<int>(b.integer("tuples", v.tuples, 1));
    v.states = static_cast<int>(b.integer("states", v.states, 1));
    const std::vector<double> range = number_list(b, "range");
    if (!range.empty()) {
        if (range.size() != 2 || !(range[0] < range[1]))
            throw ConfigError(b.field("range"), "expected [x_min, x_max] with x_min < x_max");
        v.x_min = range[0];
        v.x_max = range[1];
    }
    v.x_far = b.positive("x_far", v.x_far);
    b.finish();
    return v;
}

OutputConfig parse_output(const json& node) {
    Block b(node, "output");
    OutputConfig o;
    o.directory = b.string("directory", o.directory);
    if (o.directory.empty()) throw ConfigError(b.field("directory"), "must not be empty");
    if (const json* v = b.find("formats")) {
        if (!v->is_array()) throw ConfigError(b.field("formats"), "expected an array of strings");
        o.csv = o.json = false;
        for (const json& e : *v) {
            if (e == "csv") o.csv = true;
            else if (e == "json") o.json = true;
            else throw ConfigError(b.field("formats"), "expected entries \"csv\" or \"json\"");
        }
    }
    b.finish();
    return o;
}

}  // namespace

const std::vector<std::string>& certificate_tags() {
    static const std::vector<std::string> tags{"nilpotency",     "envelope",      "b-product",
                                               "dyson-partial-sums", "refined-orders", "tail-constants",
                                               "zeta-growth"};
    return tags;
}

nlt::PotentialModel RunConfig::model(bool transfer_ready) const {
    return parse_as("potential", [&] {
        nlt::Envelope env;
        env.alpha = potential.alpha;
        env.sigma = potential.sigma;
        env.beta = potential.beta
                       ? *potential.beta
                       : nlt::derived_beta(potential.family, potential.params, env.alpha, env.sigma);
        return nlt::builtin_model(potential.family, potential.params, env, transfer_ready);
    });
}

nlt::GridPtr RunConfig::build_grid() const { return build_grid(grid.n); }

nlt::GridPtr RunConfig::build_grid(int n) const { return nlt::build_grid(grid.k, n, grid.rule); }

RunConfig parse_config(const json& doc) {
    Block root(doc, "");
    RunConfig c;
    c.potential = parse_potential(root.require("potential"));
    if (const json* v = root.find("grid")) c.grid = parse_grid(*v);
    if (const json* v = root.find("evolution")) c.evolution = parse_evolution(*v);
    if (const json* v = root.find("transfer")) c.transfer = parse_transfer(*v);
    if (const json* v = root.find("scatter")) c.scatter = parse_scatter(*v);
    if (const json* v = root.find("verify")) c.verify = parse_verify(*v);
    if (const json* v = root.find("output")) c.output = parse_output(*v);
    if (const json* v = root.find("seed")) {
        if (!v->is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
        c.seed = v->get<std::uint64_t>();
    }
    root.finish();
    c.canonical = doc.dump();
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", e.what());
    }
    return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void require_transfer_ready(const RunConfig& config) {
    if (!(config.potential.sigma > 3.0))
        throw ConfigError("potential.sigma", "must exceed 3 for transfer and scatter runs");
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace nltm
