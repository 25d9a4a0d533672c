#include "rbfpide/config.hpp"

#include "rbfpide/errors.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

namespace rbfpide::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorKind::Config, message); }

// Reads fields of one JSON object and rejects keys nobody asked for.
class Block {
public:
    Block(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) fail(where_ + ": expected an object");
    }

    std::string path(const std::string& key) const { return where_ + "." + key; }
    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(path(key) + ": expected a number");
        return v.get<double>();
    }
    double number(const std::string& key) {
        if (!has(key)) fail(path(key) + ": missing required field");
        return number(key, 0.0);
    }
    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key, 0.0);
    }
    std::size_t count(const std::string& key, std::size_t fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            fail(path(key) + ": expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }
    std::size_t count(const std::string& key) {
        if (!has(key)) fail(path(key) + ": missing required field");
        return count(key, 0);
    }
    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) fail(path(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::string text(const std::string& key) {
        if (!has(key)) fail(path(key) + ": missing required field");
        return text(key, "");
    }
    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) fail(path(key) + ": expected true or false");
        return v.get<bool>();
    }
    const json& child(const std::string& key) {
        if (!has(key)) fail(path(key) + ": missing required block");
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) fail(path(key) + ": unknown field");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

// Re-raises model/contract validation errors as configuration errors while
// keeping their field-named message.
template <class Fn>
auto validated(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        fail(e.what());
    }
}

}  // namespace

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        fail("'" + path + "' is not valid JSON: " + e.what());
    }
}

models::JumpModel parse_model(const json& j, const std::string& where) {
    Block b(j, where);
    models::JumpModel m;
    m.kind = validated([&] { return models::model_kind_from_string(b.text("kind")); });
    m.r = b.number("r");
    m.q = b.number("q", 0.0);
    m.sigma = b.number("sigma");
    m.lambda = b.number("lambda", 0.0);
    if (m.kind == models::ModelKind::Merton) {
        m.merton_mu_j = b.number("mu_j");
        m.merton_sigma_j = b.number("sigma_j");
    } else if (m.kind == models::ModelKind::Kou) {
        m.kou_p = b.number("p");
        m.kou_alpha1 = b.number("alpha1");
        m.kou_alpha2 = b.number("alpha2");
    }
    b.finish();
    validated([&] {
        m.validate();
        return 0;
    });
    return m;
}

stepper::ContractSpec parse_contract(const json& j, const std::string& where) {
    Block b(j, where);
    stepper::ContractSpec c;
    c.strike = b.number("strike");
    c.maturity = b.number("maturity");
    c.side = validated([&] { return stepper::option_side_from_string(b.text("side", "put")); });
    c.exercise =
        validated([&] { return stepper::exercise_from_string(b.text("exercise", "european")); });
    b.finish();
    validated([&] {
        c.validate();
        return 0;
    });
    return c;
}

stepper::NumericsConfig parse_numerics(const json& j, stepper::NumericsConfig base,
                                       const std::string& where) {
    Block b(j, where);
    auto& n = base;
    n.n = b.count("n", n.n);
    n.m0 = b.count("m0", n.m0);
    n.half_width = b.number("half_width", n.half_width);
    if (auto v = b.optional_number("x_min")) n.x_min = v;
    if (auto v = b.optional_number("x_max")) n.x_max = v;
    n.epsilon = b.number("epsilon", n.epsilon);
    n.quad_tol = b.number("quad_tol", n.quad_tol);
    n.fst_size = b.count("fst_size", n.fst_size);
    n.fst_steps = b.count("fst_steps", n.fst_steps);
    n.fst_half_width = b.number("fst_half_width", n.fst_half_width);
    if (b.flag("sign_as_printed", n.sign == collocation::DiscountSign::AsPrinted)) {
        n.sign = collocation::DiscountSign::AsPrinted;
    }
    b.finish();
    n.validate();
    return n;
}

RunConfig parse_run_config(const json& j) {
    Block b(j, "config");
    RunConfig rc;
    rc.model = parse_model(b.child("model"));
    rc.contract = parse_contract(b.child("contract"));
    if (b.has("numerics")) rc.numerics = parse_numerics(j.at("numerics"));
    if (b.has("spots")) {
        const auto& s = j.at("spots");
        if (!s.is_array()) fail("config.spots: expected an array of numbers");
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (!s[k].is_number() || !(s[k].get<double>() > 0.0)) {
                fail("config.spots[" + std::to_string(k) + "]: expected a positive number");
            }
            rc.spots.push_back(s[k].get<double>());
        }
    }
    if (rc.spots.empty()) rc.spots.push_back(rc.contract.strike);
    if (b.has("output")) {
        Block o(j.at("output"), "output");
        rc.output.format = o.text("format", rc.output.format);
        if (o.has("path")) rc.output.path = o.text("path");
        o.finish();
        if (rc.output.format != "csv" && rc.output.format != "json") {
            fail("output.format: expected 'csv' or 'json'");
        }
    }
    rc.greek_points = b.count("greek_points", rc.greek_points);
    if (rc.greek_points < 2) fail("config.greek_points: expected at least 2");
    b.finish();
    return rc;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

json model_to_json(const models::JumpModel& m) {
    json j{{"kind", std::string(models::to_string(m.kind))},
           {"r", m.r},
           {"q", m.q},
           {"sigma", m.sigma},
           {"lambda", m.lambda}};
    if (m.kind == models::ModelKind::Merton) {
        j["mu_j"] = m.merton_mu_j;
        j["sigma_j"] = m.merton_sigma_j;
    } else if (m.kind == models::ModelKind::Kou) {
        j["p"] = m.kou_p;
        j["alpha1"] = m.kou_alpha1;
        j["alpha2"] = m.kou_alpha2;
    }
    return j;
}

json contract_to_json(const stepper::ContractSpec& c) {
    return {{"strike", c.strike},
            {"maturity", c.maturity},
            {"side", std::string(stepper::to_string(c.side))},
            {"exercise", std::string(stepper::to_string(c.exercise))}};
}

json numerics_to_json(const stepper::NumericsConfig& n) {
    json j{{"n", n.n},
           {"m0", n.m0},
           {"half_width", n.half_width},
           {"epsilon", n.epsilon},
           {"quad_tol", n.quad_tol},
           {"fst_size", n.fst_size},
           {"fst_steps", n.fst_steps},
           {"fst_half_width", n.fst_half_width},
           {"sign_as_printed", n.sign == collocation::DiscountSign::AsPrinted}};
    if (n.x_min) j["x_min"] = *n.x_min;
    if (n.x_max) j["x_max"] = *n.x_max;
    return j;
}

namespace {

bench::OracleKind oracle_kind_from_string(const std::string& s, const std::string& where) {
    if (s == "black_scholes") return bench::OracleKind::BlackScholes;
    if (s == "merton_series") return bench::OracleKind::MertonSeries;
    if (s == "fst") return bench::OracleKind::Fst;
    if (s == "refined_steps") return bench::OracleKind::RefinedSteps;
    fail(where + ": unknown oracle '" + s + "'");
}

bench::Gate::Kind gate_kind_from_string(const std::string& s, const std::string& where) {
    using K = bench::Gate::Kind;
    for (K k : {K::MaxE2, K::MaxEInf, K::MaxERel, K::Rate2Range, K::RateInfRange, K::EInfReduction}) {
        if (bench::gate_name(k) == s) return k;
    }
    fail(where + ": unknown gate '" + s + "'");
}

}  // namespace

bench::ExperimentDescriptor parse_descriptor(const json& j) {
    Block b(j, "descriptor");
    bench::ExperimentDescriptor d;
    d.name = b.text("name");
    d.description = b.text("description", "");
    d.model = parse_model(b.child("model"));
    d.contract = parse_contract(b.child("contract"));
    if (b.has("numerics")) d.numerics = parse_numerics(j.at("numerics"));

    const auto& levels = b.child("levels");
    if (!levels.is_array() || levels.empty()) fail("descriptor.levels: expected a non-empty array");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        Block l(levels[k], "descriptor.levels[" + std::to_string(k) + "]");
        bench::Level level;
        level.n = l.count("n");
        level.m0 = l.count("m0");
        l.finish();
        if (level.n < 4) fail(l.path("n") + ": expected at least 4");
        if (level.m0 < 2) fail(l.path("m0") + ": expected at least 2");
        d.levels.push_back(level);
    }

    const std::string axis = b.text("axis", "space");
    if (axis == "space") {
        d.axis = bench::RefinementAxis::Space;
    } else if (axis == "time") {
        d.axis = bench::RefinementAxis::Time;
    } else {
        fail("descriptor.axis: expected 'space' or 'time'");
    }

    {
        Block o(b.child("oracle"), "descriptor.oracle");
        d.oracle.kind = oracle_kind_from_string(o.text("kind"), o.path("kind"));
        d.oracle.fst_size = o.count("fst_size", d.oracle.fst_size);
        d.oracle.fst_steps = o.count("fst_steps", d.oracle.fst_steps);
        d.oracle.fst_half_width = o.number("fst_half_width", d.oracle.fst_half_width);
        d.oracle.refined_m0 = o.count("refined_m0", d.oracle.refined_m0);
        o.finish();
    }
    if (d.oracle.kind == bench::OracleKind::MertonSeries && d.model.kind != models::ModelKind::Merton) {
        fail("descriptor.oracle.kind: the Merton series needs a Merton model");
    }
    if (d.oracle.kind == bench::OracleKind::BlackScholes && d.model.lambda != 0.0) {
        fail("descriptor.oracle.kind: the Black-Scholes oracle needs lambda = 0");
    }

    if (b.has("gates")) {
        const auto& gates = j.at("gates");
        if (!gates.is_array()) fail("descriptor.gates: expected an array");
        for (std::size_t k = 0; k < gates.size(); ++k) {
            Block g(gates[k], "descriptor.gates[" + std::to_string(k) + "]");
            bench::Gate gate;
            gate.kind = gate_kind_from_string(g.text("kind"), g.path("kind"));
            gate.min = g.number("min", -std::numeric_limits<double>::infinity());
            gate.max = g.number("max", std::numeric_limits<double>::infinity());
            g.finish();
            d.gates.push_back(gate);
        }
    }
    d.eval_count = b.count("eval_count", d.eval_count);
    if (d.eval_count < 2) fail("descriptor.eval_count: expected at least 2");
    if (auto s = b.optional_number("spot")) {
        if (!(*s > 0.0)) fail("descriptor.spot: expected a positive number");
        d.spot = s;
    }
    b.finish();
    return d;
}

json descriptor_to_json(const bench::ExperimentDescriptor& d) {
    json levels = json::array();
    for (const auto& l : d.levels) levels.push_back({{"n", l.n}, {"m0", l.m0}});
    json gates = json::array();
    for (const auto& g : d.gates) {
        json gj{{"kind", bench::gate_name(g.kind)}};
        if (std::isfinite(g.min)) gj["min"] = g.min;
        if (std::isfinite(g.max)) gj["max"] = g.max;
        gates.push_back(gj);
    }
    json oracle{{"kind", bench::to_string(d.oracle.kind)}};
    if (d.oracle.kind == bench::OracleKind::Fst) {
        oracle["fst_size"] = d.oracle.fst_size;
        oracle["fst_steps"] = d.oracle.fst_steps;
        oracle["fst_half_width"] = d.oracle.fst_half_width;
    }
    if (d.oracle.kind == bench::OracleKind::RefinedSteps) oracle["refined_m0"] = d.oracle.refined_m0;
    json j{{"name", d.name},
           {"description", d.description},
           {"model", model_to_json(d.model)},
           {"contract", contract_to_json(d.contract)},
           {"numerics", numerics_to_json(d.numerics)},
           {"levels", levels},
           {"axis", bench::to_string(d.axis)},
           {"oracle", oracle},
           {"gates", gates},
           {"eval_count", d.eval_count}};
    if (d.spot) j["spot"] = *d.spot;
    return j;
}

bench::ExperimentDescriptor load_descriptor(const std::string& name_or_path,
                                            const std::string& tables_dir) {
    namespace fs = std::filesystem;
    fs::path path(name_or_path);
    if (!fs::is_regular_file(path)) {
        path = fs::path(tables_dir) / (name_or_path + ".json");
        if (!fs::is_regular_file(path)) fail("unknown table descriptor '" + name_or_path + "'");
    }
    return parse_descriptor(read_json_file(path.string()));
}

std::vector<std::string> list_descriptors(const std::string& tables_dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(tables_dir, ec)) {
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace rbfpide::config
