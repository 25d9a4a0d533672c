#include "rbfpide/config.hpp"
#include "rbfpide/errors.hpp"

#include <doctest.h>

#include <string>

using namespace rbfpide;
using nlohmann::json;

namespace {

json base() {
    return json::parse(R"({
        "model": {"kind": "merton", "r": 0.05, "sigma": 0.2, "lambda": 0.1, "mu_j": 0.0, "sigma_j": 0.8},
        "contract": {"strike": 100, "maturity": 1, "side": "call"},
        "numerics": {"n": 101, "m0": 50},
        "spots": [90, 100]
    })");
}

std::string error_of(const json& j) {
    try {
        config::parse_run_config(j);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("run configuration parses with defaults") {
    const auto rc = config::parse_run_config(base());
    CHECK(rc.model.kind == models::ModelKind::Merton);
    CHECK(rc.model.q == 0.0);
    CHECK(rc.contract.exercise == stepper::Exercise::European);
    CHECK(rc.numerics.n == 101);
    CHECK(rc.numerics.half_width == 10.0);
    CHECK(rc.spots.size() == 2);
    CHECK(rc.output.format == "csv");
}

TEST_CASE("spots default to the strike") {
    auto j = base();
    j.erase("spots");
    const auto rc = config::parse_run_config(j);
    REQUIRE(rc.spots.size() == 1);
    CHECK(rc.spots[0] == 100.0);
}

TEST_CASE("diagnostics name the offending field") {
    auto j = base();
    j["model"]["sigma"] = -0.2;
    CHECK(error_of(j).find("model.sigma") != std::string::npos);

    j = base();
    j["model"]["sigma"] = "high";
    CHECK(error_of(j) == "model.sigma: expected a number");

    j = base();
    j["contract"].erase("strike");
    CHECK(error_of(j) == "contract.strike: missing required field");

    j = base();
    j["numerics"]["nodes"] = 5;
    CHECK(error_of(j) == "numerics.nodes: unknown field");

    j = base();
    j["contract"]["exercise"] = "american";
    CHECK(error_of(j).find("contract") != std::string::npos);

    j = base();
    j["spots"] = json::array({1.0, -2.0});
    CHECK(error_of(j) == "config.spots[1]: expected a positive number");
}

TEST_CASE("serialized blocks parse back") {
    const auto rc = config::parse_run_config(base());
    json round{{"model", config::model_to_json(rc.model)},
               {"contract", config::contract_to_json(rc.contract)},
               {"numerics", config::numerics_to_json(rc.numerics)}};
    const auto again = config::parse_run_config(round);
    CHECK(again.model.merton_sigma_j == rc.model.merton_sigma_j);
    CHECK(again.contract.side == rc.contract.side);
    CHECK(again.numerics.m0 == rc.numerics.m0);
}

TEST_CASE("built-in descriptors load and round-trip") {
    const auto names = config::list_descriptors(RBFPIDE_TABLES_DIR);
    CHECK(names.size() >= 11);
    for (const auto& name : names) {
        CAPTURE(name);
        const auto d = config::load_descriptor(name, RBFPIDE_TABLES_DIR);
        CHECK(d.name == name);
        CHECK_FALSE(d.levels.empty());
        const auto again = config::parse_descriptor(config::descriptor_to_json(d));
        CHECK(config::descriptor_to_json(again) == config::descriptor_to_json(d));
    }
    try {
        config::load_descriptor("nonexistent", RBFPIDE_TABLES_DIR);
        FAIL("expected an unknown descriptor");
    } catch (const Error& e) {
        CHECK(e.is_input_error());
    }
}
