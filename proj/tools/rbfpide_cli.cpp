#include "rbfpide/bench.hpp"
#include "rbfpide/config.hpp"
#include "rbfpide/errors.hpp"
#include "rbfpide/reference.hpp"
#include "rbfpide/stepper.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace rbfpide;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerics = 3;
constexpr int kExitGates = 4;

struct Overrides {
    std::optional<std::size_t> n;
    std::optional<std::size_t> m0;
    std::optional<std::string> model;
    std::optional<std::string> format;
    std::optional<std::string> out;
    bool sign_as_printed = false;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

config::RunConfig load_config(const std::string& path, const Overrides& o) {
    auto raw = config::read_json_file(path);
    if (o.model) {
        // Inline JSON object or a file holding one.
        json block;
        if (!o.model->empty() && o.model->front() == '{') {
            try {
                block = json::parse(*o.model);
            } catch (const json::parse_error& e) {
                throw Error(ErrorKind::Config, std::string("--model: invalid JSON: ") + e.what());
            }
        } else {
            block = config::read_json_file(*o.model);
        }
        raw["model"] = block;
    }
    auto rc = config::parse_run_config(raw);
    if (o.n) rc.numerics.n = *o.n;
    if (o.m0) rc.numerics.m0 = *o.m0;
    if (o.sign_as_printed) rc.numerics.sign = collocation::DiscountSign::AsPrinted;
    if (o.format) {
        if (*o.format != "csv" && *o.format != "json") {
            throw Error(ErrorKind::Config, "--format: expected 'csv' or 'json'");
        }
        rc.output.format = *o.format;
    }
    if (o.out) rc.output.path = *o.out;
    rc.numerics.validate();
    return rc;
}

void emit(const std::optional<std::string>& path, const std::string& text) {
    if (!path) {
        std::cout << text;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Config, "cannot write '" + *path + "'");
    out << text;
}

struct OracleQuote {
    std::string name;
    std::vector<double> prices;
};

std::optional<OracleQuote> oracle_prices(const config::RunConfig& rc) {
    const auto& m = rc.model;
    const auto& c = rc.contract;
    OracleQuote q;
    if (c.exercise == stepper::Exercise::European && (m.lambda == 0.0 || !m.has_jumps())) {
        q.name = "black_scholes";
        for (double s : rc.spots) {
            q.prices.push_back(reference::black_scholes_price(m.r, m.q, m.sigma, c, s, c.maturity));
        }
        return q;
    }
    if (c.exercise == stepper::Exercise::European && m.kind == models::ModelKind::Merton) {
        q.name = "merton_series";
        for (double s : rc.spots) q.prices.push_back(reference::merton_series_price(m, c, s, c.maturity));
        return q;
    }
    const auto grid =
        reference::FstGrid::centered(c.strike, rc.numerics.fst_size, rc.numerics.fst_half_width);
    const auto curve = c.exercise == stepper::Exercise::American
                           ? reference::fst_price_american(m, c, grid, rc.numerics.fst_steps)
                           : reference::fst_price_european(m, c, grid);
    q.name = "fst";
    for (double s : rc.spots) q.prices.push_back(curve.at(std::log(s)));
    return q;
}

int cmd_price(const std::string& config_path, const Overrides& o) {
    const auto rc = load_config(config_path, o);
    const auto run = stepper::price(rc.model, rc.contract, rc.numerics);
    const auto oracle = oracle_prices(rc);

    std::ostringstream out;
    if (rc.output.format == "json") {
        json rows = json::array();
        for (std::size_t k = 0; k < rc.spots.size(); ++k) {
            const double s = rc.spots[k];
            const double v = run.solution.value(std::log(s));
            json row{{"spot", s}, {"price", v}};
            if (oracle) {
                row["reference"] = oracle->prices[k];
                row["rel_error"] = std::abs(v - oracle->prices[k]) / std::abs(oracle->prices[k]);
            }
            rows.push_back(row);
        }
        json doc{{"model", config::model_to_json(rc.model)},
                 {"contract", config::contract_to_json(rc.contract)},
                 {"numerics", config::numerics_to_json(rc.numerics)},
                 {"oracle", oracle ? json(oracle->name) : json(nullptr)},
                 {"prices", rows}};
        out << doc.dump(2) << '\n';
    } else {
        out << "spot,price,reference,rel_error,oracle\n";
        for (std::size_t k = 0; k < rc.spots.size(); ++k) {
            const double s = rc.spots[k];
            const double v = run.solution.value(std::log(s));
            out << fmt(s) << ',' << fmt(v) << ',';
            if (oracle) {
                const double ref = oracle->prices[k];
                out << fmt(ref) << ',' << fmt(std::abs(v - ref) / std::abs(ref)) << ',' << oracle->name;
            } else {
                out << ",,";
            }
            out << '\n';
        }
    }
    emit(rc.output.path, out.str());
    return kExitOk;
}

int cmd_greeks(const std::string& config_path, const Overrides& o) {
    const auto rc = load_config(config_path, o);
    const auto run = stepper::price(rc.model, rc.contract, rc.numerics);
    const auto eval = bench::EvaluationGrid::for_strike(rc.contract.strike, rc.greek_points);

    std::vector<double> spots;
    std::vector<stepper::Greeks> g;
    for (Eigen::Index k = 0; k < eval.points.size(); ++k) {
        const double s = std::exp(eval.points[k]);
        spots.push_back(s);
        g.push_back(stepper::greeks(run.solution, s));
    }

    std::vector<double> gammas;
    for (const auto& v : g) gammas.push_back(v.gamma);
    const auto rough = bench::gamma_roughness(spots, gammas, rc.contract.strike);
    const double near_peak = rough.near_strike;
    const double median = rough.median;

    std::ostringstream out;
    if (rc.output.format == "json") {
        json rows = json::array();
        for (std::size_t k = 0; k < g.size(); ++k) {
            rows.push_back({{"s", spots[k]}, {"delta", g[k].delta}, {"gamma", g[k].gamma}});
        }
        json doc{{"greeks", rows},
                 {"gamma_second_difference_near_strike", near_peak},
                 {"gamma_second_difference_median", median}};
        out << doc.dump(2) << '\n';
    } else {
        out << "s,delta,gamma\n";
        for (std::size_t k = 0; k < g.size(); ++k) {
            out << fmt(spots[k]) << ',' << fmt(g[k].delta) << ',' << fmt(g[k].gamma) << '\n';
        }
        out << "# gamma_second_difference_near_strike=" << fmt(near_peak)
            << " median=" << fmt(median) << '\n';
    }
    emit(rc.output.path, out.str());
    return kExitOk;
}

int cmd_table(const std::string& name, const std::string& tables_dir, const Overrides& o) {
    auto d = config::load_descriptor(name, tables_dir);
    if (o.sign_as_printed) d.numerics.sign = collocation::DiscountSign::AsPrinted;
    const auto table = bench::run_table(d);
    const std::string format = o.format.value_or("csv");
    if (format != "csv" && format != "json") {
        throw Error(ErrorKind::Config, "--format: expected 'csv' or 'json'");
    }
    emit(o.out, format == "json" ? bench::to_json(table).dump(2) + "\n" : bench::to_csv(table));

    std::ostream& status = o.out ? std::cout : std::cerr;
    status << (table.passed() ? "PASS " : "FAIL ") << d.name;
    for (const auto& g : table.gates) {
        status << " | " << bench::gate_name(g.gate.kind) << (g.passed ? " ok " : " FAILED ") << g.detail;
    }
    status << '\n';
    if (!table.complete) {
        std::cerr << "table aborted: " << table.failure << '\n';
        return kExitNumerics;
    }
    return table.passed() ? kExitOk : kExitGates;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jump-diffusion option pricing by cubic RBF collocation"};
    app.require_subcommand(1);

    Overrides o;
    std::string config_path;
    std::string table_name;
    std::string tables_dir = RBFPIDE_TABLES_DIR;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--format", o.format, "csv or json");
        sub->add_option("--out", o.out, "Write output to this path");
        sub->add_flag("--sign-as-printed", o.sign_as_printed,
                      "Use +(r + lambda) in the reduced operator");
    };
    auto add_run = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
        sub->add_option("--n", o.n, "Collocation node count");
        sub->add_option("--m0", o.m0, "Time step count");
        sub->add_option("--model", o.model, "Model block as inline JSON or a file path");
        add_common(sub);
    };

    auto* price = app.add_subcommand("price", "Price a contract at the configured spots");
    add_run(price);
    auto* greeks = app.add_subcommand("greeks", "Delta and Gamma over [K/20, 2K]");
    add_run(greeks);
    auto* table = app.add_subcommand("table", "Run a convergence table");
    table->add_option("name", table_name, "Descriptor name or path")->required();
    table->add_option("--tables-dir", tables_dir, "Directory of built-in descriptors");
    add_common(table);
    auto* list = app.add_subcommand("list", "List built-in table descriptors");
    list->add_option("--tables-dir", tables_dir, "Directory of built-in descriptors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (price->parsed()) return cmd_price(config_path, o);
        if (greeks->parsed()) return cmd_greeks(config_path, o);
        if (table->parsed()) return cmd_table(table_name, tables_dir, o);
        if (list->parsed()) {
            for (const auto& n : config::list_descriptors(tables_dir)) std::cout << n << '\n';
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_input_error() ? kExitInput : kExitNumerics;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerics;
    }
    return kExitInput;
}
