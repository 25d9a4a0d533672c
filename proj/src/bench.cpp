#include "rbfpide/bench.hpp"

#include "rbfpide/config.hpp"
#include "rbfpide/errors.hpp"
#include "rbfpide/rbf.hpp"
#include "rbfpide/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace rbfpide::bench {

std::size_t EvaluationGrid::nearest(double x) const {
    std::size_t best = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < points.size(); ++k) {
        const double d = std::abs(points[k] - x);
        if (d < gap) {
            gap = d;
            best = static_cast<std::size_t>(k);
        }
    }
    return best;
}

EvaluationGrid EvaluationGrid::for_strike(double strike, std::size_t count) {
    if (count < 2) throw Error(ErrorKind::Config, "evaluation grid needs at least 2 points");
    if (!(strike > 0.0)) throw Error(ErrorKind::InvalidContract, "contract.strike must be > 0");
    EvaluationGrid g;
    const double lo = std::log(strike / 20.0);
    const double hi = std::log(2.0 * strike);
    g.points.resize(static_cast<Eigen::Index>(count));
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) {
        g.points[static_cast<Eigen::Index>(k)] = lo + static_cast<double>(k) * step;
    }
    g.points[static_cast<Eigen::Index>(count - 1)] = hi;
    return g;
}

GammaRoughness gamma_roughness(const std::vector<double>& spots, const std::vector<double>& gamma,
                               double strike) {
    if (spots.size() != gamma.size()) {
        throw Error(ErrorKind::Config, "gamma roughness: spot and gamma curves differ in length");
    }
    GammaRoughness out;
    std::vector<double> second;
    for (std::size_t k = 1; k + 1 < gamma.size(); ++k) {
        const double d2 = std::abs(gamma[k + 1] - 2.0 * gamma[k] + gamma[k - 1]);
        second.push_back(d2);
        if (std::abs(spots[k] / strike - 1.0) <= 0.2) out.near_strike = std::max(out.near_strike, d2);
    }
    if (!second.empty()) {
        const auto mid = second.begin() + static_cast<std::ptrdiff_t>(second.size() / 2);
        std::nth_element(second.begin(), mid, second.end());
        out.median = *mid;
    }
    return out;
}

ErrorReport error_metrics(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact,
                          std::optional<std::size_t> spot_index) {
    if (approx.size() != exact.size()) {
        throw Error(ErrorKind::LengthMismatch, "error metrics need curves of equal length");
    }
    if (approx.size() == 0) throw Error(ErrorKind::LengthMismatch, "error metrics need data");
    const Eigen::VectorXd err = (approx - exact).cwiseAbs();
    ErrorReport r;
    r.e_inf = err.maxCoeff();
    r.e_2 = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
    if (spot_index) {
        const auto k = static_cast<Eigen::Index>(*spot_index);
        if (k >= err.size()) throw Error(ErrorKind::LengthMismatch, "spot index out of range");
        r.e_rel = err[k] / std::abs(exact[k]);
    }
    return r;
}

double pairwise_rate(double e_prev, double e_cur, double level_prev, double level_cur) {
    return std::log(e_prev / e_cur) / std::log(level_cur / level_prev);
}

void fit_rate(std::vector<ErrorReport>& reports, RefinementAxis axis) {
    for (std::size_t k = 1; k < reports.size(); ++k) {
        auto& prev = reports[k - 1];
        auto& cur = reports[k];
        const double a = static_cast<double>(axis == RefinementAxis::Space ? prev.n : prev.m0);
        const double b = static_cast<double>(axis == RefinementAxis::Space ? cur.n : cur.m0);
        if (!(b > a)) {
            throw Error(ErrorKind::Config,
                        axis == RefinementAxis::Space
                            ? "spatial refinement needs strictly increasing n"
                            : "temporal refinement needs strictly increasing m0");
        }
        cur.rate_inf = pairwise_rate(prev.e_inf, cur.e_inf, a, b);
        cur.rate_2 = pairwise_rate(prev.e_2, cur.e_2, a, b);
        cur.degraded = cur.e_inf > prev.e_inf || cur.e_2 > prev.e_2;
    }
}

std::string gate_name(Gate::Kind kind) {
    switch (kind) {
    case Gate::Kind::MaxE2: return "max_e_2";
    case Gate::Kind::MaxEInf: return "max_e_inf";
    case Gate::Kind::MaxERel: return "max_e_rel";
    case Gate::Kind::Rate2Range: return "rate_2_range";
    case Gate::Kind::RateInfRange: return "rate_inf_range";
    case Gate::Kind::EInfReduction: return "e_inf_reduction";
    }
    return "unknown";
}

std::string to_string(OracleKind kind) {
    switch (kind) {
    case OracleKind::BlackScholes: return "black_scholes";
    case OracleKind::MertonSeries: return "merton_series";
    case OracleKind::Fst: return "fst";
    case OracleKind::RefinedSteps: return "refined_steps";
    }
    return "unknown";
}

std::string to_string(RefinementAxis axis) { return axis == RefinementAxis::Space ? "space" : "time"; }

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

bool within(double v, const Gate& g) { return std::isfinite(v) && v >= g.min && v <= g.max; }

Eigen::VectorXd analytic_oracle(const ExperimentDescriptor& d, const EvaluationGrid& eval) {
    Eigen::VectorXd out(eval.points.size());
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        const double s = std::exp(eval.points[k]);
        out[k] = d.oracle.kind == OracleKind::BlackScholes
                     ? reference::black_scholes_price(d.model.r, d.model.q, d.model.sigma,
                                                      d.contract, s, d.contract.maturity)
                     : reference::merton_series_price(d.model, d.contract, s, d.contract.maturity);
    }
    return out;
}

Eigen::VectorXd fst_oracle(const ExperimentDescriptor& d, const EvaluationGrid& eval) {
    const auto grid =
        reference::FstGrid::centered(d.contract.strike, d.oracle.fst_size, d.oracle.fst_half_width);
    const auto curve = d.contract.exercise == stepper::Exercise::American
                           ? reference::fst_price_american(d.model, d.contract, grid,
                                                           d.oracle.fst_steps)
                           : reference::fst_price_european(d.model, d.contract, grid);
    return curve.at(eval.points);
}

}  // namespace

std::vector<GateOutcome> evaluate_gates(const std::vector<ErrorReport>& rows,
                                        const std::vector<Gate>& gates) {
    std::vector<GateOutcome> out;
    for (const auto& g : gates) {
        GateOutcome o;
        o.gate = g;
        std::ostringstream detail;
        if (rows.empty()) {
            o.passed = false;
            detail << "no rows";
        } else {
            const auto& last = rows.back();
            switch (g.kind) {
            case Gate::Kind::MaxE2:
                o.passed = last.e_2 <= g.max;
                detail << "e_2 " << fmt(last.e_2) << " <= " << fmt(g.max);
                break;
            case Gate::Kind::MaxEInf:
                o.passed = last.e_inf <= g.max;
                detail << "e_inf " << fmt(last.e_inf) << " <= " << fmt(g.max);
                break;
            case Gate::Kind::MaxERel:
                o.passed = last.e_rel.has_value() && *last.e_rel <= g.max;
                detail << "e_rel " << (last.e_rel ? fmt(*last.e_rel) : "n/a") << " <= " << fmt(g.max);
                break;
            case Gate::Kind::Rate2Range:
            case Gate::Kind::RateInfRange:
            case Gate::Kind::EInfReduction: {
                o.passed = rows.size() >= 2;
                detail << "[" << g.min << ", " << g.max << "]:";
                for (std::size_t k = 1; k < rows.size(); ++k) {
                    double v = 0.0;
                    if (g.kind == Gate::Kind::Rate2Range) v = rows[k].rate_2.value_or(NAN);
                    if (g.kind == Gate::Kind::RateInfRange) v = rows[k].rate_inf.value_or(NAN);
                    if (g.kind == Gate::Kind::EInfReduction) v = rows[k - 1].e_inf / rows[k].e_inf;
                    o.passed = o.passed && within(v, g);
                    detail << " " << fmt(v);
                }
                break;
            }
            }
        }
        o.detail = detail.str();
        out.push_back(std::move(o));
    }
    return out;
}

bool TableResult::passed() const {
    if (!complete) return false;
    return std::all_of(gates.begin(), gates.end(), [](const GateOutcome& g) { return g.passed; });
}

TableResult run_table(const ExperimentDescriptor& descriptor) {
    TableResult table;
    table.descriptor = descriptor;
    try {
        descriptor.model.validate();
        descriptor.contract.validate();
        if (descriptor.levels.empty()) throw Error(ErrorKind::Config, "levels must not be empty");
        const auto eval = EvaluationGrid::for_strike(descriptor.contract.strike, descriptor.eval_count);
        const std::size_t spot =
            eval.nearest(std::log(descriptor.spot.value_or(descriptor.contract.strike)));

        Eigen::VectorXd fixed_oracle;
        switch (descriptor.oracle.kind) {
        case OracleKind::BlackScholes:
        case OracleKind::MertonSeries:
            fixed_oracle = analytic_oracle(descriptor, eval);
            break;
        case OracleKind::Fst:
            fixed_oracle = fst_oracle(descriptor, eval);
            break;
        case OracleKind::RefinedSteps:
            break;
        }

        std::map<std::size_t, stepper::PricingRun> operators;
        std::map<std::size_t, Eigen::VectorXd> refined;
        for (const auto& level : descriptor.levels) {
            auto it = operators.find(level.n);
            if (it == operators.end()) {
                auto numerics = descriptor.numerics;
                numerics.n = level.n;
                numerics.m0 = level.m0;
                it = operators
                         .emplace(level.n, stepper::build_operator(descriptor.model,
                                                                   descriptor.contract, numerics))
                         .first;
            }
            const auto& run = it->second;
            const auto sol = stepper::solve(run, descriptor.contract, level.m0);
            const Eigen::VectorXd approx = sol.values(eval.points);

            const Eigen::VectorXd* exact = &fixed_oracle;
            if (descriptor.oracle.kind == OracleKind::RefinedSteps) {
                auto ref = refined.find(level.n);
                if (ref == refined.end()) {
                    const auto fine = stepper::solve(run, descriptor.contract, descriptor.oracle.refined_m0);
                    ref = refined.emplace(level.n, fine.values(eval.points)).first;
                }
                exact = &ref->second;
            }
            auto report = error_metrics(approx, *exact, spot);
            report.n = level.n;
            report.m0 = level.m0;
            table.rows.push_back(report);
        }
        fit_rate(table.rows, descriptor.axis);
    } catch (const Error& e) {
        table.complete = false;
        table.failure = e.what();
        if (!table.rows.empty()) {
            try {
                fit_rate(table.rows, descriptor.axis);
            } catch (const Error&) {
            }
        }
    }
    table.gates = evaluate_gates(table.rows, descriptor.gates);
    return table;
}

std::string to_csv(const TableResult& table) {
    std::ostringstream out;
    out << "n,m0,e_inf,rate_inf,e_2,rate_2\n";
    for (const auto& r : table.rows) {
        out << r.n << ',' << r.m0 << ',' << fmt(r.e_inf) << ','
            << (r.rate_inf ? fmt(*r.rate_inf) : "") << ',' << fmt(r.e_2) << ','
            << (r.rate_2 ? fmt(*r.rate_2) : "") << '\n';
    }
    if (!table.complete) out << "# partial: " << table.failure << '\n';
    return out.str();
}

nlohmann::json to_json(const TableResult& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        nlohmann::json row{{"n", r.n}, {"m0", r.m0}, {"e_inf", r.e_inf}, {"e_2", r.e_2}};
        row["rate_inf"] = r.rate_inf ? nlohmann::json(*r.rate_inf) : nlohmann::json(nullptr);
        row["rate_2"] = r.rate_2 ? nlohmann::json(*r.rate_2) : nlohmann::json(nullptr);
        row["e_rel"] = r.e_rel ? nlohmann::json(*r.e_rel) : nlohmann::json(nullptr);
        row["degraded"] = r.degraded;
        rows.push_back(std::move(row));
    }
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : table.gates) {
        gates.push_back({{"kind", gate_name(g.gate.kind)}, {"passed", g.passed}, {"detail", g.detail}});
    }
    nlohmann::json out{{"descriptor", config::descriptor_to_json(table.descriptor)},
                       {"rows", rows},
                       {"gates", gates},
                       {"complete", table.complete},
                       {"passed", table.passed()}};
    if (!table.complete) out["failure"] = table.failure;
    return out;
}

}  // namespace rbfpide::bench
