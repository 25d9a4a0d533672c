#include "rbfpide/bench.hpp"
#include "rbfpide/errors.hpp"
#include "rbfpide/stepper.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace rbfpide;
using models::JumpModel;
using stepper::ContractSpec;
using stepper::Exercise;
using stepper::OptionSide;

namespace {

ContractSpec put(double strike, double maturity, Exercise ex = Exercise::European) {
    return {strike, maturity, OptionSide::Put, ex};
}

stepper::NumericsConfig numerics(std::size_t n, std::size_t m0) {
    stepper::NumericsConfig c;
    c.n = n;
    c.m0 = m0;
    return c;
}

Eigen::VectorXd node_vector(const rbf::CollocationGrid& g) {
    return Eigen::Map<const Eigen::VectorXd>(g.nodes.data(), static_cast<Eigen::Index>(g.size()));
}

}  // namespace

TEST_CASE("payoffs") {
    CHECK(stepper::payoff(put(1.0, 1.0), 0.0) == 0.0);
    CHECK(stepper::payoff(put(1.0, 1.0), std::log(0.5)) == doctest::Approx(0.5));
    const ContractSpec call{100.0, 1.0, OptionSide::Call, Exercise::European};
    CHECK(stepper::payoff(call, std::log(120.0)) == doctest::Approx(20.0));
    CHECK(stepper::payoff(call, std::log(80.0)) == 0.0);
}

TEST_CASE("contract validation") {
    CHECK_THROWS_AS((ContractSpec{1.0, 1.0, OptionSide::Call, Exercise::American}.validate()), Error);
    CHECK_THROWS_AS((ContractSpec{-1.0, 1.0, OptionSide::Put, Exercise::European}.validate()), Error);
    CHECK_THROWS_AS((ContractSpec{1.0, 0.0, OptionSide::Put, Exercise::European}.validate()), Error);
    CHECK_THROWS_AS(stepper::price(JumpModel::pure_diffusion(0.04, 0, 0.29), put(1.0, 1.0),
                                   numerics(41, 1)),
                    Error);
}

TEST_CASE("vanishing maturity returns the payoff at the nodes") {
    const auto m = JumpModel::merton(0.05, 0, 0.15, 0.1, -0.9, 0.45);
    const auto c = put(1.0, 1e-12);
    const auto run = stepper::price(m, c, numerics(201, 2));
    const Eigen::VectorXd x = node_vector(run.solution.grid);
    CHECK((run.solution.values(x) - stepper::payoff(c, x)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("American dominates European and the payoff") {
    const auto m = JumpModel::kou(0.05, 0.0, 0.2, 0.2, 0.5, 3.0, 2.0);
    auto num = numerics(151, 40);
    const auto euro = put(1.0, 0.5);
    const auto amer = put(1.0, 0.5, Exercise::American);
    const auto run = stepper::build_operator(m, euro, num);
    const auto ve = stepper::solve(run, euro, num.m0);
    const auto va = stepper::solve(run, amer, num.m0);

    const auto eval = bench::EvaluationGrid::for_strike(1.0);
    const Eigen::VectorXd gap = va.values(eval.points) - ve.values(eval.points);
    CHECK(gap.minCoeff() >= -1e-10);

    const Eigen::VectorXd x = node_vector(va.grid);
    const Eigen::VectorXd over = va.values(x) - stepper::payoff(amer, x);
    CHECK(over.minCoeff() >= -1e-12);
    CHECK(va.exercise_boundary.size() == num.m0);
}

TEST_CASE("projection is idempotent") {
    Eigen::VectorXd u(5), floor(5);
    u << 0.1, -0.2, 0.5, 0.0, 0.3;
    floor << 0.2, 0.0, 0.1, 0.0, 0.4;
    const Eigen::VectorXd once = stepper::project(u, floor);
    CHECK(once == stepper::project(once, floor));
    CHECK((once - floor).minCoeff() >= 0.0);
}

TEST_CASE("Delta limits for a diffusion put") {
    const auto run = stepper::price(JumpModel::pure_diffusion(0.04, 0.0, 0.29), put(1.0, 1.0),
                                    numerics(601, 200));
    CHECK(stepper::greeks(run.solution, 0.05).delta == doctest::Approx(-1.0).epsilon(5e-3));
    CHECK(std::abs(stepper::greeks(run.solution, 2.0).delta) <= 5e-3);
    CHECK(std::abs(stepper::greeks(run.solution, 3.0).delta) <= 5e-3);
    CHECK_THROWS_AS(stepper::greeks(run.solution, 0.0), Error);
}

TEST_CASE("Greeks track the closed form") {
    const double r = 0.3, q = 0.1, sigma = 1.0, strike = 1.0, t = 0.25;
    const auto run = stepper::price(JumpModel::pure_diffusion(r, q, sigma), put(strike, t),
                                    numerics(601, 400));
    double worst_delta = 0.0;
    double worst_gamma = 0.0;
    for (int k = 0; k <= 390; ++k) {
        const double s = 0.05 + k * (2.0 - 0.05) / 390.0;
        const auto g = stepper::greeks(run.solution, s);
        const auto ref = oracle::bs_put_greeks(s, strike, r, q, sigma, t);
        worst_delta = std::max(worst_delta, std::abs(g.delta - ref.delta));
        worst_gamma = std::max(worst_gamma, std::abs(g.gamma - ref.gamma));
    }
    MESSAGE("max Delta error " << worst_delta << ", max Gamma error " << worst_gamma);
    CHECK(worst_delta <= 5e-3);
    CHECK(worst_gamma <= 5e-3);
}

TEST_CASE("European step refinement converges at second order") {
    const auto m = JumpModel::merton(0.05, 0, 0.15, 0.1, -0.9, 0.45);
    const auto c = put(1.0, 0.25);
    auto num = numerics(101, 10);
    const auto run = stepper::build_operator(m, c, num);
    const auto eval = bench::EvaluationGrid::for_strike(1.0, 200);
    const Eigen::VectorXd v1 = stepper::solve(run, c, 20).values(eval.points);
    const Eigen::VectorXd v2 = stepper::solve(run, c, 40).values(eval.points);
    const Eigen::VectorXd v3 = stepper::solve(run, c, 80).values(eval.points);
    const double ratio = (v1 - v2).cwiseAbs().maxCoeff() / (v2 - v3).cwiseAbs().maxCoeff();
    MESSAGE("successive-difference ratio " << ratio);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("diffusion put matches Black-Scholes") {
    const auto c = put(1.0, 1.0);
    const auto run = stepper::price(JumpModel::pure_diffusion(0.04, 0.0, 0.29), c, numerics(401, 400));
    const auto eval = bench::EvaluationGrid::for_strike(1.0);
    Eigen::VectorXd exact(eval.points.size());
    for (Eigen::Index k = 0; k < exact.size(); ++k) {
        const double s = std::exp(eval.points[k]);
        const double vol = 0.29;
        const double d1 = (std::log(s) + (0.04 + 0.5 * vol * vol)) / vol;
        const double d2 = d1 - vol;
        exact[k] = std::exp(-0.04) * oracle::norm_cdf(-d2) - s * oracle::norm_cdf(-d1);
    }
    const auto rep = bench::error_metrics(run.solution.values(eval.points), exact);
    MESSAGE("E2 " << rep.e_2 << ", Einf " << rep.e_inf);
    CHECK(rep.e_2 <= 2e-4);
}
