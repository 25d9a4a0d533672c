#include "rbfpide/errors.hpp"
#include "rbfpide/models.hpp"
#include "rbfpide/quadrature.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace rbfpide;
using models::JumpModel;

namespace {

std::vector<JumpModel> random_models(std::size_t count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<JumpModel> out;
    for (std::size_t k = 0; k < count; ++k) {
        const double r = 0.1 * u(rng);
        const double q = 0.05 * u(rng);
        const double sigma = 0.05 + 0.5 * u(rng);
        const double lambda = 0.01 + 0.5 * u(rng);
        if (k % 2 == 0) {
            out.push_back(JumpModel::merton(r, q, sigma, lambda, -1.0 + 1.2 * u(rng),
                                            0.05 + 0.8 * u(rng)));
        } else {
            out.push_back(JumpModel::kou(r, q, sigma, lambda, 0.05 + 0.9 * u(rng),
                                         1.5 + 8.0 * u(rng), 1.2 + 8.0 * u(rng)));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("jump density at known points") {
    CHECK(models::jump_density(JumpModel::merton(0, 0, 0.2, 0.1, 0.0, 1.0), 0.0) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(models::jump_density(JumpModel::kou(0, 0, 0.2, 0.1, 0.5, 3.0, 2.0), 0.0) ==
          doctest::Approx(1.5).epsilon(1e-15));
    CHECK(models::jump_density(JumpModel::merton(0, 0, 0.2, 0.1, -0.9, 0.45), -0.9) ==
          doctest::Approx(1.0 / (std::sqrt(2.0 * std::numbers::pi) * 0.45)).epsilon(1e-14));
    CHECK(models::jump_density(JumpModel::kou(0, 0, 0.2, 0.1, 0.3, 3.0, 2.0), -0.5) ==
          doctest::Approx(0.7 * 2.0 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("pure diffusion has no jump density") {
    CHECK_THROWS_AS(models::jump_density(JumpModel::pure_diffusion(0.05, 0, 0.2), 0.0), Error);
}

TEST_CASE("jump density integrates to one") {
    quadrature::Options opt;
    opt.abs_tol = 1e-13;
    for (const auto& m : random_models(40, 7)) {
        auto f = [&](double y) { return models::jump_density(m, y); };
        const double mass = quadrature::integrate(f, std::vector<double>{-60.0, 0.0, 60.0}, opt).value;
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(models::jump_density(m, 0.37) >= 0.0);
    }
}

TEST_CASE("compensator values") {
    CHECK(models::eta(JumpModel::merton(0, 0, 0.2, 0.1, 0.0, 1e-9)) == doctest::Approx(0.0));
    CHECK(models::eta(JumpModel::kou(0, 0, 0.2, 0.1, 0.5, 3.0, 2.0)) ==
          doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(models::eta(JumpModel::merton(0, 0, 0.2, 0.1, 0.0, 0.8)) ==
          doctest::Approx(0.3771277643359572).epsilon(1e-13));
    CHECK(models::eta(JumpModel::pure_diffusion(0.05, 0, 0.2)) == 0.0);
}

TEST_CASE("Kou compensator diverges without a finite upward mean") {
    JumpModel m = JumpModel::kou(0, 0, 0.2, 0.1, 0.5, 3.0, 2.0);
    m.kou_alpha1 = 1.0;
    try {
        models::eta(m);
        FAIL("expected a divergent compensator");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DivergentCompensator);
    }
}

TEST_CASE("compensator matches the integral over the truncation window") {
    for (const auto& m : random_models(20, 11)) {
        const auto w = models::truncation_bounds(m);
        auto f = [&](double y) { return std::expm1(y) * models::jump_density(m, y); };
        quadrature::Options opt;
        opt.abs_tol = 1e-13;
        const double integral =
            quadrature::integrate(f, std::vector<double>{w.y_lo, 0.0, w.y_hi}, opt).value;
        CHECK(integral == doctest::Approx(models::eta(m)).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("characteristic exponent") {
    const auto kou = JumpModel::kou(0, 0, 0.2, 0.2, 0.5, 3.0, 2.0);
    CHECK(std::abs(models::characteristic_exponent(kou, 0.0)) < 1e-15);
    CHECK(std::abs(models::characteristic_exponent(kou, std::complex<double>(0.0, -1.0))) < 1e-12);

    const auto diff = JumpModel::merton(0.05, 0, 0.2, 0.0, 0.0, 0.3);
    const auto v = models::characteristic_exponent(diff, 1.0);
    CHECK(v.real() == doctest::Approx(-0.02).epsilon(1e-14));
    CHECK(v.imag() == doctest::Approx(0.03).epsilon(1e-14));
}

TEST_CASE("exponent at -i equals the carry for random models") {
    for (const auto& m : random_models(60, 3)) {
        const auto v = models::characteristic_exponent(m, std::complex<double>(0.0, -1.0));
        CHECK(std::abs(v.real() - (m.r - m.q)) < 1e-12);
        CHECK(std::abs(v.imag()) < 1e-12);
    }
}

TEST_CASE("truncation bounds") {
    const auto merton = JumpModel::merton(0, 0, 0.2, 0.1, -0.9, 0.45);
    const double reach =
        std::sqrt(-2.0 * 0.2025 * std::log(3.72e-40 * 0.45 * std::sqrt(2.0 * std::numbers::pi) / 2.0));
    const auto w = models::truncation_bounds(merton, 3.72e-40);
    CHECK(w.y_hi == doctest::Approx(reach + 0.9).epsilon(1e-14));
    CHECK(w.y_lo == doctest::Approx(-w.y_hi));
    // The density equals epsilon / 2 at both ends of its own reach.
    const double edge = models::jump_density(merton, -0.9 - reach);
    CHECK(edge == doctest::Approx(3.72e-40 / 2.0).epsilon(1e-10));
    CHECK(w.y_lo <= -0.9 - reach);

    const auto up = JumpModel::merton(0, 0, 0.2, 0.1, 0.3, 0.45);
    CHECK(models::truncation_bounds(up, 3.72e-40).y_hi == doctest::Approx(reach + 0.3).epsilon(1e-14));

    const auto kou = JumpModel::kou(0, 0, 0.2, 0.1, 0.5, 3.0, 2.0);
    CHECK(models::truncation_bounds(kou, 3.72e-40).y_hi ==
          doctest::Approx(std::log(7.44e-40) / -2.0).epsilon(1e-14));

    const auto unit = JumpModel::merton(0, 0, 0.2, 0.1, 0.0, 1.0);
    try {
        models::truncation_bounds(unit, 2.0 / std::sqrt(2.0 * std::numbers::pi));
        FAIL("expected a degenerate window");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InfeasibleThreshold);
    }
    CHECK_THROWS_AS(models::truncation_bounds(unit, -1.0), Error);
}

TEST_CASE("smaller threshold widens the window") {
    for (const auto& m : random_models(20, 5)) {
        double prev_lo = 0.0;
        double prev_hi = 0.0;
        for (double eps : {1e-4, 1e-8, 1e-16, 1e-30, 3.72e-40}) {
            const auto w = models::truncation_bounds(m, eps);
            CHECK(w.y_hi > prev_hi);
            CHECK(w.y_lo < prev_lo);
            prev_lo = w.y_lo;
            prev_hi = w.y_hi;
        }
    }
}

TEST_CASE("Merton tail moment stays under its bound") {
    for (double sd : {0.2, 0.45, 0.8}) {
        const auto m = JumpModel::merton(0, 0, 0.2, 0.1, 0.0, sd);
        oracle::JumpLaw law{false, 0.0, sd};
        for (double eps : {1e-6, 1e-12}) {
            const auto w = models::truncation_bounds(m, eps);
            auto f = [&](double y) { return std::abs(y) * oracle::density(law, y); };
            const double tail = oracle::trapezoid(f, w.y_hi, w.y_hi + 40.0 * sd, 400000) +
                                oracle::trapezoid(f, w.y_lo - 40.0 * sd, w.y_lo, 400000);
            CHECK(tail <= models::merton_tail_bound(m, eps));
        }
    }
}

TEST_CASE("model validation names the field") {
    try {
        JumpModel::merton(0.05, 0, -0.1, 0.1, 0.0, 0.3);
        FAIL("expected an invalid model");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidModel);
        CHECK(std::string(e.what()).find("sigma") != std::string::npos);
    }
    CHECK_THROWS_AS(JumpModel::kou(0, 0, 0.2, 0.1, 1.5, 3.0, 2.0), Error);
    CHECK_THROWS_AS(JumpModel::merton(0, 0, 0.2, -0.1, 0.0, 0.3), Error);
    CHECK(models::model_kind_from_string("kou") == models::ModelKind::Kou);
    CHECK_THROWS_AS(models::model_kind_from_string("heston"), Error);
}
