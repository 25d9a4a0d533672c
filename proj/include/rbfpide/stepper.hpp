#pragma once

#include "rbfpide/collocation.hpp"
#include "rbfpide/models.hpp"
#include "rbfpide/rbf.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace rbfpide::stepper {

enum class OptionSide { Call, Put };
enum class Exercise { European, American };

std::string_view to_string(OptionSide side);
std::string_view to_string(Exercise exercise);
OptionSide option_side_from_string(std::string_view name);
Exercise exercise_from_string(std::string_view name);

struct ContractSpec {
    double strike = 1.0;
    double maturity = 1.0;
    OptionSide side = OptionSide::Put;
    Exercise exercise = Exercise::European;

    /// Throws Error(InvalidContract) naming the offending field.
    void validate() const;
};

double payoff(const ContractSpec& contract, double x);
Eigen::VectorXd payoff(const ContractSpec& contract, const std::vector<double>& xs);
Eigen::VectorXd payoff(const ContractSpec& contract, const Eigen::VectorXd& xs);

struct PricingSolution {
    rbf::CollocationGrid grid;
    Eigen::VectorXd rho_final;
    std::size_t steps = 0;
    double dt = 0.0;
    /// American only: per step, the largest node (log-price) where exercise
    /// binds, NaN when it binds nowhere.
    std::vector<double> exercise_boundary;

    double value(double x) const { return rbf::evaluate_interpolant(grid, rho_final, x, 0); }
    Eigen::VectorXd values(const Eigen::VectorXd& xs) const {
        return rbf::evaluate_interpolant(grid, rho_final, xs, 0);
    }
    bool extrapolated(double x) const { return x < grid.x_min || x > grid.x_max; }
};

PricingSolution solve_european(const collocation::ThetaOperator& theta,
                               const rbf::SplineSystem& system, const ContractSpec& contract,
                               std::size_t steps);

PricingSolution solve_american(const collocation::ThetaOperator& theta,
                               const rbf::SplineSystem& system, const ContractSpec& contract,
                               std::size_t steps);

/// Nodal values floored at the payoff.
Eigen::VectorXd project(const Eigen::VectorXd& nodal, const Eigen::VectorXd& floor);

struct Greeks {
    double delta = 0.0;
    double gamma = 0.0;
};

/// Price-space Delta and Gamma from the log-price interpolant.
Greeks greeks(const PricingSolution& solution, double s);

struct NumericsConfig {
    std::size_t n = 600;
    std::size_t m0 = 400;
    /// Domain [log K - half_width, log K + half_width] unless explicit bounds are set.
    double half_width = 10.0;
    std::optional<double> x_min;
    std::optional<double> x_max;
    double epsilon = models::kDefaultEpsilon;
    double quad_tol = collocation::kDefaultQuadTol;
    collocation::DiscountSign sign = collocation::DiscountSign::Pide;
    std::size_t fst_size = 1u << 14;
    std::size_t fst_steps = 2048;
    double fst_half_width = 15.0;

    void validate() const;
};

struct PricingRun {
    rbf::SplineSystem system;
    collocation::ThetaOperator theta;
    PricingSolution solution;
};

rbf::CollocationGrid grid_for(const ContractSpec& contract, const NumericsConfig& numerics);

/// Grid, spline system, jump matrix and reduced operator; `solution` is left empty.
PricingRun build_operator(const models::JumpModel& model, const ContractSpec& contract,
                          const NumericsConfig& numerics);

/// European or American march on a prebuilt operator.
PricingSolution solve(const PricingRun& run, const ContractSpec& contract, std::size_t steps);

/// build_operator followed by solve with numerics.m0 steps.
PricingRun price(const models::JumpModel& model, const ContractSpec& contract,
                 const NumericsConfig& numerics);

}  // namespace rbfpide::stepper
