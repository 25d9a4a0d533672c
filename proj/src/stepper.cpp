#include "rbfpide/stepper.hpp"

#include "rbfpide/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rbfpide::stepper {

std::string_view to_string(OptionSide side) { return side == OptionSide::Call ? "call" : "put"; }

std::string_view to_string(Exercise exercise) {
    return exercise == Exercise::European ? "european" : "american";
}

OptionSide option_side_from_string(std::string_view name) {
    if (name == "call") return OptionSide::Call;
    if (name == "put") return OptionSide::Put;
    throw Error(ErrorKind::InvalidContract,
                "contract.side: expected 'call' or 'put', got '" + std::string(name) + "'");
}

Exercise exercise_from_string(std::string_view name) {
    if (name == "european") return Exercise::European;
    if (name == "american") return Exercise::American;
    throw Error(ErrorKind::InvalidContract,
                "contract.exercise: expected 'european' or 'american', got '" + std::string(name) +
                    "'");
}

void ContractSpec::validate() const {
    if (!(std::isfinite(strike) && strike > 0.0)) {
        throw Error(ErrorKind::InvalidContract, "contract.strike must be > 0");
    }
    if (!(std::isfinite(maturity) && maturity > 0.0)) {
        throw Error(ErrorKind::InvalidContract, "contract.maturity must be > 0");
    }
    if (exercise == Exercise::American && side != OptionSide::Put) {
        throw Error(ErrorKind::InvalidContract,
                    "contract.side: American exercise is supported for puts only");
    }
}

double payoff(const ContractSpec& contract, double x) {
    const double s = std::exp(x);
    return contract.side == OptionSide::Call ? std::max(s - contract.strike, 0.0)
                                             : std::max(contract.strike - s, 0.0);
}

Eigen::VectorXd payoff(const ContractSpec& contract, const std::vector<double>& xs) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t k = 0; k < xs.size(); ++k) out[static_cast<Eigen::Index>(k)] = payoff(contract, xs[k]);
    return out;
}

Eigen::VectorXd payoff(const ContractSpec& contract, const Eigen::VectorXd& xs) {
    Eigen::VectorXd out(xs.size());
    for (Eigen::Index k = 0; k < xs.size(); ++k) out[k] = payoff(contract, xs[k]);
    return out;
}

Eigen::VectorXd project(const Eigen::VectorXd& nodal, const Eigen::VectorXd& floor) {
    return nodal.cwiseMax(floor);
}

namespace {

using Lu = Eigen::PartialPivLU<Eigen::MatrixXd>;

Lu implicit_factor(const Eigen::MatrixXd& theta, double coefficient) {
    Eigen::MatrixXd m = -coefficient * theta;
    m.diagonal().array() += 1.0;
    return Lu(m);
}

void check_finite(const Eigen::VectorXd& v, std::size_t step) {
    if (!v.allFinite()) {
        throw SolveError("implicit step produced non-finite coefficients at step " +
                             std::to_string(step),
                         step);
    }
}

void check_inputs(const collocation::ThetaOperator& theta, const rbf::SplineSystem& system,
                  const ContractSpec& contract, std::size_t steps) {
    contract.validate();
    if (steps < 2) throw Error(ErrorKind::Config, "numerics.m0 must be >= 2");
    if (static_cast<std::size_t>(theta.theta.rows()) != system.size()) {
        throw Error(ErrorKind::LengthMismatch, "operator size does not match the spline system");
    }
}

// Fixed-step BDF2 with one implicit Euler start. `after_step` may rewrite the
// new coefficients (American projection); the history keeps what it returns.
template <class AfterStep>
Eigen::VectorXd march(const collocation::ThetaOperator& theta, const Eigen::VectorXd& rho0,
                      double dt, std::size_t steps, AfterStep&& after_step) {
    const Lu start = implicit_factor(theta.theta, dt);
    Eigen::VectorXd prev = rho0;
    Eigen::VectorXd cur = start.solve(rho0);
    check_finite(cur, 1);
    cur = after_step(std::move(cur), std::size_t{1});
    if (steps == 1) return cur;

    const Lu bdf2 = implicit_factor(theta.theta, 2.0 * dt / 3.0);
    for (std::size_t m = 2; m <= steps; ++m) {
        Eigen::VectorXd next = bdf2.solve((4.0 * cur - prev) / 3.0);
        check_finite(next, m);
        next = after_step(std::move(next), m);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

PricingSolution solve_european(const collocation::ThetaOperator& theta,
                               const rbf::SplineSystem& system, const ContractSpec& contract,
                               std::size_t steps) {
    check_inputs(theta, system, contract, steps);
    PricingSolution out;
    out.grid = system.grid;
    out.steps = steps;
    out.dt = contract.maturity / static_cast<double>(steps);
    const Eigen::VectorXd rho0 = rbf::solve_interpolation(system, payoff(contract, system.grid.nodes));
    out.rho_final = march(theta, rho0, out.dt, steps,
                          [](Eigen::VectorXd rho, std::size_t) { return rho; });
    return out;
}

PricingSolution solve_american(const collocation::ThetaOperator& theta,
                               const rbf::SplineSystem& system, const ContractSpec& contract,
                               std::size_t steps) {
    check_inputs(theta, system, contract, steps);
    if (contract.exercise != Exercise::American) {
        throw Error(ErrorKind::InvalidContract, "contract.exercise must be 'american'");
    }
    PricingSolution out;
    out.grid = system.grid;
    out.steps = steps;
    out.dt = contract.maturity / static_cast<double>(steps);
    out.exercise_boundary.reserve(steps);
    const Eigen::VectorXd floor = payoff(contract, system.grid.nodes);
    const Eigen::VectorXd rho0 = rbf::solve_interpolation(system, floor);

    auto refit = [&](Eigen::VectorXd rho, std::size_t step) {
        const Eigen::VectorXd continuation = system.A * rho;
        const Eigen::VectorXd projected = project(continuation, floor);
        double boundary = std::numeric_limits<double>::quiet_NaN();
        for (Eigen::Index i = 0; i < floor.size(); ++i) {
            if (floor[i] > 0.0 && floor[i] >= continuation[i]) {
                boundary = system.grid.nodes[static_cast<std::size_t>(i)];
            }
        }
        out.exercise_boundary.push_back(boundary);
        try {
            return rbf::solve_interpolation(system, projected);
        } catch (const SolveError& e) {
            throw SolveError(std::string(e.what()) + " at step " + std::to_string(step), step);
        }
    };
    out.rho_final = march(theta, rho0, out.dt, steps, refit);
    return out;
}

Greeks greeks(const PricingSolution& solution, double s) {
    if (!(s > 0.0)) throw Error(ErrorKind::Domain, "spot must be > 0 for Greeks");
    const double x = std::log(s);
    const double ux = rbf::evaluate_interpolant(solution.grid, solution.rho_final, x, 1);
    const double uxx = rbf::evaluate_interpolant(solution.grid, solution.rho_final, x, 2);
    return {ux / s, (uxx - ux) / (s * s)};
}

void NumericsConfig::validate() const {
    if (n < 4) throw Error(ErrorKind::Config, "numerics.n must be >= 4");
    if (m0 < 2) throw Error(ErrorKind::Config, "numerics.m0 must be >= 2");
    if (!(half_width > 0.0)) throw Error(ErrorKind::Config, "numerics.half_width must be > 0");
    if (x_min.has_value() != x_max.has_value()) {
        throw Error(ErrorKind::Config, "numerics.x_min and numerics.x_max must be given together");
    }
    if (!(epsilon > 0.0)) throw Error(ErrorKind::Config, "numerics.epsilon must be > 0");
    if (!(quad_tol > 0.0)) throw Error(ErrorKind::Config, "numerics.quad_tol must be > 0");
    if (fst_size < 1024 || (fst_size & (fst_size - 1)) != 0) {
        throw Error(ErrorKind::Config, "numerics.fst_size must be a power of two >= 1024");
    }
    if (fst_steps < 1) throw Error(ErrorKind::Config, "numerics.fst_steps must be >= 1");
    if (!(fst_half_width > 0.0)) throw Error(ErrorKind::Config, "numerics.fst_half_width must be > 0");
}

rbf::CollocationGrid grid_for(const ContractSpec& contract, const NumericsConfig& numerics) {
    const double log_k = std::log(contract.strike);
    const double lo = numerics.x_min.value_or(log_k - numerics.half_width);
    const double hi = numerics.x_max.value_or(log_k + numerics.half_width);
    return rbf::build_grid(numerics.n, lo, hi, log_k);
}

PricingRun build_operator(const models::JumpModel& model, const ContractSpec& contract,
                          const NumericsConfig& numerics) {
    model.validate();
    contract.validate();
    numerics.validate();
    PricingRun run;
    run.system = rbf::prepare_system(grid_for(contract, numerics));
    const auto jump =
        model.has_jumps()
            ? collocation::assemble_jump_matrix(run.system.grid, model,
                                                models::truncation_bounds(model, numerics.epsilon),
                                                numerics.quad_tol)
            : collocation::empty_jump_matrix(run.system.size());
    run.theta = collocation::assemble_theta(run.system, jump, model, numerics.sign);
    return run;
}

PricingSolution solve(const PricingRun& run, const ContractSpec& contract, std::size_t steps) {
    if (contract.exercise == Exercise::American) {
        return solve_american(run.theta, run.system, contract, steps);
    }
    return solve_european(run.theta, run.system, contract, steps);
}

PricingRun price(const models::JumpModel& model, const ContractSpec& contract,
                 const NumericsConfig& numerics) {
    PricingRun run = build_operator(model, contract, numerics);
    run.solution = solve(run, contract, numerics.m0);
    return run;
}

}  // namespace rbfpide::stepper
