#pragma once

#include "rbfpide/models.hpp"
#include "rbfpide/stepper.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace rbfpide::reference {

double normal_cdf(double x);
double normal_pdf(double x);

double black_scholes_price(double r, double q, double sigma, const stepper::ContractSpec& contract,
                           double s, double tau);

struct BsGreeks {
    double delta = 0.0;
    double gamma = 0.0;
};

BsGreeks black_scholes_greeks(double r, double q, double sigma,
                              const stepper::ContractSpec& contract, double s, double tau);

inline constexpr double kSeriesTol = 1e-12;
inline constexpr int kSeriesMaxTerms = 80;

/// Poisson-weighted sum of Black-Scholes prices conditioned on the jump count.
double merton_series_price(const models::JumpModel& model, const stepper::ContractSpec& contract,
                           double s, double tau, double tol = kSeriesTol,
                           int k_max = kSeriesMaxTerms);

/// Periodic log-price lattice x_k = x_lo + k (x_hi - x_lo) / size, k < size.
struct FstGrid {
    std::size_t size = 1u << 14;
    double x_lo = -10.0;
    double x_hi = 10.0;

    static FstGrid centered(double strike, std::size_t size = 1u << 14, double half_width = 15.0);

    double spacing() const noexcept { return (x_hi - x_lo) / static_cast<double>(size); }
    std::vector<double> points() const;
    /// Angular frequencies in FFT order, spacing 2 pi / (x_hi - x_lo).
    std::vector<double> frequencies() const;
    void validate() const;
};

/// Values on a lattice with local cubic interpolation in between.
struct PricedCurve {
    std::vector<double> x;
    std::vector<double> values;

    double at(double xq) const;
    Eigen::VectorXd at(const Eigen::VectorXd& xq) const;
};

/// One-shot Fourier space time-stepping for a European payoff. Throws
/// DomainTooSmall when the log-price law leaks noticeable mass across the
/// periodic boundary.
PricedCurve fst_price_european(const models::JumpModel& model,
                               const stepper::ContractSpec& contract, const FstGrid& grid);

/// Same propagator over `steps` equal steps with the payoff floor applied
/// after each one.
PricedCurve fst_price_american(const models::JumpModel& model,
                               const stepper::ContractSpec& contract, const FstGrid& grid,
                               std::size_t steps);

/// Probability that the log-price move over `tau` exceeds `distance` in
/// absolute value, read off the lattice transition kernel.
double fst_tail_mass(const models::JumpModel& model, const FstGrid& grid, double tau,
                     double distance);

}  // namespace rbfpide::reference
