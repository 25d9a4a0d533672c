#pragma once

#include <complex>
#include <string_view>

namespace rbfpide::models {

enum class ModelKind { Merton, Kou, PureDiffusion };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Jump-diffusion market under the risk-neutral measure. Rates are per year,
/// `sigma` is per sqrt(year). The Merton fields describe the normal law of the
/// log-jump; the Kou fields describe the double-exponential law.
struct JumpModel {
    ModelKind kind = ModelKind::PureDiffusion;
    double r = 0.0;
    double q = 0.0;
    double sigma = 0.0;
    double lambda = 0.0;
    double merton_mu_j = 0.0;
    double merton_sigma_j = 0.0;
    double kou_p = 0.0;
    double kou_alpha1 = 0.0;
    double kou_alpha2 = 0.0;

    static JumpModel pure_diffusion(double r, double q, double sigma);
    static JumpModel merton(double r, double q, double sigma, double lambda, double mu_j,
                            double sigma_j);
    static JumpModel kou(double r, double q, double sigma, double lambda, double p,
                         double alpha1, double alpha2);

    bool has_jumps() const noexcept { return kind != ModelKind::PureDiffusion && lambda > 0.0; }

    /// Throws Error(InvalidModel) naming the first offending field.
    void validate() const;
};

/// Log-jump integration window [y_lo, y_hi] outside of which the jump density
/// is below `epsilon`.
struct TruncationInterval {
    double y_lo = 0.0;
    double y_hi = 0.0;
    double epsilon = 0.0;

    double width() const noexcept { return y_hi - y_lo; }
};

inline constexpr double kDefaultEpsilon = 3.72e-40;

/// Density f(y) of the log-jump size.
double jump_density(const JumpModel& model, double y);

/// Compensator E[e^Y - 1].
double eta(const JumpModel& model);

/// Risk-neutral drift r - q - sigma^2/2 - lambda*eta of the log-price.
double drift(const JumpModel& model);

/// Levy exponent psi(z) with E[exp(i z L_t)] = exp(t psi(z)); normalized so
/// that psi(-i) = r - q.
std::complex<double> characteristic_exponent(const JumpModel& model, double z);

/// Same exponent at a complex frequency (used for the martingale check).
std::complex<double> characteristic_exponent(const JumpModel& model, std::complex<double> z);

TruncationInterval truncation_bounds(const JumpModel& model, double epsilon = kDefaultEpsilon);

/// Analytic bound 2*sigma_J^2*epsilon on the first absolute moment carried by
/// the Merton density outside the truncation window.
double merton_tail_bound(const JumpModel& model, double epsilon);

}  // namespace rbfpide::models
