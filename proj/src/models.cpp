#include "rbfpide/models.hpp"

#include "rbfpide/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rbfpide::models {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw Error(ErrorKind::InvalidModel, message);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Merton: return "merton";
    case ModelKind::Kou: return "kou";
    case ModelKind::PureDiffusion: return "diffusion";
    }
    return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
    if (name == "merton") return ModelKind::Merton;
    if (name == "kou") return ModelKind::Kou;
    if (name == "diffusion" || name == "bs" || name == "black-scholes") return ModelKind::PureDiffusion;
    throw Error(ErrorKind::InvalidModel, "model.kind: unknown model '" + std::string(name) + "'");
}

JumpModel JumpModel::pure_diffusion(double r, double q, double sigma) {
    JumpModel m;
    m.kind = ModelKind::PureDiffusion;
    m.r = r;
    m.q = q;
    m.sigma = sigma;
    m.validate();
    return m;
}

JumpModel JumpModel::merton(double r, double q, double sigma, double lambda, double mu_j,
                            double sigma_j) {
    JumpModel m;
    m.kind = ModelKind::Merton;
    m.r = r;
    m.q = q;
    m.sigma = sigma;
    m.lambda = lambda;
    m.merton_mu_j = mu_j;
    m.merton_sigma_j = sigma_j;
    m.validate();
    return m;
}

JumpModel JumpModel::kou(double r, double q, double sigma, double lambda, double p, double alpha1,
                         double alpha2) {
    JumpModel m;
    m.kind = ModelKind::Kou;
    m.r = r;
    m.q = q;
    m.sigma = sigma;
    m.lambda = lambda;
    m.kou_p = p;
    m.kou_alpha1 = alpha1;
    m.kou_alpha2 = alpha2;
    m.validate();
    return m;
}

void JumpModel::validate() const {
    require(finite(r), "model.r must be finite");
    require(finite(q), "model.q must be finite");
    require(finite(sigma) && sigma > 0.0, "model.sigma must be > 0");
    require(finite(lambda) && lambda >= 0.0, "model.lambda must be >= 0");
    switch (kind) {
    case ModelKind::PureDiffusion:
        require(lambda == 0.0, "model.lambda must be 0 for a pure diffusion");
        break;
    case ModelKind::Merton:
        require(finite(merton_mu_j), "model.mu_j must be finite");
        require(finite(merton_sigma_j) && merton_sigma_j > 0.0, "model.sigma_j must be > 0");
        break;
    case ModelKind::Kou:
        require(finite(kou_p) && kou_p >= 0.0 && kou_p <= 1.0, "model.p must lie in [0, 1]");
        require(finite(kou_alpha1) && kou_alpha1 > 1.0, "model.alpha1 must be > 1");
        require(finite(kou_alpha2) && kou_alpha2 > 0.0, "model.alpha2 must be > 0");
        break;
    }
}

double jump_density(const JumpModel& model, double y) {
    switch (model.kind) {
    case ModelKind::Merton: {
        const double s = model.merton_sigma_j;
        const double z = (y - model.merton_mu_j) / s;
        return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
    }
    case ModelKind::Kou:
        if (y >= 0.0) return model.kou_p * model.kou_alpha1 * std::exp(-model.kou_alpha1 * y);
        return (1.0 - model.kou_p) * model.kou_alpha2 * std::exp(model.kou_alpha2 * y);
    case ModelKind::PureDiffusion:
        break;
    }
    throw Error(ErrorKind::InvalidModel, "jump density requested for a pure-diffusion model");
}

double eta(const JumpModel& model) {
    switch (model.kind) {
    case ModelKind::Merton: {
        const double s = model.merton_sigma_j;
        return std::expm1(model.merton_mu_j + 0.5 * s * s);
    }
    case ModelKind::Kou: {
        const double p = model.kou_p;
        const double a1 = model.kou_alpha1;
        const double a2 = model.kou_alpha2;
        if (!(a1 > 1.0)) {
            throw Error(ErrorKind::DivergentCompensator,
                        "Kou compensator diverges: alpha1 must be > 1");
        }
        return p * a1 / (a1 - 1.0) + (1.0 - p) * a2 / (a2 + 1.0) - 1.0;
    }
    case ModelKind::PureDiffusion:
        return 0.0;
    }
    return 0.0;
}

double drift(const JumpModel& model) {
    return model.r - model.q - 0.5 * model.sigma * model.sigma - model.lambda * eta(model);
}

std::complex<double> characteristic_exponent(const JumpModel& model, std::complex<double> z) {
    using namespace std::complex_literals;
    const std::complex<double> iz = 1i * z;
    std::complex<double> psi = -0.5 * model.sigma * model.sigma * z * z + iz * drift(model);
    switch (model.kind) {
    case ModelKind::Merton: {
        const double s = model.merton_sigma_j;
        psi += model.lambda * (std::exp(iz * model.merton_mu_j - 0.5 * s * s * z * z) - 1.0);
        break;
    }
    case ModelKind::Kou: {
        const double p = model.kou_p;
        const double a1 = model.kou_alpha1;
        const double a2 = model.kou_alpha2;
        psi += model.lambda * (p * a1 / (a1 - iz) + (1.0 - p) * a2 / (a2 + iz) - 1.0);
        break;
    }
    case ModelKind::PureDiffusion:
        break;
    }
    return psi;
}

std::complex<double> characteristic_exponent(const JumpModel& model, double z) {
    return characteristic_exponent(model, std::complex<double>(z, 0.0));
}

TruncationInterval truncation_bounds(const JumpModel& model, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw Error(ErrorKind::InfeasibleThreshold, "epsilon must be a positive finite number");
    }
    TruncationInterval out;
    out.epsilon = epsilon;
    switch (model.kind) {
    case ModelKind::Merton: {
        const double s = model.merton_sigma_j;
        const double arg = epsilon * s * std::sqrt(2.0 * std::numbers::pi) / 2.0;
        if (!(arg < 1.0)) {
            throw Error(ErrorKind::InfeasibleThreshold,
                        "epsilon too large: Merton truncation window is empty");
        }
        // Symmetric about zero, wide enough to hold both threshold points mu_j +- reach.
        out.y_hi = std::sqrt(-2.0 * s * s * std::log(arg)) + std::abs(model.merton_mu_j);
        out.y_lo = -out.y_hi;
        break;
    }
    case ModelKind::Kou: {
        const double p = model.kou_p;
        if (!(p > 0.0 && p < 1.0)) {
            throw Error(ErrorKind::InfeasibleThreshold,
                        "Kou truncation needs both jump directions (0 < p < 1)");
        }
        if (!(model.kou_alpha1 > 1.0 && model.kou_alpha2 > 1.0)) {
            throw Error(ErrorKind::InfeasibleThreshold,
                        "Kou truncation bound needs alpha1 > 1 and alpha2 > 1");
        }
        out.y_hi = std::log(epsilon / p) / (1.0 - model.kou_alpha1);
        out.y_lo = -std::log(epsilon / (1.0 - p)) / (1.0 - model.kou_alpha2);
        break;
    }
    case ModelKind::PureDiffusion:
        throw Error(ErrorKind::InvalidModel, "truncation bounds requested for a pure diffusion");
    }
    if (!(out.y_lo < 0.0 && 0.0 < out.y_hi)) {
        throw Error(ErrorKind::InfeasibleThreshold,
                    "epsilon too large: truncation window does not straddle zero");
    }
    return out;
}

double merton_tail_bound(const JumpModel& model, double epsilon) {
    return 2.0 * model.merton_sigma_j * model.merton_sigma_j * epsilon;
}

}  // namespace rbfpide::models
