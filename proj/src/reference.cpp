#include "rbfpide/reference.hpp"

#include "rbfpide/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace rbfpide::reference {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

namespace {

struct D12 {
    double d1;
    double d2;
};

D12 d_terms(double r, double q, double sigma, double strike, double s, double tau) {
    const double vol = sigma * std::sqrt(tau);
    const double d1 = (std::log(s / strike) + (r - q + 0.5 * sigma * sigma) * tau) / vol;
    return {d1, d1 - vol};
}

void check_bs_inputs(double sigma, double s, double tau) {
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidModel, "sigma must be > 0");
    if (!(s > 0.0)) throw Error(ErrorKind::Domain, "spot must be > 0");
    if (!(tau > 0.0)) throw Error(ErrorKind::InvalidContract, "time to maturity must be > 0");
}

}  // namespace

double black_scholes_price(double r, double q, double sigma, const stepper::ContractSpec& contract,
                           double s, double tau) {
    check_bs_inputs(sigma, s, tau);
    const double k = contract.strike;
    const auto [d1, d2] = d_terms(r, q, sigma, k, s, tau);
    const double fwd_s = s * std::exp(-q * tau);
    const double disc_k = k * std::exp(-r * tau);
    if (contract.side == stepper::OptionSide::Call) {
        return fwd_s * normal_cdf(d1) - disc_k * normal_cdf(d2);
    }
    return disc_k * normal_cdf(-d2) - fwd_s * normal_cdf(-d1);
}

BsGreeks black_scholes_greeks(double r, double q, double sigma,
                              const stepper::ContractSpec& contract, double s, double tau) {
    check_bs_inputs(sigma, s, tau);
    const auto [d1, d2] = d_terms(r, q, sigma, contract.strike, s, tau);
    (void)d2;
    const double carry = std::exp(-q * tau);
    BsGreeks g;
    g.delta = contract.side == stepper::OptionSide::Call ? carry * normal_cdf(d1)
                                                         : carry * (normal_cdf(d1) - 1.0);
    g.gamma = carry * normal_pdf(d1) / (s * sigma * std::sqrt(tau));
    return g;
}

double merton_series_price(const models::JumpModel& model, const stepper::ContractSpec& contract,
                           double s, double tau, double tol, int k_max) {
    if (model.kind != models::ModelKind::Merton) {
        throw Error(ErrorKind::InvalidModel, "the Merton series needs a Merton model");
    }
    if (contract.exercise != stepper::Exercise::European) {
        throw Error(ErrorKind::InvalidContract, "the Merton series prices European contracts only");
    }
    const double eta = models::eta(model);
    if (!(1.0 + eta > 0.0)) {
        throw Error(ErrorKind::SeriesUndefined, "series undefined: 1 + eta must be > 0");
    }
    if (model.lambda == 0.0) return black_scholes_price(model.r, model.q, model.sigma, contract, s, tau);

    const double intensity = model.lambda * (1.0 + eta) * tau;
    const double log_intensity = std::log(intensity);
    const double log_growth = std::log1p(eta);
    double sum = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        const double kk = static_cast<double>(k);
        const double weight = std::exp(-intensity + kk * log_intensity - std::lgamma(kk + 1.0));
        const double sigma_k =
            std::sqrt(model.sigma * model.sigma +
                      kk * model.merton_sigma_j * model.merton_sigma_j / tau);
        const double r_k = model.r - model.lambda * eta + kk * log_growth / tau;
        const double term = weight * black_scholes_price(r_k, model.q, sigma_k, contract, s, tau);
        sum += term;
        if (kk > intensity && term < tol * sum) break;
    }
    return sum;
}

FstGrid FstGrid::centered(double strike, std::size_t size, double half_width) {
    FstGrid g;
    g.size = size;
    g.x_lo = std::log(strike) - half_width;
    g.x_hi = std::log(strike) + half_width;
    g.validate();
    return g;
}

std::vector<double> FstGrid::points() const {
    std::vector<double> xs(size);
    const double dx = spacing();
    for (std::size_t k = 0; k < size; ++k) xs[k] = x_lo + static_cast<double>(k) * dx;
    return xs;
}

std::vector<double> FstGrid::frequencies() const {
    std::vector<double> w(size);
    const double dw = 2.0 * std::numbers::pi / (x_hi - x_lo);
    const auto n = static_cast<long long>(size);
    for (long long k = 0; k < n; ++k) {
        const long long signed_k = k < (n + 1) / 2 ? k : k - n;
        w[static_cast<std::size_t>(k)] = dw * static_cast<double>(signed_k);
    }
    return w;
}

void FstGrid::validate() const {
    if (size < 1024 || (size & (size - 1)) != 0) {
        throw Error(ErrorKind::Config, "FST size must be a power of two >= 1024");
    }
    if (!(x_lo < x_hi)) throw Error(ErrorKind::Config, "FST bounds must satisfy x_lo < x_hi");
}

double PricedCurve::at(double xq) const {
    const std::size_t n = x.size();
    if (n == 0) return 0.0;
    if (n < 4) {
        const auto it = std::lower_bound(x.begin(), x.end(), xq);
        return values[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - x.begin(), n - 1))];
    }
    const auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::ptrdiff_t k = (it - x.begin()) - 1;
    k = std::clamp<std::ptrdiff_t>(k - 1, 0, static_cast<std::ptrdiff_t>(n) - 4);
    double out = 0.0;
    for (std::ptrdiff_t a = k; a < k + 4; ++a) {
        double w = 1.0;
        for (std::ptrdiff_t b = k; b < k + 4; ++b) {
            if (b != a) w *= (xq - x[static_cast<std::size_t>(b)]) /
                             (x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)]);
        }
        out += w * values[static_cast<std::size_t>(a)];
    }
    return out;
}

Eigen::VectorXd PricedCurve::at(const Eigen::VectorXd& xq) const {
    Eigen::VectorXd out(xq.size());
    for (Eigen::Index k = 0; k < xq.size(); ++k) out[k] = at(xq[k]);
    return out;
}

namespace {

// Planning is not thread-safe in FFTW; execution with new arrays is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

class Transform {
public:
    explicit Transform(std::size_t n)
        : n_(n),
          buffer_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!buffer_) throw SolveError("FFT buffer allocation failed");
        std::lock_guard<std::mutex> lock(plan_mutex());
        const int size = static_cast<int>(n);
        forward_ = fftw_plan_dft_1d(size, buffer_.get(), buffer_.get(), FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(size, buffer_.get(), buffer_.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!forward_ || !backward_) throw SolveError("FFT planning failed");
    }
    ~Transform() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    Transform(const Transform&) = delete;
    Transform& operator=(const Transform&) = delete;

    std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buffer_.get()); }

    /// data <- IFFT(FFT(data) .* multiplier), normalized.
    void propagate(const std::vector<std::complex<double>>& multiplier) {
        fftw_execute(forward_);
        auto* d = data();
        for (std::size_t k = 0; k < n_; ++k) d[k] *= multiplier[k];
        fftw_execute(backward_);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_; ++k) d[k] *= scale;
    }

private:
    std::size_t n_;
    std::unique_ptr<fftw_complex, FftwFree> buffer_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

std::vector<std::complex<double>> propagator(const models::JumpModel& model, const FstGrid& grid,
                                             double tau, double discount_rate) {
    const auto w = grid.frequencies();
    std::vector<std::complex<double>> out(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        out[k] = std::exp((models::characteristic_exponent(model, w[k]) - discount_rate) * tau);
    }
    return out;
}

// Mass that wraps around the periodic lattice, in units of the strike. A call payoff
// reaches exp(x_hi) at the top edge, so its wrapped mass is weighted by that height.
void check_domain(const models::JumpModel& model, const stepper::ContractSpec& contract,
                  const FstGrid& grid, double tau) {
    const double distance = (grid.x_hi - grid.x_lo) / 3.0;
    double mass = fst_tail_mass(model, grid, tau, distance);
    if (contract.side == stepper::OptionSide::Call) {
        mass *= std::max(1.0, std::exp(grid.x_hi) / contract.strike);
    }
    if (mass > 1e-6) {
        throw Error(ErrorKind::DomainTooSmall,
                    "FST domain too small: wrapped mass " + std::to_string(mass) +
                        " of a log-price move beyond " + std::to_string(distance));
    }
}

void check_residue(const std::complex<double>* v, std::size_t n) {
    double imag = 0.0;
    double real = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        imag = std::max(imag, std::abs(v[k].imag()));
        real = std::max(real, std::abs(v[k].real()));
    }
    if (imag > 1e-8 * std::max(real, 1e-300)) {
        throw SolveError("FST imaginary residue " + std::to_string(imag) + " exceeds tolerance");
    }
}

}  // namespace

double fst_tail_mass(const models::JumpModel& model, const FstGrid& grid, double tau,
                     double distance) {
    grid.validate();
    Transform t(grid.size);
    const auto kernel = propagator(model, grid, tau, 0.0);
    auto* d = t.data();
    // The inverse transform of the propagator alone is the lattice law of the move.
    for (std::size_t k = 0; k < grid.size; ++k) d[k] = 0.0;
    d[0] = 1.0;
    t.propagate(kernel);
    const double dx = grid.spacing();
    const auto n = static_cast<long long>(grid.size);
    double mass = 0.0;
    for (long long k = 0; k < n; ++k) {
        const long long offset = k < n / 2 ? k : k - n;
        if (std::abs(static_cast<double>(offset) * dx) > distance) {
            mass += std::abs(d[static_cast<std::size_t>(k)].real());
        }
    }
    return mass;
}

PricedCurve fst_price_european(const models::JumpModel& model,
                               const stepper::ContractSpec& contract, const FstGrid& grid) {
    model.validate();
    contract.validate();
    grid.validate();
    const double tau = contract.maturity;
    check_domain(model, contract, grid, tau);

    PricedCurve curve;
    curve.x = grid.points();
    Transform t(grid.size);
    auto* d = t.data();
    for (std::size_t k = 0; k < grid.size; ++k) d[k] = stepper::payoff(contract, curve.x[k]);
    t.propagate(propagator(model, grid, tau, model.r));
    check_residue(d, grid.size);
    curve.values.resize(grid.size);
    for (std::size_t k = 0; k < grid.size; ++k) curve.values[k] = d[k].real();
    return curve;
}

PricedCurve fst_price_american(const models::JumpModel& model,
                               const stepper::ContractSpec& contract, const FstGrid& grid,
                               std::size_t steps) {
    model.validate();
    contract.validate();
    grid.validate();
    if (contract.exercise != stepper::Exercise::American || contract.side != stepper::OptionSide::Put) {
        throw Error(ErrorKind::InvalidContract, "American FST prices American puts only");
    }
    if (steps < 1) throw Error(ErrorKind::Config, "FST steps must be >= 1");
    check_domain(model, contract, grid, contract.maturity);

    PricedCurve curve;
    curve.x = grid.points();
    std::vector<double> floor(grid.size);
    for (std::size_t k = 0; k < grid.size; ++k) floor[k] = stepper::payoff(contract, curve.x[k]);

    const double dt = contract.maturity / static_cast<double>(steps);
    const auto step = propagator(model, grid, dt, model.r);
    Transform t(grid.size);
    auto* d = t.data();
    for (std::size_t k = 0; k < grid.size; ++k) d[k] = floor[k];
    for (std::size_t m = 0; m < steps; ++m) {
        t.propagate(step);
        for (std::size_t k = 0; k < grid.size; ++k) d[k] = std::max(d[k].real(), floor[k]);
    }
    curve.values.resize(grid.size);
    for (std::size_t k = 0; k < grid.size; ++k) curve.values[k] = d[k].real();
    return curve;
}

}  // namespace rbfpide::reference
