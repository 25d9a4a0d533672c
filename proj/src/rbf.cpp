#include "rbfpide/rbf.hpp"

#include "rbfpide/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rbfpide::rbf {

namespace {

bool same_spacing(double a, double b) {
    return std::abs(a - b) <= 1e-14 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

CollocationGrid CollocationGrid::from_nodes(std::vector<double> nodes, double strike_log) {
    if (nodes.size() < 2) throw Error(ErrorKind::Domain, "grid needs at least two nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) {
            throw Error(ErrorKind::Domain, "grid nodes must be strictly increasing");
        }
    }
    CollocationGrid g;
    g.nodes = std::move(nodes);
    g.x_min = g.nodes.front();
    g.x_max = g.nodes.back();
    g.strike_log = strike_log;
    const auto it = std::lower_bound(g.nodes.begin(), g.nodes.end(), strike_log);
    g.strike_index = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - g.nodes.begin(), static_cast<std::ptrdiff_t>(g.nodes.size()) - 1));
    const double h0 = g.nodes[1] - g.nodes[0];
    g.spacing_left = h0;
    g.spacing_right = g.nodes.back() - g.nodes[g.nodes.size() - 2];
    g.uniform = true;
    for (std::size_t i = 1; i < g.nodes.size(); ++i) {
        if (std::abs((g.nodes[i] - g.nodes[i - 1]) - h0) > 1e-12 * std::max(1.0, h0)) {
            g.uniform = false;
            break;
        }
    }
    return g;
}

CollocationGrid build_grid(std::size_t n, double x_min, double x_max, double strike_log) {
    if (n < 4) throw Error(ErrorKind::Domain, "grid needs n >= 4 nodes, got " + std::to_string(n));
    if (!(x_min < strike_log && strike_log < x_max)) {
        throw Error(ErrorKind::Domain, "log strike must lie strictly inside [x_min, x_max]");
    }
    const std::size_t left = (n + 1) / 2;
    const std::size_t right = n - left;

    CollocationGrid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.strike_log = strike_log;
    g.spacing_left = (strike_log - x_min) / static_cast<double>(left - 1);
    g.spacing_right = (x_max - strike_log) / static_cast<double>(right);
    g.strike_index = left - 1;
    g.uniform = same_spacing(g.spacing_left, g.spacing_right);

    g.nodes.resize(n);
    for (std::size_t i = 0; i < left; ++i) {
        g.nodes[i] = x_min + static_cast<double>(i) * g.spacing_left;
    }
    g.nodes[left - 1] = strike_log;
    for (std::size_t k = 1; k <= right; ++k) {
        g.nodes[left - 1 + k] = strike_log + static_cast<double>(k) * g.spacing_right;
    }
    g.nodes[n - 1] = x_max;
    return g;
}

FcfFactorization::FcfFactorization(std::size_t n, double h)
    : n_(n), h_(h), span_(static_cast<double>(n - 1) * h) {
    if (n < 3) {
        throw Error(ErrorKind::UnsupportedFactorization,
                    "FCF factorization needs at least 3 nodes");
    }
    const std::size_t m = n - 1;
    d_.assign(m, 2.0 * h);
    d_[0] = h - span_;
    dl_.assign(m - 1, 0.5 * h);
    du_.assign(m - 1, 0.5 * h);
    du2_.assign(m > 2 ? m - 2 : 0, 0.0);
    ipiv_.assign(m, 0);

    // dgttrf: LU with partial pivoting of a tridiagonal matrix.
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (std::abs(d_[i]) >= std::abs(dl_[i])) {
            ipiv_[i] = static_cast<int>(i);
            const double fact = dl_[i] / d_[i];
            dl_[i] = fact;
            d_[i + 1] -= fact * du_[i];
            if (i + 2 < m) du2_[i] = 0.0;
        } else {
            ipiv_[i] = static_cast<int>(i + 1);
            const double fact = d_[i] / dl_[i];
            d_[i] = dl_[i];
            dl_[i] = fact;
            const double temp = du_[i];
            du_[i] = d_[i + 1];
            d_[i + 1] = temp - fact * d_[i + 1];
            if (i + 2 < m) {
                du2_[i] = du_[i + 1];
                du_[i + 1] = -fact * du_[i + 1];
            }
        }
    }
    ipiv_[m - 1] = static_cast<int>(m - 1);
    for (double v : d_) {
        if (v == 0.0) throw SolveError("near-tridiagonal factor is singular");
    }

    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    c[0] = 0.5 * span_;
    c[static_cast<Eigen::Index>(m - 1)] += 0.5 * h;
    tri_solve(c.data());
    border_solved_ = c;
    border_first_ = 0.5 * span_;
    border_prev_ = 0.5 * h;
    double r_dot = border_first_ * border_solved_[0];
    r_dot += border_prev_ * border_solved_[static_cast<Eigen::Index>(m - 1)];
    schur_ = (h - span_) - r_dot;
    if (schur_ == 0.0) throw SolveError("near-tridiagonal factor is singular");
}

void FcfFactorization::tri_solve(double* x) const {
    const std::size_t m = n_ - 1;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (ipiv_[i] == static_cast<int>(i)) {
            x[i + 1] -= dl_[i] * x[i];
        } else {
            const double temp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = temp - dl_[i] * x[i];
        }
    }
    x[m - 1] /= d_[m - 1];
    if (m > 1) x[m - 2] = (x[m - 2] - du_[m - 2] * x[m - 1]) / d_[m - 2];
    for (std::size_t k = m - 2; k-- > 0;) {
        x[k] = (x[k] - du_[k] * x[k + 1] - du2_[k] * x[k + 2]) / d_[k];
    }
}

void FcfFactorization::solve_c_column(double* x) const {
    const std::size_t m = n_ - 1;
    tri_solve(x);
    const double r_dot = border_first_ * x[0] + border_prev_ * x[m - 1];
    const double last = (x[m] - r_dot) / schur_;
    for (std::size_t i = 0; i < m; ++i) x[i] -= border_solved_[static_cast<Eigen::Index>(i)] * last;
    x[m] = last;
}

void FcfFactorization::f_inv_column(const double* v, double* out) const {
    const std::size_t n = n_;
    const double off = 0.5 / h_;
    const double diag = -1.0 / h_;
    const double corner = (h_ - span_) / (2.0 * h_ * span_);
    const double anti = 0.5 / span_;
    out[0] = corner * v[0] + off * v[1] + anti * v[n - 1];
    out[n - 1] = anti * v[0] + off * v[n - 2] + corner * v[n - 1];
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = off * (v[i - 1] + v[i + 1]) + diag * v[i];
}

void FcfFactorization::solve_c(Eigen::VectorXd& rhs) const { solve_c_column(rhs.data()); }

void FcfFactorization::solve_c(Eigen::MatrixXd& rhs) const {
    for (Eigen::Index j = 0; j < rhs.cols(); ++j) solve_c_column(rhs.col(j).data());
}

Eigen::VectorXd FcfFactorization::apply_f_inv(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(v.size());
    f_inv_column(v.data(), out.data());
    return out;
}

Eigen::MatrixXd FcfFactorization::apply_f_inv(const Eigen::MatrixXd& v) const {
    Eigen::MatrixXd out(v.rows(), v.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j) f_inv_column(v.col(j).data(), out.col(j).data());
    return out;
}

Eigen::VectorXd FcfFactorization::solve(const Eigen::VectorXd& v) const {
    Eigen::VectorXd w = apply_f_inv(v);
    solve_c(w);
    return apply_f_inv(w);
}

Eigen::MatrixXd FcfFactorization::solve(const Eigen::MatrixXd& v) const {
    Eigen::MatrixXd w = apply_f_inv(v);
    solve_c(w);
    return apply_f_inv(w);
}

Eigen::MatrixXd FcfFactorization::dense_f(const CollocationGrid& grid) const {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd f(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            f(i, j) = std::abs(grid.nodes[static_cast<std::size_t>(i)] -
                               grid.nodes[static_cast<std::size_t>(j)]);
        }
    }
    return f;
}

Eigen::MatrixXd FcfFactorization::dense_c() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c(i, i) = 2.0 * h_;
        if (i + 1 < n) c(i, i + 1) = c(i + 1, i) = 0.5 * h_;
    }
    c(0, 0) = c(n - 1, n - 1) = h_ - span_;
    c(0, n - 1) += 0.5 * span_;
    c(n - 1, 0) += 0.5 * span_;
    return c;
}

Eigen::MatrixXd FcfFactorization::dense_f_inv() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        f(i, i) = -1.0 / h_;
        if (i + 1 < n) f(i, i + 1) = f(i + 1, i) = 0.5 / h_;
    }
    f(0, 0) = f(n - 1, n - 1) = (h_ - span_) / (2.0 * h_ * span_);
    f(0, n - 1) += 0.5 / span_;
    f(n - 1, 0) += 0.5 / span_;
    return f;
}

Eigen::VectorXd SplineSystem::apply_inverse(const Eigen::VectorXd& v) const {
    if (fcf) return fcf->solve(v);
    if (dense_lu) return dense_lu->solve(v);
    throw SolveError("spline system has no factorization");
}

Eigen::MatrixXd SplineSystem::apply_inverse(const Eigen::MatrixXd& v) const {
    if (fcf) return fcf->solve(v);
    if (dense_lu) return dense_lu->solve(v);
    throw SolveError("spline system has no factorization");
}

SplineSystem assemble_interpolation_matrices(const CollocationGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    SplineSystem s;
    s.grid = grid;
    s.A.resize(n, n);
    s.A_x.resize(n, n);
    s.A_xx.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double xj = grid.nodes[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = grid.nodes[static_cast<std::size_t>(i)] - xj;
            const double r = std::abs(d);
            s.A(i, j) = kernel(r);
            s.A_x(i, j) = kernel_dx(d);
            s.A_xx(i, j) = kernel_dxx(r);
        }
    }
    return s;
}

SplineSystem factorize(SplineSystem system) {
    if (!system.grid.uniform) {
        throw Error(ErrorKind::UnsupportedFactorization,
                    "FCF factorization needs a uniform grid");
    }
    const double h = (system.grid.x_max - system.grid.x_min) /
                     static_cast<double>(system.grid.size() - 1);
    system.fcf.emplace(system.grid.size(), h);
    return system;
}

SplineSystem prepare_system(const CollocationGrid& grid) {
    auto system = assemble_interpolation_matrices(grid);
    if (grid.uniform && grid.size() >= 3) return factorize(std::move(system));
    system.dense_lu.emplace(system.A);
    return system;
}

Eigen::VectorXd solve_interpolation(const SplineSystem& system, const Eigen::VectorXd& values) {
    if (static_cast<std::size_t>(values.size()) != system.size()) {
        throw Error(ErrorKind::LengthMismatch, "interpolation values must have one entry per node");
    }
    Eigen::VectorXd rho = system.apply_inverse(values);
    const double scale = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
    const double residual = (system.A * rho - values).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual) || residual > 1e-8 * scale) {
        throw SolveError("interpolation residual " + std::to_string(residual) +
                         " exceeds tolerance");
    }
    return rho;
}

double evaluate_interpolant(const CollocationGrid& grid, const Eigen::VectorXd& rho, double x,
                            int order) {
    double sum = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double d = x - grid.nodes[j];
        const double w = rho[static_cast<Eigen::Index>(j)];
        switch (order) {
        case 0: sum += w * kernel(std::abs(d)); break;
        case 1: sum += w * kernel_dx(d); break;
        case 2: sum += w * kernel_dxx(d); break;
        default: throw Error(ErrorKind::Domain, "interpolant order must be 0, 1 or 2");
        }
    }
    return sum;
}

Eigen::MatrixXd evaluation_matrix(const CollocationGrid& grid, const Eigen::VectorXd& xs,
                                  int order) {
    if (order < 0 || order > 2) throw Error(ErrorKind::Domain, "interpolant order must be 0, 1 or 2");
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd e(xs.size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double xj = grid.nodes[static_cast<std::size_t>(j)];
        for (Eigen::Index k = 0; k < xs.size(); ++k) {
            const double d = xs[k] - xj;
            e(k, j) = order == 0 ? kernel(std::abs(d)) : order == 1 ? kernel_dx(d) : kernel_dxx(d);
        }
    }
    return e;
}

Eigen::VectorXd evaluate_interpolant(const CollocationGrid& grid, const Eigen::VectorXd& rho,
                                     const Eigen::VectorXd& xs, int order) {
    return evaluation_matrix(grid, xs, order) * rho;
}

double condition_number(const Eigen::MatrixXd& m) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[s.size() - 1] == 0.0) return std::numeric_limits<double>::infinity();
    return s[0] / s[s.size() - 1];
}

}  // namespace rbfpide::rbf
