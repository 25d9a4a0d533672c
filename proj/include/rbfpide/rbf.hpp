#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace rbfpide::rbf {

/// Cubic spline kernel r^3 and its derivatives. `kernel_dx` takes the signed
/// difference so that the odd derivative keeps its sign.
inline double kernel(double r) { return r * r * r; }
inline double kernel_dx(double d) { return 3.0 * d * (d < 0.0 ? -d : d); }
inline double kernel_dxx(double r) { return 6.0 * (r < 0.0 ? -r : r); }

/// Log-price nodes split at the strike: the left block ends on log K, the
/// right block starts one spacing after it and ends on x_max.
struct CollocationGrid {
    std::vector<double> nodes;
    double x_min = 0.0;
    double x_max = 0.0;
    double strike_log = 0.0;
    double spacing_left = 0.0;
    double spacing_right = 0.0;
    std::size_t strike_index = 0;
    bool uniform = false;

    std::size_t size() const noexcept { return nodes.size(); }

    /// Wraps an explicit strictly increasing node list. `uniform` is set when
    /// every gap matches the first one.
    static CollocationGrid from_nodes(std::vector<double> nodes, double strike_log);
};

/// The first ceil(n/2) nodes cover [x_min, strike_log]; the rest cover
/// (strike_log, x_max]. Odd n on a domain centred on the strike is uniform.
CollocationGrid build_grid(std::size_t n, double x_min, double x_max, double strike_log);

/// Structured pieces of A = F * C * F on a uniform grid. F is the distance
/// matrix |x_i - x_j|, C is tridiagonal apart from its two anti-corners, and
/// F^-1 is tridiagonal with the same corner pattern. Only the scalars are
/// stored; dense copies are built on request.
// TODO: the same sparsity holds for unequal spacings (diagonal h_{i-1} + h_i,
// off-diagonals h_i / 2, corners h_end - S); taking a spacing vector would let
// even-n strike-split grids skip the dense LU, which loses accuracy past N ~ 1500.
class FcfFactorization {
public:
    FcfFactorization(std::size_t n, double h);

    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return h_; }
    /// Span x_N - x_1 = (N - 1) h.
    double span() const noexcept { return span_; }

    Eigen::MatrixXd dense_f(const CollocationGrid& grid) const;
    Eigen::MatrixXd dense_c() const;
    Eigen::MatrixXd dense_f_inv() const;

    Eigen::VectorXd apply_f_inv(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd apply_f_inv(const Eigen::MatrixXd& v) const;

    /// In-place C^-1 via a pivoted tridiagonal LU of the leading block and a
    /// scalar Schur complement for the last unknown.
    void solve_c(Eigen::VectorXd& rhs) const;
    void solve_c(Eigen::MatrixXd& rhs) const;

    /// A^-1 v = F^-1 C^-1 F^-1 v.
    Eigen::VectorXd solve(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& v) const;

private:
    void tri_solve(double* x) const;
    void solve_c_column(double* x) const;
    void f_inv_column(const double* v, double* out) const;

    std::size_t n_;
    double h_;
    double span_;
    // dgttrf-style factors of the leading (N-1)x(N-1) tridiagonal block.
    std::vector<double> dl_, d_, du_, du2_;
    std::vector<int> ipiv_;
    // Border of C: last column / last row restricted to the leading block.
    Eigen::VectorXd border_solved_;  // T^-1 * c
    double border_first_ = 0.0;      // r[0]
    double border_prev_ = 0.0;       // r[N-2]
    double schur_ = 0.0;             // d - r^T T^-1 c
};

struct SplineSystem {
    CollocationGrid grid;
    Eigen::MatrixXd A;
    Eigen::MatrixXd A_x;
    Eigen::MatrixXd A_xx;
    std::optional<FcfFactorization> fcf;
    std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_lu;

    std::size_t size() const noexcept { return grid.size(); }
    bool factorized() const noexcept { return fcf.has_value() || dense_lu.has_value(); }

    /// A^-1 applied through whichever factorization is present.
    Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd apply_inverse(const Eigen::MatrixXd& v) const;
};

SplineSystem assemble_interpolation_matrices(const CollocationGrid& grid);

/// Attaches the FCF factorization. Throws UnsupportedFactorization when the
/// grid is not uniform.
SplineSystem factorize(SplineSystem system);

/// FCF when the grid allows it, pivoted dense LU of A otherwise.
SplineSystem prepare_system(const CollocationGrid& grid);

/// Coefficients rho with A rho = values; the residual is checked against
/// 1e-8 * max|values|.
Eigen::VectorXd solve_interpolation(const SplineSystem& system, const Eigen::VectorXd& values);

/// Sum_j rho_j * phi^(order)(x - x_j), order in {0, 1, 2}.
double evaluate_interpolant(const CollocationGrid& grid, const Eigen::VectorXd& rho, double x,
                            int order = 0);
Eigen::VectorXd evaluate_interpolant(const CollocationGrid& grid, const Eigen::VectorXd& rho,
                                     const Eigen::VectorXd& xs, int order = 0);

/// Evaluation matrix E with E(k, j) = phi^(order)(xs_k - x_j).
Eigen::MatrixXd evaluation_matrix(const CollocationGrid& grid, const Eigen::VectorXd& xs,
                                  int order = 0);

/// 2-norm condition number from singular values.
double condition_number(const Eigen::MatrixXd& m);

}  // namespace rbfpide::rbf
