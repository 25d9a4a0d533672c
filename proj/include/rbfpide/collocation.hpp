#pragma once

#include "rbfpide/models.hpp"
#include "rbfpide/quadrature.hpp"
#include "rbfpide/rbf.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace rbfpide::collocation {

inline constexpr double kDefaultQuadTol = 1e-10;

/// Integrals of the kernel against the jump density,
/// entries(i, j) = int_{y_lo}^{y_hi} |x_i + y - x_j|^3 f(y) dy.
struct JumpMatrix {
    Eigen::MatrixXd entries;
    models::TruncationInterval interval;
    double quad_tol = kDefaultQuadTol;
    /// Largest per-entry error estimate returned by the quadrature.
    double max_error_estimate = 0.0;
    std::size_t distinct_offsets = 0;
};

/// Single entry for the node offset d = x_i - x_j. The integrand is split at
/// the kernel kink y = -d and, for Kou, at the density jump y = 0.
quadrature::Result jump_entry(const models::JumpModel& model,
                              const models::TruncationInterval& interval, double offset,
                              double quad_tol = kDefaultQuadTol);

/// Entries sharing an offset (to 1e-13) are integrated once. Throws
/// QuadratureError naming one affected entry if any integral fails to converge.
JumpMatrix assemble_jump_matrix(const rbf::CollocationGrid& grid, const models::JumpModel& model,
                                const models::TruncationInterval& interval,
                                double quad_tol = kDefaultQuadTol);

/// All-zero jump matrix for models without jumps.
JumpMatrix empty_jump_matrix(std::size_t n);

/// Sign of the (r + lambda) term. `AsPrinted` flips it to +(r + lambda) and is
/// only useful for comparing against that variant of the operator.
enum class DiscountSign { Pide, AsPrinted };

struct ThetaOperator {
    Eigen::MatrixXd theta;
    models::JumpModel model;
    rbf::CollocationGrid grid;
    DiscountSign sign = DiscountSign::Pide;
};

/// sigma^2/2 A_xx + drift A_x - (r + lambda) A + lambda J, before applying A^-1.
/// The model is not validated so degenerate coefficient sets can be probed.
Eigen::MatrixXd assemble_rhs_operator(const rbf::SplineSystem& system, const JumpMatrix& jump,
                                      const models::JumpModel& model,
                                      DiscountSign sign = DiscountSign::Pide);

/// Theta = A^-1 * rhs operator, with A^-1 applied through the system's factorization.
ThetaOperator assemble_theta(const rbf::SplineSystem& system, const JumpMatrix& jump,
                             const models::JumpModel& model,
                             DiscountSign sign = DiscountSign::Pide);

struct StiffnessReport {
    double ratio = 0.0;
    double largest = 0.0;
    double smallest = 0.0;
    /// False when the eigen solver did not converge; the other fields are then NaN.
    bool available = true;
};

/// |lambda|_max / |lambda|_min over the nonzero eigenvalues of a square matrix.
StiffnessReport stiffness_ratio(const Eigen::MatrixXd& m);
inline StiffnessReport stiffness_ratio(const ThetaOperator& op) { return stiffness_ratio(op.theta); }

}  // namespace rbfpide::collocation
