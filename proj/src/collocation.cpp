#include "rbfpide/collocation.hpp"

#include "rbfpide/errors.hpp"
#include "rbfpide/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace rbfpide::collocation {

quadrature::Result jump_entry(const models::JumpModel& model,
                              const models::TruncationInterval& interval, double offset,
                              double quad_tol) {
    std::vector<double> breaks{interval.y_lo};
    const auto inside = [&](double y) { return y > interval.y_lo && y < interval.y_hi; };
    const double kink = -offset;
    if (model.kind == models::ModelKind::Kou && inside(0.0)) breaks.push_back(0.0);
    if (inside(kink)) breaks.push_back(kink);
    breaks.push_back(interval.y_hi);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    auto integrand = [&](double y) {
        const double r = std::abs(offset + y);
        return r * r * r * models::jump_density(model, y);
    };
    quadrature::Options options;
    options.abs_tol = quad_tol;
    return quadrature::integrate(integrand, breaks, options);
}

JumpMatrix empty_jump_matrix(std::size_t n) {
    JumpMatrix j;
    const auto size = static_cast<Eigen::Index>(n);
    j.entries = Eigen::MatrixXd::Zero(size, size);
    return j;
}

JumpMatrix assemble_jump_matrix(const rbf::CollocationGrid& grid, const models::JumpModel& model,
                                const models::TruncationInterval& interval, double quad_tol) {
    if (!(quad_tol > 0.0)) throw Error(ErrorKind::Config, "numerics.quad_tol must be > 0");
    const std::size_t n = grid.size();

    struct Pair {
        double offset;
        std::uint32_t i;
        std::uint32_t j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            pairs.push_back({grid.nodes[i] - grid.nodes[j], static_cast<std::uint32_t>(i),
                             static_cast<std::uint32_t>(j)});
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& a, const Pair& b) { return a.offset < b.offset; });

    // Offset classes: consecutive sorted offsets within 1e-13 of the class head.
    std::vector<std::size_t> class_start;
    std::vector<double> class_offset;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (class_start.empty() || pairs[k].offset - class_offset.back() > 1e-13) {
            class_start.push_back(k);
            class_offset.push_back(pairs[k].offset);
        }
    }
    const std::size_t classes = class_start.size();
    class_start.push_back(pairs.size());

    std::vector<double> values(classes, 0.0);
    std::vector<double> errors(classes, 0.0);
    std::vector<char> converged(classes, 1);
    parallel_for(classes, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const auto res = jump_entry(model, interval, class_offset[c], quad_tol);
            values[c] = res.value;
            errors[c] = res.abs_error;
            converged[c] = res.converged ? 1 : 0;
        }
    });

    JumpMatrix out;
    out.interval = interval;
    out.quad_tol = quad_tol;
    out.distinct_offsets = classes;
    out.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::size_t worst = classes;
    for (std::size_t c = 0; c < classes; ++c) {
        out.max_error_estimate = std::max(out.max_error_estimate, errors[c]);
        if (!converged[c] && (worst == classes || errors[c] > errors[worst])) worst = c;
        for (std::size_t k = class_start[c]; k < class_start[c + 1]; ++k) {
            out.entries(pairs[k].i, pairs[k].j) = values[c];
        }
    }
    if (worst != classes) {
        const auto& p = pairs[class_start[worst]];
        throw QuadratureError(p.i, p.j, errors[worst],
                              "jump integral did not converge at entry (" + std::to_string(p.i) +
                                  ", " + std::to_string(p.j) + "), error estimate " +
                                  std::to_string(errors[worst]));
    }
    if (!out.entries.allFinite()) throw SolveError("jump matrix has non-finite entries");
    return out;
}

Eigen::MatrixXd assemble_rhs_operator(const rbf::SplineSystem& system, const JumpMatrix& jump,
                                      const models::JumpModel& model, DiscountSign sign) {
    const double s2 = model.sigma * model.sigma;
    const double lambda = model.lambda;
    const double drift = model.r - model.q - 0.5 * s2 - lambda * models::eta(model);
    const double discount = sign == DiscountSign::Pide ? -(model.r + lambda) : (model.r + lambda);
    Eigen::MatrixXd m = 0.5 * s2 * system.A_xx + drift * system.A_x + discount * system.A;
    if (lambda != 0.0) {
        if (jump.entries.rows() != m.rows() || jump.entries.cols() != m.cols()) {
            throw Error(ErrorKind::LengthMismatch, "jump matrix size does not match the grid");
        }
        m += lambda * jump.entries;
    }
    return m;
}

ThetaOperator assemble_theta(const rbf::SplineSystem& system, const JumpMatrix& jump,
                             const models::JumpModel& model, DiscountSign sign) {
    ThetaOperator op;
    op.model = model;
    op.grid = system.grid;
    op.sign = sign;
    op.theta = system.apply_inverse(assemble_rhs_operator(system, jump, model, sign));
    if (!op.theta.allFinite()) throw SolveError("reduced operator has non-finite entries");
    return op;
}

StiffnessReport stiffness_ratio(const Eigen::MatrixXd& m) {
    StiffnessReport report;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() != Eigen::Success) {
        report.available = false;
        report.ratio = report.largest = report.smallest = std::numeric_limits<double>::quiet_NaN();
        return report;
    }
    const Eigen::VectorXd mags = solver.eigenvalues().cwiseAbs();
    const double top = mags.size() ? mags.maxCoeff() : 0.0;
    const double floor = top * 1e-13;
    double low = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < mags.size(); ++k) {
        if (mags[k] > floor) low = std::min(low, mags[k]);
    }
    if (!(top > 0.0) || !std::isfinite(low)) {
        report.available = false;
        report.ratio = report.largest = report.smallest = std::numeric_limits<double>::quiet_NaN();
        return report;
    }
    report.largest = top;
    report.smallest = low;
    report.ratio = top / low;
    return report;
}

}  // namespace rbfpide::collocation
