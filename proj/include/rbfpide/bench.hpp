#pragma once

#include "rbfpide/models.hpp"
#include "rbfpide/stepper.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace rbfpide::bench {

inline constexpr std::size_t kDefaultEvalCount = 1950;

/// Equally spaced log-prices on [log(K/20), log(2K)].
struct EvaluationGrid {
    Eigen::VectorXd points;

    std::size_t count() const noexcept { return static_cast<std::size_t>(points.size()); }
    /// Index of the point closest to `x`.
    std::size_t nearest(double x) const;

    static EvaluationGrid for_strike(double strike, std::size_t count = kDefaultEvalCount);
};

struct ErrorReport {
    double e_inf = 0.0;
    double e_2 = 0.0;
    std::optional<double> e_rel;
    std::size_t n = 0;
    std::size_t m0 = 0;
    std::optional<double> rate_inf;
    std::optional<double> rate_2;
    /// Set when the error grew against the previous level.
    bool degraded = false;
};

/// Max and root-mean-square deviation; E_rel at `spot_index` when given.
ErrorReport error_metrics(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact,
                          std::optional<std::size_t> spot_index = std::nullopt);

enum class RefinementAxis { Space, Time };

/// Pairwise log-ratio orders against the previous level, written into the
/// reports. The first level keeps empty rates.
void fit_rate(std::vector<ErrorReport>& reports, RefinementAxis axis);

double pairwise_rate(double e_prev, double e_cur, double level_prev, double level_cur);

enum class OracleKind { BlackScholes, MertonSeries, Fst, RefinedSteps };

struct Oracle {
    OracleKind kind = OracleKind::BlackScholes;
    std::size_t fst_size = 1u << 15;
    std::size_t fst_steps = 8192;
    double fst_half_width = 10.0;
    /// Step count of the same-grid run used by RefinedSteps.
    std::size_t refined_m0 = 10240;
};

/// Acceptance gate evaluated on a finished table.
struct Gate {
    enum class Kind {
        MaxE2,         // finest e_2 <= max
        MaxEInf,       // finest e_inf <= max
        MaxERel,       // finest e_rel <= max
        Rate2Range,    // every rate_2 in [min, max]
        RateInfRange,  // every rate_inf in [min, max]
        EInfReduction  // every e_inf(prev) / e_inf(cur) in [min, max]
    };
    Kind kind = Kind::MaxE2;
    double min = 0.0;
    double max = 0.0;
};

struct GateOutcome {
    Gate gate;
    bool passed = false;
    std::string detail;
};

struct Level {
    std::size_t n = 0;
    std::size_t m0 = 0;
};

struct ExperimentDescriptor {
    std::string name;
    std::string description;
    models::JumpModel model;
    stepper::ContractSpec contract;
    stepper::NumericsConfig numerics;
    std::vector<Level> levels;
    RefinementAxis axis = RefinementAxis::Space;
    Oracle oracle;
    std::vector<Gate> gates;
    std::size_t eval_count = kDefaultEvalCount;
    /// Spot for E_rel; defaults to the strike.
    std::optional<double> spot;
};

struct TableResult {
    ExperimentDescriptor descriptor;
    std::vector<ErrorReport> rows;
    bool complete = true;
    std::string failure;
    std::vector<GateOutcome> gates;

    bool passed() const;
};

/// Runs every level against the oracle. A pipeline error stops the table and
/// is recorded in `failure` with `complete = false`.
TableResult run_table(const ExperimentDescriptor& descriptor);

std::vector<GateOutcome> evaluate_gates(const std::vector<ErrorReport>& rows,
                                        const std::vector<Gate>& gates);

std::string gate_name(Gate::Kind kind);
std::string to_string(OracleKind kind);
std::string to_string(RefinementAxis axis);

/// Absolute second differences of Gamma along a spot curve: the largest one
/// within 20% of the strike, and the median over the whole curve.
struct GammaRoughness {
    double near_strike = 0.0;
    double median = 0.0;
};
GammaRoughness gamma_roughness(const std::vector<double>& spots, const std::vector<double>& gamma,
                               double strike);

/// `n,m0,e_inf,rate_inf,e_2,rate_2` with empty cells for missing rates.
std::string to_csv(const TableResult& table);
nlohmann::json to_json(const TableResult& table);

}  // namespace rbfpide::bench
