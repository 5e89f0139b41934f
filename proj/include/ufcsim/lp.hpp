#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace ufcsim {

/// Sparse linear program in standard equality form:
///   minimize  cost' x   subject to   A x = rhs,   0 <= x <= upper
/// where upper entries may be +infinity.
struct LpProblem {
    Eigen::Index num_vars = 0;
    Eigen::Index num_rows = 0;
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::VectorXd rhs;
    Eigen::VectorXd cost;
    Eigen::VectorXd upper;

    void add_entry(Eigen::Index row, Eigen::Index col, double value) {
        entries.emplace_back(row, col, value);
    }
};

enum class LpStatus { optimal, iteration_limit, numerical_failure };

struct LpSolution {
    LpStatus status = LpStatus::numerical_failure;
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
    double duality_gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;

    std::string diagnostics() const;
};

struct LpOptions {
    double tolerance = 1e-9;
    // Accepted at termination when the target proves unreachable in double
    // precision (ill-conditioned late-stage normal equations).
    double acceptable_tolerance = 1e-7;
    int max_iterations = 200;
};

/// Mehrotra predictor-corrector interior-point method. The normal equations
/// are factored sparsely; columns dense enough to wreck fill-in (the max-
/// demand variables couple every slot of their category) are split off and
/// handled by a low-rank Woodbury update.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

} // namespace ufcsim
