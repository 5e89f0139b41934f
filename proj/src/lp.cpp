#include "ufcsim/lp.hpp"

#include "ufcsim/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ufcsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Solves (B + U diag(theta) U') s = r with B factored sparsely and the dense
/// columns U folded in through the Woodbury identity. The factorization is
/// regularized by a small diagonal shift; solves run iterative refinement
/// against the unshifted operator, so the shift never leaks into directions.
class NormalEquations {
public:
    NormalEquations(const SpMat& sparse_cols, MatrixXd dense_cols)
        : sparse_cols_(sparse_cols), dense_cols_(std::move(dense_cols)) {}

    bool factorize(const VectorXd& d_sparse, const VectorXd& d_dense, double delta) {
        const Index m = sparse_cols_.rows();
        base_ = sparse_cols_ * d_sparse.asDiagonal() * SpMat(sparse_cols_.transpose());
        theta_ = d_dense;
        SpMat identity(m, m);
        identity.setIdentity();
        SpMat shifted = base_ + delta * identity;
        solver_.compute(shifted);
        if (solver_.info() != Eigen::Success) {
            return false;
        }
        const Index k = dense_cols_.cols();
        if (k > 0) {
            basis_solves_ = solver_.solve(dense_cols_);
            MatrixXd capacitance = dense_cols_.transpose() * basis_solves_;
            for (Index j = 0; j < k; ++j) {
                capacitance(j, j) += 1.0 / theta_[j];
            }
            capacitance_.compute(capacitance);
            if (capacitance_.info() != Eigen::Success) {
                return false;
            }
        }
        return true;
    }

    VectorXd apply(const VectorXd& x) const {
        VectorXd y = base_ * x;
        if (dense_cols_.cols() > 0) {
            y += dense_cols_ * theta_.cwiseProduct(dense_cols_.transpose() * x);
        }
        return y;
    }

    /// One preconditioned pass plus refinement; reports the relative residual
    /// actually achieved so the caller can re-regularize when it stalls.
    VectorXd solve(const VectorXd& r, double* achieved = nullptr) const {
        VectorXd x = solve_once(r);
        double scale = 1.0 + inf_norm_local(r);
        double residual = 0.0;
        for (int pass = 0; pass < 6; ++pass) {
            VectorXd res = r - apply(x);
            residual = inf_norm_local(res) / scale;
            if (residual <= 1e-12) {
                break;
            }
            x += solve_once(res);
        }
        if (achieved != nullptr) {
            *achieved = residual;
        }
        return x;
    }

private:
    VectorXd solve_once(const VectorXd& r) const {
        VectorXd t = solver_.solve(r);
        if (dense_cols_.cols() > 0) {
            t -= basis_solves_ * capacitance_.solve(dense_cols_.transpose() * t);
        }
        return t;
    }

    static double inf_norm_local(const VectorXd& v) {
        return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
    }

    const SpMat& sparse_cols_;
    MatrixXd dense_cols_;
    SpMat base_;
    VectorXd theta_;
    Eigen::SimplicialLDLT<SpMat> solver_;
    MatrixXd basis_solves_;
    Eigen::LDLT<MatrixXd> capacitance_;
};

double inf_norm(const VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Largest alpha in (0,1] keeping value + alpha*step strictly positive on the
/// masked entries, shrunk by tau.
double step_length(const VectorXd& value, const VectorXd& step, const VectorXd& mask, double tau) {
    double alpha = 1.0;
    for (Index j = 0; j < value.size(); ++j) {
        if (mask[j] != 0.0 && step[j] < 0.0) {
            alpha = std::min(alpha, -value[j] / step[j]);
        }
    }
    return std::min(1.0, tau * alpha);
}

} // namespace

std::string LpSolution::diagnostics() const {
    std::ostringstream out;
    out << "status=";
    switch (status) {
        case LpStatus::optimal: out << "optimal"; break;
        case LpStatus::iteration_limit: out << "iteration_limit"; break;
        case LpStatus::numerical_failure: out << "numerical_failure"; break;
    }
    out << " iterations=" << iterations << " objective=" << objective
        << " duality_gap=" << duality_gap << " primal_residual=" << primal_residual
        << " dual_residual=" << dual_residual;
    return out.str();
}

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
    const Index m = problem.num_rows;
    const Index n_total = problem.num_vars;
    if (m <= 0 || n_total <= 0) {
        throw ValidationError("LP needs at least one row and one variable");
    }
    if (problem.rhs.size() != m || problem.cost.size() != n_total ||
        problem.upper.size() != n_total) {
        throw ValidationError("LP vector sizes disagree with declared dimensions");
    }

    // Presolve: variables fixed at zero by a zero upper bound drop out.
    std::vector<Index> active;
    std::vector<Index> col_of(static_cast<size_t>(n_total), -1);
    for (Index j = 0; j < n_total; ++j) {
        if (problem.upper[j] < 0.0) {
            throw ValidationError("LP upper bound below zero");
        }
        if (problem.upper[j] > 0.0) {
            col_of[static_cast<size_t>(j)] = static_cast<Index>(active.size());
            active.push_back(j);
        }
    }
    const Index n = static_cast<Index>(active.size());

    LpSolution result;
    result.x = VectorXd::Zero(n_total);
    if (n == 0) {
        result.status = inf_norm(problem.rhs) <= options.tolerance ? LpStatus::optimal
                                                                   : LpStatus::numerical_failure;
        result.objective = 0.0;
        return result;
    }

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(problem.entries.size());
    for (const auto& t : problem.entries) {
        if (t.row() < 0 || t.row() >= m || t.col() < 0 || t.col() >= n_total) {
            throw ValidationError("LP entry outside declared dimensions");
        }
        Index j = col_of[static_cast<size_t>(t.col())];
        if (j >= 0 && t.value() != 0.0) {
            entries.emplace_back(t.row(), j, t.value());
        }
    }

    VectorXd b = problem.rhs;
    VectorXd c(n), u(n);
    for (Index j = 0; j < n; ++j) {
        c[j] = problem.cost[active[static_cast<size_t>(j)]];
        u[j] = problem.upper[active[static_cast<size_t>(j)]];
    }

    // Ruiz equilibration: symmetric row/column scaling toward unit inf-norms.
    VectorXd row_scale = VectorXd::Ones(m);
    VectorXd col_scale = VectorXd::Ones(n);
    for (int pass = 0; pass < 8; ++pass) {
        VectorXd row_max = VectorXd::Zero(m);
        VectorXd col_max = VectorXd::Zero(n);
        for (const auto& t : entries) {
            double v = std::abs(t.value()) * row_scale[t.row()] * col_scale[t.col()];
            row_max[t.row()] = std::max(row_max[t.row()], v);
            col_max[t.col()] = std::max(col_max[t.col()], v);
        }
        for (Index i = 0; i < m; ++i) {
            if (row_max[i] > 0.0) row_scale[i] /= std::sqrt(row_max[i]);
        }
        for (Index j = 0; j < n; ++j) {
            if (col_max[j] > 0.0) col_scale[j] /= std::sqrt(col_max[j]);
        }
    }

    std::vector<Eigen::Triplet<double>> scaled_entries;
    scaled_entries.reserve(entries.size());
    std::vector<Index> col_nnz(static_cast<size_t>(n), 0);
    for (const auto& t : entries) {
        scaled_entries.emplace_back(t.row(), t.col(),
                                    t.value() * row_scale[t.row()] * col_scale[t.col()]);
        ++col_nnz[static_cast<size_t>(t.col())];
    }
    SpMat A(m, n);
    A.setFromTriplets(scaled_entries.begin(), scaled_entries.end());

    b = b.cwiseProduct(row_scale);
    for (Index j = 0; j < n; ++j) {
        c[j] *= col_scale[j];
        if (u[j] < kInf) u[j] /= col_scale[j];
    }
    double b_scale = std::max(1.0, inf_norm(b));
    double c_scale = std::max(1.0, inf_norm(c));
    b /= b_scale;
    c /= c_scale;
    for (Index j = 0; j < n; ++j) {
        if (u[j] < kInf) u[j] /= b_scale;
    }

    // Split off dense columns for the Woodbury update.
    const Index dense_threshold = std::max<Index>(32, m / 16);
    std::vector<Index> dense_ids;
    for (Index j = 0; j < n; ++j) {
        if (col_nnz[static_cast<size_t>(j)] > dense_threshold) {
            dense_ids.push_back(j);
        }
    }
    SpMat A_sparse = A;
    MatrixXd dense_cols(m, static_cast<Index>(dense_ids.size()));
    dense_cols.setZero();
    if (!dense_ids.empty()) {
        std::vector<Eigen::Triplet<double>> sparse_only;
        sparse_only.reserve(scaled_entries.size());
        std::vector<char> is_dense(static_cast<size_t>(n), 0);
        for (size_t k = 0; k < dense_ids.size(); ++k) {
            is_dense[static_cast<size_t>(dense_ids[k])] = 1;
        }
        for (const auto& t : scaled_entries) {
            if (is_dense[static_cast<size_t>(t.col())]) {
                auto it = std::lower_bound(dense_ids.begin(), dense_ids.end(), t.col());
                dense_cols(t.row(), it - dense_ids.begin()) += t.value();
            } else {
                sparse_only.push_back(t);
            }
        }
        A_sparse.setFromTriplets(sparse_only.begin(), sparse_only.end());
    }
    NormalEquations normal(A_sparse, std::move(dense_cols));

    // Interior start: midpoints for boxed variables, unit-scale otherwise.
    VectorXd bounded = VectorXd::Zero(n);
    VectorXd x(n), w = VectorXd::Ones(n), z = VectorXd::Ones(n), v = VectorXd::Zero(n);
    for (Index j = 0; j < n; ++j) {
        if (u[j] < kInf) {
            bounded[j] = 1.0;
            x[j] = 0.5 * u[j];
            w[j] = u[j] - x[j];
            v[j] = 1.0;
        } else {
            x[j] = 1.0;
        }
    }
    VectorXd y = VectorXd::Zero(m);
    const double pairs = static_cast<double>(n) + bounded.sum();

    VectorXd dx(n), dz(n), dw(n), dv(n), dy(m);

    auto solve_newton = [&](const NormalEquations& eq, const VectorXd& rp, const VectorXd& rd,
                            const VectorXd& ru, const VectorXd& rc_xz, const VectorXd& rc_wv,
                            const VectorXd& d) {
        VectorXd r_hat = rd - rc_xz.cwiseQuotient(x) +
                         bounded.cwiseProduct((rc_wv - v.cwiseProduct(ru)).cwiseQuotient(w));
        double achieved = 0.0;
        dy = eq.solve(rp + A * d.cwiseProduct(r_hat), &achieved);
        dx = d.cwiseProduct(VectorXd(A.transpose() * dy) - r_hat);
        dz = (rc_xz - z.cwiseProduct(dx)).cwiseQuotient(x);
        dw = bounded.cwiseProduct(ru - dx);
        dv = bounded.cwiseProduct((rc_wv - v.cwiseProduct(dw)).cwiseQuotient(w));
        return achieved;
    };

    // Track the best iterate seen; a late numerical stumble then costs
    // nothing but iterations.
    double best_merit = std::numeric_limits<double>::infinity();
    VectorXd best_x = x;
    int stalled = 0;
    const VectorXd ones_mask = VectorXd::Ones(n);

    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        VectorXd rp = b - A * x;
        VectorXd rd = c - VectorXd(A.transpose() * y) - z + v;
        VectorXd ru(n);
        for (Index j = 0; j < n; ++j) {
            ru[j] = bounded[j] != 0.0 ? u[j] - x[j] - w[j] : 0.0;
        }
        double mu = (x.dot(z) + w.cwiseProduct(v).dot(bounded)) / pairs;

        double primal = inf_norm(rp) / (1.0 + inf_norm(b));
        double dual = std::max(inf_norm(rd), inf_norm(ru)) / (1.0 + inf_norm(c));
        double gap = mu * pairs / (1.0 + std::abs(c.dot(x)));
        double merit = std::max({primal, dual, gap});
        if (merit < 0.9 * best_merit) {
            stalled = 0;
        } else {
            ++stalled;
        }
        if (merit < best_merit) {
            best_merit = merit;
            best_x = x;
            result.iterations = iter;
            result.primal_residual = primal;
            result.dual_residual = dual;
            result.duality_gap = gap;
        }
        if (merit <= options.tolerance) {
            result.status = LpStatus::optimal;
            break;
        }
        if (iter == options.max_iterations || stalled >= 10) {
            result.status = best_merit <= options.acceptable_tolerance
                                ? LpStatus::optimal
                                : LpStatus::iteration_limit;
            break;
        }
        if (!std::isfinite(mu) || mu > 1e30 || !std::isfinite(merit)) {
            result.status = best_merit <= options.acceptable_tolerance
                                ? LpStatus::optimal
                                : LpStatus::numerical_failure;
            break;
        }

        VectorXd d(n);
        for (Index j = 0; j < n; ++j) {
            double slope = z[j] / x[j];
            if (bounded[j] != 0.0) slope += v[j] / w[j];
            d[j] = 1.0 / slope;
        }
        VectorXd d_dense(static_cast<Index>(dense_ids.size()));
        VectorXd d_sparse = d;
        for (size_t k = 0; k < dense_ids.size(); ++k) {
            d_dense[static_cast<Index>(k)] = d[dense_ids[k]];
            d_sparse[dense_ids[k]] = 0.0;
        }

        // Factor, solve predictor and corrector, and re-regularize harder
        // when refinement cannot reach an accurate Newton direction. Late
        // iterations may never reach full accuracy in double precision; the
        // best direction found still makes progress.
        double delta = 1e-13;
        bool have_direction = false;
        double direction_quality = std::numeric_limits<double>::infinity();
        VectorXd bx = dx, bz = dz, bw = dw, bv = dv, by = dy;
        for (int attempt = 0; attempt < 6; ++attempt, delta *= 1e4) {
            if (!normal.factorize(d_sparse, d_dense, delta)) {
                continue;
            }
            // Predictor: pure Newton step toward mu = 0.
            VectorXd rc_xz = -x.cwiseProduct(z);
            VectorXd rc_wv = -bounded.cwiseProduct(w.cwiseProduct(v));
            double worst = solve_newton(normal, rp, rd, ru, rc_xz, rc_wv, d);

            double ap = std::min(step_length(x, dx, ones_mask, 1.0),
                                 step_length(w, dw, bounded, 1.0));
            double ad = std::min(step_length(z, dz, ones_mask, 1.0),
                                 step_length(v, dv, bounded, 1.0));
            double mu_aff = ((x + ap * dx).dot(z + ad * dz) +
                             (w + ap * dw).cwiseProduct(v + ad * dv).dot(bounded)) /
                            pairs;
            double sigma =
                std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3), 1e-8, 1.0 - 1e-8);

            // Corrector: recenter and cancel the predictor's second-order terms.
            rc_xz = (sigma * mu) * VectorXd::Ones(n) - x.cwiseProduct(z) -
                    dx.cwiseProduct(dz);
            rc_wv = bounded.cwiseProduct((sigma * mu) * VectorXd::Ones(n) -
                                         w.cwiseProduct(v) - dw.cwiseProduct(dv));
            worst = std::max(worst, solve_newton(normal, rp, rd, ru, rc_xz, rc_wv, d));

            if (worst < direction_quality &&
                dx.allFinite() && dz.allFinite() && dy.allFinite()) {
                direction_quality = worst;
                bx = dx;
                bz = dz;
                bw = dw;
                bv = dv;
                by = dy;
                have_direction = true;
            }
            if (worst <= 1e-9) {
                break;
            }
        }
        if (!have_direction) {
            result.status = best_merit <= options.acceptable_tolerance
                                ? LpStatus::optimal
                                : LpStatus::numerical_failure;
            break;
        }
        dx = bx;
        dz = bz;
        dw = bw;
        dv = bv;
        dy = by;

        double tau = mu > 1e-4 ? 0.995 : 0.99995;
        double ap = std::min(step_length(x, dx, ones_mask, tau),
                             step_length(w, dw, bounded, tau));
        double ad = std::min(step_length(z, dz, ones_mask, tau),
                             step_length(v, dv, bounded, tau));

        x += ap * dx;
        w += ap * dw;
        y += ad * dy;
        z += ad * dz;
        v += ad * dv;
    }

    x = best_x;

    for (Index j = 0; j < n; ++j) {
        double value = x[j] * b_scale * col_scale[j];
        Index orig = active[static_cast<size_t>(j)];
        if (problem.upper[orig] < kInf) {
            value = std::clamp(value, 0.0, problem.upper[orig]);
        } else {
            value = std::max(value, 0.0);
        }
        result.x[orig] = value;
    }
    result.objective = problem.cost.dot(result.x);
    return result;
}

} // namespace ufcsim
