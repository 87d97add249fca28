#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>

#include <Eigen/Dense>

#include "fjc/graph.hpp"
#include "fjc/random.hpp"

namespace fjc {

using Opinions = Eigen::VectorXd;

/// Per-node susceptibility lambda_i in [0,1], not all equal to one.
class Susceptibility {
public:
    explicit Susceptibility(Eigen::VectorXd values);

    static Susceptibility uniform(Eigen::Index n, double value);

    const Eigen::VectorXd& values() const noexcept { return values_; }
    double operator[](Eigen::Index i) const noexcept { return values_[i]; }
    Eigen::Index size() const noexcept { return values_.size(); }

private:
    Eigen::VectorXd values_;
};

/// Asynchronous (pairwise) parameters h_i and gamma_ij derived from the
/// synchronous pair (W, Lambda). gamma has the sparsity of W plus the
/// diagonal; the diagonal entries are kept for inspection only.
struct GossipParameters {
    Eigen::VectorXd h;
    SparseRowMatrix gamma;

    /// gamma_ij, or 0 when (i, j) is not stored.
    double gamma_at(NodeId i, NodeId j) const;
};

/// h_i = 1 - (1 - lambda_i) / d_i, gamma_ij = lambda_i w_ij / h_i (i != j),
/// gamma_ii = (d_i (1 - h_i) + h_i - (1 - lambda_i w_ii)) / h_i.
/// Rows with h_i = 0 (fully anchored nodes) get zero gamma and a warning.
GossipParameters gossip_parameters(const InfluenceMatrix& w, const Susceptibility& lambda,
                                   std::span<const std::size_t> degrees);

/// Same, with d_i taken as the followee count of each node.
GossipParameters gossip_parameters(const SocialGraph& g, const InfluenceMatrix& w, const Susceptibility& lambda);

/// One synchronous sweep: x'_i = lambda_i sum_j w_ij x_j + (1 - lambda_i) u_i.
Opinions fj_step(const Opinions& x, const InfluenceMatrix& w, const Susceptibility& lambda, const Opinions& u);

struct SolverOptions {
    /// Systems up to this size use a sparse LU factorization, larger ones BiCGSTAB.
    Eigen::Index direct_limit = 20000;
    double iterative_tol = 1e-12;
    int iterative_max_iter = 100000;
    /// Required sup-norm residual of every returned solution.
    double residual_tol = 1e-10;
};

/// Factorized (I - Lambda W) for repeated fixed-point solves.
class FjSolver {
public:
    FjSolver(const InfluenceMatrix& w, const Susceptibility& lambda, const SolverOptions& opts = {});
    ~FjSolver();
    FjSolver(FjSolver&&) noexcept;
    FjSolver& operator=(FjSolver&&) noexcept;

    /// z = (I - Lambda W)^{-1} (I - Lambda) u.
    Opinions fixed_point(const Opinions& u) const;

    /// Solves (I - Lambda W) x = b.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

    Eigen::Index size() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Closed-form FJ equilibrium via one sparse solve.
Opinions fj_fixed_point(const InfluenceMatrix& w, const Susceptibility& lambda, const Opinions& u,
                        const SolverOptions& opts = {});

/// Sup-norm of (I - Lambda W) z - (I - Lambda) u.
double fj_residual(const InfluenceMatrix& w, const Susceptibility& lambda, const Opinions& u, const Opinions& z);

struct IterationResult {
    Opinions x;
    int iterations = 0;
    double last_change = 0.0;
};

/// Repeats fj_step from x(0) = u until the sup-norm change drops below tol.
/// Throws ConvergenceError when max_iter sweeps are not enough.
IterationResult fj_iterate_until(const InfluenceMatrix& w, const Susceptibility& lambda, const Opinions& u,
                                 double tol, int max_iter);

struct AsyncResult {
    Opinions final;
    /// Mean of x(0), ..., x(steps).
    Opinions time_average;
};

/// Asynchronous pairwise FJ. Each step draws a follow edge (i, j) uniformly
/// and updates the follower i toward j:
///   x_i <- h_i [(1 - gamma_ij) x_i + gamma_ij x_j] + (1 - h_i) u_i.
AsyncResult fj_async_run(const SocialGraph& g, const GossipParameters& params, const Opinions& u,
                         std::uint64_t steps, Rng& rng);

/// Dense H = (I - Lambda W)^{-1} (I - Lambda), mapping prejudices to
/// equilibrium opinions.
struct InfluenceMap {
    Eigen::MatrixXd matrix;

    Eigen::Index size() const noexcept { return matrix.rows(); }
};

inline constexpr Eigen::Index kDefaultInfluenceMapCap = 8000;

/// Column j is (1 - lambda_j) (I - Lambda W)^{-1} e_j. Throws
/// InvalidArgument when v exceeds max_nodes (the dense matrix needs 8 v^2 bytes).
InfluenceMap influence_map(const InfluenceMatrix& w, const Susceptibility& lambda,
                           Eigen::Index max_nodes = kDefaultInfluenceMapCap, const SolverOptions& opts = {});

/// u64 v (little-endian) followed by v*v row-major little-endian doubles.
void write_influence_map(std::ostream& out, const InfluenceMap& h);
InfluenceMap read_influence_map(std::istream& in);

}  // namespace fjc
