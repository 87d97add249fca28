#include "fjc/fj.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <variant>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "fjc/diagnostics.hpp"
#include "fjc/error.hpp"

namespace fjc {

Susceptibility::Susceptibility(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() == 0) throw InvalidArgument("susceptibility vector is empty");
    bool anchored = false;
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        const double l = values_[i];
        if (!(l >= 0.0 && l <= 1.0)) {
            throw InvalidArgument("susceptibility of node " + std::to_string(i) + " outside [0,1]: " +
                                  std::to_string(l));
        }
        anchored = anchored || l < 1.0;
    }
    if (!anchored) {
        throw InvalidArgument("all susceptibilities equal 1 (pure averaging has no anchored agent)");
    }
}

Susceptibility Susceptibility::uniform(Eigen::Index n, double value) {
    return Susceptibility(Eigen::VectorXd::Constant(n, value));
}

double GossipParameters::gamma_at(NodeId i, NodeId j) const {
    const auto begin = gamma.innerIndexPtr() + gamma.outerIndexPtr()[i];
    const auto end = gamma.innerIndexPtr() + gamma.outerIndexPtr()[i + 1];
    const auto it = std::lower_bound(begin, end, static_cast<int>(j));
    if (it == end || *it != static_cast<int>(j)) return 0.0;
    return gamma.valuePtr()[it - gamma.innerIndexPtr()];
}

namespace {

void check_shapes(const InfluenceMatrix& w, const Susceptibility& lambda) {
    if (w.weights.rows() != w.weights.cols() || w.weights.rows() != lambda.size()) {
        throw InvalidArgument("shape mismatch between influence matrix (" + std::to_string(w.weights.rows()) +
                              ") and susceptibility (" + std::to_string(lambda.size()) + ")");
    }
}

void check_vector(const char* name, const Eigen::VectorXd& x, Eigen::Index n) {
    if (x.size() != n) {
        throw InvalidArgument(std::string(name) + " has length " + std::to_string(x.size()) + ", expected " +
                              std::to_string(n));
    }
}

// I - Lambda W
SparseRowMatrix system_matrix(const InfluenceMatrix& w, const Susceptibility& lambda) {
    const Eigen::Index n = w.size();
    SparseRowMatrix a = -(lambda.values().asDiagonal() * w.weights);
    SparseRowMatrix id(n, n);
    id.setIdentity();
    a += id;
    a.makeCompressed();
    return a;
}

}  // namespace

GossipParameters gossip_parameters(const InfluenceMatrix& w, const Susceptibility& lambda,
                                   std::span<const std::size_t> degrees) {
    check_shapes(w, lambda);
    const Eigen::Index n = w.size();
    if (static_cast<Eigen::Index>(degrees.size()) != n) throw InvalidArgument("degree vector length mismatch");

    GossipParameters p;
    p.h.resize(n);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(w.weights.nonZeros() + n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto d = static_cast<double>(degrees[i]);
        if (degrees[i] == 0) throw InvalidArgument("node " + std::to_string(i) + " has degree 0");
        const double l = lambda[i];
        const double h = degrees[i] == 1 ? l : 1.0 - (1.0 - l) / d;
        p.h[i] = h;
        double w_ii = 0.0;
        for (SparseRowMatrix::InnerIterator it(w.weights, i); it; ++it) {
            if (it.col() == i) w_ii = it.value();
        }
        if (h == 0.0) {
            warn("node " + std::to_string(i) + " has h = 0 (lambda = 0, degree 1); it stays at its prejudice");
            continue;
        }
        for (SparseRowMatrix::InnerIterator it(w.weights, i); it; ++it) {
            if (it.col() != i) triplets.emplace_back(i, it.col(), std::min(1.0, l * it.value() / h));
        }
        // both coefficients lie in [0, 1] exactly; clamp away rounding
        triplets.emplace_back(i, i, std::clamp((d * (1.0 - h) + h - (1.0 - l * w_ii)) / h, 0.0, 1.0));
    }
    p.gamma.resize(n, n);
    p.gamma.setFromTriplets(triplets.begin(), triplets.end());
    p.gamma.makeCompressed();
    return p;
}

GossipParameters gossip_parameters(const SocialGraph& g, const InfluenceMatrix& w, const Susceptibility& lambda) {
    std::vector<std::size_t> degrees(g.node_count());
    for (NodeId i = 0; i < g.node_count(); ++i) degrees[i] = degree_for_gossip(g, i);
    return gossip_parameters(w, lambda, degrees);
}

Opinions fj_step(const Opinions& x, const InfluenceMatrix& w, const Susceptibility& lambda, const Opinions& u) {
    check_shapes(w, lambda);
    check_vector("x", x, w.size());
    check_vector("u", u, w.size());
    const Eigen::VectorXd& l = lambda.values();
    return l.cwiseProduct(w.weights * x) + (Eigen::VectorXd::Ones(l.size()) - l).cwiseProduct(u);
}

struct FjSolver::Impl {
    SparseRowMatrix a;
    Eigen::VectorXd anchor;  // 1 - lambda
    SolverOptions opts;
    std::variant<std::monostate, Eigen::SparseLU<Eigen::SparseMatrix<double>>,
                 Eigen::BiCGSTAB<SparseRowMatrix, Eigen::IncompleteLUT<double>>>
        solver;
};

FjSolver::FjSolver(const InfluenceMatrix& w, const Susceptibility& lambda, const SolverOptions& opts)
    : impl_(std::make_unique<Impl>()) {
    check_shapes(w, lambda);
    impl_->a = system_matrix(w, lambda);
    impl_->anchor = Eigen::VectorXd::Ones(lambda.size()) - lambda.values();
    impl_->opts = opts;
    if (w.size() <= opts.direct_limit) {
        auto& lu = impl_->solver.emplace<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        Eigen::SparseMatrix<double> col_major = impl_->a;
        lu.analyzePattern(col_major);
        lu.factorize(col_major);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("I - Lambda W is singular: " + lu.lastErrorMessage() +
                                 " (is the graph strongly connected with some lambda_i < 1?)");
        }
    } else {
        auto& it = impl_->solver.emplace<Eigen::BiCGSTAB<SparseRowMatrix, Eigen::IncompleteLUT<double>>>();
        it.setTolerance(opts.iterative_tol);
        it.setMaxIterations(opts.iterative_max_iter);
        it.compute(impl_->a);
        if (it.info() != Eigen::Success) throw NumericalError("preconditioner setup failed for I - Lambda W");
    }
}

FjSolver::~FjSolver() = default;
FjSolver::FjSolver(FjSolver&&) noexcept = default;
FjSolver& FjSolver::operator=(FjSolver&&) noexcept = default;

Eigen::Index FjSolver::size() const noexcept { return impl_->a.rows(); }

Eigen::VectorXd FjSolver::solve(const Eigen::VectorXd& b) const {
    check_vector("right-hand side", b, size());
    Eigen::VectorXd x;
    if (auto* lu = std::get_if<Eigen::SparseLU<Eigen::SparseMatrix<double>>>(&impl_->solver)) {
        x = lu->solve(b);
    } else {
        auto& it = std::get<Eigen::BiCGSTAB<SparseRowMatrix, Eigen::IncompleteLUT<double>>>(impl_->solver);
        x = it.solve(b);
        if (it.info() != Eigen::Success) {
            throw NumericalError("BiCGSTAB did not reach tolerance after " + std::to_string(it.iterations()) +
                                 " iterations (error " + std::to_string(it.error()) + ")");
        }
    }
    const double residual = (impl_->a * x - b).lpNorm<Eigen::Infinity>();
    if (!(residual < impl_->opts.residual_tol)) {
        throw NumericalError("fixed-point residual " + std::to_string(residual) + " exceeds tolerance");
    }
    return x;
}

Opinions FjSolver::fixed_point(const Opinions& u) const {
    check_vector("u", u, size());
    return solve(impl_->anchor.cwiseProduct(u));
}

Opinions fj_fixed_point(const InfluenceMatrix& w, const Susceptibility& lambda, const Opinions& u,
                        const SolverOptions& opts) {
    return FjSolver(w, lambda, opts).fixed_point(u);
}

double fj_residual(const InfluenceMatrix& w, const Susceptibility& lambda, const Opinions& u, const Opinions& z) {
    const Eigen::VectorXd& l = lambda.values();
    const Eigen::VectorXd lhs = z - l.cwiseProduct(w.weights * z);
    const Eigen::VectorXd rhs = (Eigen::VectorXd::Ones(l.size()) - l).cwiseProduct(u);
    return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

IterationResult fj_iterate_until(const InfluenceMatrix& w, const Susceptibility& lambda, const Opinions& u,
                                 double tol, int max_iter) {
    IterationResult r{u, 0, 0.0};
    for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
        Opinions next = fj_step(r.x, w, lambda, u);
        r.last_change = (next - r.x).lpNorm<Eigen::Infinity>();
        r.x = std::move(next);
        if (r.last_change < tol) return r;
    }
    throw ConvergenceError("FJ iteration did not converge in " + std::to_string(max_iter) + " sweeps",
                           std::vector<double>(r.x.data(), r.x.data() + r.x.size()), r.last_change);
}

AsyncResult fj_async_run(const SocialGraph& g, const GossipParameters& params, const Opinions& u,
                         std::uint64_t steps, Rng& rng) {
    const NodeId n = g.node_count();
    check_vector("u", u, n);
    check_vector("h", params.h, n);
    const std::size_t m = g.edge_count();
    if (steps > 0 && m == 0) throw InvalidArgument("asynchronous FJ needs at least one edge");

    // per-edge follower and gamma, aligned with the graph's out-adjacency
    std::vector<NodeId> follower(m);
    std::vector<double> gamma(m);
    for (NodeId i = 0; i < n; ++i) {
        for (std::size_t k = g.out_offset(i); k < g.out_offset(i + 1); ++k) {
            follower[k] = i;
            gamma[k] = params.gamma_at(i, g.out_targets()[k]);
        }
    }

    AsyncResult r{u, u};
    Eigen::VectorXd& x = r.final;
    Eigen::VectorXd sum = u;
    for (std::uint64_t t = 0; t < steps; ++t) {
        const std::size_t k = uniform_index(rng, m);
        const NodeId i = follower[k];
        const NodeId j = g.out_targets()[k];
        const double h = params.h[i];
        x[i] = h * ((1.0 - gamma[k]) * x[i] + gamma[k] * x[j]) + (1.0 - h) * u[i];
        sum += x;
    }
    r.time_average = sum / static_cast<double>(steps + 1);
    return r;
}

InfluenceMap influence_map(const InfluenceMatrix& w, const Susceptibility& lambda, Eigen::Index max_nodes,
                           const SolverOptions& opts) {
    const Eigen::Index n = w.size();
    if (n > max_nodes) {
        throw InvalidArgument("influence map for " + std::to_string(n) + " nodes needs " +
                              std::to_string(8.0 * static_cast<double>(n) * static_cast<double>(n) / 1e9) +
                              " GB; raise the node cap explicitly or work on a subgraph");
    }
    const FjSolver solver(w, lambda, opts);
    InfluenceMap h{Eigen::MatrixXd(n, n)};
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e[j] = 1.0 - lambda[j];
        h.matrix.col(j) = solver.solve(e);
        e[j] = 0.0;
    }
    return h;
}

namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("truncated influence map stream");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_influence_map(std::ostream& out, const InfluenceMap& h) {
    const auto n = static_cast<std::uint64_t>(h.size());
    write_le(out, n);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        for (Eigen::Index j = 0; j < h.size(); ++j) write_le(out, h.matrix(i, j));
    }
}

InfluenceMap read_influence_map(std::istream& in) {
    const auto n = static_cast<Eigen::Index>(read_le<std::uint64_t>(in));
    InfluenceMap h{Eigen::MatrixXd(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) h.matrix(i, j) = read_le<double>(in);
    }
    return h;
}

}  // namespace fjc
