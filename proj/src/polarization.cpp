#include "fjc/polarization.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "fjc/diagnostics.hpp"
#include "fjc/error.hpp"
#include "number_format.hpp"

namespace fjc {

std::string_view to_string(PolarizationMetric m) {
    switch (m) {
        case PolarizationMetric::p2: return "P2";
        case PolarizationMetric::p3: return "P3";
        case PolarizationMetric::p4: return "P4";
    }
    return "?";
}

namespace {

void check_nonempty(const Opinions& x) {
    if (x.size() == 0) throw InvalidArgument("polarization of an empty opinion vector");
    if (x.cwiseAbs().maxCoeff() > 1.0) {
        warn("opinion vector leaves [-1,1]; polarization indices are outside their usual range");
    }
}

}  // namespace

double p3(const Opinions& x) {
    check_nonempty(x);
    return x.squaredNorm();
}

double p2(const Opinions& x) {
    return p3(x) / static_cast<double>(x.size());
}

double p4(const Opinions& x) {
    check_nonempty(x);
    return x.lpNorm<1>();
}

double polarization(PolarizationMetric m, const Opinions& x) {
    switch (m) {
        case PolarizationMetric::p2: return p2(x);
        case PolarizationMetric::p3: return p3(x);
        case PolarizationMetric::p4: return p4(x);
    }
    throw InvalidArgument("unknown polarization metric");
}

double polarization_value(PolarizationMetric m, const Opinions& u, const Opinions& z) {
    if (u.size() != z.size()) throw InvalidArgument("polarization value needs vectors of equal length");
    return polarization(m, z) - polarization(m, u);
}

PolarizationReport polarization_report(PolarizationMetric m, const Opinions& u, const Opinions& z) {
    if (u.size() != z.size()) throw InvalidArgument("polarization report needs vectors of equal length");
    return {m, polarization(m, u), polarization(m, z)};
}

Opinions polarizing_b1(const InfluenceMap& h) {
    const Eigen::Index n = h.size();
    if (n == 0) throw InvalidArgument("empty influence map");
    Eigen::Index best = 0;
    double best_norm = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double norm = h.matrix.col(j).lpNorm<1>();
        if (norm > best_norm) {
            best_norm = norm;
            best = j;
        }
    }
    Opinions u = Opinions::Zero(n);
    u[best] = 1.0;
    return u;
}

SingularVector top_right_singular_vector(const InfluenceMap& h, double tol, int max_iter) {
    const Eigen::Index n = h.size();
    if (n == 0) throw InvalidArgument("empty influence map");
    SingularVector sv;
    // deterministic, generic start (not orthogonal to any coordinate direction)
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + static_cast<double>(i + 1) / static_cast<double>(n + 1);
    x.normalize();
    for (sv.iterations = 1; sv.iterations <= max_iter; ++sv.iterations) {
        Eigen::VectorXd y = h.matrix.transpose() * (h.matrix * x);
        const double norm = y.norm();
        if (norm == 0.0) throw NumericalError("influence map annihilates the power-iteration vector");
        y /= norm;
        const double change = (y - x).lpNorm<Eigen::Infinity>();
        x = std::move(y);
        if (change < tol) {
            sv.converged = true;
            break;
        }
    }
    if (!sv.converged) {
        sv.iterations = max_iter;
        warn("power iteration for the top singular vector did not converge (degenerate top singular pair?)");
    }
    Eigen::Index arg = 0;
    x.cwiseAbs().maxCoeff(&arg);
    if (x[arg] < 0.0) x = -x;
    sv.value = (h.matrix * x).norm();
    sv.vector = std::move(x);
    return sv;
}

Opinions polarizing_b2(const InfluenceMap& h, double radius) {
    if (!(radius > 0.0)) throw InvalidArgument("L2 radius must be positive");
    return radius * top_right_singular_vector(h).vector;
}

double box_radius(const InfluenceMap& h) {
    return 1.0 / top_right_singular_vector(h).vector.lpNorm<Eigen::Infinity>();
}

Opinions threshold_signs(const Eigen::VectorXd& v1, double alpha) {
    if (!(alpha > 0.0)) throw InvalidArgument("heuristic threshold alpha must be positive");
    Eigen::Index arg = 0;
    const double peak = v1.cwiseAbs().maxCoeff(&arg);
    Opinions u = Opinions::Zero(v1.size());
    for (Eigen::Index i = 0; i < v1.size(); ++i) {
        if (v1[i] != 0.0 && std::abs(v1[i]) >= alpha * peak) u[i] = v1[i] > 0.0 ? 1.0 : -1.0;
    }
    if (u.isZero()) {
        warn("heuristic threshold keeps no node; using the largest singular-vector entry only");
        u[arg] = v1[arg] >= 0.0 ? 1.0 : -1.0;
    }
    return u;
}

Opinions polarizing_heuristic(const InfluenceMap& h, double alpha) {
    return threshold_signs(top_right_singular_vector(h).vector, alpha);
}

void write_opinions_csv(std::ostream& out, const Opinions& x, std::string_view provenance) {
    if (!provenance.empty()) out << "# " << provenance << '\n';
    out << "node,opinion\n";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        out << i << ',';
        detail::write_number(out, x[i]);
        out << '\n';
    }
}

Opinions read_opinions_csv(std::istream& in) {
    std::map<long, double> values;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            if (line == "node,opinion") continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected \"node,opinion\"", line_no);
        long node = 0;
        double value = 0.0;
        const char* b = line.data();
        const auto r1 = std::from_chars(b, b + comma, node);
        const auto r2 = std::from_chars(b + comma + 1, b + line.size(), value);
        if (r1.ec != std::errc{} || r1.ptr != b + comma || r2.ec != std::errc{} || r2.ptr != b + line.size() ||
            node < 0) {
            throw ParseError("malformed opinion row", line_no);
        }
        if (!values.emplace(node, value).second) throw ParseError("duplicate node " + std::to_string(node), line_no);
    }
    Opinions x(static_cast<Eigen::Index>(values.size()));
    long expected = 0;
    for (const auto& [node, value] : values) {
        if (node != expected) throw InvalidArgument("opinion file is missing node " + std::to_string(expected));
        x[expected++] = value;
    }
    return x;
}

}  // namespace fjc
