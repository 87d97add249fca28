#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "fjc/fj.hpp"

namespace fjc {

enum class PolarizationMetric { p2, p3, p4 };

std::string_view to_string(PolarizationMetric m);

/// Mean squared opinion, (1/v) ||x||_2^2.
double p2(const Opinions& x);
/// Sum of squared opinions, ||x||_2^2.
double p3(const Opinions& x);
/// Sum of absolute opinions, ||x||_1.
double p4(const Opinions& x);

double polarization(PolarizationMetric m, const Opinions& x);

/// Phi(z) - Phi(u); positive when the dynamics polarize this input.
double polarization_value(PolarizationMetric m, const Opinions& u, const Opinions& z);

struct PolarizationReport {
    PolarizationMetric metric;
    double initial;
    double final;
    double delta() const noexcept { return final - initial; }
};

PolarizationReport polarization_report(PolarizationMetric m, const Opinions& u, const Opinions& z);

// Initial opinion profiles that make the FJ map H = (I - Lambda W)^{-1}(I - Lambda)
// as polarizing as possible within a given set of admissible prejudices.

/// Vertex e_j of the unit L1 ball maximizing ||H e_j||_1 (smallest j on ties).
Opinions polarizing_b1(const InfluenceMap& h);

struct SingularVector {
    Eigen::VectorXd vector;  // unit norm, largest-magnitude entry positive
    double value = 0.0;      // top singular value of H
    int iterations = 0;
    bool converged = false;
};

/// Power iteration on H^T H from a fixed start, to relative tolerance `tol`.
SingularVector top_right_singular_vector(const InfluenceMap& h, double tol = 1e-10, int max_iter = 100000);

/// radius * top right singular vector of H: maximizes ||H u||_2 on the L2 ball.
Opinions polarizing_b2(const InfluenceMap& h, double radius);

/// Radius at which the scaled top singular vector touches the [-1,1] box.
double box_radius(const InfluenceMap& h);

/// sign(v1_i) where |v1_i| >= alpha * max_k |v1_k|, else 0.
Opinions polarizing_heuristic(const InfluenceMap& h, double alpha = 0.1);

/// Thresholding step of polarizing_heuristic, exposed for a given vector.
Opinions threshold_signs(const Eigen::VectorXd& v1, double alpha);

/// CSV "node,opinion" preceded by "# <provenance>".
void write_opinions_csv(std::ostream& out, const Opinions& x, std::string_view provenance = {});
Opinions read_opinions_csv(std::istream& in);

}  // namespace fjc
