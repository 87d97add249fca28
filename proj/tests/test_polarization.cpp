#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fjc/datasets.hpp"
#include "fjc/error.hpp"
#include "fjc/polarization.hpp"
#include "support.hpp"

using namespace fjc;

namespace {

Opinions vec(std::initializer_list<double> xs) {
    Opinions v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v[k++] = x;
    return v;
}

InfluenceMap diag(std::initializer_list<double> d) {
    return InfluenceMap{vec(d).asDiagonal().toDenseMatrix()};
}

InfluenceMap karate_map() {
    const InfluenceMatrix w = influence_matrix(datasets::karate_club());
    return influence_map(w, Susceptibility::uniform(34, 0.6));
}

}  // namespace

TEST_SUITE("polarization") {

TEST_CASE("indices") {
    const Opinions zero = Opinions::Zero(4);
    CHECK(p2(zero) == 0.0);
    CHECK(p3(zero) == 0.0);
    CHECK(p4(zero) == 0.0);
    const Opinions x = vec({1, -1, 0});
    CHECK(p2(x) == doctest::Approx(2.0 / 3));
    CHECK(p3(x) == 2.0);
    CHECK(p4(x) == 2.0);
    const Opinions ones = Opinions::Ones(7);
    CHECK(p2(ones) == 1.0);
    CHECK(p3(ones) == 7.0);
    CHECK(p4(ones) == 7.0);
    CHECK_THROWS_AS(p2(Opinions()), InvalidArgument);
    CHECK(to_string(PolarizationMetric::p4) == "P4");
}

TEST_CASE("out-of-range opinions warn") {
    fjc::test::WarningCapture w;
    CHECK(p3(vec({2.0})) == 4.0);
    CHECK(w.messages.size() == 1);
}

TEST_CASE("polarization value") {
    const Opinions u = vec({0.2, -0.4});
    CHECK(polarization_value(PolarizationMetric::p2, u, u) == 0.0);
    CHECK(polarization_value(PolarizationMetric::p4, vec({1, 0, -1}), vec({0.5, 0, -0.5})) == doctest::Approx(-1.0));
    CHECK(polarization_value(PolarizationMetric::p3, vec({0, 0}), vec({1, -1})) == 2.0);
    const auto rep = polarization_report(PolarizationMetric::p3, vec({0, 0}), vec({1, -1}));
    CHECK(rep.delta() == 2.0);
    CHECK_THROWS_AS(polarization_value(PolarizationMetric::p2, vec({0}), vec({0, 1})), InvalidArgument);
}

TEST_CASE("b1 picks the dominant column") {
    CHECK(polarizing_b1(diag({2, 1})) == vec({1, 0}));
    CHECK(polarizing_b1(diag({1, 1, 1})) == vec({1, 0, 0}));
}

TEST_CASE("b2 on diagonal maps") {
    const Opinions u = polarizing_b2(diag({2, 1}), 1.0);
    CHECK((u - vec({1, 0})).lpNorm<Eigen::Infinity>() < 1e-9);
    const Opinions a = polarizing_b2(diag({1, 1, 1}), 1.0);
    const Opinions b = polarizing_b2(diag({1, 1, 1}), 1.0);
    CHECK(a == b);
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(polarizing_b2(diag({1, 1}), 0.0), InvalidArgument);
}

TEST_CASE("heuristic thresholding") {
    CHECK(threshold_signs(vec({0.9, 0.05, -0.8}), 0.1) == vec({1, 0, -1}));
    CHECK(threshold_signs(vec({0.9, 0.05, -0.8}), 1.0) == vec({1, 0, 0}));
    CHECK(threshold_signs(vec({0.5, -0.5, 0.1}), 1.0) == vec({1, -1, 0}));
    CHECK_THROWS_AS(threshold_signs(vec({1}), 0.0), InvalidArgument);
}

TEST_CASE("norm certificates and box radius on karate") {
    const InfluenceMap h = karate_map();
    CHECK(polarizing_b1(h).lpNorm<1>() == 1.0);
    for (double r : {1.0, 2.5}) CHECK(std::abs(polarizing_b2(h, r).norm() - r) < 1e-12);
    const Opinions boxed = polarizing_b2(h, box_radius(h));
    CHECK(boxed.lpNorm<Eigen::Infinity>() == doctest::Approx(1.0).epsilon(1e-12));
    const SingularVector sv = top_right_singular_vector(h);
    CHECK(sv.converged);
    Eigen::Index arg = 0;
    sv.vector.cwiseAbs().maxCoeff(&arg);
    CHECK(sv.vector[arg] > 0);
    // Rayleigh check against a dense SVD
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h.matrix);
    CHECK(sv.value == doctest::Approx(svd.singularValues()[0]).epsilon(1e-9));
}

TEST_CASE("heuristic dominates the unit-ball vector on karate") {
    const InfluenceMap h = karate_map();
    const Opinions heu = polarizing_heuristic(h);
    const Opinions b2 = polarizing_b2(h, 1.0);
    CHECK(p3(h.matrix * heu) >= p3(h.matrix * b2));
}

TEST_CASE("property: constructed vectors beat random admissible ones") {
    const InfluenceMap h = karate_map();
    const Opinions b1 = polarizing_b1(h);
    const Opinions b2 = polarizing_b2(h, 1.0);
    const double f1 = p4(h.matrix * b1);
    const double f2 = p3(h.matrix * b2);
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        Opinions r(34);
        for (Eigen::Index i = 0; i < 34; ++i) r[i] = 2 * uniform01(rng) - 1;
        CHECK(f1 >= (h.matrix * (r / r.lpNorm<1>())).lpNorm<1>() - 1e-12);
        CHECK(f2 >= (h.matrix * r.normalized()).squaredNorm() - 1e-12);
    }
}

TEST_CASE("property: metric relations") {
    Rng rng(2);
    for (int t = 0; t < 500; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(uniform_index(rng, 50));
        Opinions x(n);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = 2 * uniform01(rng) - 1;
        CHECK(std::abs(p3(x) - static_cast<double>(n) * p2(x)) < 1e-12);
        CHECK(p4(x) >= p3(x));
    }
}

TEST_CASE("opinion csv round trip") {
    const Opinions x = vec({0.1, -1, 1.0 / 3});
    std::stringstream buf;
    write_opinions_csv(buf, x, "test vector");
    CHECK(buf.str().rfind("# test vector\nnode,opinion\n", 0) == 0);
    CHECK(read_opinions_csv(buf) == x);
    std::istringstream gap("node,opinion\n0,1\n2,1\n");
    CHECK_THROWS_AS(read_opinions_csv(gap), InvalidArgument);
    std::istringstream bad("node,opinion\n0,x\n");
    CHECK_THROWS_AS(read_opinions_csv(bad), ParseError);
}

}  // TEST_SUITE
