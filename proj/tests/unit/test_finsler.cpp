#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "helpers.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/finsler.hpp"
#include "spraylab/projective.hpp"
#include "spraylab/zoo.hpp"

using namespace spraylab;

namespace {

std::shared_ptr<RiemannianMetric> identity(int n) {
    std::vector<Expr> e;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) e.push_back(parse_expression(i == j ? "1" : "0", n));
    return std::make_shared<RiemannianMetric>(n, std::move(e));
}

RandersData default_randers() {
    const auto G = make_family("randers");
    return *randers_data(G);
}

}  // namespace

TEST(Finsler, EuclideanTensorsAreTrivial) {
    const auto F = std::make_shared<ExprFinslerMetric>(parse_expression("sqrt(y1^2+y2^2)", 2));
    const PointTM p = pt({0.3, -0.1}, {0.6, 0.8});
    const auto g = fundamental_tensor(*F, p);
    EXPECT_NEAR(g(0, 0), 1.0, 1e-14);
    EXPECT_NEAR(g(0, 1), 0.0, 1e-14);
    EXPECT_NEAR(g(1, 1), 1.0, 1e-14);
    EXPECT_LT(cartan_torsion(*F, p).max_abs(), 1e-14);
    EXPECT_LT(mean_cartan(*F, p).max_abs(), 1e-14);
    const auto G = induced_spray(F, Box::cube(2, 1.0), "euclid");
    EXPECT_LT(max_norm(G.values(p)), 1e-14);
}

TEST(Finsler, CartanTorsionContractsToZero) {
    const auto rd = default_randers();
    const auto G = make_family("randers");
    for (const auto& p : sample_points(G, 10, 1)) {
        const auto C = cartan_torsion(*rd.metric(), p);
        EXPECT_GT(C.max_abs(), 1e-3);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) EXPECT_NEAR(C(i, j, 0) * p.y[0] + C(i, j, 1) * p.y[1], 0.0, 1e-10);
    }
}

TEST(Finsler, MeanCartanMatchesFiniteDifferences) {
    const auto rd = default_randers();
    const auto& F = *rd.metric();
    const PointTM p = pt({0.2, -0.3}, {0.6, 0.8});
    const auto z = packed(p);
    oracle::Fn L = [&](std::span<const double> w) {
        std::vector<Jet> v;
        for (std::size_t s = 0; s < 4; ++s) v.push_back(Jet::constant(w[s], 4, 0));
        return F.L(v).value();
    };
    double g[2][2], C[2][2][2];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            g[i][j] = 0.5 * oracle::partial(L, z, MultiIndex(4).bump(2 + i).bump(2 + j), 0.05);
            for (int k = 0; k < 2; ++k) C[i][j][k] = 0.25 * oracle::partial(L, z, MultiIndex(4).bump(2 + i).bump(2 + j).bump(2 + k), 0.05);
        }
    const double det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    const double inv[2][2] = {{g[1][1] / det, -g[0][1] / det}, {-g[1][0] / det, g[0][0] / det}};
    const auto I = mean_cartan(F, p);
    for (int k = 0; k < 2; ++k) {
        double want = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) want += inv[i][j] * C[i][j][k];
        EXPECT_NEAR(I(k), want, 1e-8);
    }
}

TEST(Finsler, GeneralRouteMatchesChristoffelRoute) {
    const auto sphere = make_family("sphere", {{"n", "3"}});
    const auto metric = sphere.metric();
    const auto general = induced_spray(metric, sphere.domain(), "general", SprayRoute::General);
    for (const auto& p : sample_points(sphere, 10, 1))
        EXPECT_LT(max_diff(sphere.values(p), general.values(p)), 1e-12);
}

TEST(Finsler, RandersSprayIsGeodesicForItsMetric) {
    const auto G = make_family("randers");
    const auto rd = default_randers();
    const Expr F = parse_expression("sqrt((1+0.5*x2^2)*y1^2 + 2*0.1*x1*y1*y2 + (1+0.3*x1^2)*y2^2) + 0.2*x2*y1 + (-0.1*x1+0.1)*y2", 2);
    for (const auto& p : sample_points(G, 10, 2)) EXPECT_LT(rapcsak_residual(F, G, p).max_abs(), 1e-10);
}

TEST(Finsler, ChiFromCartanTorsion) {
    for (const char* fam : {"riemannian", "sphere", "randers"}) {
        const auto G = make_family(fam);
        for (const auto& p : sample_points(G, 20, 3)) {
            const auto a = chi_cartan(*G.metric(), G, p).components;
            const auto b = chi_definition(G, p).components;
            EXPECT_LT(max_diff(a, b), 1e-6) << fam;
            if (std::string(fam) != "randers") EXPECT_LT(max_norm(a), 1e-12);
        }
    }
}

TEST(Finsler, RandersQuantitiesForTrivialForms) {
    const auto a = identity(2);
    const RandersData zero(a, {parse_expression("0", 2), parse_expression("0", 2)}, Box::cube(2, 1.0));
    const auto q0 = randers_quantities(zero, pt({0.2, 0.3}, {1, 0}));
    for (const auto& t : q0.tensors) EXPECT_EQ(t.max_abs(), 0.0) << t.name();
    const RandersData constant(a, {parse_expression("0.2", 2), parse_expression("-0.1", 2)}, Box::cube(2, 1.0));
    const auto q1 = randers_quantities(constant, pt({0.2, 0.3}, {1, 0}));
    for (const auto& t : q1.tensors)
        if (t.name().rfind("s", 0) == 0) EXPECT_EQ(t.max_abs(), 0.0) << t.name();
    const auto hat = randers_deformed_spray(constant);
    EXPECT_LT(max_norm(hat.values(pt({0.2, 0.3}, {0.6, 0.8}))), 1e-15);
}

TEST(Finsler, RandersDeformedSprayIsTheProjectiveDeformation) {
    const auto G = make_family("randers");
    const auto rd = default_randers();
    const auto dV = VolumeForm::riemannian(rd.alpha_ptr());
    const auto closed = randers_deformed_spray(rd);
    const auto hat = deform(G, dV);
    for (const auto& p : sample_points(G, 50, 1)) {
        EXPECT_LT(max_diff(closed.values(p), hat.values(p)), 1e-8);
        EXPECT_LT(std::abs(s_curvature(closed, dV, p)), 1e-9);
    }
}

TEST(Finsler, RotationalRandersWitness) {
    const RandersData rd(identity(2), {parse_expression("-0.3*x2", 2), parse_expression("0.3*x1", 2)}, Box::cube(2, 1.0));
    const Expr kappa = parse_expression("0.45", 2, {.allow_y = false});
    const auto G = induced_spray(rd.metric(), rd.domain(), "rot", SprayRoute::General);
    const auto pts = sample_points(G, 20, 7);
    const auto iso = randers_isotropy_check(rd, kappa, pts);
    EXPECT_LT(iso.riemann.relative(), 1e-12);
    EXPECT_LT(iso.s_derivative.relative(), 1e-12);
    const auto hat = deform(G, VolumeForm::riemannian(rd.alpha_ptr()));
    for (const auto& p : pts) {
        CurvatureEngine e(hat, p, 3);
        EXPECT_NEAR(e.scalar_R().value(), randers_hat_R(rd, kappa, p), 1e-12);
        EXPECT_NEAR(e.scalar_R().value(), 0.36, 1e-12);  // 4 eps^2 |y|^2 for eps = 0.3
        EXPECT_LT(t_magnitude(e, e.t_curvature()).relative(), 1e-12);
    }
}

TEST(Finsler, RandersNormIsChecked) {
    const auto a = identity(2);
    EXPECT_THROW(RandersData(a, {parse_expression("0.9+x1", 2), parse_expression("0", 2)}, Box::cube(2, 1.0)).check_norm(
                     std::vector<double>{0.5, 0.0}),
                 InputError);
    EXPECT_THROW(make_family("randers", {{"b1", "1.5"}}), InputError);
}

TEST(Finsler, DegenerateMetricIsReported) {
    const auto F = std::make_shared<ExprFinslerMetric>(parse_expression("sqrt(y1^2+y2^2)*(1+0*x1) + 0*y2", 2));
    EXPECT_NO_THROW(fundamental_tensor(*F, pt({0, 0}, {1, 0})));
    // L = y1^2 has a singular fundamental tensor
    const auto D = std::make_shared<ExprFinslerMetric>(parse_expression("sqrt(y1^2 + 0*x1)", 2));
    EXPECT_THROW(induced_spray(D, Box::cube(2, 1.0), "deg").values(pt({0.1, 0.1}, {1, 0.5})), DegenerateMetric);
    EXPECT_THROW(D->check_positive(pt({0.1, 0.1}, {0, 1})), DomainError);
}
