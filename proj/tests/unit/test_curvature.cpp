#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "helpers.hpp"
#include "spraylab/curvature.hpp"
#include "spraylab/zoo.hpp"

using namespace spraylab;

namespace {

SprayChart generic_spray() {
    std::vector<Expr> G{parse_expression("0.3*x2*y1^2 + 0.1*y1^3/sqrt(y1^2+y2^2+y3^2)", 3),
                        parse_expression("0.2*x1*x3*y2*y3 - 0.05*y2^2", 3),
                        parse_expression("0.1*sin(x1)*y1*y3 + 0.2*(y1^2+y2^2+y3^2)*x2", 3)};
    return expression_spray(std::move(G), Box::cube(3, 0.8), "generic");
}

std::vector<double> vals(const FieldTensor& t) {
    std::vector<double> v;
    for (std::size_t i = 0; i < t.size(); ++i) v.push_back(t.at(i).value());
    return v;
}

std::vector<std::pair<std::string, Params>> zoo() {
    return {{"flat", {}},
            {"riemannian", {}},
            {"sphere", {{"n", "3"}}},
            {"affine_shift", {{"A", "x1*x2"}, {"B", "0.3*x1"}, {"C", "x2^2"}, {"D", "1+x1"}}},
            {"randers", {}}};
}

}  // namespace

TEST(Curvature, ChiRoutesAgreeOnZoo) {
    for (const auto& [fam, params] : zoo()) {
        const auto G = make_family(fam, params);
        for (const auto& p : sample_points(G, 50, 1)) {
            CurvatureEngine e(G, p, 4);
            for (auto r : {ChiRoute::Trace, ChiRoute::LocalPi, ChiRoute::FromT})
                EXPECT_LT(identities::chi_routes(e, ChiRoute::Definition, r).relative(), 1e-8) << fam << " " << to_string(r);
        }
    }
}

TEST(Curvature, ChiRoutesAgreeOnGenericSpray) {
    const auto G = generic_spray();
    for (const auto& p : sample_points(G, 20, 2)) {
        CurvatureEngine e(G, p, 4);
        EXPECT_GT(chi_magnitude(e, e.chi_definition()).relative(), 1e-4);
        for (auto r : {ChiRoute::Trace, ChiRoute::LocalPi, ChiRoute::FromT})
            EXPECT_LT(identities::chi_routes(e, ChiRoute::Definition, r).relative(), 1e-8) << to_string(r);
    }
}

TEST(Curvature, ChiMatchesFiniteDifferenceOfRiemann) {
    // chi from R^i_k computed by finite differences of G, then differentiated in y numerically
    const auto G = generic_spray();
    oracle::VecFn g = [&](std::span<const double> z) { return G.values(pt({z[0], z[1], z[2]}, {z[3], z[4], z[5]})); };
    const PointTM p = pt({0.1, -0.2, 0.3}, {0.48, 0.6, 0.64});
    const auto z = packed(p);
    auto Rk = [&](std::span<const double> w) { return oracle::spray_riemann(g, w, 3, 2e-2); };
    std::vector<double> chi(3, 0.0);
    for (int k = 0; k < 3; ++k) {
        double s = 0.0;
        for (int m = 0; m < 3; ++m) {
            oracle::Fn a = [&, k, m](std::span<const double> w) { return Rk(w)[static_cast<std::size_t>(m * 3 + k)]; };
            oracle::Fn b = [&, m](std::span<const double> w) { return Rk(w)[static_cast<std::size_t>(m * 3 + m)]; };
            s += 2 * oracle::partial(a, z, MultiIndex::unit(6, 3 + m), 5e-2);
            s += oracle::partial(b, z, MultiIndex::unit(6, 3 + k), 5e-2);
        }
        chi[static_cast<std::size_t>(k)] = -s / 6;
    }
    const auto got = chi_definition(G, p).components;
    EXPECT_LT(max_diff(got, chi), 1e-6) << got[0] << " " << chi[0];
}

TEST(Curvature, ChiIsOneHomogeneous) {
    const auto G = generic_spray();
    const PointTM p = pt({0.1, -0.2, 0.3}, {0.48, 0.6, 0.64});
    const auto c1 = chi_definition(G, p).components;
    PointTM q = p;
    for (double& v : q.y) v *= 2.0;
    const auto c2 = chi_definition(G, q).components;
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(c2[static_cast<std::size_t>(k)], 2.0 * c1[static_cast<std::size_t>(k)], 1e-13);
}

TEST(Curvature, FlatSprayIsIsotropicWithZeroChi) {
    const auto G = make_family("flat", {{"n", "3"}});
    const auto pts = sample_points(G, 10, 1);
    const auto c = classify(G, pts);
    EXPECT_TRUE(c.isotropic);
    EXPECT_TRUE(c.scalar);
    EXPECT_TRUE(c.chi_zero);
    EXPECT_EQ(c.isotropy, 0.0);
}

TEST(Curvature, SphereIsIsotropicAndEtaVanishes) {
    const auto G = make_family("sphere", {{"n", "3"}});
    const auto pts = sample_points(G, 50, 1);
    const auto c = classify(G, pts);
    EXPECT_TRUE(c.isotropic);
    EXPECT_LT(c.scalar_curvature, 1e-8);
    for (const auto& p : pts) {
        CurvatureEngine e(G, p, 4);
        EXPECT_LT(identities::eta_zero(e).relative(), 1e-7);
        EXPECT_LT(identities::isotropic_rr2(e).relative(), 1e-7);
        EXPECT_LT(identities::isotropic_four_index(e).relative(), 1e-7);
    }
}

TEST(Curvature, AffineShiftIsIsotropicWithZeroChi) {
    for (const Params& params : {Params{}, Params{{"A", "x1*x2"}, {"B", "0.3*x1"}, {"C", "x2^2"}, {"D", "1+x1"}},
                                 Params{{"A", "sin(x1)"}, {"B", "x2"}, {"C", "0.5"}, {"D", "x1^2-x2"}, {"f", "exp(x1)*x2"}}}) {
        const auto G = make_family("affine_shift", params);
        const auto c = classify(G, sample_points(G, 50, 3));
        EXPECT_LT(c.chi, 1e-9);
        EXPECT_LT(c.isotropy, 1e-8);
        EXPECT_TRUE(c.scalar);
    }
}

TEST(Curvature, GenericSprayHasNonzeroEta) {
    const auto G = generic_spray();
    const PointTM p = pt({0.1, -0.2, 0.3}, {0.48, 0.6, 0.64});
    const auto e = eta(G, p);
    EXPECT_GT(e.max_abs(), 1e-3);
    const auto c = classify(G, sample_points(G, 10, 5));
    EXPECT_FALSE(c.isotropic);
    EXPECT_FALSE(c.chi_zero);
}

TEST(Curvature, BianchiSetsOnGenericSpray) {
    const auto G = generic_spray();
    using namespace identities;
    for (const auto& p : sample_points(G, 10, 6)) {
        CurvatureEngine e(G, p, 4);
        EXPECT_LT(first_bianchi(e).relative(), 1e-8);
        EXPECT_LT(two_vs_four_index(e).relative(), 1e-8);
        EXPECT_LT(reconstruct_four_index(e).relative(), 1e-8);
        EXPECT_LT(reconstruct_jk(e).relative(), 1e-8);
        EXPECT_LT(reconstruct_kl(e).relative(), 1e-8);
        EXPECT_LT(second_bianchi(e).relative(), 1e-7);
        EXPECT_LT(bianchi_vertical(e).relative(), 1e-7);
        EXPECT_LT(berwald_vertical_symmetry(e).relative(), 1e-7);
        EXPECT_LT(contracted_bianchi(e).relative(), 1e-7);
        EXPECT_LT(contracted_bianchi_y(e).relative(), 1e-7);
        EXPECT_LT(ricci_contraction(e).relative(), 1e-9);
        EXPECT_LT(t_trace(e).relative(), 1e-9);
        EXPECT_LT(weyl_routes(e).relative(), 1e-8);
        EXPECT_LT(weyl_trace(e).relative(), 1e-8);
        EXPECT_LT(berwald_y_contraction(e).relative(), 1e-10);
        EXPECT_LT(berwald_symmetry(e).relative(), 1e-10);
    }
}

TEST(Curvature, IsotropyFlagFollowsFromWeylAndChi) {
    for (const auto& [fam, params] : zoo()) {
        const auto G = make_family(fam, params);
        const auto c = classify(G, sample_points(G, 20, 4));
        if (c.scalar && c.chi_zero) EXPECT_TRUE(c.isotropic) << fam;
    }
}

TEST(Curvature, EngineRejectsInsufficientOrder) {
    const auto G = generic_spray();
    CurvatureEngine e(G, pt({0.1, 0.1, 0.1}, {1, 0, 0}), 2);
    EXPECT_THROW(identities::second_bianchi(e), OrderError);
    EXPECT_THROW(chi_by_route(e, ChiRoute::Cartan), std::invalid_argument);
}

TEST(Curvature, ReportCarriesTensorsAndResiduals) {
    const auto G = make_family("sphere", {{"n", "3"}});
    const auto pts = sample_points(G, 1, 9);
    const auto rep = curvature_report(G, pts[0], 9);
    EXPECT_EQ(rep.seed, 9u);
    EXPECT_GE(rep.tensors.size(), 8u);
    for (const auto& r : rep.residuals) EXPECT_TRUE(r.pass()) << r.id;
    (void)vals;
}
