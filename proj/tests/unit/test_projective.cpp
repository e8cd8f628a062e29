#include <gtest/gtest.h>

#include "helpers.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/finsler.hpp"
#include "spraylab/projective.hpp"
#include "spraylab/zoo.hpp"

using namespace spraylab;

namespace {

std::vector<std::pair<std::string, Params>> zoo() {
    return {{"flat", {}},
            {"riemannian", {}},
            {"sphere", {{"n", "3"}}},
            {"affine_shift", {{"A", "x1*x2"}, {"B", "0.3*x1"}, {"C", "x2^2"}, {"D", "1+x1"}}},
            {"randers", {}}};
}

const std::vector<std::string> kSigmas{"1", "exp(x1)", "1+0.5*x1^2"};

}  // namespace

TEST(Projective, SCurvatureOfFlatSpray) {
    const auto G = make_family("flat");
    const PointTM p = pt({0.2, 0.1}, {0.6, 0.8});
    EXPECT_EQ(s_curvature(G, VolumeForm::unit(2), p), 0.0);
    EXPECT_NEAR(s_curvature(G, VolumeForm::parse("exp(x1)", 2), p), -0.6, 1e-15);
    BerwaldFrame fr(G, p, 3);
    const auto chi = chi_from_s_field(fr, VolumeForm::parse("exp(x1)", 2));
    for (std::size_t k = 0; k < chi.size(); ++k) EXPECT_EQ(chi.at(k).value(), 0.0);
}

TEST(Projective, MetricVolumeKillsS) {
    for (const char* fam : {"riemannian", "sphere"}) {
        const auto G = make_family(fam);
        const auto dV = metric_volume(G);
        ASSERT_TRUE(dV);
        for (const auto& p : sample_points(G, 20, 1)) EXPECT_LT(std::abs(s_curvature(G, *dV, p)), 1e-13) << fam;
    }
}

TEST(Projective, DeformationOfFlatSpray) {
    const auto G = make_family("flat");
    const PointTM p = pt({0.2, 0.1}, {0.6, 0.8});
    EXPECT_EQ(max_norm(deform(G, VolumeForm::unit(2)).values(p)), 0.0);
    const auto h = deform(G, VolumeForm::parse("exp(x1)", 2)).values(p);
    EXPECT_NEAR(h[0], 0.6 / 3 * 0.6, 1e-15);
    EXPECT_NEAR(h[1], 0.6 / 3 * 0.8, 1e-15);
}

TEST(Projective, DeformedChiVanishesOnZoo) {
    for (const auto& [fam, params] : zoo()) {
        const auto G = make_family(fam, params);
        const auto pts = sample_points(G, 50, 1);
        for (const auto& s : kSigmas) {
            const auto hat = deform(G, VolumeForm::parse(s, G.dim()));
            for (const auto& p : pts) {
                CurvatureEngine e(hat, p, 3);
                EXPECT_LT(chi_magnitude(e, e.chi_definition()).relative(), 1e-7) << fam << " " << s;
            }
        }
    }
}

TEST(Projective, DeformedSVanishes) {
    const auto G = make_family("randers");
    for (const auto& s : kSigmas) {
        const auto dV = VolumeForm::parse(s, 2);
        const auto hat = deform(G, dV);
        for (const auto& p : sample_points(G, 20, 2)) EXPECT_LT(std::abs(s_curvature(hat, dV, p)), 1e-12);
    }
}

TEST(Projective, ChiFromSBothOrderings) {
    const auto G = make_family("randers");
    const auto dV = VolumeForm::parse("exp(x1)", 2);
    for (const auto& p : sample_points(G, 10, 3)) {
        CurvatureEngine e(G, p, 3);
        const auto a = chi_from_s_field(e.frame(), dV, SOrdering::VerticalFirst);
        const auto b = chi_from_s_field(e.frame(), dV, SOrdering::HorizontalFirst);
        const auto c = e.chi_definition();
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_NEAR(a.at(k).value(), c.at(k).value(), 1e-12);
            EXPECT_NEAR(b.at(k).value(), c.at(k).value(), 1e-12);
        }
    }
}

TEST(Projective, DeformedRiemannFormula) {
    for (const auto& [fam, params] : zoo()) {
        const auto G = make_family(fam, params);
        const auto dV = VolumeForm::parse("exp(x1)", G.dim());
        for (const auto& p : sample_points(G, 50, 1)) {
            const auto a = hat_riemann(G, dV, p, HatRoute::Direct);
            const auto b = hat_riemann(G, dV, p, HatRoute::Formula);
            EXPECT_LT(max_diff(a.data(), b.data()), 1e-7 * (1 + a.max_abs())) << fam;
        }
    }
}

TEST(Projective, DeformedRiemannRegressionOnFlatSpray) {
    const auto G = make_family("flat");
    const auto dV = VolumeForm::parse("exp(x1)", 2);
    const auto R = hat_riemann(G, dV, pt({0.2, 0.1}, {0.6, 0.8}), HatRoute::Direct);
    // hatG^i = y1 y^i / 3 is projectively flat: R^i_k = P^2 d^i_k - P P_.k y^i with P = y1/3
    const double P = 0.2;
    EXPECT_NEAR(R(0, 0), P * P - P * (1.0 / 3) * 0.6, 1e-14);
    EXPECT_NEAR(R(0, 1), 0.0, 1e-14);
    EXPECT_NEAR(R(1, 0), -P * (1.0 / 3) * 0.8, 1e-14);
    EXPECT_NEAR(R(1, 1), P * P, 1e-14);
}

TEST(Projective, ProjectiveRicciWithMinusH) {
    for (const auto& [fam, params] : zoo()) {
        const auto G = make_family(fam, params);
        for (const auto& s : kSigmas) {
            const auto dV = VolumeForm::parse(s, G.dim());
            for (const auto& p : sample_points(G, 10, 2)) {
                const auto pr = projective_ricci(G, dV, p);
                EXPECT_LT(max_diff(pr.ric_jl.data(), pr.formula_jl.data()), 1e-8 * (1 + pr.ric_jl.max_abs())) << fam;
                EXPECT_NEAR(pr.ric, pr.ric_formula, 1e-8 * (1 + std::abs(pr.ric)));
            }
        }
    }
}

TEST(Projective, PlusHFailsWhereChiIsNonzero) {
    const auto G = make_family("randers");
    const auto dV = VolumeForm::unit(2);
    double worst = 0.0;
    for (const auto& p : sample_points(G, 10, 2)) {
        const auto pr = projective_ricci(G, dV, p, +1.0);
        worst = std::max(worst, max_diff(pr.ric_jl.data(), pr.formula_jl.data()));
    }
    EXPECT_GT(worst, 1e-3);
}

TEST(Projective, SphereWithMetricVolumeKeepsRicci) {
    const auto G = make_family("sphere");
    const auto dV = metric_volume(G);
    for (const auto& p : sample_points(G, 5, 1)) {
        const auto pr = projective_ricci(G, *dV, p);
        CurvatureEngine e(G, p, 3);
        EXPECT_NEAR(pr.ric, e.ricci().value(), 1e-12);
    }
}

TEST(Projective, DeformedTIsWeylAndDouglasIgnoresVolume) {
    for (const auto& [fam, params] : zoo()) {
        const auto G = make_family(fam, params);
        const auto d1 = VolumeForm::parse("1", G.dim()), d2 = VolumeForm::parse("exp(x1)", G.dim());
        for (const auto& p : sample_points(G, 10, 5)) {
            const auto w = weyl(G, p);
            const auto t = weyl_hat(G, d2, p);
            EXPECT_LT(max_diff(w.data(), t.data()), 1e-8 * (1 + w.max_abs())) << fam;
            const auto a = douglas(G, d1, p), b = douglas(G, d2, p);
            EXPECT_LT(max_diff(a.data(), b.data()), 1e-8 * (1 + a.max_abs())) << fam;
        }
    }
}

TEST(Projective, DouglasOfRiemannianSprayIsZero) {
    const auto G = make_family("riemannian");
    for (const auto& p : sample_points(G, 5, 5)) EXPECT_LT(douglas(G, *metric_volume(G), p).max_abs(), 1e-12);
}

TEST(Projective, ProjectiveInvariance) {
    const auto flat = make_family("flat");
    const auto dV = VolumeForm::parse("exp(x1)", 2);
    const auto pts = sample_points(flat, 20, 3);
    EXPECT_EQ(projective_invariance_check(flat, projective_shift(flat, parse_expression("0*y1", 2)), dV, pts).abs, 0.0);
    EXPECT_LT(projective_invariance_check(flat, projective_shift(flat, parse_expression("y1", 2)), dV, pts).relative(), 1e-10);
    const auto G = make_family("randers");
    EXPECT_LT(projective_invariance_check(G, projective_shift(G, parse_expression("y1+x1*y2", 2)), dV, pts).relative(), 1e-9);
    // negative control: sprays that are not projectively related
    EXPECT_GT(projective_invariance_check(flat, make_family("riemannian"), dV, pts).relative(), 1e-2);
}

TEST(Projective, SClosedness) {
    for (const char* fam : {"flat", "riemannian", "sphere", "affine_shift"}) {
        const auto G = make_family(fam);
        const auto sc = s_closed_residual(G, sample_points(G, 20, 1));
        EXPECT_LT(sc.hessian.relative(), 1e-9) << fam;
        EXPECT_LT(sc.curl.relative(), 1e-9) << fam;
    }
    std::vector<Expr> g{parse_expression("x2*y1^2/2", 2), parse_expression("0", 2)};
    const auto nc = expression_spray(std::move(g), Box::cube(2, 1.0), "non-closed");
    const auto sc = s_closed_residual(nc, sample_points(nc, 5, 1));
    EXPECT_NEAR(sc.curl.abs, 1.0, 1e-13);
    EXPECT_FALSE(sc.closed(1e-8));
}

TEST(Projective, DualAndRapcsakResiduals) {
    const auto flat = make_family("flat");
    const auto sphere = make_family("sphere", {{"n", "3"}});
    const Expr euclid2 = parse_expression("sqrt(y1^2+y2^2)", 2);
    const Expr euclid3 = parse_expression("sqrt(y1^2+y2^2+y3^2)", 3);
    const PointTM p2 = pt({0.1, 0.2}, {0.6, 0.8});
    EXPECT_LT(rapcsak_residual(euclid2, flat, p2).max_abs(), 1e-14);
    const auto pts = sample_points(sphere, 5, 1);
    EXPECT_GT(rapcsak_residual(euclid3, sphere, pts[0]).max_abs(), 1e-3);
    for (const auto& p : pts) {
        CurvatureEngine e(sphere, p, 4);
        EXPECT_LT(dual_field(e.frame(), e.scalar_R()).at(0).value(), 1e-7);
        for (int k = 0; k < 3; ++k)
            EXPECT_NEAR(dual_field(e.frame(), e.scalar_R())(k).value(), 0.0, 1e-7 * (1 + std::abs(e.scalar_R().value())));
    }
}

TEST(Projective, VolumeFormValidation) {
    EXPECT_THROW(VolumeForm::parse("y1", 2), ParseError);
    const auto dV = VolumeForm::parse("x1", 2);
    const auto G = make_family("flat");
    EXPECT_THROW(s_curvature(G, dV, pt({-0.5, 0.0}, {1, 0})), DomainError);
    EXPECT_THROW(deform(G, VolumeForm::unit(3)), InputError);
}
