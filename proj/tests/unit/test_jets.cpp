#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/jets.hpp"

using namespace spraylab;

namespace {

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

}  // namespace

TEST(Jets, LiftedVariableHasUnitSlope) {
    const Jet z = lift_variable(0, 3.0, 4, 2);
    EXPECT_EQ(z.value(), 3.0);
    EXPECT_EQ(z.partial(MultiIndex::unit(4, 0)), 1.0);
    for (const auto& a : multi_indices(4, 2)) {
        if (a.degree() == 0 || a == MultiIndex::unit(4, 0)) continue;
        EXPECT_EQ(z.coefficient(a), 0.0) << a.str();
    }
    const Jet w = lift_variable(3, 0.0, 4, 1);
    EXPECT_EQ(w.value(), 0.0);
    EXPECT_EQ(w.partial(MultiIndex::unit(4, 3)), 1.0);
}

TEST(Jets, ProductOfCoordinatesHasUnitMixedPartial) {
    const Jet x1 = lift_variable(0, 2.0, 4, 2), y1 = lift_variable(2, 5.0, 4, 2);
    const Jet p = x1 * y1;
    EXPECT_EQ(p.value(), 10.0);
    EXPECT_EQ(p.partial(mi({1, 0, 1, 0})), 1.0);
    EXPECT_EQ(p.partial(mi({2, 0, 0, 0})), 0.0);
}

TEST(Jets, PartialOfSquareAndConstant) {
    const Jet x = lift_variable(0, 3.0, 1, 3);
    EXPECT_DOUBLE_EQ((x * x).partial(mi({2})), 2.0);
    EXPECT_DOUBLE_EQ((x * x).partial(mi({1})), 6.0);
    const Jet c = Jet::constant(4.2, 3, 3);
    for (const auto& a : multi_indices(3, 3))
        if (a.degree() > 0) EXPECT_EQ(c.partial(a), 0.0);
}

TEST(Jets, NormPartialAgreesWithCentralDifference) {
    const Jet y1 = lift_variable(0, 3.0, 2, 2), y2 = lift_variable(1, 4.0, 2, 2);
    const Jet r = sqrt(y1 * y1 + y2 * y2);
    EXPECT_NEAR(r.partial(MultiIndex::unit(2, 0)), 0.6, 1e-15);
    const double h = 1e-5;
    const double fd = (std::sqrt((3 + h) * (3 + h) + 16) - std::sqrt((3 - h) * (3 - h) + 16)) / (2 * h);
    EXPECT_NEAR(r.partial(MultiIndex::unit(2, 0)), fd, 1e-9);
}

TEST(Jets, ExpTimesYMixedPartial) {
    const auto t = eval_derivatives([](std::span<const Jet> v) { return std::vector<Jet>{exp(v[0]) * v[1]}; },
                                    std::vector<double>{0.0, 2.0}, 2);
    EXPECT_NEAR(t.at(0, mi({1, 1})), 1.0, 1e-15);
    EXPECT_NEAR(t.at(0, mi({2, 0})), 2.0, 1e-15);
}

TEST(Jets, DerivativeLowersOrder) {
    const Jet x = lift_variable(0, 0.5, 2, 4);
    const Jet f = sin(x) * x;
    const Jet d = f.derivative(0);
    EXPECT_EQ(d.order(), 3);
    EXPECT_NEAR(d.value(), std::cos(0.5) * 0.5 + std::sin(0.5), 1e-15);
    EXPECT_EQ(f.truncated(2).order(), 2);
}

TEST(Jets, ArithmeticTruncatesToSmallerOrder) {
    const Jet a = lift_variable(0, 1.0, 1, 4), b = lift_variable(0, 1.0, 1, 2);
    EXPECT_EQ((a * b).order(), 2);
    EXPECT_EQ((a + b).order(), 2);
}

TEST(Jets, PartialBeyondOrderThrows) {
    const Jet x = lift_variable(0, 1.0, 1, 2);
    EXPECT_THROW(partial(x, mi({3})), OrderError);
}

TEST(Jets, LeibnizRuleOnRandomPolynomials) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int dim = 3, order = 4;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> p{u(rng), u(rng), u(rng)};
        std::vector<Jet> v;
        for (int s = 0; s < dim; ++s) v.push_back(lift_variable(s, p[static_cast<std::size_t>(s)], dim, order));
        auto poly = [&] {
            Jet acc = Jet::constant(u(rng), dim, order);
            for (int t = 0; t < 4; ++t) acc += u(rng) * pow(v[rng() % 3], 1 + static_cast<int>(rng() % 3)) * v[rng() % 3];
            return acc;
        };
        const Jet f = poly(), g = poly();
        const Jet fg = f * g;
        for (const auto& a : multi_indices(dim, order)) {
            double sum = 0.0;
            for (const auto& b : multi_indices(dim, a.degree())) {
                bool sub = true;
                double c = 1.0;
                for (int s = 0; s < dim; ++s) {
                    if (b[s] > a[s]) sub = false;
                }
                if (!sub) continue;
                MultiIndex r(dim);
                for (int s = 0; s < dim; ++s) {
                    r[s] = a[s] - b[s];
                    // binomial(a_s, b_s)
                    double bin = 1.0;
                    for (int k = 1; k <= b[s]; ++k) bin = bin * (a[s] - b[s] + k) / k;
                    c *= bin;
                }
                sum += c * f.partial(b) * g.partial(r);
            }
            EXPECT_NEAR(fg.partial(a), sum, 1e-12 * (1.0 + std::abs(sum))) << a.str();
        }
    }
}

TEST(Jets, ElementaryFunctionsMatchFiniteDifferences) {
    const std::vector<double> p{0.3, -0.4};
    auto f = [](const auto& a, const auto& b) {
        using std::cos;
        using std::exp;
        using std::log;
        using std::sqrt;
        return exp(a) * cos(b) + log(2.0 + a * b) / sqrt(1.0 + b * b);
    };
    const auto t = eval_derivatives([&](std::span<const Jet> v) { return std::vector<Jet>{f(v[0], v[1])}; }, p, 3);
    oracle::Fn g = [&](std::span<const double> z) { return f(z[0], z[1]); };
    for (const auto& a : multi_indices(2, 3)) {
        const double fd = oracle::partial(g, p, a, 0.05);
        EXPECT_NEAR(t.at(0, a), fd, 1e-8 * (1.0 + std::abs(fd))) << a.str();
    }
}

TEST(Jets, ReciprocalAndDivision) {
    const Jet x = lift_variable(0, 2.0, 1, 3);
    const Jet r = 1.0 / x;
    EXPECT_NEAR(r.partial(mi({1})), -0.25, 1e-15);
    EXPECT_NEAR(r.partial(mi({3})), -6.0 / 16.0, 1e-14);
    EXPECT_NEAR((x / x).value(), 1.0, 1e-15);
    EXPECT_NEAR((x / x).partial(mi({2})), 0.0, 1e-14);
}

TEST(Jets, JetSizeCountsMultiIndices) {
    EXPECT_EQ(jet_size(4, 2), 15u);
    EXPECT_EQ(multi_indices(4, 2).size(), 15u);
    EXPECT_EQ(jet_size(6, 5), 462u);
}
