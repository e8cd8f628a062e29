#include <gtest/gtest.h>

#include <random>

#include "../support/oracles.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/exprdsl.hpp"

using namespace spraylab;

TEST(ExprDsl, ParsesSumOfPowerAndProduct) {
    const Expr e = parse_expression("y1^2 + 2*x2*y1*y2", 2);
    EXPECT_EQ(e.root().kind, NodeKind::Add);
    EXPECT_EQ(e.root().children[0].kind, NodeKind::Power);
    EXPECT_EQ(e.root().children[1].kind, NodeKind::Mul);
    EXPECT_TRUE(e.uses_y());
}

TEST(ExprDsl, ParsesFunctionCall) {
    const Expr e = parse_expression("sqrt(y1^2+y2^2)", 2);
    EXPECT_EQ(e.root().kind, NodeKind::Call);
    EXPECT_EQ(e.root().function, Function::Sqrt);
    EXPECT_EQ(e.root().children[0].kind, NodeKind::Add);
}

TEST(ExprDsl, RejectsVariableBeyondDimension) {
    try {
        parse_expression("y3", 2);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("variable index exceeds dimension"), std::string::npos) << e.what();
        EXPECT_EQ(e.span().column, 1);
    }
}

TEST(ExprDsl, ErrorsCarryLineAndColumn) {
    try {
        parse_expression("x1 + * y1", 2);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.span().line, 1);
        EXPECT_EQ(e.span().column, 6);
    }
    EXPECT_THROW(parse_expression("foo(x1)", 2), ParseError);
    EXPECT_THROW(parse_expression("(x1", 2), ParseError);
    EXPECT_THROW(parse_expression("y1", 2, {.allow_y = false}), ParseError);
}

TEST(ExprDsl, EvaluatesDoubles) {
    const std::vector<double> x{0.0, 0.0}, y{3.0, 0.0};
    EXPECT_EQ(evaluate<double>(parse_expression("y1^2", 2), x, y), 9.0);
    const Expr g1 = parse_expression("x2*y1^2/3 + x1*y1*y2/3", 2);
    EXPECT_NEAR(evaluate<double>(g1, std::vector<double>{1, 2}, std::vector<double>{1, 1}), 1.0, 1e-15);
}

TEST(ExprDsl, JetEvaluationMatchesFiniteDifferences) {
    const Expr e = parse_expression("sin(x1)*y2^2 + exp(x2)*sqrt(y1^2+y2^2)", 2);
    const std::vector<double> p{0.2, -0.3, 0.6, 0.8};
    const auto t = eval_derivatives(
        [&](std::span<const Jet> v) { return std::vector<Jet>{evaluate<Jet>(e, v.subspan(0, 2), v.subspan(2, 2))}; }, p, 2);
    oracle::Fn f = [&](std::span<const double> z) { return evaluate<double>(e, z.subspan(0, 2), z.subspan(2, 2)); };
    for (const auto& a : multi_indices(4, 2)) {
        const double fd = oracle::partial(f, p, a, 0.02);
        EXPECT_NEAR(t.at(0, a), fd, 1e-9 * (1 + std::abs(fd))) << a.str();
    }
}

TEST(ExprDsl, DomainErrorsPointAtSubexpression) {
    const Expr e = parse_expression("1 + log(x1 - 1)", 2);
    try {
        evaluate<double>(e, std::vector<double>{0.5, 0}, std::vector<double>{1, 0});
        FAIL();
    } catch (const DomainError& err) {
        EXPECT_TRUE(err.located());
        EXPECT_EQ(err.snippet(), "log(x1 - 1)");
    }
    EXPECT_THROW(evaluate<double>(parse_expression("abs(y2)", 2), std::vector<double>{0, 0}, std::vector<double>{1, 0}),
                 DomainError);
    EXPECT_THROW(evaluate<double>(parse_expression("1/y2", 2), std::vector<double>{0, 0}, std::vector<double>{1, 0}),
                 DomainError);
}

TEST(ExprDsl, RoundTripOnRandomExpressions) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const std::string src = oracle::random_expression(rng, n, 1 + static_cast<int>(rng() % 4));
        const Expr e = parse_expression(src, n);
        const std::string printed = to_string(e);
        const Expr back = parse_expression(printed, n);
        EXPECT_TRUE(structurally_equal(e.root(), back.root())) << src << " -> " << printed;
        EXPECT_EQ(to_string(back), printed);
    }
}

TEST(ExprDsl, SprayDefinitionDocument) {
    const auto def = parse_spray_definition(
        "# comment\n"
        "dim = 2\n"
        "G1 = x2*y1^2/2   # trailing\n"
        "G2 = 0\n"
        "sigma = exp(x2)\n");
    EXPECT_EQ(def.dim, 2);
    ASSERT_EQ(def.G.size(), 2u);
    EXPECT_TRUE(def.sigma.has_value());
}

TEST(ExprDsl, SprayDefinitionErrorsCiteDocumentPosition) {
    try {
        parse_spray_definition("dim = 2\nG1 = y1^2\nG2 = y1 +* y2\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.span().line, 3);
        EXPECT_EQ(e.span().column, 10);
    }
    EXPECT_THROW(parse_spray_definition("G1 = 0\n"), InputError);
    EXPECT_THROW(parse_spray_definition("dim = 2\nG1 = 0\n"), InputError);
    EXPECT_THROW(parse_spray_definition("dim = 2\nG1 = 0\nG2 = 0\nsigma = y1\n"), ParseError);
    EXPECT_THROW(parse_spray_definition("dim = 2\nG1 = 0\nG2 = 0\nbogus = 1\n"), InputError);
    EXPECT_THROW(parse_spray_definition("dim = 2\nG1 = 0\nG2 = 0\na_11 = 1\na_22 = 1\n"), InputError);
}
