#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A Jet stores the Taylor coefficients c_a = (d^a f)(p) / a! of a smooth
// function of `dim` variables around a fixed point p, for every multi-index a
// of total degree <= order. Coefficients are laid out in graded order, so a
// jet of order k is a prefix of the same function's jet of any higher order.
// Arithmetic truncates to the smaller order of the operands; differentiation
// lowers the order by one.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace spraylab {

class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(int dim) : exps_(static_cast<std::size_t>(dim), 0) {}
    explicit MultiIndex(std::vector<int> exponents);

    static MultiIndex unit(int dim, int slot, int power = 1);

    int dim() const noexcept { return static_cast<int>(exps_.size()); }
    int degree() const noexcept;
    int operator[](int slot) const { return exps_.at(static_cast<std::size_t>(slot)); }
    int& operator[](int slot) { return exps_.at(static_cast<std::size_t>(slot)); }
    const std::vector<int>& exponents() const noexcept { return exps_; }

    // a! = prod a_i!
    double factorial() const;

    // Adds one to the exponent of `slot`; chainable.
    MultiIndex& bump(int slot, int count = 1);

    std::string str() const;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> exps_;
};

class Jet {
public:
    Jet() = default;

    static Jet constant(double value, int dim, int order);
    static Jet variable(int slot, double value, int dim, int order);

    int dim() const noexcept { return dim_; }
    int order() const noexcept { return order_; }
    bool empty() const noexcept { return coeffs_.empty(); }

    double value() const noexcept { return coeffs_.empty() ? 0.0 : coeffs_[0]; }
    std::span<const double> coefficients() const noexcept { return coeffs_; }

    // Raw Taylor coefficient c_a; zero for |a| > order is NOT implied, it throws.
    double coefficient(const MultiIndex& a) const;
    // True partial derivative d^a f at the expansion point.
    double partial(const MultiIndex& a) const;

    // d/dz_slot; the result has order() - 1.
    Jet derivative(int slot) const;
    Jet truncated(int order) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator/=(const Jet& o);
    Jet& operator+=(double c);
    Jet& operator-=(double c);
    Jet& operator*=(double c);
    Jet& operator/=(double c);

    Jet operator-() const;

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator+(Jet a, double c) { return a += c; }
    friend Jet operator+(double c, Jet a) { return a += c; }
    friend Jet operator-(Jet a, double c) { return a -= c; }
    friend Jet operator-(double c, const Jet& a) { return -a + c; }
    friend Jet operator*(Jet a, double c) { return a *= c; }
    friend Jet operator*(double c, Jet a) { return a *= c; }
    friend Jet operator/(Jet a, double c) { return a /= c; }
    friend Jet operator/(double c, const Jet& a);

private:
    Jet(int dim, int order);

    int dim_ = 0;
    int order_ = 0;
    std::vector<double> coeffs_;

    friend Jet compose(const Jet& f, std::span<const double> taylor);
};

// g(f) for a univariate g given by its Taylor coefficients
// taylor[m] = g^(m)(f(p)) / m!, m = 0..f.order().
Jet compose(const Jet& f, std::span<const double> taylor);

Jet reciprocal(const Jet& f);
Jet sqrt(const Jet& f);
Jet exp(const Jet& f);
Jet log(const Jet& f);
Jet sin(const Jet& f);
Jet cos(const Jet& f);
Jet abs(const Jet& f);
Jet pow(const Jet& f, int exponent);

// Number of multi-indices in `dim` variables with total degree <= order.
std::size_t jet_size(int dim, int order);

// All multi-indices of total degree <= order, in storage order.
std::vector<MultiIndex> multi_indices(int dim, int order);

// Taylor expansion of the coordinate function z_slot at value.
Jet lift_variable(int slot, double value, int dim, int order);

// d^a f at the expansion point; throws OrderError when |a| > j.order().
double partial(const Jet& j, const MultiIndex& a);

// All partial derivatives of every output component of a vector function.
class DerivativeTable {
public:
    DerivativeTable(std::vector<Jet> components, int order);

    int order() const noexcept { return order_; }
    int components() const noexcept { return static_cast<int>(jets_.size()); }
    double at(int component, const MultiIndex& a) const;
    const Jet& jet(int component) const { return jets_.at(static_cast<std::size_t>(component)); }

private:
    std::vector<Jet> jets_;
    int order_;
};

using JetFunction = std::function<std::vector<Jet>(std::span<const Jet>)>;

// Lifts every coordinate of `point` to a jet of the given order and evaluates f.
DerivativeTable eval_derivatives(const JetFunction& f, std::span<const double> point, int order);

}  // namespace spraylab
