#pragma once

// Sprays on a coordinate chart and the Berwald-connection calculus around a
// point of TM. Every field quantity is carried as a Jet in the 2n chart
// coordinates (x^1..x^n, y^1..y^n), so horizontal and vertical derivatives of
// derived tensors stay exact.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spraylab/jets.hpp"

namespace spraylab {

// Highest order at which spray coefficient tables are expanded unless a run
// overrides it.
inline constexpr int kDefaultOrder = 5;

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    static Box cube(int n, double half_width);
    int dim() const noexcept { return static_cast<int>(lo.size()); }
    bool contains(std::span<const double> x) const;
    // Same center, each side scaled by (1 - fraction).
    Box shrunk(double fraction) const;
};

struct PointTM {
    std::vector<double> x;
    std::vector<double> y;

    int dim() const noexcept { return static_cast<int>(x.size()); }
};

inline constexpr double kMinYNorm = 1e-6;

// Jets of the 2n coordinate functions at p: slots 0..n-1 are x, n..2n-1 are y.
std::vector<Jet> lift_point(const PointTM& p, int order);

// ---------------------------------------------------------------------------
// Tensors

enum class Variance : std::uint8_t { Up, Down };

// Component layout shared by TensorValue and FieldTensor: row-major over the
// index positions, each index ranging over 0..n-1.
class TensorShape {
public:
    TensorShape() = default;
    TensorShape(int n, std::vector<Variance> roles);

    int dim() const noexcept { return n_; }
    int rank() const noexcept { return static_cast<int>(roles_.size()); }
    const std::vector<Variance>& roles() const noexcept { return roles_; }
    std::size_t size() const noexcept { return size_; }

    std::size_t flat(std::span<const int> idx) const;
    std::vector<int> unflat(std::size_t flat) const;

private:
    int n_ = 0;
    std::vector<Variance> roles_;
    std::size_t size_ = 1;
};

// Dense real components of a tensor at a point.
class TensorValue {
public:
    TensorValue() = default;
    TensorValue(std::string name, TensorShape shape, std::vector<double> data, PointTM point);

    const std::string& name() const noexcept { return name_; }
    const TensorShape& shape() const noexcept { return shape_; }
    int dim() const noexcept { return shape_.dim(); }
    int rank() const noexcept { return shape_.rank(); }
    const std::vector<double>& data() const noexcept { return data_; }
    const PointTM& point() const noexcept { return point_; }

    template <class... I>
    double operator()(I... idx) const {
        const int a[] = {static_cast<int>(idx)...};
        return data_[shape_.flat(a)];
    }

    double max_abs() const;

private:
    std::string name_;
    TensorShape shape_;
    std::vector<double> data_;
    PointTM point_;
};

// Jet-valued tensor field around a point.
class FieldTensor {
public:
    FieldTensor() = default;
    FieldTensor(int n, std::vector<Variance> roles);

    const TensorShape& shape() const noexcept { return shape_; }
    int dim() const noexcept { return shape_.dim(); }
    int rank() const noexcept { return shape_.rank(); }
    std::size_t size() const noexcept { return data_.size(); }

    Jet& at(std::size_t flat) { return data_[flat]; }
    const Jet& at(std::size_t flat) const { return data_[flat]; }

    template <class... I>
    Jet& operator()(I... idx) {
        const int a[] = {static_cast<int>(idx)...};
        return data_[shape_.flat(a)];
    }
    template <class... I>
    const Jet& operator()(I... idx) const {
        const int a[] = {static_cast<int>(idx)...};
        return data_[shape_.flat(a)];
    }

    // Smallest order among the components.
    int order() const;
    TensorValue value(std::string name, const PointTM& p) const;

private:
    TensorShape shape_;
    std::vector<Jet> data_;
};

// Residual of an identity, measured against the size of the terms entering it.
struct Residual {
    double abs = 0.0;
    double scale = 1.0;

    double relative() const { return abs / scale; }
};

// max |a - b| over components, relative to 1 + the largest component of any listed term.
Residual residual_between(std::span<const double> a, std::span<const double> b,
                          std::initializer_list<double> term_magnitudes = {});
// max |r| over components, relative to 1 + the largest listed term magnitude.
Residual residual_of(std::span<const double> r, std::initializer_list<double> term_magnitudes);
double max_abs(std::span<const double> v);

// ---------------------------------------------------------------------------
// Sprays

class FinslerMetric;

// Coefficient functions G^i(x, y) of a spray, expanded as jets at a point.
class SpraySource {
public:
    virtual ~SpraySource() = default;
    virtual std::vector<Jet> coefficients(const PointTM& p, int order) const = 0;
    virtual std::vector<double> values(const PointTM& p) const;
};

struct SprayInfo {
    std::string family;
    std::map<std::string, std::string> params;
};

class SprayChart {
public:
    SprayChart(int n, std::string label, Box domain, std::shared_ptr<const SpraySource> source,
               SprayInfo info = {});

    int dim() const noexcept { return n_; }
    const std::string& label() const noexcept { return label_; }
    const Box& domain() const noexcept { return domain_; }
    const SprayInfo& info() const noexcept { return info_; }
    const SpraySource& source() const { return *source_; }
    std::shared_ptr<const SpraySource> source_ptr() const { return source_; }

    // Finsler metric that induces this spray, when there is one.
    const std::shared_ptr<const FinslerMetric>& metric() const noexcept { return metric_; }
    SprayChart with_metric(std::shared_ptr<const FinslerMetric> m) const;

    // Throws InputError when p is outside the domain or y is (numerically) zero.
    void check_point(const PointTM& p) const;

    std::vector<Jet> coefficients(const PointTM& p, int order) const;
    std::vector<double> values(const PointTM& p) const;

private:
    int n_;
    std::string label_;
    Box domain_;
    std::shared_ptr<const SpraySource> source_;
    SprayInfo info_;
    std::shared_ptr<const FinslerMetric> metric_;
};

// Spray given directly by its coefficient jets. Used for induced sprays whose
// coefficients come out of another construction.
class LambdaSpraySource : public SpraySource {
public:
    using Fn = std::function<std::vector<Jet>(const PointTM&, int)>;
    explicit LambdaSpraySource(Fn fn) : fn_(std::move(fn)) {}
    std::vector<Jet> coefficients(const PointTM& p, int order) const override { return fn_(p, order); }

private:
    Fn fn_;
};

// ||G(x, lambda y) - lambda^2 G(x, y)|| relative to 1 + ||lambda^2 G||.
double homogeneity_residual(const SprayChart& spray, const PointTM& p, double lambda);

// x uniform on the domain box shrunk by 10%, y uniform on the unit sphere.
std::vector<PointTM> sample_points(const SprayChart& spray, int count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Berwald-connection calculus at a point

class BerwaldFrame {
public:
    BerwaldFrame(const SprayChart& spray, const PointTM& p, int order);
    // From explicit coefficient jets G^i expanded at p in the lifted coordinates.
    BerwaldFrame(const PointTM& p, std::vector<Jet> G);

    int dim() const noexcept { return n_; }
    int order() const noexcept { return order_; }
    const PointTM& point() const noexcept { return point_; }

    const Jet& x(int k) const { return vars_[static_cast<std::size_t>(k)]; }
    const Jet& y(int k) const { return vars_[static_cast<std::size_t>(n_ + k)]; }
    const Jet& G(int i) const { return G_[static_cast<std::size_t>(i)]; }
    const Jet& N(int i, int j) const;
    const Jet& Gamma(int i, int j, int k) const;
    const FieldTensor& connection() const;   // N^i_j
    const FieldTensor& christoffel() const;  // Gamma^i_jk

    // Pi = N^m_m
    Jet Pi() const;

    // d/dy^k
    Jet vertical(const Jet& f, int k) const { return f.derivative(n_ + k); }
    // d/dx^k
    Jet partial_x(const Jet& f, int k) const { return f.derivative(k); }
    // delta/delta x^k = d/dx^k - N^m_k d/dy^m
    Jet delta(const Jet& f, int k) const;

    // Appends a covariant index m: T_{...|m} with the Berwald connection.
    FieldTensor covariant(const FieldTensor& T) const;
    // Appends a covariant index m: T_{...,m} = d T / dy^m.
    FieldTensor vertical(const FieldTensor& T) const;
    // Contracts index `position` with y.
    FieldTensor contract_y(const FieldTensor& T, int position) const;

private:
    void build();

    int n_ = 0;
    int order_ = 0;
    PointTM point_;
    std::vector<Jet> vars_;
    std::vector<Jet> G_;
    FieldTensor N_;
    FieldTensor Gamma_;
    bool has_N_ = false;
    bool has_Gamma_ = false;
};

// Derivative of a scalar field along delta/delta x^k.
Jet horizontal_partial(const BerwaldFrame& frame, const Jet& f, int k);
// Horizontal covariant derivative T_{*|k}; supports tensors of rank <= 4.
FieldTensor covariant_derivative_h(const BerwaldFrame& frame, const FieldTensor& T);

FieldTensor berwald_curvature_field(const BerwaldFrame& frame);    // B^i_{jkl}
FieldTensor riemann_two_index_field(const BerwaldFrame& frame);    // R^i_k
FieldTensor riemann_four_index_field(const BerwaldFrame& frame);   // R^i_{jkl}

TensorValue nonlinear_connection(const SprayChart& G, const PointTM& p);
TensorValue berwald_connection(const SprayChart& G, const PointTM& p);
TensorValue berwald_curvature(const SprayChart& G, const PointTM& p);
TensorValue riemann_two_index(const SprayChart& G, const PointTM& p);
TensorValue riemann_four_index(const SprayChart& G, const PointTM& p);

// Inverse of a row-major n x n jet matrix by LU with partial pivoting on the constant terms; raises
// DegenerateMetric when the constant part is singular or its 1-norm condition
// number exceeds max_condition.
std::vector<Jet> invert_matrix(std::span<const Jet> a, int n, double max_condition = 1e8);

}  // namespace spraylab
