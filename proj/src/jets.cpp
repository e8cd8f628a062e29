#include "spraylab/jets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "spraylab/errors.hpp"

namespace spraylab {

// ---------------------------------------------------------------------------
// MultiIndex

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
    for (int e : exps_) {
        if (e < 0) throw std::invalid_argument("multi-index exponents must be non-negative");
    }
}

MultiIndex MultiIndex::unit(int dim, int slot, int power) {
    MultiIndex a(dim);
    a[slot] = power;
    return a;
}

int MultiIndex::degree() const noexcept {
    int d = 0;
    for (int e : exps_) d += e;
    return d;
}

double MultiIndex::factorial() const {
    double f = 1.0;
    for (int e : exps_) {
        for (int k = 2; k <= e; ++k) f *= k;
    }
    return f;
}

MultiIndex& MultiIndex::bump(int slot, int count) {
    (*this)[slot] += count;
    return *this;
}

std::string MultiIndex::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < exps_.size(); ++i) {
        if (i) os << ',';
        os << exps_[i];
    }
    os << ')';
    return os.str();
}

// ---------------------------------------------------------------------------
// Monomial layout and multiplication tables

namespace {

constexpr int kMaxDim = 16;
constexpr int kMaxOrder = 12;

std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

struct MonomialTable {
    int dim = 0;
    int order = 0;
    std::vector<std::uint8_t> exps;      // size() * dim
    std::vector<int> degree;             // per monomial
    std::vector<std::size_t> prefix;     // prefix[k] = number of monomials of degree <= k
    std::vector<std::size_t> row_offset; // per monomial, into product
    std::vector<std::uint32_t> product;  // product[row_offset[i] + j] = index of m_i * m_j
    std::vector<std::vector<std::uint32_t>> raise;  // raise[v][i] = index of m_i * z_v
    std::unordered_map<std::uint64_t, std::uint32_t> lookup;

    std::size_t size() const { return degree.size(); }

    std::uint64_t key(const std::uint8_t* e) const {
        std::uint64_t k = 0;
        for (int v = dim - 1; v >= 0; --v) k = k * static_cast<std::uint64_t>(order + 1) + e[v];
        return k;
    }

    std::uint32_t index_of(const std::vector<int>& e) const {
        std::uint64_t k = 0;
        for (int v = dim - 1; v >= 0; --v) k = k * static_cast<std::uint64_t>(order + 1) + static_cast<std::uint64_t>(e[static_cast<std::size_t>(v)]);
        return lookup.at(k);
    }
};

void enumerate_degree(int dim, int degree, int slot, std::vector<std::uint8_t>& current,
                      std::vector<std::uint8_t>& out) {
    if (slot == dim - 1) {
        current[static_cast<std::size_t>(slot)] = static_cast<std::uint8_t>(degree);
        out.insert(out.end(), current.begin(), current.end());
        return;
    }
    for (int e = degree; e >= 0; --e) {
        current[static_cast<std::size_t>(slot)] = static_cast<std::uint8_t>(e);
        enumerate_degree(dim, degree - e, slot + 1, current, out);
    }
}

std::shared_ptr<const MonomialTable> build_table(int dim, int order) {
    auto t = std::make_shared<MonomialTable>();
    t->dim = dim;
    t->order = order;
    std::vector<std::uint8_t> current(static_cast<std::size_t>(dim), 0);
    for (int d = 0; d <= order; ++d) {
        enumerate_degree(dim, d, 0, current, t->exps);
        t->prefix.push_back(t->exps.size() / static_cast<std::size_t>(dim));
    }
    const std::size_t count = t->prefix.back();
    t->degree.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        int d = 0;
        for (int v = 0; v < dim; ++v) d += t->exps[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(v)];
        t->degree[i] = d;
        t->lookup.emplace(t->key(&t->exps[i * static_cast<std::size_t>(dim)]), static_cast<std::uint32_t>(i));
    }

    std::vector<std::uint8_t> sum(static_cast<std::size_t>(dim));
    t->row_offset.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        t->row_offset[i] = t->product.size();
        const std::size_t row_len = t->prefix[static_cast<std::size_t>(order - t->degree[i])];
        const std::uint8_t* ei = &t->exps[i * static_cast<std::size_t>(dim)];
        for (std::size_t j = 0; j < row_len; ++j) {
            const std::uint8_t* ej = &t->exps[j * static_cast<std::size_t>(dim)];
            for (int v = 0; v < dim; ++v) sum[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(ei[v] + ej[v]);
            t->product.push_back(t->lookup.at(t->key(sum.data())));
        }
    }

    t->raise.resize(static_cast<std::size_t>(dim));
    const std::size_t below = order > 0 ? t->prefix[static_cast<std::size_t>(order - 1)] : 0;
    for (int v = 0; v < dim; ++v) {
        auto& r = t->raise[static_cast<std::size_t>(v)];
        r.resize(below);
        for (std::size_t i = 0; i < below; ++i) {
            std::copy_n(&t->exps[i * static_cast<std::size_t>(dim)], dim, sum.begin());
            sum[static_cast<std::size_t>(v)]++;
            r[i] = t->lookup.at(t->key(sum.data()));
        }
    }
    return t;
}

const MonomialTable& table(int dim, int order) {
    thread_local std::array<std::shared_ptr<const MonomialTable>, kMaxDim + 1> local{};
    auto& slot = local[static_cast<std::size_t>(dim)];
    if (slot && slot->order >= order) return *slot;

    static std::mutex mutex;
    static std::array<std::shared_ptr<const MonomialTable>, kMaxDim + 1> shared{};
    std::lock_guard<std::mutex> lock(mutex);
    auto& global = shared[static_cast<std::size_t>(dim)];
    if (!global || global->order < order) global = build_table(dim, order);
    slot = global;
    return *slot;
}

void check_shape(int dim, int order) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("jet dimension must be in [1, 16]");
    if (order < 0 || order > kMaxOrder) throw std::invalid_argument("jet order must be in [0, 12]");
}

void require_same_dim(const Jet& a, const Jet& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("jet dimension mismatch");
}

}  // namespace

std::size_t jet_size(int dim, int order) { return binomial(dim + order, order); }

std::vector<MultiIndex> multi_indices(int dim, int order) {
    check_shape(dim, order);
    const auto& t = table(dim, order);
    std::vector<MultiIndex> out;
    out.reserve(t.prefix[static_cast<std::size_t>(order)]);
    for (std::size_t i = 0; i < t.prefix[static_cast<std::size_t>(order)]; ++i) {
        std::vector<int> e(static_cast<std::size_t>(dim));
        for (int v = 0; v < dim; ++v) e[static_cast<std::size_t>(v)] = t.exps[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(v)];
        out.emplace_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Jet

Jet::Jet(int dim, int order) : dim_(dim), order_(order), coeffs_(jet_size(dim, order), 0.0) {
    check_shape(dim, order);
}

Jet Jet::constant(double value, int dim, int order) {
    Jet j(dim, order);
    j.coeffs_[0] = value;
    return j;
}

Jet Jet::variable(int slot, double value, int dim, int order) {
    if (slot < 0 || slot >= dim) throw std::out_of_range("variable slot out of range");
    Jet j(dim, order);
    j.coeffs_[0] = value;
    // Degree-one monomials are enumerated z_0, z_1, ... right after the constant.
    if (order >= 1) j.coeffs_[1 + static_cast<std::size_t>(slot)] = 1.0;
    return j;
}

double Jet::coefficient(const MultiIndex& a) const {
    if (a.dim() != dim_) throw std::invalid_argument("multi-index dimension mismatch");
    if (a.degree() > order_) {
        throw OrderError("derivative of degree " + std::to_string(a.degree()) +
                         " requested from a jet of order " + std::to_string(order_));
    }
    return coeffs_[table(dim_, order_).index_of(a.exponents())];
}

double Jet::partial(const MultiIndex& a) const { return coefficient(a) * a.factorial(); }

Jet Jet::derivative(int slot) const {
    if (slot < 0 || slot >= dim_) throw std::out_of_range("derivative slot out of range");
    if (order_ == 0) throw OrderError("cannot differentiate a jet of order 0");
    const auto& t = table(dim_, order_);
    Jet out(dim_, order_ - 1);
    const auto& raise = t.raise[static_cast<std::size_t>(slot)];
    for (std::size_t i = 0; i < out.coeffs_.size(); ++i) {
        const std::uint32_t up = raise[i];
        const int e = t.exps[up * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(slot)];
        out.coeffs_[i] = e * coeffs_[up];
    }
    return out;
}

Jet Jet::truncated(int order) const {
    if (order >= order_) return *this;
    if (order < 0) throw OrderError("negative truncation order");
    Jet out(dim_, order);
    std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
    return out;
}

Jet& Jet::operator+=(const Jet& o) {
    require_same_dim(*this, o);
    if (o.order_ < order_) {
        order_ = o.order_;
        coeffs_.resize(o.coeffs_.size());
    }
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    require_same_dim(*this, o);
    if (o.order_ < order_) {
        order_ = o.order_;
        coeffs_.resize(o.coeffs_.size());
    }
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    require_same_dim(a, b);
    const int k = std::min(a.order_, b.order_);
    Jet out(a.dim_, k);
    const auto& t = table(a.dim_, k);
    const std::size_t n = out.coeffs_.size();
    const double* bc = b.coeffs_.data();
    double* oc = out.coeffs_.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double ai = a.coeffs_[i];
        if (ai == 0.0) continue;
        const std::size_t len = t.prefix[static_cast<std::size_t>(k - t.degree[i])];
        const std::uint32_t* row = &t.product[t.row_offset[i]];
        for (std::size_t j = 0; j < len; ++j) oc[row[j]] += ai * bc[j];
    }
    return out;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }
Jet& Jet::operator/=(const Jet& o) { return *this = *this * reciprocal(o); }
Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator/(double c, const Jet& a) { return reciprocal(a) * c; }

Jet& Jet::operator+=(double c) {
    coeffs_[0] += c;
    return *this;
}

Jet& Jet::operator-=(double c) {
    coeffs_[0] -= c;
    return *this;
}

Jet& Jet::operator*=(double c) {
    for (double& v : coeffs_) v *= c;
    return *this;
}

Jet& Jet::operator/=(double c) {
    if (c == 0.0) throw DomainError("division by zero");
    for (double& v : coeffs_) v /= c;
    return *this;
}

Jet Jet::operator-() const {
    Jet out = *this;
    for (double& v : out.coeffs_) v = -v;
    return out;
}

// ---------------------------------------------------------------------------
// Elementary functions

Jet compose(const Jet& f, std::span<const double> taylor) {
    const int k = f.order();
    if (taylor.size() < static_cast<std::size_t>(k) + 1) throw std::invalid_argument("compose: too few Taylor coefficients");
    Jet h = f;
    h.coeffs_[0] = 0.0;
    Jet result = Jet::constant(taylor[static_cast<std::size_t>(k)], f.dim(), k);
    for (int m = k - 1; m >= 0; --m) {
        result = result * h;
        result.coeffs_[0] += taylor[static_cast<std::size_t>(m)];
    }
    return result;
}

Jet reciprocal(const Jet& f) {
    const double c = f.value();
    if (c == 0.0) throw DomainError("division by zero");
    std::vector<double> a(static_cast<std::size_t>(f.order()) + 1);
    double p = 1.0 / c;
    for (std::size_t m = 0; m < a.size(); ++m) {
        a[m] = (m % 2 == 0) ? p : -p;
        p /= c;
    }
    return compose(f, a);
}

Jet sqrt(const Jet& f) {
    const double c = f.value();
    if (!(c > 0.0)) throw DomainError("sqrt of non-positive value");
    std::vector<double> a(static_cast<std::size_t>(f.order()) + 1);
    a[0] = std::sqrt(c);
    for (std::size_t m = 1; m < a.size(); ++m) {
        a[m] = a[m - 1] * (0.5 - static_cast<double>(m - 1)) / (static_cast<double>(m) * c);
    }
    return compose(f, a);
}

Jet exp(const Jet& f) {
    std::vector<double> a(static_cast<std::size_t>(f.order()) + 1);
    a[0] = std::exp(f.value());
    for (std::size_t m = 1; m < a.size(); ++m) a[m] = a[m - 1] / static_cast<double>(m);
    return compose(f, a);
}

Jet log(const Jet& f) {
    const double c = f.value();
    if (!(c > 0.0)) throw DomainError("log of non-positive value");
    std::vector<double> a(static_cast<std::size_t>(f.order()) + 1);
    a[0] = std::log(c);
    double p = 1.0;
    for (std::size_t m = 1; m < a.size(); ++m) {
        p /= c;
        a[m] = ((m % 2 == 1) ? p : -p) / static_cast<double>(m);
    }
    return compose(f, a);
}

namespace {

Jet trig(const Jet& f, int phase) {
    // phase 0: sin, phase 1: cos. The m-th derivative of sin is sin(x + m*pi/2).
    const double s = std::sin(f.value());
    const double c = std::cos(f.value());
    const std::array<double, 4> cycle{s, c, -s, -c};
    std::vector<double> a(static_cast<std::size_t>(f.order()) + 1);
    double fact = 1.0;
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (m > 0) fact *= static_cast<double>(m);
        a[m] = cycle[(m + static_cast<std::size_t>(phase)) % 4] / fact;
    }
    return compose(f, a);
}

}  // namespace

Jet sin(const Jet& f) { return trig(f, 0); }
Jet cos(const Jet& f) { return trig(f, 1); }

Jet abs(const Jet& f) {
    const double c = f.value();
    if (c == 0.0) throw DomainError("abs at zero is not differentiable");
    return c > 0.0 ? f : -f;
}

Jet pow(const Jet& f, int exponent) {
    if (exponent < 0) return reciprocal(pow(f, -exponent));
    Jet result = Jet::constant(1.0, f.dim(), f.order());
    Jet base = f;
    unsigned e = static_cast<unsigned>(exponent);
    while (e) {
        if (e & 1u) result = result * base;
        e >>= 1u;
        if (e) base = base * base;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Free-function surface

Jet lift_variable(int slot, double value, int dim, int order) { return Jet::variable(slot, value, dim, order); }

double partial(const Jet& j, const MultiIndex& a) { return j.partial(a); }

DerivativeTable::DerivativeTable(std::vector<Jet> components, int order) : jets_(std::move(components)), order_(order) {
    for (const auto& j : jets_) {
        if (j.order() < order_) throw OrderError("derivative table component has insufficient order");
    }
}

double DerivativeTable::at(int component, const MultiIndex& a) const { return jet(component).partial(a); }

DerivativeTable eval_derivatives(const JetFunction& f, std::span<const double> point, int order) {
    const int dim = static_cast<int>(point.size());
    std::vector<Jet> vars;
    vars.reserve(point.size());
    for (int s = 0; s < dim; ++s) vars.push_back(Jet::variable(s, point[static_cast<std::size_t>(s)], dim, order));
    return DerivativeTable(f(vars), order);
}

}  // namespace spraylab
