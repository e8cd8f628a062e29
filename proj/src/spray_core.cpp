#include "spraylab/spray_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "spraylab/errors.hpp"

namespace spraylab {

// ---------------------------------------------------------------------------
// Box, points

Box Box::cube(int n, double half_width) {
    Box b;
    b.lo.assign(static_cast<std::size_t>(n), -half_width);
    b.hi.assign(static_cast<std::size_t>(n), half_width);
    return b;
}

bool Box::contains(std::span<const double> x) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    }
    return true;
}

Box Box::shrunk(double fraction) const {
    Box b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double c = 0.5 * (lo[i] + hi[i]);
        const double h = 0.5 * (hi[i] - lo[i]) * (1.0 - fraction);
        b.lo[i] = c - h;
        b.hi[i] = c + h;
    }
    return b;
}

std::vector<Jet> lift_point(const PointTM& p, int order) {
    const int n = p.dim();
    std::vector<Jet> vars;
    vars.reserve(2 * static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) vars.push_back(Jet::variable(k, p.x[static_cast<std::size_t>(k)], 2 * n, order));
    for (int k = 0; k < n; ++k) vars.push_back(Jet::variable(n + k, p.y[static_cast<std::size_t>(k)], 2 * n, order));
    return vars;
}

// ---------------------------------------------------------------------------
// Tensors

TensorShape::TensorShape(int n, std::vector<Variance> roles) : n_(n), roles_(std::move(roles)) {
    size_ = 1;
    for (std::size_t r = 0; r < roles_.size(); ++r) size_ *= static_cast<std::size_t>(n_);
}

std::size_t TensorShape::flat(std::span<const int> idx) const {
    if (idx.size() != roles_.size()) throw std::invalid_argument("tensor index count does not match rank");
    std::size_t f = 0;
    for (int i : idx) {
        if (i < 0 || i >= n_) throw std::out_of_range("tensor index out of range");
        f = f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
    }
    return f;
}

std::vector<int> TensorShape::unflat(std::size_t flat) const {
    std::vector<int> idx(roles_.size());
    for (std::size_t r = roles_.size(); r-- > 0;) {
        idx[r] = static_cast<int>(flat % static_cast<std::size_t>(n_));
        flat /= static_cast<std::size_t>(n_);
    }
    return idx;
}

TensorValue::TensorValue(std::string name, TensorShape shape, std::vector<double> data, PointTM point)
    : name_(std::move(name)), shape_(std::move(shape)), data_(std::move(data)), point_(std::move(point)) {
    if (data_.size() != shape_.size()) throw std::invalid_argument("tensor data size does not match shape");
}

double TensorValue::max_abs() const { return spraylab::max_abs(data_); }

FieldTensor::FieldTensor(int n, std::vector<Variance> roles) : shape_(n, std::move(roles)), data_(shape_.size()) {}

int FieldTensor::order() const {
    int o = 1 << 20;
    for (const auto& j : data_) o = std::min(o, j.order());
    return data_.empty() ? 0 : o;
}

TensorValue FieldTensor::value(std::string name, const PointTM& p) const {
    std::vector<double> v(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) v[i] = data_[i].value();
    return TensorValue(std::move(name), shape_, std::move(v), p);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double d : v) m = std::max(m, std::abs(d));
    return m;
}

Residual residual_between(std::span<const double> a, std::span<const double> b,
                          std::initializer_list<double> term_magnitudes) {
    if (a.size() != b.size()) throw std::invalid_argument("residual between tensors of different sizes");
    Residual r;
    double scale = std::max(max_abs(a), max_abs(b));
    for (double t : term_magnitudes) scale = std::max(scale, t);
    for (std::size_t i = 0; i < a.size(); ++i) r.abs = std::max(r.abs, std::abs(a[i] - b[i]));
    r.scale = 1.0 + scale;
    return r;
}

Residual residual_of(std::span<const double> v, std::initializer_list<double> term_magnitudes) {
    Residual r;
    r.abs = max_abs(v);
    double scale = 0.0;
    for (double t : term_magnitudes) scale = std::max(scale, t);
    r.scale = 1.0 + scale;
    return r;
}

// ---------------------------------------------------------------------------
// Sprays

std::vector<double> SpraySource::values(const PointTM& p) const {
    auto jets = coefficients(p, 0);
    std::vector<double> v(jets.size());
    for (std::size_t i = 0; i < jets.size(); ++i) v[i] = jets[i].value();
    return v;
}

SprayChart::SprayChart(int n, std::string label, Box domain, std::shared_ptr<const SpraySource> source, SprayInfo info)
    : n_(n), label_(std::move(label)), domain_(std::move(domain)), source_(std::move(source)), info_(std::move(info)) {
    if (n_ < 2 || n_ > 8) throw InputError("spray dimension must be between 2 and 8");
    if (domain_.dim() != n_) throw InputError("spray domain dimension does not match n");
    if (!source_) throw std::invalid_argument("spray without coefficient source");
}

SprayChart SprayChart::with_metric(std::shared_ptr<const FinslerMetric> m) const {
    SprayChart c = *this;
    c.metric_ = std::move(m);
    return c;
}

void SprayChart::check_point(const PointTM& p) const {
    if (p.dim() != n_ || static_cast<int>(p.y.size()) != n_) throw InputError("point dimension does not match spray");
    if (!domain_.contains(p.x)) throw InputError("point outside the spray domain");
    double norm2 = 0.0;
    for (double v : p.y) norm2 += v * v;
    if (std::sqrt(norm2) < kMinYNorm) throw InputError("y must be non-zero");
}

std::vector<Jet> SprayChart::coefficients(const PointTM& p, int order) const {
    check_point(p);
    auto g = source_->coefficients(p, order);
    if (static_cast<int>(g.size()) != n_) throw std::logic_error("spray source returned wrong component count");
    return g;
}

std::vector<double> SprayChart::values(const PointTM& p) const {
    check_point(p);
    return source_->values(p);
}

double homogeneity_residual(const SprayChart& spray, const PointTM& p, double lambda) {
    PointTM q = p;
    for (double& v : q.y) v *= lambda;
    const auto g = spray.values(p);
    const auto gl = spray.values(q);
    std::vector<double> scaled(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) scaled[i] = lambda * lambda * g[i];
    return residual_between(gl, scaled).relative();
}

std::vector<PointTM> sample_points(const SprayChart& spray, int count, std::uint64_t seed) {
    if (count < 1) throw InputError("point count must be at least 1");
    // Distributions are spelled out so that a seed reproduces the same points
    // on every standard library.
    std::mt19937_64 rng(seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    auto normal = [&] {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    const Box box = spray.domain().shrunk(0.1);
    const int n = spray.dim();
    std::vector<PointTM> pts;
    pts.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(pts.size()) < count) {
        PointTM p;
        for (int i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            p.x.push_back(box.lo[u] + (box.hi[u] - box.lo[u]) * uniform());
        }
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            p.y.push_back(normal());
            norm2 += p.y.back() * p.y.back();
        }
        if (norm2 < 1e-6) continue;
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : p.y) v *= inv;
        pts.push_back(std::move(p));
    }
    return pts;
}

// ---------------------------------------------------------------------------
// BerwaldFrame

BerwaldFrame::BerwaldFrame(const SprayChart& spray, const PointTM& p, int order)
    : n_(spray.dim()), order_(order), point_(p), vars_(lift_point(p, order)), G_(spray.coefficients(p, order)) {
    build();
}

BerwaldFrame::BerwaldFrame(const PointTM& p, std::vector<Jet> G)
    : n_(p.dim()), point_(p), G_(std::move(G)) {
    if (static_cast<int>(G_.size()) != n_) throw std::invalid_argument("frame: coefficient count does not match n");
    order_ = 1 << 20;
    for (const auto& g : G_) order_ = std::min(order_, g.order());
    vars_ = lift_point(p, order_);
    build();
}

void BerwaldFrame::build() {
    for (auto& g : G_) g = g.truncated(order_);
    if (order_ >= 1) {
        N_ = FieldTensor(n_, {Variance::Up, Variance::Down});
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) N_(i, j) = vertical(G(i), j);
        }
        has_N_ = true;
    }
    if (order_ >= 2) {
        Gamma_ = FieldTensor(n_, {Variance::Up, Variance::Down, Variance::Down});
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                for (int k = j; k < n_; ++k) {
                    Gamma_(i, j, k) = vertical(N_(i, j), k);
                    if (k != j) Gamma_(i, k, j) = Gamma_(i, j, k);
                }
            }
        }
        has_Gamma_ = true;
    }
}

const FieldTensor& BerwaldFrame::connection() const {
    if (!has_N_) throw OrderError("nonlinear connection needs coefficient jets of order >= 1");
    return N_;
}

const FieldTensor& BerwaldFrame::christoffel() const {
    if (!has_Gamma_) throw OrderError("Berwald connection needs coefficient jets of order >= 2");
    return Gamma_;
}

const Jet& BerwaldFrame::N(int i, int j) const { return connection()(i, j); }
const Jet& BerwaldFrame::Gamma(int i, int j, int k) const { return christoffel()(i, j, k); }

Jet BerwaldFrame::Pi() const {
    Jet pi = N(0, 0);
    for (int m = 1; m < n_; ++m) pi += N(m, m);
    return pi;
}

Jet BerwaldFrame::delta(const Jet& f, int k) const {
    Jet out = f.derivative(k);
    for (int m = 0; m < n_; ++m) out -= N(m, k) * f.derivative(n_ + m);
    return out;
}

FieldTensor BerwaldFrame::covariant(const FieldTensor& T) const {
    const auto& roles = T.shape().roles();
    if (roles.size() > 4) throw std::invalid_argument("covariant derivative supports tensors of rank <= 4");
    auto out_roles = roles;
    out_roles.push_back(Variance::Down);
    FieldTensor out(n_, out_roles);
    const std::size_t rank = roles.size();
    std::vector<int> idx;
    std::vector<int> moved;
    for (std::size_t f = 0; f < T.size(); ++f) {
        idx = T.shape().unflat(f);
        for (int m = 0; m < n_; ++m) {
            Jet v = delta(T.at(f), m);
            for (std::size_t p = 0; p < rank; ++p) {
                moved = idx;
                const int a = idx[p];
                for (int s = 0; s < n_; ++s) {
                    moved[p] = s;
                    const Jet& t = T.at(T.shape().flat(moved));
                    if (roles[p] == Variance::Up) {
                        v += t * Gamma(a, s, m);
                    } else {
                        v -= t * Gamma(s, a, m);
                    }
                }
            }
            out.at(f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(m)) = std::move(v);
        }
    }
    return out;
}

FieldTensor BerwaldFrame::vertical(const FieldTensor& T) const {
    auto roles = T.shape().roles();
    roles.push_back(Variance::Down);
    FieldTensor out(n_, roles);
    for (std::size_t f = 0; f < T.size(); ++f) {
        for (int m = 0; m < n_; ++m) {
            out.at(f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(m)) = vertical(T.at(f), m);
        }
    }
    return out;
}

FieldTensor BerwaldFrame::contract_y(const FieldTensor& T, int position) const {
    auto roles = T.shape().roles();
    if (position < 0 || position >= static_cast<int>(roles.size())) throw std::out_of_range("contraction position");
    roles.erase(roles.begin() + position);
    FieldTensor out(n_, roles);
    std::vector<int> full;
    for (std::size_t f = 0; f < out.size(); ++f) {
        auto idx = out.shape().unflat(f);
        full = idx;
        full.insert(full.begin() + position, 0);
        Jet acc;
        for (int s = 0; s < n_; ++s) {
            full[static_cast<std::size_t>(position)] = s;
            Jet term = T.at(T.shape().flat(full)) * y(s);
            if (s == 0) {
                acc = std::move(term);
            } else {
                acc += term;
            }
        }
        out.at(f) = std::move(acc);
    }
    return out;
}

Jet horizontal_partial(const BerwaldFrame& frame, const Jet& f, int k) { return frame.delta(f, k); }

FieldTensor covariant_derivative_h(const BerwaldFrame& frame, const FieldTensor& T) { return frame.covariant(T); }

// ---------------------------------------------------------------------------
// Curvature tensors of the Berwald connection

FieldTensor berwald_curvature_field(const BerwaldFrame& fr) {
    const int n = fr.dim();
    FieldTensor B(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                for (int l = 0; l < n; ++l) B(i, j, k, l) = fr.vertical(fr.Gamma(i, k, l), j);
            }
        }
    }
    return B;
}

FieldTensor riemann_two_index_field(const BerwaldFrame& fr) {
    // R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k - N^i_j N^j_k
    const int n = fr.dim();
    FieldTensor R(n, {Variance::Up, Variance::Down});
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            Jet r = 2.0 * fr.partial_x(fr.G(i), k);
            for (int j = 0; j < n; ++j) {
                r -= fr.y(j) * fr.partial_x(fr.N(i, k), j);
                r += 2.0 * (fr.G(j) * fr.Gamma(i, j, k));
                r -= fr.N(i, j) * fr.N(j, k);
            }
            R(i, k) = std::move(r);
        }
    }
    return R;
}

FieldTensor riemann_four_index_field(const BerwaldFrame& fr) {
    // R^i_{jkl} = dGamma^i_{jl}/dx^k - dGamma^i_{jk}/dx^l
    //           + Gamma^i_{ks} Gamma^s_{jl} - Gamma^s_{jk} Gamma^i_{ls}   (delta derivatives)
    const int n = fr.dim();
    FieldTensor dG(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down});  // (i, j, l, k)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int l = j; l < n; ++l) {
                for (int k = 0; k < n; ++k) {
                    dG(i, j, l, k) = fr.delta(fr.Gamma(i, j, l), k);
                    if (l != j) dG(i, l, j, k) = dG(i, j, l, k);
                }
            }
        }
    }
    FieldTensor R(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down});
    const int o = dG.order();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                R(i, j, k, k) = Jet::constant(0.0, 2 * n, o);
                for (int l = k + 1; l < n; ++l) {
                    Jet r = dG(i, j, l, k) - dG(i, j, k, l);
                    for (int s = 0; s < n; ++s) {
                        r += fr.Gamma(i, k, s) * fr.Gamma(s, j, l);
                        r -= fr.Gamma(s, j, k) * fr.Gamma(i, l, s);
                    }
                    R(i, j, l, k) = -r;
                    R(i, j, k, l) = std::move(r);
                }
            }
        }
    }
    return R;
}

TensorValue nonlinear_connection(const SprayChart& G, const PointTM& p) {
    return BerwaldFrame(G, p, 1).connection().value("N", p);
}

TensorValue berwald_connection(const SprayChart& G, const PointTM& p) {
    return BerwaldFrame(G, p, 2).christoffel().value("Gamma", p);
}

TensorValue berwald_curvature(const SprayChart& G, const PointTM& p) {
    return berwald_curvature_field(BerwaldFrame(G, p, 3)).value("B", p);
}

TensorValue riemann_two_index(const SprayChart& G, const PointTM& p) {
    return riemann_two_index_field(BerwaldFrame(G, p, 2)).value("R2", p);
}

TensorValue riemann_four_index(const SprayChart& G, const PointTM& p) {
    return riemann_four_index_field(BerwaldFrame(G, p, 3)).value("R4", p);
}

// ---------------------------------------------------------------------------
// Jet matrix inverse

namespace {

double one_norm(const std::vector<double>& a, int n) {
    double best = 0.0;
    for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int r = 0; r < n; ++r) s += std::abs(a[static_cast<std::size_t>(r * n + c)]);
        best = std::max(best, s);
    }
    return best;
}

template <class T>
std::vector<T> gauss_jordan(std::vector<T> m, std::vector<T> inv, int n, auto value_of) {
    auto at = [n](std::vector<T>& v, int r, int c) -> T& { return v[static_cast<std::size_t>(r * n + c)]; };
    for (int c = 0; c < n; ++c) {
        int piv = c;
        double best = std::abs(value_of(at(m, c, c)));
        for (int r = c + 1; r < n; ++r) {
            const double v = std::abs(value_of(at(m, r, c)));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw DegenerateMetric("singular matrix");
        if (piv != c) {
            for (int k = 0; k < n; ++k) {
                std::swap(at(m, c, k), at(m, piv, k));
                std::swap(at(inv, c, k), at(inv, piv, k));
            }
        }
        const T p = 1.0 / at(m, c, c);
        for (int k = 0; k < n; ++k) {
            at(m, c, k) = at(m, c, k) * p;
            at(inv, c, k) = at(inv, c, k) * p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const T f = at(m, r, c);
            for (int k = 0; k < n; ++k) {
                at(m, r, k) = at(m, r, k) - f * at(m, c, k);
                at(inv, r, k) = at(inv, r, k) - f * at(inv, c, k);
            }
        }
    }
    return inv;
}

}  // namespace

std::vector<Jet> invert_matrix(std::span<const Jet> a, int n, double max_condition) {
    if (a.size() != static_cast<std::size_t>(n * n)) throw std::invalid_argument("invert_matrix: size mismatch");
    std::vector<double> values(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) values[i] = a[i].value();
    std::vector<double> eye(a.size(), 0.0);
    for (int i = 0; i < n; ++i) eye[static_cast<std::size_t>(i * n + i)] = 1.0;
    const auto vinv = gauss_jordan<double>(values, eye, n, [](double v) { return v; });
    const double cond = one_norm(values, n) * one_norm(vinv, n);
    if (!(cond <= max_condition)) {
        throw DegenerateMetric("matrix condition number " + std::to_string(cond) + " exceeds " + std::to_string(max_condition));
    }

    int order = 1 << 20;
    for (const auto& j : a) order = std::min(order, j.order());
    const int dim = a[0].dim();
    std::vector<Jet> m(a.begin(), a.end());
    std::vector<Jet> inv;
    inv.reserve(a.size());
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) inv.push_back(Jet::constant(r == c ? 1.0 : 0.0, dim, order));
    }
    return gauss_jordan<Jet>(std::move(m), std::move(inv), n, [](const Jet& j) { return j.value(); });
}

}  // namespace spraylab
