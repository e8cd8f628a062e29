#include "spraylab/finsler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spraylab/errors.hpp"

namespace spraylab {

namespace {

constexpr auto U = Variance::Up;
constexpr auto D = Variance::Down;

std::span<const Jet> xs(std::span<const Jet> vars, int n) { return vars.subspan(0, static_cast<std::size_t>(n)); }
std::span<const Jet> ys(std::span<const Jet> vars, int n) {
    return vars.subspan(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
}

FieldTensor from_matrix(int n, const std::vector<Jet>& m, std::vector<Variance> roles) {
    FieldTensor t(n, std::move(roles));
    for (std::size_t i = 0; i < m.size(); ++i) t.at(i) = m[i];
    return t;
}

std::vector<Jet> to_matrix(const FieldTensor& t) {
    std::vector<Jet> m(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) m[i] = t.at(i);
    return m;
}

Jet dot(std::span<const Jet> a, std::span<const Jet> b) {
    Jet acc = a[0] * b[0];
    for (std::size_t i = 1; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// Determinant of a symmetric positive definite jet matrix by elimination
// without pivoting.
Jet spd_determinant(std::vector<Jet> m, int n) {
    Jet det = Jet::constant(1.0, m[0].dim(), m[0].order());
    for (int c = 0; c < n; ++c) {
        const Jet& piv = m[static_cast<std::size_t>(c * n + c)];
        if (piv.value() <= 0.0) throw DegenerateMetric("metric is not positive definite");
        det *= piv;
        const Jet inv = reciprocal(piv);
        for (int r = c + 1; r < n; ++r) {
            const Jet f = m[static_cast<std::size_t>(r * n + c)] * inv;
            for (int k = c; k < n; ++k) m[static_cast<std::size_t>(r * n + k)] -= f * m[static_cast<std::size_t>(c * n + k)];
        }
    }
    return det;
}

std::vector<double> values_of(const FieldTensor& t) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = t.at(i).value();
    return v;
}

class ChristoffelSpraySource : public SpraySource {
public:
    explicit ChristoffelSpraySource(std::shared_ptr<const RiemannianMetric> a) : a_(std::move(a)) {}

    std::vector<Jet> coefficients(const PointTM& p, int order) const override {
        const int n = a_->dim();
        const auto vars = lift_point(p, order + 1);
        const FieldTensor gamma = christoffel_field(*a_, vars);
        const auto y = ys(vars, n);
        std::vector<Jet> G;
        for (int i = 0; i < n; ++i) {
            std::vector<Jet> terms;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) terms.push_back(gamma(i, j, k) * y[j] * y[k]);
            Jet acc = terms[0];
            for (std::size_t t = 1; t < terms.size(); ++t) acc += terms[t];
            G.push_back(0.5 * acc);
        }
        return G;
    }

private:
    std::shared_ptr<const RiemannianMetric> a_;
};

class GeneralSpraySource : public SpraySource {
public:
    explicit GeneralSpraySource(std::shared_ptr<const FinslerMetric> F) : F_(std::move(F)) {}

    std::vector<Jet> coefficients(const PointTM& p, int order) const override {
        const int n = F_->dim();
        F_->check_positive(p);
        const auto vars = lift_point(p, order + 2);
        const Jet L = F_->L(vars);
        std::vector<Jet> g(static_cast<std::size_t>(n * n)), w;
        for (int l = 0; l < n; ++l) {
            const Jet Ly = L.derivative(n + l);
            for (int j = 0; j < n; ++j) g[static_cast<std::size_t>(l * n + j)] = 0.5 * Ly.derivative(n + j);
            Jet acc = -L.derivative(l);
            for (int k = 0; k < n; ++k) acc += Ly.derivative(k) * vars[static_cast<std::size_t>(n + k)];
            w.push_back(std::move(acc));
        }
        const auto ginv = invert_matrix(g, n);
        std::vector<Jet> G;
        for (int i = 0; i < n; ++i) {
            Jet acc = ginv[static_cast<std::size_t>(i * n)] * w[0];
            for (int l = 1; l < n; ++l) acc += ginv[static_cast<std::size_t>(i * n + l)] * w[static_cast<std::size_t>(l)];
            G.push_back(0.25 * acc);
        }
        return G;
    }

private:
    std::shared_ptr<const FinslerMetric> F_;
};

class RandersDeformedSource : public SpraySource {
public:
    explicit RandersDeformedSource(RandersData rd) : rd_(std::move(rd)) {}

    std::vector<Jet> coefficients(const PointTM& p, int order) const override {
        const int n = rd_.dim();
        const auto vars = lift_point(p, order + 1);
        const RandersFields f = randers_fields(rd_, vars);
        const auto y = ys(vars, n);
        std::vector<Jet> G;
        for (int i = 0; i < n; ++i) {
            std::vector<Jet> terms;
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < n; ++k) terms.push_back(0.5 * (f.gamma(i, j, k) * y[j] * y[k]));
                terms.push_back(f.alpha * f.s_up(i, j) * y[j]);
            }
            Jet acc = terms[0];
            for (std::size_t t = 1; t < terms.size(); ++t) acc += terms[t];
            G.push_back(std::move(acc));
        }
        return G;
    }

private:
    RandersData rd_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

Jet FinslerMetric::L(std::span<const Jet> vars) const {
    const Jet f = F(vars);
    return f * f;
}

void FinslerMetric::check_positive(const PointTM& p) const {
    const auto vars = lift_point(p, 0);
    const double f = F(vars).value();
    if (!(f > 0.0)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", f);
        throw DomainError(std::string("Finsler function is not positive at the point (F = ") + buf + ")");
    }
}

ExprFinslerMetric::ExprFinslerMetric(Expr F) : FinslerMetric(F.dim()), F_(std::move(F)) {}

Jet ExprFinslerMetric::F(std::span<const Jet> vars) const {
    return evaluate<Jet>(F_, xs(vars, dim()), ys(vars, dim()));
}

RiemannianMetric::RiemannianMetric(int n, std::vector<Expr> entries) : FinslerMetric(n), a_(std::move(entries)) {
    if (static_cast<int>(a_.size()) != n * n) throw InputError("Riemannian metric needs n*n entries");
    for (const auto& e : a_) {
        if (e.uses_y()) throw InputError("metric entries may depend on x only");
    }
}

std::shared_ptr<RiemannianMetric> RiemannianMetric::from_upper(int n, const std::map<std::pair<int, int>, Expr>& a) {
    std::vector<Expr> entries(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            auto it = a.find({i, j});
            Expr e = it != a.end() ? it->second : parse_expression(i == j ? "1" : "0", n);
            entries[static_cast<std::size_t>(i * n + j)] = e;
            entries[static_cast<std::size_t>(j * n + i)] = e;
        }
    }
    return std::make_shared<RiemannianMetric>(n, std::move(entries));
}

const Expr& RiemannianMetric::entry(int i, int j) const {
    if (i > j) std::swap(i, j);
    return a_[static_cast<std::size_t>(i * dim() + j)];
}

std::vector<Jet> RiemannianMetric::matrix(std::span<const Jet> vars) const {
    const int n = dim();
    std::vector<Jet> m(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            Jet v = evaluate<Jet>(entry(i, j), xs(vars, n), ys(vars, n));
            m[static_cast<std::size_t>(j * n + i)] = v;
            m[static_cast<std::size_t>(i * n + j)] = std::move(v);
        }
    }
    return m;
}

Jet RiemannianMetric::L(std::span<const Jet> vars) const {
    const int n = dim();
    const auto a = matrix(vars);
    const auto y = ys(vars, n);
    std::vector<Jet> terms;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) terms.push_back(a[static_cast<std::size_t>(i * n + j)] * y[i] * y[j]);
    Jet acc = terms[0];
    for (std::size_t t = 1; t < terms.size(); ++t) acc += terms[t];
    return acc;
}

Jet RiemannianMetric::F(std::span<const Jet> vars) const { return sqrt(L(vars)); }

RandersMetric::RandersMetric(std::shared_ptr<const RiemannianMetric> alpha, std::vector<Expr> b)
    : FinslerMetric(alpha->dim()), alpha_(std::move(alpha)), b_(std::move(b)) {
    if (static_cast<int>(b_.size()) != dim()) throw InputError("Randers 1-form needs n components");
    for (const auto& e : b_) {
        if (e.uses_y()) throw InputError("1-form components may depend on x only");
    }
}

std::vector<Jet> RandersMetric::b_jets(std::span<const Jet> vars) const {
    std::vector<Jet> out;
    for (const auto& e : b_) out.push_back(evaluate<Jet>(e, xs(vars, dim()), ys(vars, dim())));
    return out;
}

Jet RandersMetric::F(std::span<const Jet> vars) const {
    const auto b = b_jets(vars);
    return alpha_->F(vars) + dot(b, ys(vars, dim()));
}

// ---------------------------------------------------------------------------
// Fundamental tensor and torsion

FieldTensor fundamental_tensor_field(const FinslerMetric& F, std::span<const Jet> vars) {
    const int n = F.dim();
    const Jet L = F.L(vars);
    FieldTensor g(n, {D, D});
    for (int i = 0; i < n; ++i) {
        const Jet Li = L.derivative(n + i);
        for (int j = i; j < n; ++j) {
            g(i, j) = 0.5 * Li.derivative(n + j);
            g(j, i) = g(i, j);
        }
    }
    return g;
}

FieldTensor cartan_torsion_field(const FinslerMetric& F, std::span<const Jet> vars) {
    const int n = F.dim();
    const FieldTensor g = fundamental_tensor_field(F, vars);
    FieldTensor C(n, {D, D, D});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) C(i, j, k) = 0.5 * g(i, j).derivative(n + k);
    return C;
}

FieldTensor mean_cartan_field(const FinslerMetric& F, std::span<const Jet> vars) {
    const int n = F.dim();
    const FieldTensor C = cartan_torsion_field(F, vars);
    const auto g = to_matrix(fundamental_tensor_field(F, vars));
    std::vector<Jet> gt(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gt[i] = g[i].truncated(C.order());
    const auto ginv = invert_matrix(gt, n);
    FieldTensor I(n, {D});
    for (int k = 0; k < n; ++k) {
        std::vector<Jet> terms;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) terms.push_back(ginv[static_cast<std::size_t>(i * n + j)] * C(i, j, k));
        Jet acc = terms[0];
        for (std::size_t t = 1; t < terms.size(); ++t) acc += terms[t];
        I(k) = std::move(acc);
    }
    return I;
}

TensorValue fundamental_tensor(const FinslerMetric& F, const PointTM& p) {
    F.check_positive(p);
    const auto vars = lift_point(p, 2);
    const FieldTensor g = fundamental_tensor_field(F, vars);
    invert_matrix(to_matrix(g), F.dim());  // degeneracy check
    return g.value("g_ij", p);
}

TensorValue cartan_torsion(const FinslerMetric& F, const PointTM& p) {
    F.check_positive(p);
    return cartan_torsion_field(F, lift_point(p, 3)).value("C_ijk", p);
}

TensorValue mean_cartan(const FinslerMetric& F, const PointTM& p) {
    F.check_positive(p);
    return mean_cartan_field(F, lift_point(p, 3)).value("I_k", p);
}

FieldTensor christoffel_field(const RiemannianMetric& a, std::span<const Jet> vars) {
    const int n = a.dim();
    const auto g = a.matrix(vars);
    const int order = g[0].order() - 1;
    std::vector<Jet> gt(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gt[i] = g[i].truncated(order);
    const auto ginv = invert_matrix(gt, n);
    // first kind: [jk, l] = (d_j g_lk + d_k g_lj - d_l g_jk) / 2
    auto dg = [&](int r, int c, int slot) { return g[static_cast<std::size_t>(r * n + c)].derivative(slot); };
    FieldTensor first(n, {D, D, D});
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                first(l, j, k) = 0.5 * (dg(l, k, j) + dg(l, j, k) - dg(j, k, l));
                first(l, k, j) = first(l, j, k);
            }
    FieldTensor gamma(n, {U, D, D});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Jet acc = ginv[static_cast<std::size_t>(i * n)] * first(0, j, k);
                for (int l = 1; l < n; ++l) acc += ginv[static_cast<std::size_t>(i * n + l)] * first(l, j, k);
                gamma(i, j, k) = std::move(acc);
            }
    return gamma;
}

// ---------------------------------------------------------------------------
// Induced sprays

SprayChart induced_spray(std::shared_ptr<const FinslerMetric> F, Box domain, std::string label, SprayRoute route,
                         SprayInfo info) {
    std::shared_ptr<const SpraySource> src;
    auto riem = std::dynamic_pointer_cast<const RiemannianMetric>(F);
    if (riem && route == SprayRoute::Auto) {
        src = std::make_shared<ChristoffelSpraySource>(riem);
    } else {
        src = std::make_shared<GeneralSpraySource>(F);
    }
    SprayChart chart(F->dim(), std::move(label), std::move(domain), std::move(src), std::move(info));
    return chart.with_metric(F);
}

FieldTensor chi_cartan_field(const FinslerMetric& F, const SprayChart& induced, const PointTM& p) {
    const int n = F.dim();
    induced.check_point(p);
    F.check_positive(p);
    BerwaldFrame frame(p, induced.coefficients(p, 3));
    const FieldTensor I = mean_cartan_field(F, lift_point(p, 5));
    const FieldTensor Ihh = frame.covariant(frame.covariant(I));  // (k, p, q)
    const FieldTensor R = riemann_two_index_field(frame);
    FieldTensor chi(n, {D});
    for (int k = 0; k < n; ++k) {
        Jet acc = I(0) * R(0, k);
        for (int m = 1; m < n; ++m) acc += I(m) * R(m, k);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) acc += Ihh(k, a, b) * frame.y(a) * frame.y(b);
        chi(k) = 0.5 * acc;
    }
    return chi;
}

ChiValue chi_cartan(const FinslerMetric& F, const SprayChart& induced, const PointTM& p) {
    return ChiValue{values_of(chi_cartan_field(F, induced, p)), ChiRoute::Cartan, p};
}

// ---------------------------------------------------------------------------
// Randers

RandersData::RandersData(std::shared_ptr<const RiemannianMetric> alpha, std::vector<Expr> b, Box domain)
    : alpha_(std::move(alpha)), b_(std::move(b)), domain_(std::move(domain)),
      metric_(std::make_shared<RandersMetric>(alpha_, b_)) {}

double RandersData::b_norm(std::span<const double> x) const {
    const int n = dim();
    PointTM p{std::vector<double>(x.begin(), x.end()), std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    p.y[0] = 1.0;
    const auto vars = lift_point(p, 0);
    const auto ainv = invert_matrix(alpha_->matrix(vars), n);
    const auto b = metric_->b_jets(vars);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s += ainv[static_cast<std::size_t>(i * n + j)].value() * b[static_cast<std::size_t>(i)].value() *
                 b[static_cast<std::size_t>(j)].value();
    return std::sqrt(std::max(s, 0.0));
}

void RandersData::check_norm(std::span<const double> x) const {
    const double nb = b_norm(x);
    if (!(nb < 1.0)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "Randers condition violated: ||b||_a = %.6g (must be < 1)", nb);
        throw InputError(buf);
    }
}

RandersFields randers_fields(const RandersData& rd, std::span<const Jet> vars) {
    const int n = rd.dim();
    if (vars[0].order() < 1) throw OrderError("randers_fields needs jets of order >= 1");
    RandersFields f;
    const auto a = rd.alpha().matrix(vars);
    f.a = from_matrix(n, a, {D, D});
    f.a_inv = from_matrix(n, invert_matrix(a, n), {U, U});
    f.gamma = christoffel_field(rd.alpha(), vars);
    const auto b = rd.metric()->b_jets(vars);
    f.b = FieldTensor(n, {D});
    f.b_up = FieldTensor(n, {U});
    for (int i = 0; i < n; ++i) f.b(i) = b[static_cast<std::size_t>(i)];
    for (int i = 0; i < n; ++i) {
        Jet acc = f.a_inv(i, 0) * f.b(0);
        for (int j = 1; j < n; ++j) acc += f.a_inv(i, j) * f.b(j);
        f.b_up(i) = std::move(acc);
    }
    f.b_cov = FieldTensor(n, {D, D});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Jet acc = f.b(i).derivative(j);
            for (int p = 0; p < n; ++p) acc -= f.gamma(p, i, j) * f.b(p);
            f.b_cov(i, j) = std::move(acc);
        }
    f.r = FieldTensor(n, {D, D});
    f.s = FieldTensor(n, {D, D});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            f.r(i, j) = 0.5 * (f.b_cov(i, j) + f.b_cov(j, i));
            f.s(i, j) = 0.5 * (f.b_cov(i, j) - f.b_cov(j, i));
        }
    auto raise_first = [&](const FieldTensor& t) {
        FieldTensor out(n, {U, D});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet acc = f.a_inv(i, 0) * t(0, j);
                for (int m = 1; m < n; ++m) acc += f.a_inv(i, m) * t(m, j);
                out(i, j) = std::move(acc);
            }
        return out;
    };
    f.s_up = raise_first(f.s);
    auto lower_contract = [&](const FieldTensor& left) {  // left_im s^m_j
        FieldTensor out(n, {D, D});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet acc = left(i, 0) * f.s_up(0, j);
                for (int m = 1; m < n; ++m) acc += left(i, m) * f.s_up(m, j);
                out(i, j) = std::move(acc);
            }
        return out;
    };
    f.q = lower_contract(f.r);
    f.t = lower_contract(f.s);
    f.s_j = FieldTensor(n, {D});
    f.t_j = FieldTensor(n, {D});
    for (int j = 0; j < n; ++j) {
        Jet sj = f.b_up(0) * f.s(0, j);
        Jet tj = f.b_up(0) * f.t(0, j);
        for (int i = 1; i < n; ++i) {
            sj += f.b_up(i) * f.s(i, j);
            tj += f.b_up(i) * f.t(i, j);
        }
        f.s_j(j) = std::move(sj);
        f.t_j(j) = std::move(tj);
    }
    f.alpha = rd.alpha().F(vars);
    return f;
}

RandersQuantities randers_quantities(const RandersData& rd, const PointTM& p) {
    rd.check_norm(p.x);
    const RandersFields f = randers_fields(rd, lift_point(p, 1));
    RandersQuantities q;
    q.tensors = {f.b_cov.value("b_ij", p), f.r.value("r_ij", p),   f.s.value("s_ij", p), f.s_up.value("s^i_j", p),
                 f.s_j.value("s_j", p),    f.q.value("q_ij", p),   f.t.value("t_ij", p), f.t_j.value("t_j", p)};
    q.b_norm = rd.b_norm(p.x);
    return q;
}

SprayChart randers_deformed_spray(const RandersData& rd) {
    return SprayChart(rd.dim(), "randers-deformed", rd.domain(), std::make_shared<RandersDeformedSource>(rd),
                      SprayInfo{"randers-deformed", {}});
}

Jet riemannian_volume_density(const RiemannianMetric& a, std::span<const Jet> vars) {
    return sqrt(spd_determinant(a.matrix(vars), a.dim()));
}

namespace {

// s_ij|k with the Levi-Civita connection of alpha, as plain values; fields at order >= 1.
std::vector<double> s_derivative(const RandersFields& f, int n) {
    std::vector<double> out(static_cast<std::size_t>(n * n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double v = f.s(i, j).derivative(k).value();
                for (int p = 0; p < n; ++p)
                    v -= f.gamma(p, i, k).value() * f.s(p, j).value() + f.gamma(p, j, k).value() * f.s(i, p).value();
                out[static_cast<std::size_t>((i * n + j) * n + k)] = v;
            }
    return out;
}

// s^m_j|m = a^mi s_ij|m.
std::vector<double> s_divergence(const RandersFields& f, const std::vector<double>& ds, int n) {
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m)
            for (int i = 0; i < n; ++i)
                out[static_cast<std::size_t>(j)] += f.a_inv(m, i).value() * ds[static_cast<std::size_t>((i * n + j) * n + m)];
    return out;
}

}  // namespace

RandersIsotropy randers_isotropy_check(const RandersData& rd, const Expr& kappa, std::span<const PointTM> points) {
    if (points.empty()) throw InputError("randers_isotropy_check: empty point set");
    const int n = rd.dim();
    const auto alpha_spray = std::make_shared<ChristoffelSpraySource>(rd.alpha_ptr());
    RandersIsotropy out;
    for (const auto& p : points) {
        BerwaldFrame frame(p, alpha_spray->coefficients(p, 2));
        const FieldTensor Rbar = riemann_two_index_field(frame);
        const auto vars = lift_point(p, 2);
        const RandersFields f = randers_fields(rd, vars);
        const double k = evaluate<double>(kappa, p.x, p.y);
        const double a2 = f.alpha.value() * f.alpha.value();
        auto yv = [&](int i) { return p.y[static_cast<std::size_t>(i)]; };
        std::vector<double> ylow(static_cast<std::size_t>(n), 0.0), t0(static_cast<std::size_t>(n), 0.0),
            s0(static_cast<std::size_t>(n), 0.0), tup0(static_cast<std::size_t>(n), 0.0),
            sup0(static_cast<std::size_t>(n), 0.0);
        double t00 = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                ylow[static_cast<std::size_t>(i)] += f.a(i, j).value() * yv(j);
                t0[static_cast<std::size_t>(i)] += f.t(i, j).value() * yv(j);
                s0[static_cast<std::size_t>(i)] += f.s(i, j).value() * yv(j);
                sup0[static_cast<std::size_t>(i)] += f.s_up(i, j).value() * yv(j);
                t00 += f.t(i, j).value() * yv(i) * yv(j);
            }
        for (int i = 0; i < n; ++i)
            for (int m = 0; m < n; ++m) tup0[static_cast<std::size_t>(i)] += f.a_inv(i, m).value() * t0[static_cast<std::size_t>(m)];
        std::vector<double> lhs, rhs;
        for (int i = 0; i < n; ++i)
            for (int kk = 0; kk < n; ++kk) {
                const auto I = static_cast<std::size_t>(i), K = static_cast<std::size_t>(kk);
                double tik = 0.0;
                for (int m = 0; m < n; ++m) tik += f.a_inv(i, m).value() * f.t(m, kk).value();
                const double d = i == kk ? 1.0 : 0.0;
                rhs.push_back(k * (a2 * d - ylow[K] * yv(i)) + a2 * tik + t00 * d - t0[K] * yv(i) - tup0[I] * ylow[K] -
                              3.0 * sup0[I] * s0[K]);
                lhs.push_back(Rbar(i, kk).value());
            }
        const Residual r1 = residual_between(lhs, rhs, {max_abs(lhs), max_abs(rhs)});

        const auto ds = s_derivative(f, n);
        const auto div = s_divergence(f, ds, n);
        std::vector<double> diff;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int kk = 0; kk < n; ++kk) {
                    const double want = (f.a(i, kk).value() * div[static_cast<std::size_t>(j)] -
                                         f.a(j, kk).value() * div[static_cast<std::size_t>(i)]) /
                                        static_cast<double>(n - 1);
                    diff.push_back(ds[static_cast<std::size_t>((i * n + j) * n + kk)] - want);
                }
        const Residual r2 = residual_of(diff, {max_abs(ds)});
        if (r1.relative() >= out.riemann.relative()) out.riemann = r1;
        if (r2.relative() >= out.s_derivative.relative()) out.s_derivative = r2;
    }
    return out;
}

double randers_hat_R(const RandersData& rd, const Expr& kappa, const PointTM& p) {
    const int n = rd.dim();
    const RandersFields f = randers_fields(rd, lift_point(p, 2));
    const double k = evaluate<double>(kappa, p.x, p.y);
    const double a = f.alpha.value();
    const auto div = s_divergence(f, s_derivative(f, n), n);
    double t00 = 0.0, s0m = 0.0;
    for (int i = 0; i < n; ++i) {
        s0m += div[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) t00 += f.t(i, j).value() * p.y[static_cast<std::size_t>(i)] * p.y[static_cast<std::size_t>(j)];
    }
    return k * a * a + t00 + 2.0 / static_cast<double>(n - 1) * a * s0m;
}

}  // namespace spraylab
