#include "spraylab/projective.hpp"

#include <cmath>
#include <cstdio>

#include "spraylab/errors.hpp"
#include "spraylab/finsler.hpp"

namespace spraylab {

namespace {

constexpr auto D = Variance::Down;

std::span<const Jet> xs(std::span<const Jet> vars, int n) { return vars.subspan(0, static_cast<std::size_t>(n)); }
std::span<const Jet> ys(std::span<const Jet> vars, int n) {
    return vars.subspan(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
}

FieldTensor scalar_field(int n, Jet v) {
    FieldTensor t(n, {});
    t.at(0) = std::move(v);
    return t;
}

// S from explicit coefficient jets G over vars of the same order.
Jet s_from(std::span<const Jet> G, std::span<const Jet> vars, const VolumeForm& dV) {
    const int n = static_cast<int>(G.size());
    const Jet ls = dV.log_sigma(vars);
    Jet S = G[0].derivative(n);
    for (int m = 1; m < n; ++m) S += G[static_cast<std::size_t>(m)].derivative(n + m);
    for (int m = 0; m < n; ++m) S -= vars[static_cast<std::size_t>(n + m)] * ls.derivative(m);
    return S;
}

class DeformedSource : public SpraySource {
public:
    DeformedSource(SprayChart base, VolumeForm dV) : base_(std::move(base)), dV_(std::move(dV)) {}

    std::vector<Jet> coefficients(const PointTM& p, int order) const override {
        const int n = base_.dim();
        const auto G = base_.coefficients(p, order + 1);
        const auto vars = lift_point(p, order + 1);
        const Jet P = s_from(G, vars, dV_) / static_cast<double>(n + 1);
        std::vector<Jet> out;
        for (int i = 0; i < n; ++i) out.push_back((G[static_cast<std::size_t>(i)] - P * vars[static_cast<std::size_t>(n + i)]).truncated(order));
        return out;
    }

private:
    SprayChart base_;
    VolumeForm dV_;
};

class ShiftSource : public SpraySource {
public:
    using Fn = std::function<Jet(std::span<const Jet>)>;
    ShiftSource(SprayChart base, Fn P) : base_(std::move(base)), P_(std::move(P)) {}

    std::vector<Jet> coefficients(const PointTM& p, int order) const override {
        const int n = base_.dim();
        auto G = base_.coefficients(p, order);
        const auto vars = lift_point(p, order);
        const Jet P = P_(vars);
        for (int i = 0; i < n; ++i) G[static_cast<std::size_t>(i)] += P * vars[static_cast<std::size_t>(n + i)];
        return G;
    }

private:
    SprayChart base_;
    Fn P_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Volume forms

VolumeForm::VolumeForm(Expr sigma, std::string label) : n_(sigma.dim()), label_(std::move(label)) {
    if (sigma.uses_y()) throw InputError("volume density may depend on x only");
    if (label_.empty()) label_ = sigma.source();
    density_ = [sigma = std::move(sigma)](std::span<const Jet> vars) {
        const int n = sigma.dim();
        return evaluate<Jet>(sigma, xs(vars, n), ys(vars, n));
    };
}

VolumeForm::VolumeForm(int n, Density density, std::string label)
    : n_(n), density_(std::move(density)), label_(std::move(label)) {}

VolumeForm VolumeForm::unit(int n) { return VolumeForm(parse_expression("1", n), "1"); }

VolumeForm VolumeForm::parse(std::string_view src, int n) {
    ParseOptions opts;
    opts.allow_y = false;
    return VolumeForm(parse_expression(src, n, opts), std::string(src));
}

VolumeForm VolumeForm::riemannian(std::shared_ptr<const RiemannianMetric> a) {
    const int n = a->dim();
    return VolumeForm(
        n, [a = std::move(a)](std::span<const Jet> vars) { return riemannian_volume_density(*a, vars); }, "sqrt(det a)");
}

Jet VolumeForm::sigma(std::span<const Jet> vars) const { return density_(vars); }

Jet VolumeForm::log_sigma(std::span<const Jet> vars) const {
    const Jet s = sigma(vars);
    if (!(s.value() > 0.0)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", s.value());
        throw DomainError("volume density '" + label_ + "' is not positive (sigma = " + buf + ")");
    }
    return log(s);
}

double VolumeForm::value(std::span<const double> x) const {
    PointTM p{std::vector<double>(x.begin(), x.end()), std::vector<double>(x.size(), 0.0)};
    return sigma(lift_point(p, 0)).value();
}

// ---------------------------------------------------------------------------
// S-curvature

Jet s_curvature_field(const BerwaldFrame& frame, const VolumeForm& dV) {
    const int n = frame.dim();
    if (dV.dim() != n) throw InputError("volume form dimension does not match spray");
    const auto vars = lift_point(frame.point(), frame.order());
    std::vector<Jet> G;
    for (int i = 0; i < n; ++i) G.push_back(frame.G(i));
    return s_from(G, vars, dV);
}

double s_curvature(const SprayChart& G, const VolumeForm& dV, const PointTM& p) {
    BerwaldFrame frame(G, p, 1);
    return s_curvature_field(frame, dV).value();
}

FieldTensor chi_from_s_field(const BerwaldFrame& frame, const VolumeForm& dV, SOrdering ordering) {
    const int n = frame.dim();
    const Jet S = s_curvature_field(frame, dV);
    const FieldTensor Sh = frame.covariant(scalar_field(n, S));  // S_{|m}
    FieldTensor chi(n, {D});
    if (ordering == SOrdering::VerticalFirst) {
        FieldTensor Sv(n, {D});
        for (int k = 0; k < n; ++k) Sv(k) = frame.vertical(S, k);
        const FieldTensor Svh = frame.covariant(Sv);  // (k, m) = S_{.k|m}
        for (int k = 0; k < n; ++k) {
            Jet acc = -Sh(k);
            for (int m = 0; m < n; ++m) acc += Svh(k, m) * frame.y(m);
            chi(k) = 0.5 * acc;
        }
    } else {
        const FieldTensor Shv = frame.vertical(Sh);  // (m, k) = S_{|m.k}
        for (int k = 0; k < n; ++k) {
            Jet acc = -Sh(k);
            for (int m = 0; m < n; ++m) acc += Shv(m, k) * frame.y(m);
            chi(k) = 0.5 * acc.truncated(Shv.order());
        }
    }
    return chi;
}

// ---------------------------------------------------------------------------
// Deformation

SprayChart deform(const SprayChart& G, const VolumeForm& dV) {
    if (dV.dim() != G.dim()) throw InputError("volume form dimension does not match spray");
    SprayInfo info{"deformed", {{"base", G.label()}, {"sigma", dV.label()}}};
    return SprayChart(G.dim(), "hat(" + G.label() + ")", G.domain(), std::make_shared<DeformedSource>(G, dV),
                      std::move(info));
}

SprayChart projective_shift(const SprayChart& G, std::function<Jet(std::span<const Jet>)> P, std::string label) {
    SprayInfo info{"shifted", {{"base", G.label()}, {"P", label}}};
    return SprayChart(G.dim(), G.label() + "+(" + label + ")y", G.domain(), std::make_shared<ShiftSource>(G, std::move(P)),
                      std::move(info));
}

SprayChart projective_shift(const SprayChart& G, const Expr& P) {
    if (P.dim() != G.dim()) throw InputError("projective factor dimension does not match spray");
    return projective_shift(
        G, [P](std::span<const Jet> vars) { return evaluate<Jet>(P, xs(vars, P.dim()), ys(vars, P.dim())); }, P.source());
}

Residual projective_invariance_check(const SprayChart& G1, const SprayChart& G2, const VolumeForm& dV,
                                     std::span<const PointTM> points) {
    if (G1.dim() != G2.dim()) throw InputError("projective_invariance_check: dimension mismatch");
    const SprayChart h1 = deform(G1, dV), h2 = deform(G2, dV);
    Residual worst;
    for (const auto& p : points) {
        const auto a = h1.values(p), b = h2.values(p);
        const Residual r = residual_between(a, b, {max_abs(a), max_abs(b)});
        if (r.relative() >= worst.relative()) worst = r;
    }
    return worst;
}

Jet tau_field(const BerwaldFrame& frame, const VolumeForm& dV) {
    const int n = frame.dim();
    const Jet S = s_curvature_field(frame, dV);
    const FieldTensor Sh = frame.covariant(scalar_field(n, S));
    const double c = 1.0 / static_cast<double>(n + 1);
    Jet acc = Sh(0) * frame.y(0);
    for (int m = 1; m < n; ++m) acc += Sh(m) * frame.y(m);
    return (c * c) * (S * S) + c * acc;
}

TensorValue hat_riemann(const SprayChart& G, const VolumeForm& dV, const PointTM& p, HatRoute route) {
    if (route == HatRoute::Direct) return riemann_two_index(deform(G, dV), p);
    const int n = G.dim();
    CurvatureEngine e(G, p, 3);
    const auto& fr = e.frame();
    const auto& R = e.riemann2();
    const FieldTensor chi = e.chi_definition();
    const Jet tau = tau_field(fr, dV);
    FieldTensor out(n, {Variance::Up, D});
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            Jet v = R(i, k) - 0.5 * (fr.vertical(tau, k) * fr.y(i)) + (3.0 / static_cast<double>(n + 1)) * (chi(k) * fr.y(i));
            if (i == k) v += tau;
            out(i, k) = v.truncated(0);
        }
    return out.value("hatR^i_k", p);
}

FieldTensor h_tensor_field(CurvatureEngine& e) {
    const int n = e.dim();
    const FieldTensor chi = e.chi_definition();
    FieldTensor H(n, {D, D});
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) H(j, l) = 0.5 * (e.frame().vertical(chi(j), l) + e.frame().vertical(chi(l), j));
    return H;
}

ProjectiveRicci projective_ricci(const SprayChart& G, const VolumeForm& dV, const PointTM& p, double h_sign) {
    const int n = G.dim();
    ProjectiveRicci out;
    const SprayChart hat = deform(G, dV);
    {
        CurvatureEngine eh(hat, p, 3);
        out.ric_jl = eh.ricci_tensor().value("hatRic_jl", p);
        out.ric = eh.ricci().value();
    }
    CurvatureEngine e(G, p, 4);
    const auto& fr = e.frame();
    const FieldTensor ric = e.ricci_tensor();
    const FieldTensor H = h_tensor_field(e);
    const Jet tau = tau_field(fr, dV);
    FieldTensor formula(n, {D, D});
    const double c = 0.5 * static_cast<double>(n - 1);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            formula(j, l) = (ric(j, l) + c * fr.vertical(fr.vertical(tau, j), l) + h_sign * H(j, l)).truncated(0);
    out.formula_jl = formula.value("hatRic_jl", p);
    out.H = H.value("H_jl", p);
    out.ric_formula = e.ricci().value() + static_cast<double>(n - 1) * tau.value();
    return out;
}

TensorValue douglas(const SprayChart& G, const VolumeForm& dV, const PointTM& p) {
    return berwald_curvature(deform(G, dV), p);
}

TensorValue weyl_hat(const SprayChart& G, const VolumeForm& dV, const PointTM& p) {
    return t_curvature(deform(G, dV), p);
}

SClosed s_closed_residual(const SprayChart& G, std::span<const PointTM> points) {
    if (points.empty()) throw InputError("s_closed_residual: empty point set");
    SClosed out;
    for (const auto& p : points) {
        BerwaldFrame fr(G, p, 3);
        const int n = fr.dim();
        const Jet pi = fr.Pi();
        std::vector<Jet> piv;
        for (int k = 0; k < n; ++k) piv.push_back(fr.vertical(pi, k));
        std::vector<double> hess, curl, dpi, piv0;
        for (int k = 0; k < n; ++k) {
            piv0.push_back(piv[static_cast<std::size_t>(k)].value());
            for (int l = 0; l < n; ++l) {
                hess.push_back(fr.vertical(piv[static_cast<std::size_t>(k)], l).value());
                const double a = fr.partial_x(piv[static_cast<std::size_t>(k)], l).value();
                const double b = fr.partial_x(piv[static_cast<std::size_t>(l)], k).value();
                dpi.push_back(a);
                curl.push_back(a - b);
            }
        }
        const Residual h = residual_of(hess, {max_abs(piv0)});
        const Residual c = residual_of(curl, {max_abs(dpi)});
        if (h.relative() >= out.hessian.relative()) out.hessian = h;
        if (c.relative() >= out.curl.relative()) out.curl = c;
    }
    return out;
}

namespace {

FieldTensor geodesic_derivative(const BerwaldFrame& fr, const Jet& f, double half) {
    const int n = fr.dim();
    FieldTensor fv(n, {D});
    for (int k = 0; k < n; ++k) fv(k) = fr.vertical(f, k);
    const FieldTensor fvh = fr.covariant(fv);
    FieldTensor out(n, {D});
    for (int k = 0; k < n; ++k) {
        Jet acc = -fr.delta(f, k);
        for (int m = 0; m < n; ++m) acc += half * (fvh(k, m) * fr.y(m));
        out(k) = acc.truncated(fvh.order());
    }
    return out;
}

Jet scalar_jet(const Expr& e, const PointTM& p, int order) {
    const auto vars = lift_point(p, order);
    const int n = e.dim();
    return evaluate<Jet>(e, xs(vars, n), ys(vars, n));
}

}  // namespace

FieldTensor rapcsak_field(const BerwaldFrame& frame, const Jet& F) { return geodesic_derivative(frame, F, 1.0); }
FieldTensor dual_field(const BerwaldFrame& frame, const Jet& L) { return geodesic_derivative(frame, L, 0.5); }

TensorValue rapcsak_residual(const Expr& F, const SprayChart& G, const PointTM& p) {
    BerwaldFrame fr(G, p, 2);
    const Jet f = scalar_jet(F, p, 2);
    if (!(f.value() > 0.0)) throw DomainError("Finsler function is not positive at the point");
    return rapcsak_field(fr, f).value("rapcsak_k", p);
}

TensorValue dual_residual(const Expr& L, const SprayChart& G, const PointTM& p) {
    BerwaldFrame fr(G, p, 2);
    return dual_field(fr, scalar_jet(L, p, 2)).value("dual_k", p);
}

}  // namespace spraylab
