#include "spraylab/curvature.hpp"

#include <algorithm>
#include <cmath>

#include "spraylab/errors.hpp"

namespace spraylab {

const char* to_string(ChiRoute r) {
    switch (r) {
        case ChiRoute::Definition: return "definition";
        case ChiRoute::Trace: return "trace";
        case ChiRoute::LocalPi: return "local";
        case ChiRoute::FromT: return "from_T";
        case ChiRoute::Cartan: return "cartan";
        case ChiRoute::SCurvature: return "s_curvature";
    }
    return "?";
}

namespace {

constexpr auto U = Variance::Up;
constexpr auto D = Variance::Down;

std::vector<double> values_of(const FieldTensor& t) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = t.at(i).value();
    return v;
}

double mag(const FieldTensor& t) { return max_abs(values_of(t)); }

double kron(int a, int b) { return a == b ? 1.0 : 0.0; }

Jet sum_jets(std::vector<Jet> terms) {
    Jet acc = std::move(terms.front());
    for (std::size_t i = 1; i < terms.size(); ++i) acc += terms[i];
    return acc;
}

ChiValue to_chi(const FieldTensor& t, ChiRoute r, const PointTM& p) { return ChiValue{values_of(t), r, p}; }

}  // namespace

CurvatureEngine::CurvatureEngine(const SprayChart& spray, const PointTM& p, int order) : frame_(spray, p, order) {}
CurvatureEngine::CurvatureEngine(BerwaldFrame frame) : frame_(std::move(frame)) {}

const FieldTensor& CurvatureEngine::riemann2() {
    if (!r2_) r2_ = riemann_two_index_field(frame_);
    return *r2_;
}

const FieldTensor& CurvatureEngine::riemann2_v() {
    if (!r2v_) r2v_ = frame_.vertical(riemann2());
    return *r2v_;
}

const FieldTensor& CurvatureEngine::riemann4() {
    if (!r4_) r4_ = riemann_four_index_field(frame_);
    return *r4_;
}

const FieldTensor& CurvatureEngine::berwald() {
    if (!b_) b_ = berwald_curvature_field(frame_);
    return *b_;
}

const Jet& CurvatureEngine::ricci() {
    if (!ric_) {
        const auto& R = riemann2();
        Jet acc = R(0, 0);
        for (int m = 1; m < dim(); ++m) acc += R(m, m);
        ric_ = std::move(acc);
    }
    return *ric_;
}

const Jet& CurvatureEngine::scalar_R() {
    if (!r_) r_ = ricci() / static_cast<double>(dim() - 1);
    return *r_;
}

const FieldTensor& CurvatureEngine::scalar_R_v() {
    if (!rv_) {
        FieldTensor v(dim(), {D});
        for (int k = 0; k < dim(); ++k) v(k) = frame_.vertical(scalar_R(), k);
        rv_ = std::move(v);
    }
    return *rv_;
}

FieldTensor CurvatureEngine::ricci_tensor() {
    const int n = dim();
    const auto& R = riemann4();
    FieldTensor ric(n, {D, D});
    for (int j = 0; j < n; ++j) {
        for (int l = 0; l < n; ++l) {
            Jet acc = R(0, j, 0, l) + R(0, l, 0, j);
            for (int m = 1; m < n; ++m) acc += R(m, j, m, l) + R(m, l, m, j);
            ric(j, l) = 0.5 * acc;
        }
    }
    return ric;
}

FieldTensor CurvatureEngine::chi_definition() {
    const int n = dim();
    const auto& Rv = riemann2_v();
    FieldTensor chi(n, {D});
    for (int k = 0; k < n; ++k) {
        Jet acc = 2.0 * Rv(0, k, 0) + Rv(0, 0, k);
        for (int m = 1; m < n; ++m) acc += 2.0 * Rv(m, k, m) + Rv(m, m, k);
        chi(k) = acc * (-1.0 / 6.0);
    }
    return chi;
}

FieldTensor CurvatureEngine::chi_trace() {
    const int n = dim();
    const auto& R = riemann4();
    FieldTensor chi(n, {D});
    for (int k = 0; k < n; ++k) {
        std::vector<Jet> terms;
        for (int m = 0; m < n; ++m) {
            for (int l = 0; l < n; ++l) terms.push_back(R(m, m, k, l) * frame_.y(l));
        }
        chi(k) = -0.5 * sum_jets(std::move(terms));
    }
    return chi;
}

FieldTensor CurvatureEngine::chi_local() {
    const int n = dim();
    const Jet pi = frame_.Pi();
    FieldTensor chi(n, {D});
    for (int k = 0; k < n; ++k) {
        const Jet pi_y = frame_.vertical(pi, k);
        Jet acc = -frame_.partial_x(pi, k);
        for (int m = 0; m < n; ++m) {
            acc += frame_.partial_x(pi_y, m) * frame_.y(m);
            acc -= 2.0 * (frame_.vertical(pi_y, m) * frame_.G(m));
        }
        chi(k) = 0.5 * acc;
    }
    return chi;
}

FieldTensor CurvatureEngine::t_curvature() {
    const int n = dim();
    const auto& R2 = riemann2();
    const Jet& R = scalar_R();
    const auto& Rv = scalar_R_v();
    FieldTensor T(n, {U, D});
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            Jet t = R2(i, k) + 0.5 * (Rv(k) * frame_.y(i));
            if (i == k) t -= R;
            T(i, k) = std::move(t);
        }
    }
    return T;
}

FieldTensor CurvatureEngine::chi_from_T() {
    const int n = dim();
    const FieldTensor T = t_curvature();
    FieldTensor chi(n, {D});
    for (int k = 0; k < n; ++k) {
        Jet acc = frame_.vertical(T(0, k), 0);
        for (int m = 1; m < n; ++m) acc += frame_.vertical(T(m, k), m);
        chi(k) = acc * (-1.0 / 3.0);
    }
    return chi;
}

FieldTensor CurvatureEngine::weyl_direct() {
    const int n = dim();
    const auto& R2 = riemann2();
    const Jet& R = scalar_R();
    FieldTensor A(n, {U, D});
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) A(i, k) = i == k ? R2(i, k) - R : R2(i, k);
    }
    FieldTensor W(n, {U, D});
    for (int k = 0; k < n; ++k) {
        Jet tr = frame_.vertical(A(0, k), 0);
        for (int m = 1; m < n; ++m) tr += frame_.vertical(A(m, k), m);
        for (int i = 0; i < n; ++i) W(i, k) = A(i, k) - (tr * frame_.y(i)) / static_cast<double>(n + 1);
    }
    return W;
}

FieldTensor CurvatureEngine::weyl_via_chi() {
    const int n = dim();
    FieldTensor W = t_curvature();
    const FieldTensor chi = chi_definition();
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) W(i, k) += (3.0 / static_cast<double>(n + 1)) * (chi(k) * frame_.y(i));
    }
    return W;
}

FieldTensor CurvatureEngine::eta() {
    const int n = dim();
    const FieldTensor Rvh = frame_.covariant(scalar_R_v());
    FieldTensor e(n, {D});
    for (int k = 0; k < n; ++k) {
        Jet acc = -frame_.delta(scalar_R(), k);
        for (int m = 0; m < n; ++m) acc += 0.5 * (Rvh(k, m) * frame_.y(m));
        e(k) = std::move(acc);
    }
    return e;
}

FieldTensor chi_by_route(CurvatureEngine& e, ChiRoute route) {
    switch (route) {
        case ChiRoute::Definition: return e.chi_definition();
        case ChiRoute::Trace: return e.chi_trace();
        case ChiRoute::LocalPi: return e.chi_local();
        case ChiRoute::FromT: return e.chi_from_T();
        default: break;
    }
    throw std::invalid_argument(std::string("chi route '") + to_string(route) + "' needs a metric or a volume form");
}

Residual chi_magnitude(CurvatureEngine& e, const FieldTensor& chi) {
    return residual_of(values_of(chi), {mag(e.riemann2_v())});
}

Residual t_magnitude(CurvatureEngine& e, const FieldTensor& T) {
    return residual_of(values_of(T), {mag(e.riemann2()), std::abs(e.scalar_R().value()), mag(e.scalar_R_v())});
}

// ---------------------------------------------------------------------------
// Public point evaluations

ChiValue chi_definition(const SprayChart& G, const PointTM& p) {
    CurvatureEngine e(G, p, 3);
    return to_chi(e.chi_definition(), ChiRoute::Definition, p);
}

ChiValue chi_trace(const SprayChart& G, const PointTM& p) {
    CurvatureEngine e(G, p, 3);
    return to_chi(e.chi_trace(), ChiRoute::Trace, p);
}

ChiValue chi_local(const SprayChart& G, const PointTM& p) {
    CurvatureEngine e(G, p, 3);
    return to_chi(e.chi_local(), ChiRoute::LocalPi, p);
}

ChiValue chi_from_t(const SprayChart& G, const PointTM& p) {
    CurvatureEngine e(G, p, 4);
    return to_chi(e.chi_from_T(), ChiRoute::FromT, p);
}

TensorValue t_curvature(const SprayChart& G, const PointTM& p) {
    CurvatureEngine e(G, p, 3);
    return e.t_curvature().value("T", p);
}

TensorValue weyl(const SprayChart& G, const PointTM& p, WeylRoute route) {
    CurvatureEngine e(G, p, 3);
    return (route == WeylRoute::Direct ? e.weyl_direct() : e.weyl_via_chi()).value("W", p);
}

TensorValue eta(const SprayChart& G, const PointTM& p) {
    CurvatureEngine e(G, p, 4);
    return e.eta().value("eta", p);
}

TensorValue ricci_tensor(const SprayChart& G, const PointTM& p) {
    CurvatureEngine e(G, p, 3);
    return e.ricci_tensor().value("Ric_jl", p);
}

// ---------------------------------------------------------------------------
// Identities

namespace identities {

Residual berwald_y_contraction(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& B = e.berwald();
    std::vector<double> r;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l < n; ++l) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) s += B(i, j, k, l).value() * e.point().y[static_cast<std::size_t>(j)];
                r.push_back(s);
            }
        }
    }
    return residual_of(r, {mag(B)});
}

Residual berwald_symmetry(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& B = e.berwald();
    std::vector<double> r;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                for (int l = 0; l < n; ++l) {
                    r.push_back(B(i, j, k, l).value() - B(i, k, j, l).value());
                    r.push_back(B(i, j, k, l).value() - B(i, j, l, k).value());
                }
            }
        }
    }
    return residual_of(r, {mag(B)});
}

Residual two_vs_four_index(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& R2 = e.riemann2();
    const auto& R4 = e.riemann4();
    const auto& y = e.point().y;
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                for (int l = 0; l < n; ++l) s += y[static_cast<std::size_t>(j)] * R4(i, j, k, l).value() * y[static_cast<std::size_t>(l)];
            }
            a.push_back(R2(i, k).value());
            b.push_back(s);
        }
    }
    return residual_between(a, b, {mag(R4)});
}

Residual first_bianchi(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& R = e.riemann4();
    std::vector<double> r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    r.push_back(R(i, j, k, l).value() + R(i, k, l, j).value() + R(i, l, j, k).value());
    return residual_of(r, {mag(R)});
}

Residual reconstruct_four_index(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& R4 = e.riemann4();
    const FieldTensor Rvv = e.frame().vertical(e.riemann2_v());  // (i, k, l, j) = R^i_{k.l.j}
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    a.push_back(R4(i, j, k, l).value());
                    b.push_back((Rvv(i, k, l, j).value() - Rvv(i, l, k, j).value()) / 3.0);
                }
    return residual_between(a, b, {mag(Rvv)});
}

Residual reconstruct_jk(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& R4 = e.riemann4();
    const auto& Rv = e.riemann2_v();
    const auto& y = e.point().y;
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int l = 0; l < n; ++l) s += R4(i, j, k, l).value() * y[static_cast<std::size_t>(l)];
                a.push_back(s);
                b.push_back((2.0 * Rv(i, k, j).value() + Rv(i, j, k).value()) / 3.0);
            }
    return residual_between(a, b, {mag(Rv), mag(R4)});
}

Residual reconstruct_kl(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& R4 = e.riemann4();
    const auto& Rv = e.riemann2_v();
    const auto& y = e.point().y;
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) s += y[static_cast<std::size_t>(j)] * R4(i, j, k, l).value();
                a.push_back(s);
                b.push_back((Rv(i, k, l).value() - Rv(i, l, k).value()) / 3.0);
            }
    return residual_between(a, b, {mag(Rv), mag(R4)});
}

Residual second_bianchi(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& fr = e.frame();
    const FieldTensor Rh = fr.covariant(e.riemann4());  // (i, j, k, l, m) = R^i_{jkl|m}
    const FieldTensor R3 = fr.contract_y(e.riemann4(), 1);  // (i, k, l) = R^i_{kl}
    const auto& B = e.berwald();
    std::vector<double> r;
    double br = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m) {
                        double s = Rh(i, j, k, l, m).value() + Rh(i, j, l, m, k).value() + Rh(i, j, m, k, l).value();
                        for (int p = 0; p < n; ++p) {
                            const double t1 = B(i, j, m, p).value() * R3(p, k, l).value();
                            const double t2 = B(i, j, l, p).value() * R3(p, m, k).value();
                            const double t3 = B(i, j, k, p).value() * R3(p, l, m).value();
                            br = std::max({br, std::abs(t1), std::abs(t2), std::abs(t3)});
                            s += t1 + t2 + t3;
                        }
                        r.push_back(s);
                    }
    return residual_of(r, {mag(Rh), br});
}

Residual bianchi_vertical(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& fr = e.frame();
    const FieldTensor Rv = fr.vertical(e.riemann4());  // (i, j, k, l, m) = R^i_{jkl.m}
    const FieldTensor Bh = fr.covariant(e.berwald());  // (i, j, k, l, m) = B^i_{jkl|m}
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m) {
                        a.push_back(Rv(i, j, k, l, m).value());
                        b.push_back(Bh(i, j, m, l, k).value() - Bh(i, j, k, m, l).value());
                    }
    return residual_between(a, b, {mag(Bh)});
}

Residual berwald_vertical_symmetry(CurvatureEngine& e) {
    const int n = e.dim();
    const FieldTensor Bv = e.frame().vertical(e.berwald());
    std::vector<double> r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int m = 0; m < n; ++m) r.push_back(Bv(i, j, k, l, m).value() - Bv(i, j, k, m, l).value());
    return residual_of(r, {mag(Bv)});
}

Residual contracted_bianchi(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& fr = e.frame();
    const FieldTensor R3h = fr.covariant(fr.contract_y(e.riemann4(), 1));  // (i, k, l, m)
    std::vector<double> r;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                for (int m = 0; m < n; ++m)
                    r.push_back(R3h(i, k, l, m).value() + R3h(i, l, m, k).value() + R3h(i, m, k, l).value());
    return residual_of(r, {mag(R3h)});
}

Residual contracted_bianchi_y(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& fr = e.frame();
    const FieldTensor R3h = fr.covariant(fr.contract_y(e.riemann4(), 1));  // (i, m, k, l) = R^i_{mk|l}
    const FieldTensor R2h = fr.covariant(e.riemann2());                     // (i, k, m) = R^i_{k|m}
    const auto& y = e.point().y;
    std::vector<double> r;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int m = 0; m < n; ++m) {
                double s = R2h(i, k, m).value() - R2h(i, m, k).value();
                for (int l = 0; l < n; ++l) s += R3h(i, m, k, l).value() * y[static_cast<std::size_t>(l)];
                r.push_back(s);
            }
    return residual_of(r, {mag(R2h), mag(R3h)});
}

Residual ricci_contraction(CurvatureEngine& e) {
    const int n = e.dim();
    const FieldTensor ric = e.ricci_tensor();
    const auto& y = e.point().y;
    double s = 0.0;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) s += ric(j, l).value() * y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(l)];
    const double a[] = {s};
    const double b[] = {e.ricci().value()};
    return residual_between(a, b, {mag(ric)});
}

Residual t_trace(CurvatureEngine& e) {
    const FieldTensor T = e.t_curvature();
    double tr = 0.0;
    for (int m = 0; m < e.dim(); ++m) tr += T(m, m).value();
    const double r[] = {tr};
    return residual_of(r, {mag(e.riemann2()), std::abs(e.scalar_R().value()), mag(e.scalar_R_v())});
}

Residual weyl_routes(CurvatureEngine& e) {
    return residual_between(values_of(e.weyl_direct()), values_of(e.weyl_via_chi()), {mag(e.riemann2_v())});
}

Residual weyl_trace(CurvatureEngine& e) {
    const int n = e.dim();
    const FieldTensor W = e.weyl_direct();
    std::vector<double> r;
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += e.frame().vertical(W(m, k), m).value();
        r.push_back(s);
    }
    return residual_of(r, {mag(e.riemann2_v())});
}

Residual isotropic_four_index(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& R4 = e.riemann4();
    const FieldTensor Rvv = e.frame().vertical(e.scalar_R_v());  // (l, j) = R_{.l.j}
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    a.push_back(R4(i, j, k, l).value());
                    b.push_back(0.5 * (Rvv(l, j).value() * kron(i, k) - Rvv(k, j).value() * kron(i, l)));
                }
    return residual_between(a, b, {mag(Rvv)});
}

Residual isotropic_rr2(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& fr = e.frame();
    const FieldTensor Rvh = fr.covariant(e.scalar_R_v());
    std::vector<double> r;
    double scale = 0.0;
    for (int l = 0; l < n; ++l) {
        double s = -2.0 * fr.delta(e.scalar_R(), l).value();
        scale = std::max(scale, std::abs(s));
        for (int m = 0; m < n; ++m) s += Rvh(l, m).value() * e.point().y[static_cast<std::size_t>(m)];
        r.push_back(static_cast<double>(n - 2) * s);
    }
    return residual_of(r, {static_cast<double>(n) * mag(Rvh), static_cast<double>(n) * scale});
}

Residual eta_zero(CurvatureEngine& e) {
    const int n = e.dim();
    const auto& fr = e.frame();
    const FieldTensor Rvh = fr.covariant(e.scalar_R_v());
    double scale = mag(Rvh);
    for (int l = 0; l < n; ++l) scale = std::max(scale, std::abs(fr.delta(e.scalar_R(), l).value()));
    return residual_of(values_of(e.eta()), {scale});
}

Residual chi_routes(CurvatureEngine& e, ChiRoute a, ChiRoute b) {
    return residual_between(values_of(chi_by_route(e, a)), values_of(chi_by_route(e, b)), {mag(e.riemann2_v())});
}

}  // namespace identities

// ---------------------------------------------------------------------------
// Classification and reports

Classification classify(const SprayChart& G, std::span<const PointTM> points, double threshold) {
    if (points.empty()) throw InputError("classify: empty point set");
    Classification c;
    for (const auto& p : points) {
        CurvatureEngine e(G, p, 3);
        c.isotropy = std::max(c.isotropy, t_magnitude(e, e.t_curvature()).relative());
        c.scalar_curvature = std::max(c.scalar_curvature, t_magnitude(e, e.weyl_direct()).relative());
        c.chi = std::max(c.chi, chi_magnitude(e, e.chi_definition()).relative());
    }
    c.points = static_cast<int>(points.size());
    c.isotropic = c.isotropy < threshold;
    c.scalar = c.scalar_curvature < threshold;
    c.chi_zero = c.chi < threshold;
    return c;
}

CurvatureReport curvature_report(const SprayChart& G, const PointTM& p, std::uint64_t seed, int order) {
    CurvatureEngine e(G, p, order);
    CurvatureReport rep;
    rep.label = G.label();
    rep.seed = seed;
    rep.point = p;
    rep.tensors.push_back(e.riemann2().value("R^i_k", p));
    rep.tensors.push_back(e.ricci_tensor().value("Ric_jl", p));
    {
        FieldTensor s(G.dim(), {});
        s.at(0) = e.ricci();
        rep.tensors.push_back(s.value("Ric", p));
        s.at(0) = e.scalar_R();
        rep.tensors.push_back(s.value("R", p));
    }
    rep.tensors.push_back(e.t_curvature().value("T^i_k", p));
    rep.tensors.push_back(e.weyl_direct().value("W^i_k", p));
    rep.tensors.push_back(e.chi_definition().value("chi_k", p));
    if (order >= 4) rep.tensors.push_back(e.eta().value("eta_k", p));

    auto add = [&](std::string id, Residual r, double tol) { rep.residuals.push_back({std::move(id), r, tol}); };
    add("riemann.two_vs_four", identities::two_vs_four_index(e), 1e-8);
    add("chi.trace", identities::chi_routes(e, ChiRoute::Definition, ChiRoute::Trace), 1e-8);
    add("chi.local", identities::chi_routes(e, ChiRoute::Definition, ChiRoute::LocalPi), 1e-8);
    if (order >= 4) add("chi.from_T", identities::chi_routes(e, ChiRoute::Definition, ChiRoute::FromT), 1e-8);
    add("t.trace", identities::t_trace(e), 1e-9);
    add("weyl.routes", identities::weyl_routes(e), 1e-8);
    if (order >= 4) add("weyl.trace", identities::weyl_trace(e), 1e-8);
    add("ricci.contraction", identities::ricci_contraction(e), 1e-9);
    return rep;
}

}  // namespace spraylab
