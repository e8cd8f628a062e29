#include "spraylab/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "spraylab/curvature.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/finsler.hpp"
#include "spraylab/projective.hpp"

namespace spraylab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

void parse_spray_spec(const std::string& spec, RunConfig& cfg) {
    const auto colon = spec.find(':');
    cfg.family = spec.substr(0, colon);
    if (cfg.family.empty()) throw InputError("--spray: missing family name");
    cfg.params.clear();
    if (colon == std::string::npos) return;
    const std::string rest = spec.substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
        std::size_t comma = rest.find(',', start);
        if (comma == std::string::npos) comma = rest.size();
        const std::string item = rest.substr(start, comma - start);
        if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) throw InputError("--spray: expected key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            if (cfg.params.count(key)) throw InputError("--spray: parameter '" + key + "' given twice");
            cfg.params[key] = item.substr(eq + 1);
        }
        start = comma + 1;
    }
}

namespace {

double parse_positive(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !(v > 0.0) || !std::isfinite(v)) {
        throw InputError(what + ": expected a positive number, got '" + text + "'");
    }
    return v;
}

}  // namespace

void parse_tolerance(const std::string& spec, RunConfig& cfg) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        cfg.tol_global = parse_positive(spec, "--tol");
        return;
    }
    const std::string id = spec.substr(0, eq);
    if (id.empty()) throw InputError("--tol: empty row id");
    cfg.tol_overrides[id] = parse_positive(spec.substr(eq + 1), "--tol " + id);
}

SprayChart load_spray(const RunConfig& cfg) {
    if (cfg.order < 0 || cfg.order > 8) throw InputError("--order must be between 0 and 8");
    if (cfg.file) {
        const SprayDefinition def = load_spray_definition(*cfg.file);
        return spray_from_definition(def, std::filesystem::path(*cfg.file).stem().string());
    }
    return make_family(cfg.family, cfg.params);
}

const char* to_string(RowStatus s) {
    switch (s) {
        case RowStatus::Pass: return "pass";
        case RowStatus::Fail: return "fail";
        case RowStatus::NotApplicable: return "n/a";
    }
    return "?";
}

int Report::failed() const {
    return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const Row& r) { return r.status == RowStatus::Fail; }));
}

// ---------------------------------------------------------------------------
// Row machinery

namespace {

struct RowDef {
    const char* id;
    const char* eq_tag;
    const char* quote;
    double tolerance;
    int order;  // spray jet order needed
};

std::string format_point(const PointTM& p) {
    std::string s = "x=(";
    char buf[32];
    for (std::size_t k = 0; k < p.x.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%.6g", k ? ", " : "", p.x[k]);
        s += buf;
    }
    s += ") y=(";
    for (std::size_t k = 0; k < p.y.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s%.6g", k ? ", " : "", p.y[k]);
        s += buf;
    }
    return s + ")";
}

// Same exception type, message prefixed with where it happened.
[[noreturn]] void rethrow_located(const Error& e, const std::string& where) {
    const std::string msg = where + ": " + e.what();
    if (dynamic_cast<const InputError*>(&e)) throw InputError(msg);
    if (dynamic_cast<const DomainError*>(&e)) throw DomainError(msg);
    if (dynamic_cast<const OrderError*>(&e)) throw OrderError(msg);
    if (dynamic_cast<const DegenerateMetric*>(&e)) throw DegenerateMetric(msg);
    throw Error(msg);
}

class Suite {
public:
    Suite(const RunConfig& cfg, std::span<const PointTM> pts) : cfg_(cfg), pts_(pts) {}

    int open(const RowDef& d, const std::string& suffix = {}) {
        Row r;
        r.id = std::string(d.id) + suffix;
        r.eq_tag = d.eq_tag;
        r.quote = d.quote;
        r.order = d.order;
        r.tolerance = d.tolerance;
        if (cfg_.tol_global) r.tolerance = *cfg_.tol_global;
        if (auto it = cfg_.tol_overrides.find(d.id); it != cfg_.tol_overrides.end()) r.tolerance = it->second;
        if (auto it = cfg_.tol_overrides.find(r.id); it != cfg_.tol_overrides.end()) r.tolerance = it->second;
        State st;
        if (d.order > cfg_.order) {
            r.note = "needs jet order " + std::to_string(d.order);
            st.blocked = true;
        }
        rows_.push_back(std::move(r));
        state_.push_back(st);
        return static_cast<int>(rows_.size()) - 1;
    }

    bool runnable(int h) const { return !state_[idx(h)].blocked; }

    // Hypothesis not met: the row is not evaluated.
    void skip(int h, const std::string& why) {
        if (!runnable(h)) return;
        state_[idx(h)].blocked = true;
        rows_[idx(h)].note = why;
    }

    // Evaluated for information only; reported as n/a.
    void informational(int h, const std::string& why) {
        if (!runnable(h)) return;
        state_[idx(h)].informational = true;
        rows_[idx(h)].note = why;
    }

    void add(int h, int point, double rel) {
        auto& r = rows_[idx(h)];
        if (!std::isfinite(rel)) rel = INFINITY;
        if (r.evaluated == 0 || rel > r.max_residual) {
            r.max_residual = rel;
            r.worst_point = point;
        }
        state_[idx(h)].sum += rel;
        ++r.evaluated;
    }

    void each(int h, const std::function<double(int, const PointTM&)>& f) {
        if (!runnable(h)) return;
        for (int i = 0; i < static_cast<int>(pts_.size()); ++i) {
            const PointTM& p = pts_[static_cast<std::size_t>(i)];
            try {
                add(h, i, f(i, p));
            } catch (const Error& e) {
                rethrow_located(e, "row '" + rows_[idx(h)].id + "' at point #" + std::to_string(i) + " " + format_point(p));
            }
        }
    }

    std::vector<Row> finish() {
        for (std::size_t h = 0; h < rows_.size(); ++h) {
            auto& r = rows_[h];
            if (r.evaluated > 0) r.mean_residual = state_[h].sum / r.evaluated;
            if (state_[h].blocked || state_[h].informational || r.evaluated == 0) {
                r.status = RowStatus::NotApplicable;
                if (r.note.empty()) r.note = "not evaluated";
            } else {
                r.status = r.max_residual <= r.tolerance ? RowStatus::Pass : RowStatus::Fail;
            }
        }
        return std::move(rows_);
    }

private:
    struct State {
        bool blocked = false;
        bool informational = false;
        double sum = 0.0;
    };

    static std::size_t idx(int h) { return static_cast<std::size_t>(h); }

    const RunConfig& cfg_;
    std::span<const PointTM> pts_;
    std::vector<Row> rows_;
    std::vector<State> state_;
};

double rel_diff(std::span<const double> a, std::span<const double> b) {
    return residual_between(a, b, {max_abs(a), max_abs(b)}).relative();
}
double rel_diff(const TensorValue& a, const TensorValue& b) { return rel_diff(a.data(), b.data()); }

std::vector<double> values_of(const FieldTensor& t) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = t.at(i).value();
    return v;
}

PointTM scaled(const PointTM& p, double l) {
    PointTM q = p;
    for (double& v : q.y) v *= l;
    return q;
}

// ---------------------------------------------------------------------------
// Row catalogue

// clang-format off
const RowDef kHomogeneity{"homogeneity.G", "spray-homogeneity", "G^i(x, l y) = l^2 G^i(x, y), l in {0.5, 2, 3}", 1e-9, 0};
const RowDef kEuler{"connection.euler", "connection-euler", "N^i_m y^m = 2 G^i", 1e-10, 1};
const RowDef kBerwaldY{"berwald.y_contraction", "berwald-y-contraction", "y^j B^i_jkl = 0", 1e-10, 3};
const RowDef kBerwaldSym{"berwald.symmetry", "berwald-symmetry", "B^i_jkl = B^i_kjl = B^i_jlk", 1e-10, 3};
const RowDef kTwoFour{"riemann.two_vs_four", "riemann-contraction", "R^i_k = y^j R^i_jkl y^l", 1e-8, 3};
const RowDef kFirstBianchi{"bianchi.first", "first-bianchi", "R^i_jkl + R^i_klj + R^i_ljk = 0", 1e-8, 3};
const RowDef kRec4{"riemann.reconstruct_jkl", "riemann-reconstruction", "R^i_jkl = (R^i_k.l.j - R^i_l.k.j)/3", 1e-8, 4};
const RowDef kRecJK{"riemann.reconstruct_jk", "riemann-reconstruction-jk", "R^i_jk = (2 R^i_k.j + R^i_j.k)/3", 1e-8, 3};
const RowDef kRecKL{"riemann.reconstruct_kl", "riemann-reconstruction-kl", "R^i_kl = (R^i_k.l - R^i_l.k)/3", 1e-8, 3};
const RowDef kSecondBianchi{"bianchi.second", "second-bianchi",
    "R^i_jkl|m + R^i_jlm|k + R^i_jmk|l + B^i_jmp R^p_kl + B^i_jlp R^p_mk + B^i_jkp R^p_lm = 0", 1e-7, 4};
const RowDef kBianchiV{"bianchi.vertical", "riemann-vertical-derivative", "R^i_jkl.m = B^i_jml|k - B^i_jkm|l", 1e-7, 4};
const RowDef kBerwaldV{"bianchi.berwald_vertical", "berwald-vertical-symmetry", "B^i_jkl.m = B^i_jkm.l", 1e-7, 4};
const RowDef kContracted{"bianchi.contracted", "contracted-bianchi", "R^i_kl|m + R^i_lm|k + R^i_mk|l = 0", 1e-7, 4};
const RowDef kContractedY{"bianchi.contracted_y", "contracted-bianchi-y", "R^i_k|m - R^i_m|k + R^i_mk|l y^l = 0", 1e-7, 4};
const RowDef kRicci{"ricci.contraction", "ricci-contraction", "Ric_jl y^j y^l = R^m_m", 1e-9, 3};
const RowDef kChiTrace{"chi.trace", "chi-trace-route", "-(2 R^m_k.m + R^m_m.k)/6 = -R^m_mkl y^l / 2", 1e-8, 3};
const RowDef kChiLocal{"chi.local", "chi-local-route",
    "-(2 R^m_k.m + R^m_m.k)/6 = (Pi_{x^m y^k} y^m - Pi_{x^k} - 2 Pi_{y^k y^m} G^m)/2", 1e-8, 3};
const RowDef kChiT{"chi.from_T", "chi-from-T", "chi_k = -T^m_k.m / 3", 1e-8, 4};
const RowDef kChiCartan{"chi.cartan", "chi-cartan-route", "chi_k = (I_k|p|q y^p y^q + I_m R^m_k)/2", 1e-6, 3};
const RowDef kChiHom{"chi.homogeneity", "chi-homogeneity", "chi_k(x, l y) = l chi_k(x, y), l in {0.5, 2}", 1e-8, 3};
const RowDef kTTrace{"t.trace", "t-trace", "T^m_m = 0", 1e-9, 3};
const RowDef kWeylRoutes{"weyl.routes", "weyl-routes",
    "A^i_k - A^m_k.m y^i/(n+1) = T^i_k + 3 chi_k y^i/(n+1), A^i_k = R^i_k - R d^i_k", 1e-8, 3};
const RowDef kWeylTrace{"weyl.trace", "weyl-trace", "W^m_k.m = 0", 1e-8, 4};
const RowDef kIsoIff{"classify.isotropy_iff_chi", "isotropy-iff-chi", "W = 0 and chi = 0 => T = 0", 1e-6, 3};
const RowDef kIso4{"isotropic.four_index", "isotropic-four-index", "T = 0 => R^i_jkl = (R_.l.j d^i_k - R_.k.j d^i_l)/2", 1e-7, 4};
const RowDef kIsoRR2{"isotropic.scalar_derivative", "isotropic-scalar-derivative", "T = 0 => (n-2)(R_.l|m y^m - 2 R_|l) = 0", 1e-7, 4};
const RowDef kEta{"eta.isotropic", "eta-isotropic", "T = 0, n >= 3 => eta_k = R_.k|m y^m / 2 - R_|k = 0", 1e-7, 4};
const RowDef kSClosed{"s_closed.chi", "s-closed-implies-chi-zero", "Pi_.k.l = 0 and d(Pi_.k dx^k) = 0 => chi = 0", 1e-7, 3};

const RowDef kSHom{"s.homogeneity", "s-homogeneity", "S(x, l y) = l S(x, y), l in {0.5, 2}", 1e-9, 1};
const RowDef kSHat{"deform.s_hat", "deformed-s-vanishes", "S(hatG, dV) = 0, hatG^i = G^i - S y^i/(n+1)", 1e-9, 2};
const RowDef kChiHat{"deform.chi_hat", "deformed-chi-vanishes", "chi(hatG) = 0", 1e-7, 4};
const RowDef kChiS{"chi.s_route", "chi-from-s", "chi_k = (S_.k|m y^m - S_|k)/2", 1e-8, 3};
const RowDef kSOrder{"chi.s_ordering", "s-derivative-ordering", "S_.k|m y^m = S_|m.k y^m", 1e-8, 3};
const RowDef kSChiZero{"s.chi_zero", "chi-zero-s-equation", "chi = 0 => S_.k|m y^m - S_|k = 0", 1e-7, 3};
const RowDef kHatR{"hat.riemann", "deformed-riemann", "hatR^i_k = R^i_k + tau d^i_k - tau_.k y^i/2 + 3 chi_k y^i/(n+1)", 1e-7, 3};
const RowDef kHatRic{"hat.ricci", "projective-ricci", "hatRic_jl = Ric_jl + (n-1)/2 tau_.j.l - (chi_j.l + chi_l.j)/2", 1e-8, 4};
const RowDef kHatRicS{"hat.ricci_scalar", "projective-ricci-scalar", "hatRic = Ric + (n-1) tau", 1e-8, 4};
const RowDef kHatW{"hat.weyl", "deformed-T-is-weyl", "hatT^i_k = W^i_k", 1e-8, 4};
const RowDef kHatD{"hat.douglas", "douglas-volume-independence", "hatB(sigma) = hatB(sigma exp(x1))", 1e-8, 4};
const RowDef kHatP{"hat.projective_invariance", "deformation-projective-invariance", "hat(G + P y) = hat(G), P = y1 + x1 y2", 1e-9, 1};
const RowDef kHatIso{"hat.isotropic_if_scalar", "scalar-implies-deformed-isotropic", "W = 0 => hatT = 0", 1e-7, 4};
const RowDef kHatEta{"hat.eta", "deformed-eta-vanishes", "W = 0, n >= 3 => eta(hatG) = 0", 1e-7, 5};

const RowDef kRandersG{"randers.deformed_spray", "randers-deformed-spray", "G^i_alpha + alpha s^i_0 = hatG^i for dV_alpha", 1e-8, 1};
const RowDef kRandersS{"randers.s_vanishes", "randers-s-vanishes", "S(G_alpha + alpha s_0, dV_alpha) = 0", 1e-9, 1};
const RowDef kRandersR{"randers.hat_R", "randers-isotropic-hatR", "hatR = kappa alpha^2 + t_00 + 2/(n-1) alpha s^m_0|m", 1e-7, 3};
const RowDef kRandersT{"randers.hat_T", "randers-deformed-isotropic", "isotropy equations => hatT = 0", 1e-7, 4};
// clang-format on

constexpr double kGateTolerance = 1e-8;

struct Context {
    const SprayChart& G;
    std::span<const PointTM> pts;
    const RunConfig& cfg;
    std::optional<Classification> cls;
    bool full = true;  // verify runs every row; evaluate only the consistency rows
};

// Per-point engines, built on first use at a fixed order.
class EngineCache {
public:
    EngineCache(const SprayChart& G, std::span<const PointTM> pts, int order)
        : G_(G), pts_(pts), order_(order), engines_(pts.size()) {}

    CurvatureEngine& operator()(int i) {
        auto& e = engines_[static_cast<std::size_t>(i)];
        if (!e) e = std::make_unique<CurvatureEngine>(G_, pts_[static_cast<std::size_t>(i)], order_);
        return *e;
    }

private:
    SprayChart G_;
    std::span<const PointTM> pts_;
    int order_;
    std::vector<std::unique_ptr<CurvatureEngine>> engines_;
};

void spray_rows(Suite& s, const Context& c) {
    const SprayChart& G = c.G;
    const int n = G.dim();
    EngineCache engine(G, c.pts, std::clamp(c.cfg.order, 1, 4));
    using namespace identities;
    auto ident = [&](const RowDef& d, Residual (*fn)(CurvatureEngine&)) {
        const int h = s.open(d);
        s.each(h, [&](int i, const PointTM&) { return fn(engine(i)).relative(); });
        return h;
    };
    auto chi_route = [&](const RowDef& d, ChiRoute r) {
        const int h = s.open(d);
        s.each(h, [&](int i, const PointTM&) { return chi_routes(engine(i), ChiRoute::Definition, r).relative(); });
    };

    if (c.full) {
        int h = s.open(kHomogeneity);
        s.each(h, [&](int, const PointTM& p) {
            double m = 0.0;
            for (double l : {0.5, 2.0, 3.0}) m = std::max(m, homogeneity_residual(G, p, l));
            return m;
        });
        h = s.open(kEuler);
        s.each(h, [&](int i, const PointTM& p) {
            const auto& fr = engine(i).frame();
            std::vector<double> a, b;
            for (int k = 0; k < n; ++k) {
                double v = 0.0;
                for (int m = 0; m < n; ++m) v += fr.N(k, m).value() * p.y[static_cast<std::size_t>(m)];
                a.push_back(v);
                b.push_back(2.0 * fr.G(k).value());
            }
            return rel_diff(a, b);
        });
        ident(kBerwaldY, berwald_y_contraction);
        ident(kBerwaldSym, berwald_symmetry);
    }
    ident(kTwoFour, two_vs_four_index);
    if (c.full) {
        ident(kFirstBianchi, first_bianchi);
        ident(kRec4, reconstruct_four_index);
        ident(kRecJK, reconstruct_jk);
        ident(kRecKL, reconstruct_kl);
        ident(kSecondBianchi, second_bianchi);
        ident(kBianchiV, bianchi_vertical);
        ident(kBerwaldV, berwald_vertical_symmetry);
        ident(kContracted, contracted_bianchi);
        ident(kContractedY, contracted_bianchi_y);
    }
    ident(kRicci, ricci_contraction);
    chi_route(kChiTrace, ChiRoute::Trace);
    chi_route(kChiLocal, ChiRoute::LocalPi);
    chi_route(kChiT, ChiRoute::FromT);
    {
        const int h = s.open(kChiCartan);
        if (!G.metric()) s.skip(h, "spray has no metric");
        s.each(h, [&](int i, const PointTM& p) {
            auto& e = engine(i);
            const ChiValue cc = chi_cartan(*G.metric(), G, p);
            return residual_between(cc.components, values_of(e.chi_definition()), {max_abs(values_of(e.riemann2_v()))})
                .relative();
        });
    }
    if (c.full) {
        const int h = s.open(kChiHom);
        s.each(h, [&](int, const PointTM& p) {
            const auto base = chi_definition(G, p).components;
            double m = 0.0;
            for (double l : {0.5, 2.0}) {
                const auto got = chi_definition(G, scaled(p, l)).components;
                std::vector<double> want(base.size());
                for (std::size_t k = 0; k < base.size(); ++k) want[k] = l * base[k];
                m = std::max(m, rel_diff(got, want));
            }
            return m;
        });
    }
    ident(kTTrace, t_trace);
    ident(kWeylRoutes, weyl_routes);
    ident(kWeylTrace, weyl_trace);
    if (!c.full) return;

    // Rows whose hypothesis comes from the classification of the spray.
    const int hiff = s.open(kIsoIff);
    const int h4 = s.open(kIso4);
    const int hrr = s.open(kIsoRR2);
    const int heta = s.open(kEta);
    if (!c.cls) {
        for (int h : {hiff, h4, hrr, heta}) s.skip(h, "classification needs jet order 3");
    } else {
        if (!(c.cls->scalar && c.cls->chi_zero)) s.skip(hiff, "hypothesis not met: W and chi do not both vanish");
        s.each(hiff, [&](int i, const PointTM&) { return t_magnitude(engine(i), engine(i).t_curvature()).relative(); });
        if (!c.cls->isotropic) {
            for (int h : {h4, hrr, heta}) s.skip(h, "hypothesis not met: spray is not isotropic");
        }
        if (n < 3) {
            s.skip(hrr, "needs n >= 3");
            s.skip(heta, "needs n >= 3");
        }
        s.each(h4, [&](int i, const PointTM&) { return isotropic_four_index(engine(i)).relative(); });
        s.each(hrr, [&](int i, const PointTM&) { return isotropic_rr2(engine(i)).relative(); });
        s.each(heta, [&](int i, const PointTM&) { return eta_zero(engine(i)).relative(); });
    }

    const int hsc = s.open(kSClosed);
    if (s.runnable(hsc)) {
        const SClosed sc = s_closed_residual(G, c.pts);
        if (!sc.closed(kGateTolerance)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "hypothesis not met: Pi hessian %.3g, curl %.3g; chi residual shown for reference",
                          sc.hessian.relative(), sc.curl.relative());
            s.informational(hsc, buf);
        }
        s.each(hsc, [&](int i, const PointTM&) { return chi_magnitude(engine(i), engine(i).chi_definition()).relative(); });
    }
}

VolumeForm times_exp_x1(const VolumeForm& dV) {
    return VolumeForm(
        dV.dim(), [dV](std::span<const Jet> vars) { return dV.sigma(vars) * exp(vars[0]); }, "(" + dV.label() + ")*exp(x1)");
}

void sigma_rows(Suite& s, const Context& c, const VolumeForm& dV) {
    const SprayChart& G = c.G;
    const int n = G.dim();
    const std::string tag = "[" + dV.label() + "]";
    const SprayChart hat = deform(G, dV);
    EngineCache engine(G, c.pts, std::clamp(c.cfg.order, 1, 4));
    EngineCache hat_engine(hat, c.pts, std::clamp(c.cfg.order - 1, 1, 4));

    if (c.full) {
        const int h = s.open(kSHom, tag);
        s.each(h, [&](int, const PointTM& p) {
            const double base = s_curvature(G, dV, p);
            double m = 0.0;
            for (double l : {0.5, 2.0}) {
                const double got = s_curvature(G, dV, scaled(p, l));
                m = std::max(m, std::abs(got - l * base) / (1.0 + std::abs(l * base)));
            }
            return m;
        });
    }
    {
        const int h = s.open(kSHat, tag);
        s.each(h, [&](int, const PointTM& p) {
            return std::abs(s_curvature(hat, dV, p)) / (1.0 + std::abs(s_curvature(G, dV, p)));
        });
    }
    {
        const int h = s.open(kChiHat, tag);
        s.each(h, [&](int i, const PointTM&) {
            auto& e = hat_engine(i);
            return chi_magnitude(e, e.chi_definition()).relative();
        });
    }
    if (!c.full) return;
    {
        const int h = s.open(kChiS, tag);
        s.each(h, [&](int i, const PointTM&) {
            auto& e = engine(i);
            const auto a = values_of(chi_from_s_field(e.frame(), dV, SOrdering::VerticalFirst));
            return residual_between(a, values_of(e.chi_definition()), {max_abs(a), max_abs(values_of(e.riemann2_v()))})
                .relative();
        });
    }
    {
        const int h = s.open(kSOrder, tag);
        s.each(h, [&](int i, const PointTM&) {
            auto& e = engine(i);
            return rel_diff(values_of(chi_from_s_field(e.frame(), dV, SOrdering::VerticalFirst)),
                            values_of(chi_from_s_field(e.frame(), dV, SOrdering::HorizontalFirst)));
        });
    }
    {
        const int h = s.open(kSChiZero, tag);
        if (c.cls && !c.cls->chi_zero) s.skip(h, "hypothesis not met: chi does not vanish");
        if (!c.cls) s.skip(h, "classification needs jet order 3");
        s.each(h, [&](int i, const PointTM&) {
            auto& e = engine(i);
            const auto chi2 = values_of(chi_from_s_field(e.frame(), dV));
            return residual_of(chi2, {max_abs(values_of(e.riemann2_v()))}).relative();
        });
    }
    {
        const int h = s.open(kHatR, tag);
        s.each(h, [&](int, const PointTM& p) {
            return rel_diff(hat_riemann(G, dV, p, HatRoute::Direct), hat_riemann(G, dV, p, HatRoute::Formula));
        });
    }
    {
        const int h = s.open(kHatRic, tag);
        const int hs = s.open(kHatRicS, tag);
        std::vector<double> scalar_res(c.pts.size());
        s.each(h, [&](int i, const PointTM& p) {
            const ProjectiveRicci pr = projective_ricci(G, dV, p);
            scalar_res[static_cast<std::size_t>(i)] =
                std::abs(pr.ric - pr.ric_formula) / (1.0 + std::max(std::abs(pr.ric), std::abs(pr.ric_formula)));
            return rel_diff(pr.ric_jl, pr.formula_jl);
        });
        if (s.runnable(h)) s.each(hs, [&](int i, const PointTM&) { return scalar_res[static_cast<std::size_t>(i)]; });
    }
    {
        const int h = s.open(kHatW, tag);
        s.each(h, [&](int i, const PointTM& p) {
            auto& e = engine(i);
            const TensorValue a = weyl_hat(G, dV, p);
            const TensorValue w = e.weyl_direct().value("W", p);
            return residual_between(a.data(), w.data(), {max_abs(values_of(e.riemann2())), std::abs(e.scalar_R().value()),
                                                         max_abs(values_of(e.scalar_R_v()))})
                .relative();
        });
    }
    {
        const int h = s.open(kHatD, tag);
        const VolumeForm dV2 = times_exp_x1(dV);
        s.each(h, [&](int, const PointTM& p) { return rel_diff(douglas(G, dV, p), douglas(G, dV2, p)); });
    }
    {
        const int h = s.open(kHatP, tag);
        const SprayChart shifted = projective_shift(G, parse_expression("y1+x1*y2", n));
        s.each(h, [&](int, const PointTM& p) {
            return projective_invariance_check(G, shifted, dV, std::span<const PointTM>(&p, 1)).relative();
        });
    }
    {
        const int h = s.open(kHatIso, tag);
        const int he = s.open(kHatEta, tag);
        if (!c.cls) {
            s.skip(h, "classification needs jet order 3");
            s.skip(he, "classification needs jet order 3");
        } else if (!c.cls->scalar) {
            s.skip(h, "hypothesis not met: W does not vanish");
            s.skip(he, "hypothesis not met: W does not vanish");
        }
        if (n < 3) s.skip(he, "needs n >= 3");
        s.each(h, [&](int i, const PointTM&) {
            auto& e = hat_engine(i);
            return t_magnitude(e, e.t_curvature()).relative();
        });
        s.each(he, [&](int i, const PointTM&) { return identities::eta_zero(hat_engine(i)).relative(); });
    }
}

void randers_rows(Suite& s, const Context& c, const RandersData& rd) {
    const SprayChart& G = c.G;
    const int n = G.dim();
    const VolumeForm dVa = VolumeForm::riemannian(rd.alpha_ptr());
    const SprayChart hat = deform(G, dVa);
    const SprayChart closed_form = randers_deformed_spray(rd);

    int h = s.open(kRandersG);
    s.each(h, [&](int, const PointTM& p) { return rel_diff(closed_form.values(p), hat.values(p)); });
    h = s.open(kRandersS);
    s.each(h, [&](int, const PointTM& p) { return std::abs(s_curvature(closed_form, dVa, p)); });

    const int hr = s.open(kRandersR);
    const int ht = s.open(kRandersT);
    if (!s.runnable(hr) && !s.runnable(ht)) return;
    auto k_it = G.info().params.find("kappa");
    ParseOptions opts;
    opts.allow_y = false;
    const Expr kappa = parse_expression(k_it != G.info().params.end() ? k_it->second : "0", n, opts);
    const RandersIsotropy iso = randers_isotropy_check(rd, kappa, c.pts);
    if (iso.riemann.relative() > kGateTolerance || iso.s_derivative.relative() > kGateTolerance) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "hypothesis not met: isotropy residuals %.3g (curvature), %.3g (s_ij|k)",
                      iso.riemann.relative(), iso.s_derivative.relative());
        s.skip(hr, buf);
        s.skip(ht, buf);
    }
    EngineCache hat_engine(hat, c.pts, std::clamp(c.cfg.order - 1, 1, 4));
    s.each(hr, [&](int i, const PointTM& p) {
        const double direct = hat_engine(i).scalar_R().value();
        const double formula = randers_hat_R(rd, kappa, p);
        return std::abs(direct - formula) / (1.0 + std::max(std::abs(direct), std::abs(formula)));
    });
    s.each(ht, [&](int i, const PointTM&) {
        auto& e = hat_engine(i);
        return t_magnitude(e, e.t_curvature()).relative();
    });
}

// ---------------------------------------------------------------------------
// Shared command plumbing

std::vector<std::string> sigma_sources(const SprayChart& G, const RunConfig& cfg, bool verify) {
    std::vector<std::string> out = cfg.sigmas;
    if (out.empty() && verify) out = {"1", "exp(x1)", "1+0.5*x1^2"};
    if (auto it = G.info().params.find("sigma"); it != G.info().params.end() && G.info().family == "custom") {
        if (std::find(out.begin(), out.end(), it->second) == out.end()) out.push_back(it->second);
    }
    return out;
}

json config_json(const RunConfig& cfg, const SprayChart& G, const std::vector<std::string>& sigmas, int points) {
    json c;
    c["family"] = cfg.file ? std::string("custom") : cfg.family;
    c["params"] = json::object();
    for (const auto& [k, v] : cfg.params) c["params"][k] = v;
    if (cfg.file) c["file"] = *cfg.file;
    c["label"] = G.label();
    c["dim"] = G.dim();
    c["domain"] = {{"lo", G.domain().lo}, {"hi", G.domain().hi}};
    c["sigmas"] = sigmas;
    c["points"] = points;
    c["seed"] = cfg.seed;
    c["order"] = cfg.order;
    json tol = json::object();
    if (cfg.tol_global) tol["*"] = *cfg.tol_global;
    for (const auto& [k, v] : cfg.tol_overrides) tol[k] = v;
    c["tolerance_overrides"] = tol;
    c["metric"] = static_cast<bool>(G.metric());
    return c;
}

json tensor_json(const TensorValue& t) {
    std::string roles;
    for (auto r : t.shape().roles()) roles += r == Variance::Up ? 'u' : 'd';
    return {{"roles", roles}, {"data", t.data()}};
}

json scalar_json(double v) { return {{"roles", ""}, {"data", std::vector<double>{v}}}; }

json points_json(std::span<const PointTM> pts) {
    json arr = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) arr.push_back({{"index", i}, {"x", pts[i].x}, {"y", pts[i].y}});
    return arr;
}

json classification_json(const Classification& c) {
    return {{"isotropy_residual", c.isotropy},
            {"scalar_curvature_residual", c.scalar_curvature},
            {"chi_residual", c.chi},
            {"isotropic", c.isotropic},
            {"scalar_curvature", c.scalar},
            {"chi_zero", c.chi_zero},
            {"threshold", kFlagThreshold}};
}

std::vector<VolumeForm> volume_forms(const std::vector<std::string>& sources, int n) {
    std::vector<VolumeForm> out;
    for (const auto& src : sources) {
        try {
            out.push_back(VolumeForm::parse(src, n));
        } catch (const ParseError& e) {
            throw InputError(std::string("sigma '") + src + "': " + e.what());
        }
    }
    return out;
}

struct Prepared {
    SprayChart G;
    std::vector<PointTM> pts;
    std::vector<std::string> sigmas;
    std::vector<VolumeForm> forms;
    std::optional<Classification> cls;
};

Prepared prepare(const RunConfig& cfg, bool verify) {
    SprayChart G = load_spray(cfg);
    if (cfg.points < 0) throw InputError("--points must be positive");
    const int count = cfg.points > 0 ? cfg.points : (verify ? 50 : 3);
    auto pts = sample_points(G, count, cfg.seed);
    auto sigmas = sigma_sources(G, cfg, verify);
    auto forms = volume_forms(sigmas, G.dim());
    std::optional<Classification> cls;
    if (cfg.order >= 3) cls = classify(G, pts);
    return {std::move(G), std::move(pts), std::move(sigmas), std::move(forms), cls};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

json list_json() {
    json arr = json::array();
    for (const auto& f : families()) {
        json params = json::array();
        for (const auto& p : f.params) {
            params.push_back({{"name", p.name}, {"default", p.default_value}, {"description", p.description}});
        }
        arr.push_back({{"name", f.name}, {"summary", f.summary}, {"params", params}});
    }
    return {{"version", kVersion}, {"command", "list"}, {"families", arr}};
}

std::string cmd_list() {
    std::ostringstream os;
    for (const auto& f : families()) {
        os << f.name << "\n    " << f.summary << "\n";
        for (const auto& p : f.params) {
            os << "    " << p.name;
            if (!p.default_value.empty()) os << " [" << p.default_value << "]";
            os << "  " << p.description << "\n";
        }
    }
    return os.str();
}

Report cmd_verify(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Prepared pr = prepare(cfg, true);
    Suite suite(cfg, pr.pts);
    Context ctx{pr.G, pr.pts, cfg, pr.cls, true};
    spray_rows(suite, ctx);
    for (const auto& dV : pr.forms) sigma_rows(suite, ctx, dV);
    if (auto rd = randers_data(pr.G)) randers_rows(suite, ctx, *rd);

    Report r;
    r.command = "verify";
    r.config = config_json(cfg, pr.G, pr.sigmas, static_cast<int>(pr.pts.size()));
    r.rows = suite.finish();
    r.points = points_json(pr.pts);
    if (pr.cls) r.extra["classification"] = classification_json(*pr.cls);
    r.seconds = seconds_since(t0);
    return r;
}

Report cmd_evaluate(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Prepared pr = prepare(cfg, false);
    const SprayChart& G = pr.G;
    const int K = cfg.order;

    json pts = json::array();
    for (std::size_t i = 0; i < pr.pts.size(); ++i) {
        const PointTM& p = pr.pts[i];
        json q = json::object();
        try {
            q["G"] = {{"roles", "u"}, {"data", G.values(p)}};
            if (K >= 1) {
                CurvatureEngine e(G, p, std::min(K, 4));
                const auto& fr = e.frame();
                q["N"] = tensor_json(fr.connection().value("N", p));
                q["Pi"] = scalar_json(fr.Pi().value());
                if (K >= 2) {
                    q["Gamma"] = tensor_json(fr.christoffel().value("Gamma", p));
                    q["R^i_k"] = tensor_json(e.riemann2().value("R^i_k", p));
                    q["Ric"] = scalar_json(e.ricci().value());
                    q["R"] = scalar_json(e.scalar_R().value());
                }
                if (K >= 3) {
                    q["B"] = tensor_json(e.berwald().value("B", p));
                    q["R^i_jkl"] = tensor_json(e.riemann4().value("R^i_jkl", p));
                    q["Ric_jl"] = tensor_json(e.ricci_tensor().value("Ric_jl", p));
                    q["T"] = tensor_json(e.t_curvature().value("T", p));
                    q["W"] = tensor_json(e.weyl_direct().value("W", p));
                    q["chi"] = tensor_json(e.chi_definition().value("chi", p));
                    if (G.metric()) {
                        const ChiValue cc = chi_cartan(*G.metric(), G, p);
                        q["chi_cartan"] = {{"roles", "d"}, {"data", cc.components}};
                    }
                }
                if (K >= 4) q["eta"] = tensor_json(e.eta().value("eta", p));
            }
            for (std::size_t k = 0; k < pr.forms.size(); ++k) {
                const auto& dV = pr.forms[k];
                json sj = {{"sigma", pr.sigmas[k]}};
                if (K >= 1) sj["S"] = s_curvature(G, dV, p);
                if (K >= 4) sj["hat_chi"] = chi_definition(deform(G, dV), p).components;
                q["volume"].push_back(sj);
            }
        } catch (const Error& e) {
            rethrow_located(e, "point #" + std::to_string(i) + " " + format_point(p));
        }
        pts.push_back({{"index", i}, {"x", p.x}, {"y", p.y}, {"quantities", q}});
    }

    Suite suite(cfg, pr.pts);
    Context ctx{G, pr.pts, cfg, pr.cls, false};
    spray_rows(suite, ctx);
    for (const auto& dV : pr.forms) sigma_rows(suite, ctx, dV);

    Report r;
    r.command = "evaluate";
    r.config = config_json(cfg, G, pr.sigmas, static_cast<int>(pr.pts.size()));
    r.rows = suite.finish();
    r.points = pts;
    if (pr.cls) r.extra["classification"] = classification_json(*pr.cls);
    r.seconds = seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const Report& r) {
    json rows = json::array();
    int pass = 0, fail = 0, na = 0;
    for (const auto& row : r.rows) {
        json j = {{"id", row.id},
                  {"eq_tag", row.eq_tag},
                  {"quote", row.quote},
                  {"tolerance", row.tolerance},
                  {"order", row.order},
                  {"status", to_string(row.status)},
                  {"pass", row.status != RowStatus::Fail},
                  {"evaluated", row.evaluated},
                  {"note", row.note}};
        if (row.evaluated > 0) {
            j["max_residual"] = row.max_residual;
            j["mean_residual"] = row.mean_residual;
            j["worst_point"] = row.worst_point;
        } else {
            j["max_residual"] = nullptr;
            j["mean_residual"] = nullptr;
            j["worst_point"] = nullptr;
        }
        rows.push_back(std::move(j));
        (row.status == RowStatus::Pass ? pass : row.status == RowStatus::Fail ? fail : na)++;
    }
    json doc = {{"version", kVersion},
                {"command", r.command},
                {"config", r.config},
                {"rows", rows},
                {"points", r.points},
                {"summary",
                 {{"pass", pass}, {"fail", fail}, {"not_applicable", na}, {"total", static_cast<int>(r.rows.size())}}}};
    for (const auto& [k, v] : r.extra.items()) doc[k] = v;
    return doc;
}

namespace {

void dump_string(std::string& out, const std::string& s) {
    out += '"';
    for (unsigned char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (ch < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += static_cast<char>(ch);
                }
        }
    }
    out += '"';
}

void dump(std::string& out, const json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
        case json::value_t::null: out += "null"; break;
        case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
        case json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
            } else {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
                out += buf;
            }
            break;
        }
        case json::value_t::string: dump_string(out, j.get_ref<const std::string&>()); break;
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                break;
            }
            // arrays of scalars stay on one line
            const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ',';
                if (flat) {
                    if (!first) out += ' ';
                } else {
                    out += "\n" + pad;
                }
                dump(out, e, indent + 2);
                first = false;
            }
            if (!flat) out += "\n" + close;
            out += ']';
            break;
        }
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                break;
            }
            // json's object type is a std::map: keys iterate sorted
            out += '{';
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                out += first ? "\n" : ",\n";
                out += pad;
                dump_string(out, k);
                out += ": ";
                dump(out, v, indent + 2);
                first = false;
            }
            out += "\n" + close + "}";
            break;
        }
        default: out += "null";
    }
}

std::string fmt_g(double v, const char* f = "%.3e") {
    char buf[32];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

std::string canonical_dump(const json& j) {
    std::string out;
    dump(out, j, 0);
    out += '\n';
    return out;
}

std::string render_text(const Report& r) {
    std::ostringstream os;
    const json& c = r.config;
    os << "spraylab " << r.command << "  spray=" << c.value("label", std::string()) << "  n=" << c.value("dim", 0)
       << "  points=" << c.value("points", 0) << "  seed=" << c.value("seed", std::uint64_t{0})
       << "  order=" << c.value("order", 0) << "\n";
    if (c.contains("sigmas") && !c["sigmas"].empty()) {
        os << "sigma:";
        for (const auto& s : c["sigmas"]) os << "  " << s.get<std::string>();
        os << "\n";
    }
    if (r.extra.contains("classification")) {
        const json& k = r.extra["classification"];
        os << "classification:  isotropic=" << (k["isotropic"].get<bool>() ? "yes" : "no") << " ("
           << fmt_g(k["isotropy_residual"].get<double>()) << ")  scalar=" << (k["scalar_curvature"].get<bool>() ? "yes" : "no")
           << " (" << fmt_g(k["scalar_curvature_residual"].get<double>()) << ")  chi=0: "
           << (k["chi_zero"].get<bool>() ? "yes" : "no") << " (" << fmt_g(k["chi_residual"].get<double>()) << ")\n";
    }

    if (r.command == "evaluate") {
        for (const auto& p : r.points) {
            os << "\npoint #" << p["index"].get<int>() << "  x=" << p["x"].dump() << "  y=" << p["y"].dump() << "\n";
            for (const auto& [name, t] : p["quantities"].items()) {
                if (name == "volume") {
                    for (const auto& v : t) {
                        os << "  sigma=" << v["sigma"].get<std::string>();
                        if (v.contains("S")) os << "  S=" << fmt_g(v["S"].get<double>(), "%.10g");
                        if (v.contains("hat_chi")) {
                            os << "  hat_chi=[";
                            bool first = true;
                            for (const auto& x : v["hat_chi"]) {
                                os << (first ? "" : ", ") << fmt_g(x.get<double>(), "%.3g");
                                first = false;
                            }
                            os << "]";
                        }
                        os << "\n";
                    }
                    continue;
                }
                os << "  " << name << " =";
                for (const auto& x : t["data"]) os << " " << fmt_g(x.get<double>(), "%.10g");
                os << "\n";
            }
        }
        os << "\n";
    }

    char line[256];
    std::snprintf(line, sizeof line, "%-44s %-5s %-10s %-10s %-8s %s\n", "row", "", "max", "mean", "tol", "note");
    os << line;
    int pass = 0, fail = 0, na = 0;
    for (const auto& row : r.rows) {
        const bool ev = row.evaluated > 0;
        std::snprintf(line, sizeof line, "%-44s %-5s %-10s %-10s %-8s ", row.id.c_str(), to_string(row.status),
                      ev ? fmt_g(row.max_residual, "%.2e").c_str() : "-", ev ? fmt_g(row.mean_residual, "%.2e").c_str() : "-",
                      fmt_g(row.tolerance, "%.0e").c_str());
        std::string tail;
        if (row.status == RowStatus::Fail) tail = "worst at point #" + std::to_string(row.worst_point) + (row.note.empty() ? "" : "; ");
        tail += row.note;
        std::string out = line + tail;
        out.erase(out.find_last_not_of(' ') + 1);
        os << out << "\n";
        (row.status == RowStatus::Pass ? pass : row.status == RowStatus::Fail ? fail : na)++;
    }
    os << "\n" << r.rows.size() << " rows: " << pass << " pass, " << fail << " fail, " << na << " n/a";
    std::snprintf(line, sizeof line, "  (%.2f s)\n", r.seconds);
    os << line;
    return os.str();
}

std::string render(const Report& r, OutputFormat f) {
    return f == OutputFormat::Json ? canonical_dump(to_json(r)) : render_text(r);
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw InputError("cannot write '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot replace '" + path + "'");
    }
}

}  // namespace spraylab
