#include "spraylab/zoo.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "spraylab/errors.hpp"

namespace spraylab {

namespace {

std::span<const Jet> xs(std::span<const Jet> vars, int n) { return vars.subspan(0, static_cast<std::size_t>(n)); }
std::span<const Jet> ys(std::span<const Jet> vars, int n) {
    return vars.subspan(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
}

class ExprSpraySource : public SpraySource {
public:
    explicit ExprSpraySource(std::vector<Expr> G) : G_(std::move(G)) {}

    std::vector<Jet> coefficients(const PointTM& p, int order) const override {
        const int n = static_cast<int>(G_.size());
        const auto vars = lift_point(p, order);
        std::vector<Jet> out;
        for (const auto& g : G_) out.push_back(evaluate<Jet>(g, xs(vars, n), ys(vars, n)));
        return out;
    }

    std::vector<double> values(const PointTM& p) const override {
        std::vector<double> out;
        for (const auto& g : G_) out.push_back(evaluate<double>(g, p.x, p.y));
        return out;
    }

private:
    std::vector<Expr> G_;
};

// The two-dimensional family whose geodesics are graphs of
// phi'' = 2A + 6B phi' + 6C phi'^2 + 2D phi'^3, with Pi = df.
class AffineShiftSource : public SpraySource {
public:
    AffineShiftSource(Expr A, Expr B, Expr C, Expr D, Expr f)
        : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)), f_(std::move(f)) {}

    std::vector<Jet> coefficients(const PointTM& p, int order) const override {
        const auto vars = lift_point(p, order + 1);
        auto ev = [&](const Expr& e) { return evaluate<Jet>(e, xs(vars, 2), ys(vars, 2)).truncated(order); };
        const Jet A = ev(A_), B = ev(B_), C = ev(C_), D = ev(D_);
        const Jet f = evaluate<Jet>(f_, xs(vars, 2), ys(vars, 2));
        const Jet f1 = f.derivative(0), f2 = f.derivative(1);
        const Jet y1 = vars[2].truncated(order), y2 = vars[3].truncated(order);
        const Jet y11 = y1 * y1, y12 = y1 * y2, y22 = y2 * y2;
        Jet G1 = B * y11 + 2.0 * (C * y12) + D * y22 + (f1 * y11 + f2 * y12) / 3.0;
        Jet G2 = -(A * y11) - 2.0 * (B * y12) - C * y22 + (f1 * y12 + f2 * y22) / 3.0;
        return {std::move(G1), std::move(G2)};
    }

private:
    Expr A_, B_, C_, D_, f_;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int int_param(const Params& p, const std::string& key, int fallback, int lo, int hi) {
    auto it = p.find(key);
    if (it == p.end()) return fallback;
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(it->second, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != it->second.size() || v < lo || v > hi) {
        throw InputError("parameter '" + key + "' must be an integer in [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "], got '" + it->second + "'");
    }
    return v;
}

double real_param(const Params& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    if (it == p.end()) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != it->second.size() || !std::isfinite(v)) {
        throw InputError("parameter '" + key + "' must be a number, got '" + it->second + "'");
    }
    return v;
}

Expr expr_param(const Params& p, const std::string& key, const std::string& fallback, int n, bool x_only) {
    auto it = p.find(key);
    ParseOptions opts;
    opts.allow_y = !x_only;
    try {
        return parse_expression(it == p.end() ? fallback : it->second, n, opts);
    } catch (const InputError& e) {
        throw InputError(std::string("parameter '") + key + "': " + e.what());
    }
}

// Accepts keys of the form <prefix><i><j> with 1 <= i <= j <= n (pairs) or <prefix><i> (single).
bool indexed_key(const std::string& key, char prefix, int n, int digits, int* i, int* j) {
    if (key.size() != static_cast<std::size_t>(1 + digits) || key[0] != prefix) return false;
    for (int d = 1; d <= digits; ++d) {
        if (key[static_cast<std::size_t>(d)] < '1' || key[static_cast<std::size_t>(d)] > '0' + n) return false;
    }
    *i = key[1] - '1';
    *j = digits == 2 ? key[2] - '1' : *i;
    return digits == 1 || *i <= *j;
}

void check_keys(const std::string& family, const Params& params, const std::set<std::string>& fixed, int n,
                std::string indexed_pairs = {}, std::string indexed_single = {}) {
    for (const auto& [key, value] : params) {
        if (fixed.count(key)) continue;
        int i = 0, j = 0;
        if (!indexed_pairs.empty() && indexed_key(key, indexed_pairs[0], n, 2, &i, &j)) continue;
        if (!indexed_single.empty() && indexed_key(key, indexed_single[0], n, 1, &i, &j)) continue;
        std::string allowed;
        for (const auto& k : fixed) allowed += (allowed.empty() ? "" : ", ") + k;
        if (!indexed_pairs.empty()) allowed += ", " + indexed_pairs + "ij (i <= j)";
        if (!indexed_single.empty()) allowed += ", " + indexed_single + "i";
        throw InputError("family '" + family + "' has no parameter '" + key + "' (allowed: " + allowed + ")");
    }
}

std::shared_ptr<RiemannianMetric> metric_from_params(const Params& params, char prefix, int n,
                                                     const std::map<std::string, std::string>& defaults) {
    std::vector<Expr> entries(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const std::string key = std::string(1, prefix) + std::to_string(i + 1) + std::to_string(j + 1);
            auto d = defaults.find(key);
            const std::string fallback = d != defaults.end() ? d->second : (i == j ? "1" : "0");
            Expr e = expr_param(params, key, fallback, n, true);
            entries[static_cast<std::size_t>(i * n + j)] = e;
            entries[static_cast<std::size_t>(j * n + i)] = e;
        }
    return std::make_shared<RiemannianMetric>(n, std::move(entries));
}

// Grid of x values (corners and interior) on which sampled invariants are checked.
std::vector<std::vector<double>> grid(const Box& box) {
    const int n = box.dim();
    const int per = n <= 3 ? 5 : 3;
    std::vector<std::vector<double>> out;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const auto K = static_cast<std::size_t>(k);
            x[K] = box.lo[K] + (box.hi[K] - box.lo[K]) * idx[K] / (per - 1);
        }
        out.push_back(std::move(x));
        int k = 0;
        while (k < n && ++idx[static_cast<std::size_t>(k)] == per) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == n) break;
    }
    return out;
}

SprayChart randers_chart(std::shared_ptr<const RiemannianMetric> alpha, std::vector<Expr> b, Box domain, std::string label,
                         SprayInfo info) {
    RandersData rd(alpha, std::move(b), domain);
    for (const auto& x : grid(domain)) rd.check_norm(x);
    return induced_spray(rd.metric(), std::move(domain), std::move(label), SprayRoute::General, std::move(info));
}

const std::map<std::string, std::string> kRiemannianDefaults = {
    {"g11", "1+x2^2"}, {"g12", "0.5*x1*x2"}, {"g22", "1+x1^2"}};
const std::map<std::string, std::string> kRandersMetricDefaults = {
    {"a11", "1+0.5*x2^2"}, {"a12", "0.1*x1"}, {"a22", "1+0.3*x1^2"}};
const std::map<std::string, std::string> kRandersFormDefaults = {{"b1", "0.2*x2"}, {"b2", "-0.1*x1+0.1"}};

}  // namespace

const std::vector<FamilyInfo>& families() {
    static const std::vector<FamilyInfo> registry = {
        {"flat", "G^i = 0", {{"n", "2", "dimension (2..8)"}}},
        {"riemannian",
         "geodesic spray of a Riemannian metric g_ij(x) on [-1,1]^n",
         {{"n", "2", "dimension (2..8)"},
          {"gij", "g11=1+x2^2, g12=0.5*x1*x2, g22=1+x1^2 for n = 2; identity otherwise", "metric entries, i <= j"}}},
        {"sphere",
         "constant curvature kappa, g = 4 delta/(1 + kappa |x|^2)^2",
         {{"n", "3", "dimension (2..8)"}, {"kappa", "1", "sectional curvature"}}},
        {"affine_shift",
         "2-D spray G^1 = B y1^2 + 2C y1 y2 + D y2^2 + (f_1 y1^2 + f_2 y1 y2)/3, "
         "G^2 = -A y1^2 - 2B y1 y2 - C y2^2 + (f_1 y1 y2 + f_2 y2^2)/3",
         {{"A", "0", "x-only expression"},
          {"B", "0", "x-only expression"},
          {"C", "0", "x-only expression"},
          {"D", "0", "x-only expression"},
          {"f", "x1*x2", "x-only expression"}}},
        {"randers",
         "spray of F = sqrt(a_ij y^i y^j) + b_i y^i, ||b||_a < 1",
         {{"n", "2", "dimension (2..8)"},
          {"aij", "a11=1+0.5*x2^2, a12=0.1*x1, a22=1+0.3*x1^2 for n = 2; identity otherwise", "metric entries, i <= j"},
          {"bi", "b1=0.2*x2, b2=-0.1*x1+0.1 for n = 2; zero otherwise", "1-form components"},
          {"kappa", "0", "scalar used by the isotropy check"}}},
        {"custom", "spray-definition file", {{"file", "", "path to the definition"}}},
    };
    return registry;
}

SprayChart expression_spray(std::vector<Expr> G, Box domain, std::string label, SprayInfo info) {
    const int n = static_cast<int>(G.size());
    for (const auto& g : G) {
        if (g.dim() != n) throw InputError("coefficient expression dimension does not match the number of coefficients");
    }
    return SprayChart(n, std::move(label), std::move(domain), std::make_shared<ExprSpraySource>(std::move(G)),
                      std::move(info));
}

SprayChart make_family(const std::string& name, const Params& params) {
    SprayInfo info{name, params};
    if (name == "flat") {
        check_keys(name, params, {"n"}, 8);
        const int n = int_param(params, "n", 2, 2, 8);
        std::vector<Expr> G;
        for (int i = 0; i < n; ++i) G.push_back(parse_expression("0", n));
        return expression_spray(std::move(G), Box::cube(n, 1.0), "flat", std::move(info));
    }
    if (name == "riemannian") {
        const int n = int_param(params, "n", 2, 2, 8);
        check_keys(name, params, {"n"}, n, "g");
        auto g = metric_from_params(params, 'g', n, n == 2 ? kRiemannianDefaults : std::map<std::string, std::string>{});
        return induced_spray(g, Box::cube(n, 1.0), "riemannian", SprayRoute::Auto, std::move(info));
    }
    if (name == "sphere") {
        check_keys(name, params, {"n", "kappa"}, 8);
        const int n = int_param(params, "n", 3, 2, 8);
        const double kappa = real_param(params, "kappa", 1.0);
        std::string r2;
        for (int i = 1; i <= n; ++i) r2 += (i > 1 ? "+" : "") + std::string("x") + std::to_string(i) + "^2";
        const Expr diag = parse_expression("4/(1+(" + fmt(kappa) + ")*(" + r2 + "))^2", n);
        const Expr zero = parse_expression("0", n);
        std::vector<Expr> entries(static_cast<std::size_t>(n * n), zero);
        for (int i = 0; i < n; ++i) entries[static_cast<std::size_t>(i * n + i)] = diag;
        const double half = 1.0 / std::sqrt(static_cast<double>(n) * std::max(std::abs(kappa), 1.0));
        auto g = std::make_shared<RiemannianMetric>(n, std::move(entries));
        return induced_spray(g, Box::cube(n, half), "sphere", SprayRoute::Auto, std::move(info));
    }
    if (name == "affine_shift") {
        check_keys(name, params, {"A", "B", "C", "D", "f"}, 2);
        auto e = [&](const char* key, const char* fallback) { return expr_param(params, key, fallback, 2, true); };
        auto src = std::make_shared<AffineShiftSource>(e("A", "0"), e("B", "0"), e("C", "0"), e("D", "0"), e("f", "x1*x2"));
        return SprayChart(2, "affine_shift", Box::cube(2, 1.0), std::move(src), std::move(info));
    }
    if (name == "randers") {
        const int n = int_param(params, "n", 2, 2, 8);
        check_keys(name, params, {"n", "kappa"}, n, "a", "b");
        auto a = metric_from_params(params, 'a', n, n == 2 ? kRandersMetricDefaults : std::map<std::string, std::string>{});
        std::vector<Expr> b;
        for (int i = 0; i < n; ++i) {
            const std::string key = "b" + std::to_string(i + 1);
            auto d = kRandersFormDefaults.find(key);
            b.push_back(expr_param(params, key, n == 2 && d != kRandersFormDefaults.end() ? d->second : "0", n, true));
        }
        expr_param(params, "kappa", "0", n, true);  // validated here, used by the isotropy check
        return randers_chart(a, std::move(b), Box::cube(n, 1.0), "randers", std::move(info));
    }
    if (name == "custom") {
        check_keys(name, params, {"file"}, 8);
        auto it = params.find("file");
        if (it == params.end() || it->second.empty()) throw InputError("family 'custom' needs file=<path>");
        const SprayDefinition def = load_spray_definition(it->second);
        return spray_from_definition(def, std::filesystem::path(it->second).stem().string());
    }
    std::string known;
    for (const auto& f : families()) known += (known.empty() ? "" : ", ") + f.name;
    throw InputError("unknown spray family '" + name + "' (known: " + known + ")");
}

SprayChart spray_from_definition(const SprayDefinition& def, const std::string& fallback_label) {
    const int n = def.dim;
    Box box = Box::cube(n, 1.0);
    if (def.domain) {
        for (int i = 0; i < n; ++i) {
            box.lo[static_cast<std::size_t>(i)] = (*def.domain)[static_cast<std::size_t>(i)].first;
            box.hi[static_cast<std::size_t>(i)] = (*def.domain)[static_cast<std::size_t>(i)].second;
        }
    }
    const std::string label = def.label.empty() ? fallback_label : def.label;
    SprayInfo info{"custom", {}};
    if (def.sigma) info.params["sigma"] = def.sigma->source();
    if (def.kappa) info.params["kappa"] = def.kappa->source();
    if (!def.G.empty()) return expression_spray(def.G, std::move(box), label, std::move(info));
    if (def.F) {
        return induced_spray(std::make_shared<ExprFinslerMetric>(*def.F), std::move(box), label, SprayRoute::General,
                             std::move(info));
    }
    auto a = RiemannianMetric::from_upper(n, def.a);
    if (def.b.empty()) return induced_spray(a, std::move(box), label, SprayRoute::Auto, std::move(info));
    std::vector<Expr> b;
    for (int i = 0; i < n; ++i) {
        auto it = def.b.find(i);
        b.push_back(it != def.b.end() ? it->second : parse_expression("0", n));
    }
    return randers_chart(a, std::move(b), std::move(box), label, std::move(info));
}

std::optional<RandersData> randers_data(const SprayChart& G) {
    auto m = std::dynamic_pointer_cast<const RandersMetric>(G.metric());
    if (!m) return std::nullopt;
    return RandersData(m->alpha_ptr(), m->b(), G.domain());
}

std::optional<VolumeForm> metric_volume(const SprayChart& G) {
    if (auto m = std::dynamic_pointer_cast<const RandersMetric>(G.metric())) return VolumeForm::riemannian(m->alpha_ptr());
    if (auto m = std::dynamic_pointer_cast<const RiemannianMetric>(G.metric())) return VolumeForm::riemannian(m);
    return std::nullopt;
}

}  // namespace spraylab
