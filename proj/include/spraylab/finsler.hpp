#pragma once

// Finsler metrics on a chart, the sprays they induce, and the Randers
// machinery (alpha + beta with the covariant derivatives of beta taken with
// respect to alpha).

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "spraylab/curvature.hpp"
#include "spraylab/exprdsl.hpp"
#include "spraylab/spray_core.hpp"

namespace spraylab {

class FinslerMetric {
public:
    explicit FinslerMetric(int n) : n_(n) {}
    virtual ~FinslerMetric() = default;

    int dim() const noexcept { return n_; }

    // F and L = F^2 over lifted chart variables (x slots 0..n-1, y slots n..2n-1).
    virtual Jet F(std::span<const Jet> vars) const = 0;
    virtual Jet L(std::span<const Jet> vars) const;

    // Raises DomainError when F <= 0 at p.
    void check_positive(const PointTM& p) const;

private:
    int n_;
};

// F given by an expression in x and y.
class ExprFinslerMetric : public FinslerMetric {
public:
    explicit ExprFinslerMetric(Expr F);
    Jet F(std::span<const Jet> vars) const override;

private:
    Expr F_;
};

// alpha = sqrt(a_ij(x) y^i y^j).
class RiemannianMetric : public FinslerMetric {
public:
    // Row-major n x n entries; only i <= j are read.
    RiemannianMetric(int n, std::vector<Expr> entries);
    // Upper-triangle map as produced by the spray-definition parser.
    static std::shared_ptr<RiemannianMetric> from_upper(int n, const std::map<std::pair<int, int>, Expr>& a);

    // a_ij as jets; only the x slots of vars are read.
    std::vector<Jet> matrix(std::span<const Jet> vars) const;
    const Expr& entry(int i, int j) const;

    Jet F(std::span<const Jet> vars) const override;
    Jet L(std::span<const Jet> vars) const override;

private:
    std::vector<Expr> a_;
};

class RandersMetric : public FinslerMetric {
public:
    RandersMetric(std::shared_ptr<const RiemannianMetric> alpha, std::vector<Expr> b);

    const RiemannianMetric& alpha() const { return *alpha_; }
    std::shared_ptr<const RiemannianMetric> alpha_ptr() const { return alpha_; }
    const std::vector<Expr>& b() const { return b_; }
    std::vector<Jet> b_jets(std::span<const Jet> vars) const;

    Jet F(std::span<const Jet> vars) const override;

private:
    std::shared_ptr<const RiemannianMetric> alpha_;
    std::vector<Expr> b_;
};

// ---------------------------------------------------------------------------
// Fundamental tensor and torsion

// Jet fields over the lifted variables of p at `order` (L is expanded there).
FieldTensor fundamental_tensor_field(const FinslerMetric& F, std::span<const Jet> vars);  // g_ij = L_{.i.j}/2
FieldTensor cartan_torsion_field(const FinslerMetric& F, std::span<const Jet> vars);      // C_ijk = L_{.i.j.k}/4
FieldTensor mean_cartan_field(const FinslerMetric& F, std::span<const Jet> vars);         // I_k = g^ij C_ijk

TensorValue fundamental_tensor(const FinslerMetric& F, const PointTM& p);
TensorValue cartan_torsion(const FinslerMetric& F, const PointTM& p);
TensorValue mean_cartan(const FinslerMetric& F, const PointTM& p);

// Christoffel symbols Gamma^i_jk of a Riemannian metric; g must be expanded one
// order above the result.
FieldTensor christoffel_field(const RiemannianMetric& a, std::span<const Jet> vars);

// ---------------------------------------------------------------------------
// Induced sprays

enum class SprayRoute { Auto, General };

// G^i = (L_{.l|x^k} y^k - L_{x^l}) g^il / 4, or the Christoffel form for
// Riemannian metrics under Auto. The result carries the metric.
SprayChart induced_spray(std::shared_ptr<const FinslerMetric> F, Box domain, std::string label,
                         SprayRoute route = SprayRoute::Auto, SprayInfo info = {});

// chi_k = (I_{k|p|q} y^p y^q + I_m R^m_k) / 2 on the spray induced by F.
ChiValue chi_cartan(const FinslerMetric& F, const SprayChart& induced, const PointTM& p);
FieldTensor chi_cartan_field(const FinslerMetric& F, const SprayChart& induced, const PointTM& p);

// ---------------------------------------------------------------------------
// Randers data

class RandersData {
public:
    RandersData(std::shared_ptr<const RiemannianMetric> alpha, std::vector<Expr> b, Box domain);

    int dim() const noexcept { return alpha_->dim(); }
    const RiemannianMetric& alpha() const { return *alpha_; }
    std::shared_ptr<const RiemannianMetric> alpha_ptr() const { return alpha_; }
    const std::vector<Expr>& b() const { return b_; }
    const Box& domain() const noexcept { return domain_; }
    std::shared_ptr<const RandersMetric> metric() const { return metric_; }

    // ||b||_a at x; raises InputError when >= 1.
    double b_norm(std::span<const double> x) const;
    void check_norm(std::span<const double> x) const;

private:
    std::shared_ptr<const RiemannianMetric> alpha_;
    std::vector<Expr> b_;
    Box domain_;
    std::shared_ptr<const RandersMetric> metric_;
};

// Every x-dependent quantity derived from (a, b), as jet fields over the
// lifted variables. Fields derived from b_{i|j} lose one order against `vars`.
struct RandersFields {
    FieldTensor a, a_inv, gamma;   // a_ij, a^ij, Levi-Civita Gamma^i_jk of alpha
    FieldTensor b, b_up;           // b_i, b^i
    FieldTensor b_cov;             // b_{i|j}
    FieldTensor r, s, s_up;        // r_ij, s_ij, s^i_j
    FieldTensor s_j, q, t, t_j;    // s_j, q_ij, t_ij, t_j
    Jet alpha;                     // sqrt(a_ij y^i y^j)
};

RandersFields randers_fields(const RandersData& rd, std::span<const Jet> vars);

struct RandersQuantities {
    std::vector<TensorValue> tensors;  // b_ij, r_ij, s_ij, s^i_j, s_j, q_ij, t_ij, t_j
    double b_norm = 0.0;
};

RandersQuantities randers_quantities(const RandersData& rd, const PointTM& p);

// G^i_alpha + alpha s^i_0.
SprayChart randers_deformed_spray(const RandersData& rd);

// sqrt(det a), the density of the metric volume form.
Jet riemannian_volume_density(const RiemannianMetric& a, std::span<const Jet> vars);

struct RandersIsotropy {
    Residual riemann;     // R-bar of alpha against the kappa/t/s combination
    Residual s_derivative; // s_ij|k against the trace form
};

RandersIsotropy randers_isotropy_check(const RandersData& rd, const Expr& kappa, std::span<const PointTM> points);

// kappa alpha^2 + t_00 + 2/(n-1) alpha s^m_0|m.
double randers_hat_R(const RandersData& rd, const Expr& kappa, const PointTM& p);

}  // namespace spraylab
