#pragma once

// Volume forms, S-curvature and the projective deformation
// G^i -> G^i - S/(n+1) y^i together with the quantities of the deformed spray.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spraylab/curvature.hpp"
#include "spraylab/exprdsl.hpp"
#include "spraylab/spray_core.hpp"

namespace spraylab {

class RiemannianMetric;

// dV = sigma(x) dx^1...dx^n.
class VolumeForm {
public:
    using Density = std::function<Jet(std::span<const Jet> vars)>;

    // sigma must not mention y; raises InputError otherwise.
    explicit VolumeForm(Expr sigma, std::string label = {});
    VolumeForm(int n, Density density, std::string label);

    static VolumeForm unit(int n);
    static VolumeForm parse(std::string_view src, int n);
    // sqrt(det a) dx of a Riemannian metric.
    static VolumeForm riemannian(std::shared_ptr<const RiemannianMetric> a);

    int dim() const noexcept { return n_; }
    const std::string& label() const noexcept { return label_; }

    Jet sigma(std::span<const Jet> vars) const;
    // ln sigma; raises DomainError when sigma <= 0.
    Jet log_sigma(std::span<const Jet> vars) const;
    double value(std::span<const double> x) const;

private:
    int n_;
    Density density_;
    std::string label_;
};

// S = Pi - y^m d(ln sigma)/dx^m as a jet field at the frame's point, one
// order below the frame.
Jet s_curvature_field(const BerwaldFrame& frame, const VolumeForm& dV);
double s_curvature(const SprayChart& G, const VolumeForm& dV, const PointTM& p);

// chi from S. Canonical: (S_{.k|m} y^m - S_{|k}) / 2. Swapped: (S_{|m.k} y^m - S_{|k}) / 2.
enum class SOrdering { VerticalFirst, HorizontalFirst };
FieldTensor chi_from_s_field(const BerwaldFrame& frame, const VolumeForm& dV, SOrdering ordering = SOrdering::VerticalFirst);

// Spray with coefficients G^i - S/(n+1) y^i.
SprayChart deform(const SprayChart& G, const VolumeForm& dV);

// G^i + P y^i for a 1-homogeneous P.
SprayChart projective_shift(const SprayChart& G, const Expr& P);
SprayChart projective_shift(const SprayChart& G, std::function<Jet(std::span<const Jet> vars)> P, std::string label);

// max over points of the relative difference between the deformations of G1 and G2.
Residual projective_invariance_check(const SprayChart& G1, const SprayChart& G2, const VolumeForm& dV,
                                     std::span<const PointTM> points);

// tau = (S/(n+1))^2 + S_{|m} y^m / (n+1).
Jet tau_field(const BerwaldFrame& frame, const VolumeForm& dV);

enum class HatRoute { Direct, Formula };
// Riemann curvature of the deformed spray, direct or from
// R^i_k + tau d^i_k - tau_{.k} y^i / 2 + 3 chi_k y^i / (n+1).
TensorValue hat_riemann(const SprayChart& G, const VolumeForm& dV, const PointTM& p, HatRoute route);

// H_jl = (chi_{j.l} + chi_{l.j}) / 2.
FieldTensor h_tensor_field(CurvatureEngine& engine);

struct ProjectiveRicci {
    TensorValue ric_jl;      // of the deformed spray, computed directly
    TensorValue formula_jl;  // Ric_jl + (n-1)/2 tau_{.j.l} + h_sign H_jl
    TensorValue H;
    double ric = 0.0;        // Ric of the deformed spray
    double ric_formula = 0.0;  // Ric + (n-1) tau
};

// Sign of H_jl in the formula for the projective Ricci tensor. The
// derivation from the Riemann curvature of the deformed spray gives -1.
inline constexpr double kHSign = -1.0;

ProjectiveRicci projective_ricci(const SprayChart& G, const VolumeForm& dV, const PointTM& p, double h_sign = kHSign);

TensorValue douglas(const SprayChart& G, const VolumeForm& dV, const PointTM& p);
TensorValue weyl_hat(const SprayChart& G, const VolumeForm& dV, const PointTM& p);

// Pi closed as a local 1-form: Pi_{.k.l} = 0 and d/dx^l Pi_{.k} = d/dx^k Pi_{.l}.
struct SClosed {
    Residual hessian;
    Residual curl;

    bool closed(double tol) const { return hessian.relative() <= tol && curl.relative() <= tol; }
};
SClosed s_closed_residual(const SprayChart& G, std::span<const PointTM> points);

// F_{.k|m} y^m - F_{|k} for a scalar field F given by its jets at the frame point.
FieldTensor rapcsak_field(const BerwaldFrame& frame, const Jet& F);
// L_{.k|m} y^m / 2 - L_{|k}.
FieldTensor dual_field(const BerwaldFrame& frame, const Jet& L);

TensorValue rapcsak_residual(const Expr& F, const SprayChart& G, const PointTM& p);
TensorValue dual_residual(const Expr& L, const SprayChart& G, const PointTM& p);

}  // namespace spraylab
