#pragma once

// Curvature quantities of a bare spray (no metric): Ricci, R, T, Weyl, the
// chi-curvature by several independent routes, eta, and the residuals of the
// identities relating them.

#include <optional>
#include <string>
#include <vector>

#include "spraylab/spray_core.hpp"

namespace spraylab {

enum class ChiRoute { Definition, Trace, LocalPi, FromT, Cartan, SCurvature };

const char* to_string(ChiRoute r);

struct ChiValue {
    std::vector<double> components;
    ChiRoute route = ChiRoute::Definition;
    PointTM point;

    double max_abs() const { return spraylab::max_abs(components); }
};

// Lazily evaluated curvature fields of one spray around one point. Not
// thread-safe; create one per point.
class CurvatureEngine {
public:
    CurvatureEngine(const SprayChart& spray, const PointTM& p, int order);
    explicit CurvatureEngine(BerwaldFrame frame);

    const BerwaldFrame& frame() const noexcept { return frame_; }
    int dim() const noexcept { return frame_.dim(); }
    const PointTM& point() const noexcept { return frame_.point(); }

    const FieldTensor& riemann2();       // R^i_k
    const FieldTensor& riemann2_v();     // R^i_{k.l}
    const FieldTensor& riemann4();       // R^i_{jkl}
    const FieldTensor& berwald();        // B^i_{jkl}
    const Jet& ricci();                  // Ric = R^m_m
    const Jet& scalar_R();               // R = Ric / (n - 1)
    const FieldTensor& scalar_R_v();     // R_{.k}

    FieldTensor ricci_tensor();          // Ric_jl = (R^m_{jml} + R^m_{lmj}) / 2

    FieldTensor chi_definition();        // -(2 R^m_{k.m} + R^m_{m.k}) / 6
    FieldTensor chi_trace();             // -R^m_{mkl} y^l / 2
    FieldTensor chi_local();             // (Pi_{x^m y^k} y^m - Pi_{x^k} - 2 Pi_{y^k y^m} G^m) / 2
    FieldTensor chi_from_T();            // -T^m_{k.m} / 3

    FieldTensor t_curvature();           // R^i_k - (R delta^i_k - R_{.k} y^i / 2)
    FieldTensor weyl_direct();           // A^i_k - A^m_{k.m} y^i / (n + 1), A = R^i_k - R delta^i_k
    FieldTensor weyl_via_chi();          // T^i_k + 3 chi_k y^i / (n + 1)
    FieldTensor eta();                   // R_{.k|m} y^m / 2 - R_{|k}

private:
    BerwaldFrame frame_;
    std::optional<FieldTensor> r2_, r2v_, r4_, b_, rv_;
    std::optional<Jet> ric_, r_;
};

ChiValue chi_definition(const SprayChart& G, const PointTM& p);
ChiValue chi_trace(const SprayChart& G, const PointTM& p);
ChiValue chi_local(const SprayChart& G, const PointTM& p);
ChiValue chi_from_t(const SprayChart& G, const PointTM& p);
TensorValue t_curvature(const SprayChart& G, const PointTM& p);

enum class WeylRoute { Direct, ViaChi };
TensorValue weyl(const SprayChart& G, const PointTM& p, WeylRoute route = WeylRoute::Direct);
TensorValue eta(const SprayChart& G, const PointTM& p);
TensorValue ricci_tensor(const SprayChart& G, const PointTM& p);

// Relative residual magnitudes used for classification and identity checks.
// Scales follow the "1 + largest entering term" convention.
Residual chi_magnitude(CurvatureEngine& e, const FieldTensor& chi);
Residual t_magnitude(CurvatureEngine& e, const FieldTensor& T);

// Identity residuals at the engine's point. Each needs jets of order <= 4.
namespace identities {
Residual berwald_y_contraction(CurvatureEngine& e);        // y^j B^i_{jkl} = 0
Residual berwald_symmetry(CurvatureEngine& e);             // B^i_{jkl} totally symmetric
Residual two_vs_four_index(CurvatureEngine& e);            // R^i_k = y^j R^i_{jkl} y^l
Residual first_bianchi(CurvatureEngine& e);                // R^i_{jkl} + R^i_{klj} + R^i_{ljk} = 0
Residual reconstruct_four_index(CurvatureEngine& e);       // R^i_{jkl} = (R^i_{k.l.j} - R^i_{l.k.j}) / 3
Residual reconstruct_jk(CurvatureEngine& e);               // R^i_{jk} = (2 R^i_{k.j} + R^i_{j.k}) / 3
Residual reconstruct_kl(CurvatureEngine& e);               // R^i_{kl} = (R^i_{k.l} - R^i_{l.k}) / 3
Residual second_bianchi(CurvatureEngine& e);               // cyclic R^i_{jkl|m} + B.R terms = 0
Residual bianchi_vertical(CurvatureEngine& e);             // R^i_{jkl.m} = B^i_{jml|k} - B^i_{jkm|l}
Residual berwald_vertical_symmetry(CurvatureEngine& e);    // B^i_{jkl.m} = B^i_{jkm.l}
Residual contracted_bianchi(CurvatureEngine& e);           // R^i_{kl|m} + R^i_{lm|k} + R^i_{mk|l} = 0
Residual contracted_bianchi_y(CurvatureEngine& e);         // R^i_{k|m} - R^i_{m|k} + R^i_{mk|l} y^l = 0
Residual ricci_contraction(CurvatureEngine& e);            // Ric_jl y^j y^l = R^m_m
Residual t_trace(CurvatureEngine& e);                      // T^m_m = 0
Residual weyl_routes(CurvatureEngine& e);                  // direct = via chi
Residual weyl_trace(CurvatureEngine& e);                   // W^m_{k.m} = 0
Residual isotropic_four_index(CurvatureEngine& e);         // R^i_{jkl} = (R_{.l.j} d^i_k - R_{.k.j} d^i_l) / 2
Residual isotropic_rr2(CurvatureEngine& e);                // (n - 2)(R_{.l|m} y^m - 2 R_{|l}) = 0
Residual eta_zero(CurvatureEngine& e);                     // eta_k = 0
Residual chi_routes(CurvatureEngine& e, ChiRoute a, ChiRoute b);
}  // namespace identities

FieldTensor chi_by_route(CurvatureEngine& e, ChiRoute route);

struct Classification {
    double isotropy = 0.0;        // max relative |T|
    double scalar_curvature = 0.0;  // max relative |W|
    double chi = 0.0;             // max relative |chi|
    bool isotropic = false;
    bool scalar = false;
    bool chi_zero = false;
    int points = 0;
};

inline constexpr double kFlagThreshold = 1e-6;

Classification classify(const SprayChart& G, std::span<const PointTM> points, double threshold = kFlagThreshold);

struct ResidualEntry {
    std::string id;
    Residual residual;
    double tolerance = 0.0;

    bool pass() const { return residual.relative() <= tolerance; }
};

// All per-point curvature quantities of a spray plus the residuals of the
// pointwise identities tying them together.
struct CurvatureReport {
    std::string label;
    std::uint64_t seed = 0;
    PointTM point;
    std::vector<TensorValue> tensors;  // Ric_jl, Ric, R, T, W, eta, chi
    std::vector<ResidualEntry> residuals;
};

CurvatureReport curvature_report(const SprayChart& G, const PointTM& p, std::uint64_t seed, int order = 4);

}  // namespace spraylab
