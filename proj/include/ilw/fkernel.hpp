#pragma once

// The kernel F(ξ;κ,h) with ‖√R₀ q √R₀‖²_HS = Σ F(ξ)|q̂(ξ)|², where
//   circle: F = Σ_{η∈2πZ} r(η) r(ξ+η),   line: F = (1/2π) ∫ r(η) r(ξ+η) dη,
// and r(η) = 1/(a_h(η) + κ).

#include "ilw/spectral.hpp"

#include <vector>

namespace ilw {

enum class Geometry { circle, line };

struct FKernelQuery {
    Geometry geometry = Geometry::circle;
    double xi = 0.0;
    double kappa = 1.0;
    double h = 1.0;
    /// Target accuracy, interpreted as tol·max(1, F).
    double tol = 1e-10;

    void validate() const;
};

struct FValue {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

FValue f_eval_detailed(const FKernelQuery& query);
double f_eval(const FKernelQuery& query);

/// Circle sum restricted to η, η+ξ in the mode window [k_min, k_max): the
/// kernel of the Frobenius norm of a truncated A.
double f_window(int k, double kappa, double h, int k_min, int k_max);

/// [hξ²/(1+h|ξ|) + κ]^{-1} [√((1+hκ)/(hκ)) + log(1 + h|ξ|/(1+hκ))].
double f_envelope(double xi, double kappa, double h);
double envelope_ratio(Geometry geometry, double xi, double kappa, double h, double tol = 1e-10);

struct KernelPoint {
    double xi;
    double kappa;
    double h;
};

/// h ∈ {10⁻², …, 10²}, κh ∈ {10⁻³, …, 10³}, ξ/κ ∈ {0} ∪ {10^{-3+i/4}}, i = 1…24.
/// On the circle ξ is rounded to the lattice and only κ ≥ 1 is kept: below that
/// the η = 0 lattice term alone gives F ≥ κ⁻², which outgrows the envelope.
std::vector<KernelPoint> envelope_reference_grid(Geometry geometry);

/// 2πκF(ξ;κ,h) for each κ.
std::vector<double> kappa_f_limit(double xi, double h, const std::vector<double>& kappas,
                                  Geometry geometry = Geometry::circle, double tol = 1e-11);

/// C(h₀) = 2π(4 + 1/(2πh₀)) + π/(2√h₀), so that 2πκF ≤ 1 + C κ^{-1/2} for κ ≥ max(1, 1/h₀), h ≥ h₀.
double equi_constant(double h0);

struct ThresholdResult {
    double A = 0.0;
    /// Largest κF over the accepted sample range.
    double max_kappa_f = 0.0;
    int samples = 0;
};

/// Smallest A ∈ {1, 2, 4, …, 2¹⁰} with κF(ξ) ≤ 1/(4π) on a log-spaced sample of
/// |ξ|/κ ∈ [A, 10³A] (lattice points on the circle).
ThresholdResult threshold_A(double kappa, double h, int samples_per_decade = 10,
                            Geometry geometry = Geometry::circle);

/// Σ F(ξ)|q̂(ξ)|² over the field's modes.
double f_weighted_sum(const FourierField& q, double kappa, double h, double tol = 1e-12);

/// [1 + Cκ^{-1/2}] M(q) - πκ Σ F|q̂|² with C = equi_constant(h).
double equi_functional(const FourierField& q, double kappa, double h);

} // namespace ilw
