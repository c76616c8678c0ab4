#pragma once

// Truncated Fourier matrices for the free resolvent R₀(κ) = (L₀ + κ)⁻¹, the
// operator A = √R₀ q √R₀, the Lax pair (L, P) and the illusory pair (L̃, P̃).
// Rows and columns are indexed by modes k of a window, frequency ξ = 2πk.

#include "ilw/spectral.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ilw {

/// Modes k_min ≤ k < k_max.
struct FrequencyWindow {
    int k_min = -16;
    int k_max = 16;

    static FrequencyWindow symmetric(int half) { return {-half, half}; }
    /// Smallest safe negative extent for depth h, with a long positive side
    /// where the resolvent decays only algebraically.
    static FrequencyWindow for_depth(double h, int k_pos = 256);

    int size() const { return k_max - k_min; }
    bool contains(int k) const { return k >= k_min && k < k_max; }
    int index(int k) const { return k - k_min; }
    int mode(int i) const { return i + k_min; }
    /// Modes at distance ≥ margin from both edges.
    bool interior(int k, int margin) const { return k - k_min >= margin && k_max - 1 - k >= margin; }

    void validate() const;
    /// e^{-2hξ} must stay representable: 4πh·|k_min| ≤ 700 when k_min < 0.
    /// Positive modes only make the exponential smaller.
    void check_guard(double h) const;

    friend bool operator==(const FrequencyWindow&, const FrequencyWindow&) = default;
};

struct TruncatedOperator {
    FrequencyWindow window;
    Eigen::MatrixXcd entries;
    bool hermitian = false;
    std::string name;

    cplx at(int row_k, int col_k) const { return entries(window.index(row_k), window.index(col_k)); }
    /// max |M - M*| / max |M|.
    double hermitian_defect() const;
};

/// How to treat difference frequencies outside the field's grid.
enum class Fill {
    strict,       // reject
    band_limited, // the field is declared band-limited: missing modes are zero
};

TruncatedOperator build_R0(double kappa, double h, const FrequencyWindow& w);
TruncatedOperator build_sqrt_R0(double kappa, double h, const FrequencyWindow& w);
/// Toeplitz matrix q̂(ξ - η).
TruncatedOperator build_mult(const FourierField& q, const FrequencyWindow& w, Fill fill = Fill::strict);
TruncatedOperator build_A(double kappa, const FourierField& q, double h, const FrequencyWindow& w,
                          Fill fill = Fill::strict);

double hs_norm(const TruncatedOperator& op);
/// ‖A‖²_HS on `w` summed entry by entry, r(k)|q̂(k-j)|²r(j), without forming
/// the matrix. Band-limited q only; the window may hold millions of modes.
double hs_norm_sq_banded(double kappa, const FourierField& q, double h, const FrequencyWindow& w);
/// Largest singular value.
double op_norm(const TruncatedOperator& op);
cplx trace_product(const std::vector<const TruncatedOperator*>& ops);

// -- α(κ; q) -----------------------------------------------------------------

/// -log(1-λ) - λ without cancellation for small λ.
double alpha_term(double lambda);

struct AlphaResult {
    double kappa = 0.0;
    double hs_norm = 0.0;
    double op_norm_bound = 0.0; // max |λ|
    double alpha = 0.0;
    std::vector<double> eigenvalues;
    bool converged = false; // hs_norm < 1/3
    FrequencyWindow window;
};

/// Σ_i -log(1-λ_i) - λ_i over the eigenvalues of the truncated A.
/// Throws DivergentSeries when some |λ| ≥ 1.
AlphaResult alpha(double kappa, const FourierField& q, double h, const FrequencyWindow& w,
                  Fill fill = Fill::strict);

enum class Regime { deep, shallow };

struct KappaChoice {
    double kappa = 0.0;
    double hs_norm = 0.0;  // of the full (untruncated) A, via Σ F|q̂|²
    int doublings = 0;
    /// Closed-form threshold with the calibrated prefactor C_s, for comparison.
    double closed_form = 0.0;
};

/// Doubling search for κ with ‖A(κ, q)‖_HS < δ.
///   deep:    from max(1, 1/h) upward;
///   shallow: from κ = h upward, failing past κ = 1/h.
/// The HS norm of the infinite operator is Σ F(ξ;κ,h)|q̂(ξ)|² evaluated on the circle.
KappaChoice choose_kappa(const FourierField& q, double h, double delta = 1.0 / 6.0, Regime regime = Regime::deep,
                         double s = -0.25);

/// Closed forms [1 + C_s‖q‖²_{H^s}/δ²]^{1/(1-2|s|)} (deep, floored at 1/h) and
/// h·[1 + C_s‖q/h‖²_{H^s}/δ²]^{1/(3/2-|s|)} (shallow).
double kappa_closed_form(const FourierField& q, double h, double delta, Regime regime, double s, double C_s);

// -- Lax pair ----------------------------------------------------------------

/// L = -i∂ + (e^{2ih∂} - 1)/(2h) - q: diagonal a_h(ξ) minus Toeplitz q̂.
TruncatedOperator build_L(const FourierField& q, double h, const FrequencyWindow& w, Fill fill = Fill::strict);
/// P = -∂/h - i∂² + ∂e^{2ih∂}/h - iTq' - (∂q + q∂).
TruncatedOperator build_P(const FourierField& q, double h, const FrequencyWindow& w, Fill fill = Fill::strict);

struct LaxResidual {
    /// max over interior entries of |[P,L] - target| / scale(entry), where the
    /// scale is the largest single summand forming the entry (or the largest
    /// target entry if that is bigger).
    double residual = 0.0;
    /// Same numerator divided only by the largest target entry.
    double raw_residual = 0.0;
    int interior_modes = 0;
};

/// Compares [P, L] with multiplication by Tq'' + q'/h + 2qq' on modes at
/// distance ≥ 2B from the window edge. `coth_scale` multiplies the coth factor
/// inside P (1 for the true operator; other values are a mutation probe).
LaxResidual lax_residual(const FourierField& q, double h, const FrequencyWindow& w, int band,
                         double coth_scale = 1.0);

/// |coth(h(ξ-η))(e^{-2hξ} - e^{-2hη}) + (e^{-2hξ} + e^{-2hη})| / (e^{-2hξ} + e^{-2hη}).
double coth_identity_check(double xi, double eta, double h);

/// Lowest eigenvalues of the truncated L, ascending. Computed from the top of
/// the spectrum of (L + κ)⁻¹ = √R₀ (1 - A)⁻¹ √R₀, which stays well scaled
/// even though L itself has entries of size e^{4πh|k_min|}.
std::vector<double> lax_lowest_eigenvalues(const FourierField& q, double h, const FrequencyWindow& w, int count,
                                           Fill fill = Fill::band_limited);

// -- trace identities --------------------------------------------------------

/// One factor of a trace word: the free resolvent R₀ or multiplication by a
/// band-limited function given by its non-zero Fourier coefficients.
struct TraceFactor {
    bool resolvent = true;
    std::vector<std::pair<int, cplx>> coeffs;

    static TraceFactor r0() { return {true, {}}; }
    static TraceFactor mult(const FourierField& f, double threshold = 0.0);
};

struct LatticeTrace {
    cplx value;
    /// Σ |individual terms|: the scale against which rounding is judged.
    double abs_scale = 0.0;
};

/// Trace of the product over the whole lattice 2πZ (no truncation): a finite
/// sum over coefficient tuples of lattice sums Π r(η + 2πs_p), each summed
/// directly and closed with an Euler-Maclaurin tail.
LatticeTrace lattice_trace(const std::vector<TraceFactor>& word, double kappa, double h);

struct TraceIdentityResult {
    // Lattice route (exact traces up to rounding).
    double quadratic = 0.0;          // |sum| / scale
    double telescope = 0.0;
    cplx quadratic_terms[2];
    cplx telescope_terms[2];
    // Dense route on the given window, same normalization.
    double dense_quadratic = 0.0;
    double dense_telescope = 0.0;
    // Σ F(ξ)|q̂|²(hξ²coth(hξ) - ξ)/(ih): zero by oddness.
    double odd_weight_sum = 0.0;
};

/// (E:quadratic): tr{R₀(Tq'')R₀q} + tr{R₀(q'/h)R₀q} = 0;
/// (E:telescope): tr{R₀(Tq''+q'/h)(R₀q)^ℓ} + tr{R₀(2qq')(R₀q)^{ℓ-1}} = 0.
TraceIdentityResult trace_identities(const FourierField& q, double kappa, double h, const FrequencyWindow& w,
                                     int ell);

// -- illusory pair -----------------------------------------------------------

/// L̃ = -i∂ - q and P̃ = -c∂ - i(Mq) - i∂² - ∂q - q∂.
std::pair<TruncatedOperator, TruncatedOperator> illusory_ops(const FourierField& q, double c,
                                                             const MultiplierSymbol& m, const FrequencyWindow& w,
                                                             double h = 1.0, Fill fill = Fill::strict);

/// `m_scale` multiplies the symbol inside P̃ only (a mutation probe; the
/// target keeps the true symbol).
struct IllusoryChecks {
    double commutator_residual = 0.0;
    /// max_{|n| ≤ n_max} |λ_n - (2πn - q̄)|.
    double spectrum_residual = 0.0;
    std::vector<double> eigenvalues; // the 2 n_max + 1 closest to the free levels
};

IllusoryChecks illusory_checks(const FourierField& q, double c, const MultiplierSymbol& m,
                               const FrequencyWindow& w, int band, int n_max = 8, double h = 1.0,
                               Fill fill = Fill::strict, double m_scale = 1.0);

// -- output ------------------------------------------------------------------

/// `row_k,col_k,re,im` for every non-zero entry.
void write_operator_csv(std::ostream& out, const TruncatedOperator& op);

} // namespace ilw
