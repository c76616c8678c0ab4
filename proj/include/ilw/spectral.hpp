#pragma once

// Periodic real fields on the unit circle in the Fourier basis.
//
// Convention: q̂(ξ) = ∫₀¹ e^{-iξx} q(x) dx on frequencies ξ = 2πk, so that
// q(x) = Σ q̂(ξ) e^{iξx} and ‖q‖²_{L²} = Σ |q̂(ξ)|². Coefficients are stored
// in ascending mode order k = -n/2, ..., n/2 - 1.

#include <complex>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ilw {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Largest exponent x for which e^x is still safely representable.
inline constexpr double exp_budget = 700.0;

class PeriodicGrid {
public:
    explicit PeriodicGrid(int n_modes);

    int n_modes() const { return n_; }
    int k_lo() const { return -n_ / 2; }
    int k_hi() const { return n_ / 2; } // exclusive
    bool contains(int k) const { return k >= k_lo() && k < k_hi(); }
    std::size_t index(int k) const { return static_cast<std::size_t>(k - k_lo()); }
    int mode(std::size_t index) const { return static_cast<int>(index) + k_lo(); }
    static double frequency(int k) { return two_pi * k; }
    /// Largest |k| retained by the 2/3 dealiasing rule (3·K < n).
    int dealias_cutoff() const { return (n_ - 1) / 3; }

    friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

private:
    int n_;
};

/// A real-valued periodic function: Hermitian coefficients, Nyquist mode zero.
class FourierField {
public:
    explicit FourierField(PeriodicGrid grid);
    /// Coefficients in ascending mode order. Rejects data that is not
    /// Hermitian to 1e-12 relative; the Nyquist entry is discarded.
    FourierField(PeriodicGrid grid, std::vector<cplx> ascending);

    const PeriodicGrid& grid() const { return grid_; }
    cplx coeff(int k) const;
    cplx coeff_or_zero(int k) const;
    std::span<const cplx> coeffs() const { return coeffs_; }

    /// Largest |k| with a coefficient above `threshold` times the largest one.
    int band(double threshold = 0.0) const;
    double max_abs_coeff() const;
    /// max_k |q̂(k) - conj q̂(-k)| over paired modes.
    double hermitian_defect() const;

    /// q(· + y).
    FourierField shifted(double y) const;
    /// Same field on a finer or coarser grid (modes outside the target dropped).
    FourierField resampled(PeriodicGrid target) const;
    /// Zero every mode with |k| > cutoff.
    FourierField truncated(int cutoff) const;

    FourierField& operator+=(const FourierField& other);
    FourierField& operator-=(const FourierField& other);
    FourierField& operator*=(double scale);
    friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
    friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
    friend FourierField operator*(double s, FourierField a) { return a *= s; }

    // Raw access for the time stepper; callers restore the invariants.
    std::span<cplx> mutable_coeffs() { return coeffs_; }
    void enforce_reality();

private:
    PeriodicGrid grid_;
    std::vector<cplx> coeffs_;
};

/// One term a·cos(2πkx) + b·sin(2πkx); k = 0 contributes the constant a.
struct TrigTerm {
    int k;
    double cos_amp = 0.0;
    double sin_amp = 0.0;
};

FourierField trig_field(PeriodicGrid grid, std::span<const TrigTerm> terms);
FourierField trig_field(PeriodicGrid grid, std::initializer_list<TrigTerm> terms);

// -- transforms --------------------------------------------------------------

std::vector<double> to_physical(const FourierField& field);
FourierField from_physical(PeriodicGrid grid, std::span<const double> samples);

// -- symbols -----------------------------------------------------------------

/// a_h(ξ) = ξ + (e^{-2hξ} - 1)/(2h), the free Lax symbol. Non-negative.
double symbol_a(double xi, double h);

/// z·coth(z) - 1, evaluated without cancellation near z = 0.
double zcoth_minus_one(double z);

/// A Fourier multiplier m(ξ; h). Removable singularities are patched with
/// their limits; the Hilbert-type singularity of T at ξ = 0 is declared 0.
class MultiplierSymbol {
public:
    using Fn = std::function<cplx(double xi, double h)>;

    MultiplierSymbol(std::string name, Fn fn, bool real_operator);

    cplx operator()(double xi, double h) const;
    const std::string& name() const { return name_; }
    /// m(-ξ) = conj m(ξ): real fields map to real fields.
    bool real_operator() const { return real_operator_; }

    static MultiplierSymbol identity();
    static MultiplierSymbol derivative();    // iξ
    static MultiplierSymbol hilbert();       // -i sgn ξ
    static MultiplierSymbol coth_t();        // T: i coth(hξ), 0 at ξ = 0
    static MultiplierSymbol coth_t_dx();     // T∂: -ξ coth(hξ), -1/h at ξ = 0
    static MultiplierSymbol coth_t_dxx();    // T∂²: -iξ² coth(hξ), 0 at ξ = 0
    /// Real values on the lattice ξ = 2πk, k ∈ [k_lo, k_hi); other ξ are rejected.
    static MultiplierSymbol tabulated(PeriodicGrid grid, std::vector<double> values,
                                      std::string name = "tabulated");
    /// Looks up built-in symbols by name ("identity", "dx", "hilbert", "T",
    /// "T_dx", "T_dxx"); tabulated symbols are not named.
    static MultiplierSymbol by_name(const std::string& name);

private:
    std::string name_;
    Fn fn_;
    bool real_operator_;
};

FourierField apply_multiplier(const FourierField& field, const MultiplierSymbol& symbol, double h);

// -- equation variants -------------------------------------------------------

enum class Variant { ilw, ilw_rescaled, bo, kdv, whitham };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

/// Linear part of q_t = i ω(D) q - ∂(q²). For Whitham, ω(ξ) = -ξ (m(ξ) + c).
class Dispersion {
public:
    Dispersion(Variant variant, double h);
    /// `symbol_h` is the depth passed to the symbol's evaluator.
    Dispersion(MultiplierSymbol m, double c, double symbol_h = 1.0);

    Variant variant() const { return variant_; }
    double h() const { return h_; }
    double c() const { return c_; }

    /// ω(ξ); odd, with ω(0) = 0.
    double omega(double xi) const;
    /// Even weight d with ω(ξ) = -ξ d(ξ); the Hamiltonian is ½Σ d|q̂|² + ⅓∫q³.
    double hamiltonian_weight(double xi) const;

private:
    Variant variant_;
    double h_ = 1.0;
    double c_ = 0.0;
    std::optional<MultiplierSymbol> m_;
};

double dispersion_symbol(Variant variant, double xi, double h);

// -- norms and functionals ---------------------------------------------------

struct SobolevParams {
    double s = 0.0;
    double kappa = 1.0;
    void validate() const;
};

double sobolev_norm(const FourierField& field, SobolevParams params);

/// Σ_{|ξ| ≥ cutoff} (|ξ|+1)^{2σ} |q̂(ξ)|², the sharp high-frequency tail.
double tail_mass(const FourierField& field, double cutoff, double sigma);

/// L² norm by Plancherel.
double l2_norm(const FourierField& field);

/// M(q) = ½ ∫ q².
double momentum(const FourierField& field);

/// ∫ q³, exact for the grid's band (products formed on a padded grid).
double cubic_integral(const FourierField& field);

/// ILW Hamiltonian ½∫q·Tq' + (1/2h)∫q² + ⅓∫q³.
double hamiltonian(const FourierField& field, double h);
double hamiltonian(const FourierField& field, const Dispersion& dispersion);

// -- snapshot files ----------------------------------------------------------

/// CSV `k,re,im`, one row per mode, binary64 round-trip precision. Lines
/// starting with '#' are comments (provenance).
void write_snapshot_csv(std::ostream& out, const FourierField& field,
                        const std::string& comment = {});
FourierField read_snapshot_csv(std::istream& in);

} // namespace ilw
