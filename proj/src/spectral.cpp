#include "ilw/spectral.hpp"

#include "ilw/errors.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <utility>

namespace ilw {

namespace {

std::size_t fft_slot(int k, int n) { return static_cast<std::size_t>(((k % n) + n) % n); }

void require_finite(double x, const char* what)
{
    if (!std::isfinite(x))
        throw RangeError(std::string(what) + ": non-finite argument");
}

void require_positive_depth(double h)
{
    if (!(h > 0.0) || !std::isfinite(h))
        throw InvalidInput("depth h must be positive and finite");
}

} // namespace

PeriodicGrid::PeriodicGrid(int n_modes) : n_(n_modes)
{
    if (n_modes < 8 || n_modes % 2 != 0)
        throw InvalidInput("grid size must be even and >= 8, got " + std::to_string(n_modes));
}

// -- FourierField ------------------------------------------------------------

FourierField::FourierField(PeriodicGrid grid)
    : grid_(grid), coeffs_(static_cast<std::size_t>(grid.n_modes()), cplx{})
{
}

FourierField::FourierField(PeriodicGrid grid, std::vector<cplx> ascending)
    : grid_(grid), coeffs_(std::move(ascending))
{
    if (coeffs_.size() != static_cast<std::size_t>(grid_.n_modes()))
        throw InvalidInput("coefficient count " + std::to_string(coeffs_.size()) +
                           " does not match grid size " + std::to_string(grid_.n_modes()));
    for (const cplx& c : coeffs_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw InvalidInput("non-finite Fourier coefficient");
    coeffs_[grid_.index(grid_.k_lo())] = 0.0;
    double scale = max_abs_coeff();
    if (hermitian_defect() > 1e-12 * scale)
        throw InvalidInput("coefficients are not Hermitian-symmetric (field is not real)");
    enforce_reality();
}

cplx FourierField::coeff(int k) const
{
    if (!grid_.contains(k))
        throw InvalidInput("mode " + std::to_string(k) + " outside the grid");
    return coeffs_[grid_.index(k)];
}

cplx FourierField::coeff_or_zero(int k) const
{
    return grid_.contains(k) ? coeffs_[grid_.index(k)] : cplx{};
}

double FourierField::max_abs_coeff() const
{
    double m = 0.0;
    for (const cplx& c : coeffs_)
        m = std::max(m, std::abs(c));
    return m;
}

int FourierField::band(double threshold) const
{
    double cut = threshold * max_abs_coeff();
    int b = 0;
    for (int k = 1; k < grid_.k_hi(); ++k)
        if (std::abs(coeff(k)) > cut || std::abs(coeff(-k)) > cut)
            b = k;
    return b;
}

double FourierField::hermitian_defect() const
{
    double d = std::abs(coeff(0).imag()) * 2.0;
    for (int k = 1; k < grid_.k_hi(); ++k)
        d = std::max(d, std::abs(coeff(k) - std::conj(coeff(-k))));
    return d;
}

void FourierField::enforce_reality()
{
    coeffs_[grid_.index(grid_.k_lo())] = 0.0;
    coeffs_[grid_.index(0)] = coeffs_[grid_.index(0)].real();
    for (int k = 1; k < grid_.k_hi(); ++k) {
        cplx avg = 0.5 * (coeffs_[grid_.index(k)] + std::conj(coeffs_[grid_.index(-k)]));
        coeffs_[grid_.index(k)] = avg;
        coeffs_[grid_.index(-k)] = std::conj(avg);
    }
}

FourierField FourierField::shifted(double y) const
{
    FourierField out(grid_);
    for (int k = grid_.k_lo(); k < grid_.k_hi(); ++k) {
        // e^{iξy} with the phase reduced mod 1 first to keep it accurate.
        double phase = two_pi * std::remainder(static_cast<double>(k) * y, 1.0);
        out.coeffs_[grid_.index(k)] = coeff(k) * std::polar(1.0, phase);
    }
    out.enforce_reality();
    return out;
}

FourierField FourierField::resampled(PeriodicGrid target) const
{
    FourierField out(target);
    for (int k = target.k_lo() + 1; k < target.k_hi(); ++k)
        out.coeffs_[target.index(k)] = coeff_or_zero(k);
    out.enforce_reality();
    return out;
}

FourierField FourierField::truncated(int cutoff) const
{
    FourierField out(*this);
    for (int k = grid_.k_lo(); k < grid_.k_hi(); ++k)
        if (std::abs(k) > cutoff)
            out.coeffs_[grid_.index(k)] = 0.0;
    return out;
}

FourierField& FourierField::operator+=(const FourierField& other)
{
    if (!(grid_ == other.grid_))
        throw InvalidInput("grid mismatch in field addition");
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        coeffs_[i] += other.coeffs_[i];
    return *this;
}

FourierField& FourierField::operator-=(const FourierField& other)
{
    if (!(grid_ == other.grid_))
        throw InvalidInput("grid mismatch in field subtraction");
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        coeffs_[i] -= other.coeffs_[i];
    return *this;
}

FourierField& FourierField::operator*=(double scale)
{
    for (cplx& c : coeffs_)
        c *= scale;
    return *this;
}

FourierField trig_field(PeriodicGrid grid, std::span<const TrigTerm> terms)
{
    std::vector<cplx> c(static_cast<std::size_t>(grid.n_modes()));
    for (const TrigTerm& t : terms) {
        int k = std::abs(t.k);
        if (k >= grid.k_hi())
            throw InvalidInput("trigonometric mode " + std::to_string(t.k) + " not resolved by the grid");
        if (k == 0) {
            c[grid.index(0)] += t.cos_amp;
            continue;
        }
        double b = t.k > 0 ? t.sin_amp : -t.sin_amp;
        // a cos + b sin = (a - ib)/2 e^{iθ} + (a + ib)/2 e^{-iθ}
        c[grid.index(k)] += cplx(0.5 * t.cos_amp, -0.5 * b);
        c[grid.index(-k)] += cplx(0.5 * t.cos_amp, 0.5 * b);
    }
    return FourierField(grid, std::move(c));
}

FourierField trig_field(PeriodicGrid grid, std::initializer_list<TrigTerm> terms)
{
    return trig_field(grid, std::span<const TrigTerm>(terms.begin(), terms.size()));
}

// -- transforms --------------------------------------------------------------

std::vector<double> to_physical(const FourierField& field)
{
    const int n = field.grid().n_modes();
    std::vector<cplx> spec(static_cast<std::size_t>(n)), phys(static_cast<std::size_t>(n));
    for (int k = field.grid().k_lo(); k < field.grid().k_hi(); ++k)
        spec[fft_slot(k, n)] = field.coeff(k);
    detail::Fft::of(n).backward(spec.data(), phys.data());
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(j)] = phys[static_cast<std::size_t>(j)].real();
    return out;
}

FourierField from_physical(PeriodicGrid grid, std::span<const double> samples)
{
    const int n = grid.n_modes();
    if (samples.size() != static_cast<std::size_t>(n))
        throw InvalidInput("sample count " + std::to_string(samples.size()) +
                           " does not match grid size " + std::to_string(n));
    std::vector<cplx> phys(samples.begin(), samples.end()), spec(static_cast<std::size_t>(n));
    for (const cplx& v : phys)
        if (!std::isfinite(v.real()))
            throw InvalidInput("non-finite sample");
    detail::Fft::of(n).forward(phys.data(), spec.data());
    FourierField out(grid);
    auto c = out.mutable_coeffs();
    for (int k = grid.k_lo(); k < grid.k_hi(); ++k)
        c[grid.index(k)] = spec[fft_slot(k, n)] / static_cast<double>(n);
    out.enforce_reality();
    return out;
}

// -- symbols -----------------------------------------------------------------

double symbol_a(double xi, double h)
{
    require_positive_depth(h);
    require_finite(xi, "symbol_a");
    if (2.0 * h * std::abs(xi) > exp_budget && xi < 0.0)
        throw RangeError("symbol_a: 2h|xi| = " + std::to_string(2.0 * h * std::abs(xi)) +
                         " exceeds the overflow budget");
    const double z = h * xi;
    double twice; // e^{-2z} - 1 + 2z
    if (std::abs(z) < 0.25) {
        // Σ_{n≥2} (-2z)^n / n!; 20 terms reach 1e-19 relative at |z| = 1/4.
        double term = 2.0 * z * z;
        twice = term;
        for (int n = 3; n < 22; ++n) {
            term *= -2.0 * z / n;
            twice += term;
        }
    } else {
        twice = std::expm1(-2.0 * z) + 2.0 * z;
    }
    return 0.5 * twice / h;
}

double zcoth_minus_one(double z)
{
    require_finite(z, "zcoth_minus_one");
    const double az = std::abs(z);
    if (az < 0.25) {
        // Bernoulli series of z coth z; the first omitted term is below 1e-17 relative.
        const double z2 = z * z;
        static constexpr double c[] = {1.0 / 3.0,         -1.0 / 45.0,        2.0 / 945.0,
                                       -1.0 / 4725.0,     2.0 / 93555.0,      -1382.0 / 638512875.0,
                                       4.0 / 18243225.0};
        double acc = 0.0;
        for (int i = 6; i >= 0; --i)
            acc = acc * z2 + c[i];
        return acc * z2;
    }
    if (az > 20.0)
        return az - 1.0 + 2.0 * az * std::exp(-2.0 * az) / (1.0 - std::exp(-2.0 * az));
    return az / std::tanh(az) - 1.0;
}

MultiplierSymbol::MultiplierSymbol(std::string name, Fn fn, bool real_operator)
    : name_(std::move(name)), fn_(std::move(fn)), real_operator_(real_operator)
{
}

cplx MultiplierSymbol::operator()(double xi, double h) const
{
    require_finite(xi, "multiplier symbol");
    cplx v = fn_(xi, h);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw RangeError("symbol '" + name_ + "' is not finite at xi = " + std::to_string(xi));
    return v;
}

MultiplierSymbol MultiplierSymbol::identity()
{
    return {"identity", [](double, double) { return cplx(1.0); }, true};
}

MultiplierSymbol MultiplierSymbol::derivative()
{
    return {"dx", [](double xi, double) { return cplx(0.0, xi); }, true};
}

MultiplierSymbol MultiplierSymbol::hilbert()
{
    return {"hilbert",
            [](double xi, double) { return cplx(0.0, xi > 0 ? -1.0 : (xi < 0 ? 1.0 : 0.0)); }, true};
}

MultiplierSymbol MultiplierSymbol::coth_t()
{
    return {"T",
            [](double xi, double h) {
                require_positive_depth(h);
                if (xi == 0.0)
                    return cplx(0.0);
                return cplx(0.0, 1.0 / std::tanh(h * xi));
            },
            true};
}

MultiplierSymbol MultiplierSymbol::coth_t_dx()
{
    // -ξ coth(hξ) = -(g(hξ) + 1)/h, smooth through ξ = 0.
    return {"T_dx",
            [](double xi, double h) {
                require_positive_depth(h);
                return cplx(-(zcoth_minus_one(h * xi) + 1.0) / h);
            },
            true};
}

MultiplierSymbol MultiplierSymbol::coth_t_dxx()
{
    return {"T_dxx",
            [](double xi, double h) {
                require_positive_depth(h);
                return cplx(0.0, -xi * (zcoth_minus_one(h * xi) + 1.0) / h);
            },
            true};
}

MultiplierSymbol MultiplierSymbol::tabulated(PeriodicGrid grid, std::vector<double> values,
                                             std::string name)
{
    if (values.size() != static_cast<std::size_t>(grid.n_modes()))
        throw InvalidInput("tabulated symbol needs one value per grid mode");
    bool even = true;
    for (int k = 1; k < grid.k_hi(); ++k)
        if (values[grid.index(k)] != values[grid.index(-k)])
            even = false;
    auto table = std::make_shared<const std::vector<double>>(std::move(values));
    auto fn = [grid, table](double xi, double) {
        double kk = xi / two_pi;
        double r = std::round(kk);
        if (std::abs(kk - r) > 1e-9 || !grid.contains(static_cast<int>(r)))
            throw InvalidInput("tabulated symbol queried off its lattice at xi = " + std::to_string(xi));
        return cplx((*table)[grid.index(static_cast<int>(r))]);
    };
    return {std::move(name), std::move(fn), even};
}

MultiplierSymbol MultiplierSymbol::by_name(const std::string& name)
{
    static const std::map<std::string, MultiplierSymbol (*)()> table = {
        {"identity", &identity}, {"dx", &derivative},     {"hilbert", &hilbert},
        {"T", &coth_t},          {"T_dx", &coth_t_dx},    {"T_dxx", &coth_t_dxx},
    };
    auto it = table.find(name);
    if (it == table.end())
        throw InvalidInput("unknown symbol '" + name + "'");
    return it->second();
}

FourierField apply_multiplier(const FourierField& field, const MultiplierSymbol& symbol, double h)
{
    if (!symbol.real_operator())
        throw InvalidInput("symbol '" + symbol.name() + "' does not map real fields to real fields");
    const PeriodicGrid& g = field.grid();
    FourierField out(g);
    auto c = out.mutable_coeffs();
    for (int k = g.k_lo() + 1; k < g.k_hi(); ++k)
        c[g.index(k)] = symbol(PeriodicGrid::frequency(k), h) * field.coeff(k);
    out.enforce_reality();
    return out;
}

// -- variants ----------------------------------------------------------------

std::string to_string(Variant v)
{
    switch (v) {
    case Variant::ilw: return "ilw";
    case Variant::ilw_rescaled: return "ilw-rescaled";
    case Variant::bo: return "bo";
    case Variant::kdv: return "kdv";
    case Variant::whitham: return "whitham";
    }
    return "?";
}

Variant parse_variant(const std::string& name)
{
    for (Variant v : {Variant::ilw, Variant::ilw_rescaled, Variant::bo, Variant::kdv, Variant::whitham})
        if (to_string(v) == name)
            return v;
    throw InvalidInput("unknown equation variant '" + name + "'");
}

Dispersion::Dispersion(Variant variant, double h) : variant_(variant), h_(h)
{
    if (variant == Variant::whitham)
        throw InvalidInput("the Whitham variant needs a symbol and a speed");
    require_positive_depth(h);
}

Dispersion::Dispersion(MultiplierSymbol m, double c, double symbol_h)
    : variant_(Variant::whitham), h_(symbol_h), c_(c), m_(std::move(m))
{
    require_positive_depth(symbol_h);
    if (!m_->real_operator())
        throw InvalidInput("Whitham symbol must be even and real");
    if (!std::isfinite(c))
        throw InvalidInput("Whitham speed must be finite");
}

double Dispersion::hamiltonian_weight(double xi) const
{
    require_finite(xi, "dispersion");
    switch (variant_) {
    case Variant::ilw: return -zcoth_minus_one(h_ * xi) / h_;
    case Variant::ilw_rescaled: return -3.0 * zcoth_minus_one(h_ * xi) / (h_ * h_);
    case Variant::bo: return -std::abs(xi);
    case Variant::kdv: return -xi * xi;
    case Variant::whitham: return (*m_)(xi, h_).real() + c_;
    }
    return 0.0;
}

double Dispersion::omega(double xi) const
{
    return -xi * hamiltonian_weight(xi);
}

double dispersion_symbol(Variant variant, double xi, double h)
{
    return Dispersion(variant, h).omega(xi);
}

// -- norms and functionals ---------------------------------------------------

void SobolevParams::validate() const
{
    if (!(s > -0.5 && s <= 0.0))
        throw InvalidInput("Sobolev exponent must lie in (-1/2, 0], got " + std::to_string(s));
    if (!(kappa >= 1.0) || !std::isfinite(kappa))
        throw InvalidInput("Sobolev kappa must be >= 1, got " + std::to_string(kappa));
}

double sobolev_norm(const FourierField& field, SobolevParams params)
{
    params.validate();
    const PeriodicGrid& g = field.grid();
    const double k2 = params.kappa * params.kappa;
    double sum = 0.0;
    for (int k = g.k_lo(); k < g.k_hi(); ++k) {
        double xi = PeriodicGrid::frequency(k);
        double w = params.s == 0.0 ? 1.0 : std::pow(k2 + xi * xi, params.s);
        sum += w * std::norm(field.coeff(k));
    }
    return std::sqrt(sum);
}

double tail_mass(const FourierField& field, double cutoff, double sigma)
{
    if (!(cutoff >= 0.0))
        throw InvalidInput("tail cutoff must be non-negative");
    const PeriodicGrid& g = field.grid();
    double sum = 0.0;
    for (int k = g.k_lo(); k < g.k_hi(); ++k) {
        double axi = std::abs(PeriodicGrid::frequency(k));
        if (axi >= cutoff)
            sum += std::pow(axi + 1.0, 2.0 * sigma) * std::norm(field.coeff(k));
    }
    return sum;
}

double l2_norm(const FourierField& field)
{
    double sum = 0.0;
    for (const cplx& c : field.coeffs())
        sum += std::norm(c);
    return std::sqrt(sum);
}

double momentum(const FourierField& field)
{
    double n = l2_norm(field);
    return 0.5 * n * n;
}

double cubic_integral(const FourierField& field)
{
    // On 2n points, k1 + k2 + k3 ≡ 0 (mod 2n) has no spurious solutions for |k_i| < n/2.
    const int n = field.grid().n_modes();
    const int p = 2 * n;
    std::vector<cplx> spec(static_cast<std::size_t>(p)), phys(static_cast<std::size_t>(p));
    for (int k = field.grid().k_lo(); k < field.grid().k_hi(); ++k)
        spec[fft_slot(k, p)] = field.coeff(k);
    detail::Fft::of(p).backward(spec.data(), phys.data());
    double sum = 0.0;
    for (const cplx& v : phys)
        sum += v.real() * v.real() * v.real();
    return sum / p;
}

double hamiltonian(const FourierField& field, const Dispersion& dispersion)
{
    const PeriodicGrid& g = field.grid();
    double quad = 0.0;
    for (int k = g.k_lo(); k < g.k_hi(); ++k)
        quad += dispersion.hamiltonian_weight(PeriodicGrid::frequency(k)) * std::norm(field.coeff(k));
    return 0.5 * quad + cubic_integral(field) / 3.0;
}

double hamiltonian(const FourierField& field, double h)
{
    return hamiltonian(field, Dispersion(Variant::ilw, h));
}

} // namespace ilw
