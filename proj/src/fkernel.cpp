#include "ilw/fkernel.hpp"

#include "ilw/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace ilw {

namespace {

constexpr long work_budget = 50'000'000;

struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x)
    {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

// 1/(a_h(η) + κ); zero once e^{-2hη} leaves the double range.
double resolvent_symbol(double eta, double kappa, double h)
{
    if (eta < 0.0 && -2.0 * h * eta > exp_budget)
        return 0.0;
    return 1.0 / (symbol_a(eta, h) + kappa);
}

// ∫₀^∞ ds / (A + B s + h s²) for A > 0, B ≥ 0, h > 0.
double quadratic_tail(double A, double B, double h)
{
    if (!std::isfinite(B))
        return 0.0;
    const double D = B * B - 4.0 * h * A;
    if (D > 0.0) {
        const double sd = std::sqrt(D);
        // log((B+√D)/(B-√D)) with B-√D = 4hA/(B+√D).
        return 2.0 * std::log((B + sd) / std::sqrt(4.0 * h * A)) / sd;
    }
    if (D < 0.0) {
        const double sd = std::sqrt(-D);
        return 2.0 * (0.5 * std::numbers::pi - std::atan(B / sd)) / sd;
    }
    return 2.0 / B;
}

// Upper bound on ∫_{-∞}^{η} r(t) r(t+ξ) dt/(2π) for η ≤ 0, and on the lattice sum
// over η − 2π, η − 4π, … . Uses a(η − s) ≥ a(η) + |a'(η)| s + h s² (a'' ≥ 2h on
// η ≤ 0) and r(· + ξ) bounded by `other_max` below η.
double lower_tail_bound(double eta, double other_max, double kappa, double h)
{
    if (-2.0 * h * eta > exp_budget)
        return 0.0;
    const double A = symbol_a(eta, h) + kappa;
    const double B = std::expm1(-2.0 * h * eta);
    return other_max * quadratic_tail(A, B, h) / two_pi;
}

// For η ≥ 20/h, r(η) = 1/(η + c) up to a relative e^{-40}.
double shift_constant(double kappa, double h) { return kappa - 0.5 / h; }

// ∫_u^∞ dt / (t (t + ξ)) for u > 0, u + ξ > 0.
double algebraic_tail(double u, double xi)
{
    if (xi == 0.0)
        return 1.0 / u;
    return std::log1p(xi / u) / xi;
}

long lattice_index(double xi)
{
    const double k = std::round(xi / two_pi);
    if (std::abs(xi - two_pi * k) > 1e-9 * std::max(1.0, std::abs(xi)))
        throw InvalidInput("circle kernel needs xi on the lattice 2*pi*Z, got " + std::to_string(xi));
    return static_cast<long>(k);
}

FValue circle_sum(long k, double kappa, double h, double tol)
{
    // F(ξ) = F(-ξ) by re-indexing η → η - ξ, so sum with k ≥ 0.
    k = std::abs(k);
    const double xi = two_pi * static_cast<double>(k);
    FValue out;
    CompensatedSum sum;
    auto target = [&] { return tol * std::max(1.0, sum.value()); };

    // Upward: η = 2πj ≥ 0 where both factors decay algebraically.
    long j = 0;
    for (;; ++j) {
        if (++out.evaluations > work_budget)
            throw AccuracyError("circle kernel: work budget exhausted on the positive side",
                                algebraic_tail(two_pi * j + kappa, xi) / two_pi);
        const double eta = two_pi * static_cast<double>(j);
        const double term = resolvent_symbol(eta, kappa, h) * resolvent_symbol(eta + xi, kappa, h);
        sum.add(term);
        if (term < target() / 10.0 && 2.0 * h * eta >= 40.0)
            break;
    }
    // Σ_{j > J} f(j) by Euler-Maclaurin on f(j) = 1/(u(u+ξ)), u = 2πj + c.
    {
        const double u = two_pi * static_cast<double>(j + 1) + shift_constant(kappa, h);
        const double f = 1.0 / (u * (u + xi));
        const double df = -two_pi * (2.0 * u + xi) * f * f;
        const double integral = algebraic_tail(u, xi) / two_pi;
        sum.add(integral + 0.5 * f - df / 12.0);
        const double ratio = two_pi / u;
        out.error_estimate += std::abs(df) * ratio * ratio / 60.0 + std::exp(-40.0) * integral;
    }

    // Downward: η < 0, super-exponential decay after the quadratic well.
    for (j = -1;; --j) {
        if (++out.evaluations > work_budget)
            throw AccuracyError("circle kernel: work budget exhausted on the negative side", target());
        const double eta = two_pi * static_cast<double>(j);
        if (-2.0 * h * eta > exp_budget)
            break;
        const double r1 = resolvent_symbol(eta, kappa, h);
        const double r2 = resolvent_symbol(eta + xi, kappa, h);
        sum.add(r1 * r2);
        const double other_max = eta + xi <= 0.0 ? r2 : 1.0 / kappa;
        const double bound = lower_tail_bound(eta, other_max, kappa, h);
        if (bound < target() / 10.0) {
            out.error_estimate += bound;
            break;
        }
    }
    out.value = sum.value();
    out.error_estimate += 1e-16 * out.value * std::sqrt(static_cast<double>(out.evaluations));
    return out;
}

// Fixed 61-point Kronrod rule with bisection; the error of a panel is taken as
// |whole - (left + right)|, which stays honest down to rounding level (the
// embedded Gauss estimate does not).
template <class F>
double bisect(const F& f, double a, double b, double abs_tol, int depth, double& err, long& evals)
{
    using boost::math::quadrature::gauss_kronrod;
    const double mid = 0.5 * (a + b);
    const double whole = gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0);
    const double left = gauss_kronrod<double, 61>::integrate(f, a, mid, 0, 0.0);
    const double right = gauss_kronrod<double, 61>::integrate(f, mid, b, 0, 0.0);
    evals += 3 * 61;
    const double diff = std::abs(whole - (left + right));
    const double floor = 1e-15 * std::abs(left + right);
    if (diff <= std::max(abs_tol, floor) || depth == 0) {
        err += diff;
        return left + right;
    }
    return bisect(f, a, mid, 0.5 * abs_tol, depth - 1, err, evals) +
           bisect(f, mid, b, 0.5 * abs_tol, depth - 1, err, evals);
}

FValue line_integral(double xi, double kappa, double h, double tol)
{
    const double p_lo = std::min(0.0, -xi);
    const double p_hi = std::max(0.0, -xi);
    const double width = 0.25 * (kappa * h < 1.0 ? std::sqrt(kappa / h) : kappa);
    const double target = tol * std::max(1.0, 0.1 * f_envelope(xi, kappa, h));

    FValue out;
    // Lower cut: double the distance below the left knee until the bound is met.
    double lower = p_lo - width;
    double lower_bound = 0.0;
    for (int it = 0;; ++it) {
        lower_bound = lower_tail_bound(lower, resolvent_symbol(lower + xi, kappa, h), kappa, h);
        if (lower_bound < target / 10.0)
            break;
        if (it > 200)
            throw AccuracyError("line kernel: no lower cut found", lower_bound);
        lower = p_lo - 2.0 * (p_lo - lower);
    }
    const double upper = std::max(p_hi + width, p_hi + 20.0 / h);

    std::vector<double> pts{lower, p_lo, p_hi, upper};
    for (double knee : {p_lo, p_hi})
        for (double d = width; d < upper - lower; d *= 2.0) {
            pts.push_back(knee - d);
            pts.push_back(knee + d);
        }
    std::erase_if(pts, [&](double p) { return p < lower || p > upper; });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    auto integrand = [&](double eta) {
        return resolvent_symbol(eta, kappa, h) * resolvent_symbol(eta + xi, kappa, h);
    };
    CompensatedSum sum;
    double err_total = lower_bound;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double err = 0.0;
        sum.add(bisect(integrand, pts[i], pts[i + 1], 0.1 * target / pts.size(), 20, err, out.evaluations) /
                two_pi);
        err_total += err / two_pi;
    }
    const double u = upper + shift_constant(kappa, h);
    const double tail = algebraic_tail(u, xi) / two_pi;
    sum.add(tail);
    err_total += std::exp(-40.0) * tail;

    out.value = sum.value();
    out.error_estimate = err_total;
    if (err_total > tol * std::max(1.0, out.value))
        throw AccuracyError("line kernel: quadrature did not reach the requested accuracy", err_total);
    return out;
}

} // namespace

void FKernelQuery::validate() const
{
    if (!(tol >= 1e-12 && tol <= 1e-3))
        throw InvalidInput("kernel tolerance must lie in [1e-12, 1e-3]");
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw InvalidInput("kappa must be positive");
    if (!(h > 0.0) || !std::isfinite(h))
        throw InvalidInput("depth h must be positive");
    if (!std::isfinite(xi))
        throw InvalidInput("xi must be finite");
    if (geometry == Geometry::circle)
        lattice_index(xi);
}

FValue f_eval_detailed(const FKernelQuery& q)
{
    q.validate();
    FValue v = q.geometry == Geometry::circle ? circle_sum(lattice_index(q.xi), q.kappa, q.h, q.tol)
                                              : line_integral(q.xi, q.kappa, q.h, q.tol);
    if (!(v.value >= 0.0) || !std::isfinite(v.value))
        throw InvariantViolation("kernel value is negative or non-finite");
    return v;
}

double f_eval(const FKernelQuery& q) { return f_eval_detailed(q).value; }

double f_window(int k, double kappa, double h, int k_min, int k_max)
{
    if (k_min >= k_max)
        throw WindowError("empty frequency window");
    CompensatedSum sum;
    const int lo = std::max(k_min, k_min - k);
    const int hi = std::min(k_max, k_max - k);
    for (int j = lo; j < hi; ++j)
        sum.add(resolvent_symbol(two_pi * j, kappa, h) * resolvent_symbol(two_pi * (j + k), kappa, h));
    return sum.value();
}

double f_envelope(double xi, double kappa, double h)
{
    const double ax = std::abs(xi);
    const double front = h * ax * ax / (1.0 + h * ax) + kappa;
    return (std::sqrt((1.0 + h * kappa) / (h * kappa)) + std::log1p(h * ax / (1.0 + h * kappa))) / front;
}

double envelope_ratio(Geometry geometry, double xi, double kappa, double h, double tol)
{
    return f_eval({geometry, xi, kappa, h, tol}) / f_envelope(xi, kappa, h);
}

std::vector<KernelPoint> envelope_reference_grid(Geometry geometry)
{
    std::vector<KernelPoint> out;
    for (int eh = -2; eh <= 2; ++eh) {
        const double h = std::pow(10.0, eh);
        for (int ek = -3; ek <= 3; ++ek) {
            const double kappa = std::pow(10.0, ek) / h;
            if (geometry == Geometry::circle && kappa < 1.0)
                continue;
            for (int i = 0; i <= 24; ++i) {
                double xi = i == 0 ? 0.0 : kappa * std::pow(10.0, -3.0 + 0.25 * i);
                if (geometry == Geometry::circle)
                    xi = two_pi * std::round(xi / two_pi);
                out.push_back({xi, kappa, h});
            }
        }
    }
    return out;
}

std::vector<double> kappa_f_limit(double xi, double h, const std::vector<double>& kappas, Geometry geometry,
                                  double tol)
{
    std::vector<double> out;
    out.reserve(kappas.size());
    for (double kappa : kappas)
        out.push_back(two_pi * kappa * f_eval({geometry, xi, kappa, h, tol}));
    return out;
}

double equi_constant(double h0)
{
    if (!(h0 > 0.0))
        throw InvalidInput("h0 must be positive");
    return two_pi * (4.0 + 1.0 / (two_pi * h0)) + std::numbers::pi / (2.0 * std::sqrt(h0));
}

ThresholdResult threshold_A(double kappa, double h, int samples_per_decade, Geometry geometry)
{
    if (!(kappa >= std::max(1.0, 1.0 / h)))
        throw InvalidInput("threshold search needs kappa >= max(1, 1/h)");
    if (samples_per_decade < 1)
        throw InvalidInput("need at least one sample per decade");
    const double limit = 1.0 / (4.0 * std::numbers::pi);
    std::map<double, double> cache; // ξ → κF
    auto kappa_f = [&](double xi) {
        auto it = cache.find(xi);
        if (it != cache.end())
            return it->second;
        double v = kappa * f_eval({geometry, xi, kappa, h, 1e-10});
        cache.emplace(xi, v);
        return v;
    };

    double worst_xi = 0.0;
    for (int e = 0; e <= 10; ++e) {
        const double A = std::ldexp(1.0, e);
        ThresholdResult res{A, 0.0, 0};
        bool ok = true;
        for (int i = 0; i <= 3 * samples_per_decade && ok; ++i) {
            double xi = A * kappa * std::pow(10.0, static_cast<double>(i) / samples_per_decade);
            if (geometry == Geometry::circle)
                xi = two_pi * std::max(1.0, std::ceil(xi / two_pi));
            const double v = kappa_f(xi);
            ++res.samples;
            res.max_kappa_f = std::max(res.max_kappa_f, v);
            if (v > limit) {
                ok = false;
                worst_xi = xi;
            }
        }
        if (ok)
            return res;
    }
    throw SearchFailure("no A <= 1024 gives kappa*F <= 1/(4 pi); offending xi = " + std::to_string(worst_xi));
}

double f_weighted_sum(const FourierField& q, double kappa, double h, double tol)
{
    const PeriodicGrid& g = q.grid();
    CompensatedSum sum;
    for (int k = 0; k < g.k_hi(); ++k) {
        double w = std::norm(q.coeff(k)) + (k > 0 ? std::norm(q.coeff(-k)) : 0.0);
        if (w == 0.0)
            continue;
        sum.add(w * f_eval({Geometry::circle, PeriodicGrid::frequency(k), kappa, h, tol}));
    }
    return sum.value();
}

double equi_functional(const FourierField& q, double kappa, double h)
{
    if (!(kappa >= std::max(1.0, 1.0 / h)))
        throw InvalidInput("equicontinuity functional needs kappa >= max(1, 1/h)");
    const double C = equi_constant(h);
    return (1.0 + C / std::sqrt(kappa)) * momentum(q) - std::numbers::pi * kappa * f_weighted_sum(q, kappa, h);
}

} // namespace ilw
