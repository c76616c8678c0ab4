#include "ilw/errors.hpp"
#include "ilw/operators.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace ilw {

namespace {

double resolvent_symbol(double eta, double kappa, double h)
{
    if (eta < 0.0 && -2.0 * h * eta > exp_budget)
        return 0.0;
    return 1.0 / (symbol_a(eta, h) + kappa);
}

// ∫₀^∞ ds / (A + B s + h s²); see fkernel.cpp for the derivation.
double quadratic_tail(double A, double B, double h)
{
    if (!std::isfinite(B))
        return 0.0;
    const double D = B * B - 4.0 * h * A;
    if (D > 0.0) {
        const double sd = std::sqrt(D);
        return 2.0 * std::log((B + sd) / std::sqrt(4.0 * h * A)) / sd;
    }
    if (D < 0.0) {
        const double sd = std::sqrt(-D);
        return 2.0 * (0.5 * std::numbers::pi - std::atan(B / sd)) / sd;
    }
    return 2.0 / B;
}

struct Neumaier {
    double sum = 0.0, carry = 0.0;
    void add(double x)
    {
        double t = sum + x;
        carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

// Σ_{j∈Z} Π_p r(2π(j + s_p)) for sorted integer shifts, at least two of them.
double lattice_sum(const std::vector<int>& shifts, double kappa, double h)
{
    const int s_min = shifts.front();
    const int s_max = shifts.back();
    const double c = kappa - 0.5 / h;
    auto term = [&](long j) {
        double t = 1.0;
        for (int s : shifts)
            t *= resolvent_symbol(two_pi * static_cast<double>(j + s), kappa, h);
        return t;
    };

    // Direct sum up to J, where every position is ≥ 20/h and far beyond the shifts.
    double spread = 0.0;
    for (int s : shifts)
        spread = std::max(spread, std::abs(two_pi * s + c));
    const double x_needed = std::max({20.0 / h, 10.0 * spread, 400.0});
    const long J = static_cast<long>(std::ceil(x_needed / two_pi)) - s_min;
    Neumaier sum;
    for (long j = -s_min; j < J; ++j)
        sum.add(term(j));

    // Euler-Maclaurin tail in j for f(j) = Π 1/(2πj + d_p), d_p = 2πs_p + c.
    {
        const std::size_t m = shifts.size();
        const double X = two_pi * static_cast<double>(J);
        std::vector<double> d;
        for (int s : shifts)
            d.push_back(two_pi * s + c);
        double f = 1.0, g1 = 0.0, g2 = 0.0, g3 = 0.0;
        for (double dp : d) {
            const double inv = 1.0 / (X + dp);
            f *= inv;
            g1 += inv;
            g2 += inv * inv;
            g3 += inv * inv * inv;
        }
        const double df = -two_pi * f * g1;
        const double d3f = -two_pi * two_pi * two_pi * f * (g1 * g1 * g1 + 3.0 * g1 * g2 + 2.0 * g3);
        // ∫_J^∞ f dj = (1/2π) ∫₀¹ X u^{m-2} Π 1/(X + d_p u) du   (t = X/u).
        auto integrand = [&](double u) {
            double v = X * std::pow(u, static_cast<double>(m) - 2.0);
            for (double dp : d)
                v /= X + dp * u;
            return v;
        };
        const double integral = boost::math::quadrature::gauss<double, 30>::integrate(integrand, 0.0, 1.0) / two_pi;
        sum.add(integral + 0.5 * f - df / 12.0 + d3f / 720.0);
    }

    // Downward: the lowest position decays super-exponentially.
    for (long j = -s_min - 1;; --j) {
        const double p0 = two_pi * static_cast<double>(j + s_min);
        if (-2.0 * h * p0 > exp_budget)
            break;
        sum.add(term(j));
        double others = 1.0;
        for (std::size_t i = 1; i < shifts.size(); ++i) {
            const double p = two_pi * static_cast<double>(j + shifts[i]);
            others *= p <= 0.0 ? resolvent_symbol(p, kappa, h) : 1.0 / kappa;
        }
        const double bound =
            others * quadratic_tail(symbol_a(p0, h) + kappa, std::expm1(-2.0 * h * p0), h) / two_pi;
        if (bound < 1e-17 * std::abs(sum.value()))
            break;
        if (j < -s_max - 10'000'000)
            throw AccuracyError("lattice trace: negative tail did not close", bound);
    }
    return sum.value();
}

} // namespace

TraceFactor TraceFactor::mult(const FourierField& f, double threshold)
{
    TraceFactor out{false, {}};
    const double cut = threshold * f.max_abs_coeff();
    const PeriodicGrid& g = f.grid();
    for (int k = g.k_lo() + 1; k < g.k_hi(); ++k) {
        const cplx v = f.coeff(k);
        if (std::abs(v) > cut && v != cplx{})
            out.coeffs.emplace_back(k, v);
    }
    return out;
}

LatticeTrace lattice_trace(const std::vector<TraceFactor>& word, double kappa, double h)
{
    if (!(kappa > 0.0) || !(h > 0.0))
        throw InvalidInput("lattice trace needs kappa > 0 and h > 0");
    int n_res = 0;
    for (const TraceFactor& f : word)
        n_res += f.resolvent ? 1 : 0;
    if (n_res < 2)
        throw InvalidInput("lattice trace needs at least two resolvent factors to converge");

    // Remaining reach of the multiplication factors after position i, to prune
    // tuples that cannot close.
    std::vector<int> reach(word.size() + 1, 0);
    for (std::size_t i = word.size(); i-- > 0;) {
        int r = 0;
        for (const auto& [k, v] : word[i].coeffs)
            r = std::max(r, std::abs(k));
        reach[i] = reach[i + 1] + r;
    }

    struct Bucket {
        cplx coeff;
        double abs_coeff = 0.0;
    };
    std::map<std::vector<int>, Bucket> buckets;
    std::vector<int> positions;
    auto walk = [&](auto&& self, std::size_t i, int offset, cplx coeff) -> void {
        if (std::abs(offset) > reach[i])
            return;
        if (i == word.size()) {
            if (offset != 0)
                return;
            std::vector<int> key = positions;
            std::sort(key.begin(), key.end());
            Bucket& b = buckets[key];
            b.coeff += coeff;
            b.abs_coeff += std::abs(coeff);
            return;
        }
        const TraceFactor& f = word[i];
        if (f.resolvent) {
            positions.push_back(offset);
            self(self, i + 1, offset, coeff);
            positions.pop_back();
            return;
        }
        for (const auto& [k, v] : f.coeffs)
            self(self, i + 1, offset - k, coeff * v);
    };
    walk(walk, 0, 0, cplx(1.0));

    LatticeTrace out;
    for (const auto& [key, b] : buckets) {
        const double S = lattice_sum(key, kappa, h);
        out.value += b.coeff * S;
        out.abs_scale += b.abs_coeff * S;
    }
    return out;
}

} // namespace ilw
