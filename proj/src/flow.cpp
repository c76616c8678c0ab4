#include "ilw/flow.hpp"

#include "ilw/errors.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>

namespace ilw {

namespace {

std::size_t fft_slot(int k, int n) { return static_cast<std::size_t>(((k % n) + n) % n); }

// -∂(q²) on raw ascending coefficients; `cutoff` < 0 disables dealiasing.
void quadratic_term(const std::vector<cplx>& q, const PeriodicGrid& g, int cutoff, std::vector<cplx>& spec,
                    std::vector<cplx>& phys, std::vector<cplx>& out)
{
    const int n = g.n_modes();
    std::fill(spec.begin(), spec.end(), cplx{});
    for (int k = g.k_lo() + 1; k < g.k_hi(); ++k)
        if (cutoff < 0 || std::abs(k) <= cutoff)
            spec[fft_slot(k, n)] = q[g.index(k)];
    const auto& fft = detail::Fft::of(n);
    fft.backward(spec.data(), phys.data());
    for (cplx& v : phys)
        v = v.real() * v.real();
    fft.forward(phys.data(), spec.data());
    const double inv_n = 1.0 / n;
    out[g.index(g.k_lo())] = 0.0;
    for (int k = g.k_lo() + 1; k < g.k_hi(); ++k) {
        if (k == 0 || (cutoff >= 0 && std::abs(k) > cutoff)) {
            out[g.index(k)] = 0.0;
            continue;
        }
        out[g.index(k)] = cplx(0.0, -PeriodicGrid::frequency(k)) * (spec[fft_slot(k, n)] * inv_n);
    }
    // Restore exact Hermitian pairing lost to rounding in the transforms.
    for (int k = 1; k < g.k_hi(); ++k) {
        cplx avg = 0.5 * (out[g.index(k)] + std::conj(out[g.index(-k)]));
        out[g.index(k)] = avg;
        out[g.index(-k)] = std::conj(avg);
    }
}

double l2_of(const std::vector<cplx>& c)
{
    double s = 0.0;
    for (const cplx& v : c)
        s += std::norm(v);
    return std::sqrt(s);
}

} // namespace

// -- FlowSpec ----------------------------------------------------------------

Dispersion FlowSpec::dispersion() const
{
    if (variant == Variant::whitham) {
        if (!m_symbol)
            throw InvalidInput("the Whitham variant needs a dispersion symbol m");
        return Dispersion(*m_symbol, c, h);
    }
    return Dispersion(variant, h);
}

long FlowSpec::n_steps() const
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidInput("time step must be positive");
    if (!(t_final >= 0.0) || !std::isfinite(t_final))
        throw InvalidInput("final time must be non-negative");
    double r = std::round(t_final / dt);
    if (std::abs(r * dt - t_final) > 1e-9 * std::max(1.0, t_final))
        throw InvalidInput("final time is not an integer number of time steps");
    return static_cast<long>(r);
}

void FlowSpec::validate(const PeriodicGrid& grid) const
{
    n_steps();
    if (!(h > 0.0) || !std::isfinite(h))
        throw InvalidInput("depth h must be positive");
    Dispersion d = dispersion();
    double wmax = 0.0;
    for (int k = grid.k_lo(); k < grid.k_hi(); ++k)
        wmax = std::max(wmax, std::abs(d.omega(PeriodicGrid::frequency(k))));
    if (dt * wmax > 1e6)
        throw InvalidInput("dt * max|omega| = " + std::to_string(dt * wmax) + " exceeds 1e6");
}

// -- nonlinearity ------------------------------------------------------------

FourierField nonlinearity(const FourierField& field, bool dealias)
{
    const PeriodicGrid& g = field.grid();
    std::vector<cplx> q(field.coeffs().begin(), field.coeffs().end());
    std::vector<cplx> spec(q.size()), phys(q.size()), out(q.size());
    quadratic_term(q, g, dealias ? g.dealias_cutoff() : -1, spec, phys, out);
    return FourierField(g, std::move(out));
}

// -- Stepper -----------------------------------------------------------------

Stepper::Stepper(const FlowSpec& spec, PeriodicGrid grid)
    : spec_(spec), grid_(grid), cutoff_(spec.dealias ? grid.dealias_cutoff() : -1)
{
    spec_.validate(grid_);
    Dispersion d = spec_.dispersion();
    const std::size_t n = static_cast<std::size_t>(grid_.n_modes());
    half_phase_.resize(n);
    full_phase_.resize(n);
    for (int k = grid_.k_lo(); k < grid_.k_hi(); ++k) {
        double w = d.omega(PeriodicGrid::frequency(k));
        half_phase_[grid_.index(k)] = std::polar(1.0, std::remainder(0.5 * w * spec_.dt, two_pi));
        full_phase_[grid_.index(k)] = std::polar(1.0, std::remainder(w * spec_.dt, two_pi));
    }
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &tmp_, &spec_buf_, &phys_buf_})
        v->assign(n, cplx{});
}

void Stepper::rhs(const std::vector<cplx>& q, std::vector<cplx>& out) const
{
    if (!spec_.nonlinear) {
        std::fill(out.begin(), out.end(), cplx{});
        return;
    }
    quadratic_term(q, grid_, cutoff_, spec_buf_, phys_buf_, out);
}

void Stepper::advance(std::vector<cplx>& q) const
{
    // In the interaction picture v = e^{-iωt} q, classical RK4 on v_t = e^{-iωt} N(e^{iωt} v).
    const std::size_t n = q.size();
    const double dt = spec_.dt;
    const auto& e = half_phase_;
    const auto& e2 = full_phase_;
    if (cutoff_ >= 0)
        for (int k = grid_.k_lo(); k < grid_.k_hi(); ++k)
            if (std::abs(k) > cutoff_)
                q[grid_.index(k)] = 0.0;

    rhs(q, k1_);
    for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = e[i] * (q[i] + 0.5 * dt * k1_[i]);
    rhs(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = e[i] * q[i] + 0.5 * dt * k2_[i];
    rhs(tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i)
        tmp_[i] = e2[i] * q[i] + dt * e[i] * k3_[i];
    rhs(tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
        q[i] = e2[i] * q[i] + dt / 6.0 * (e2[i] * k1_[i] + 2.0 * e[i] * (k2_[i] + k3_[i]) + k4_[i]);

    // Keep the pairing exact so reality never drifts.
    q[grid_.index(grid_.k_lo())] = 0.0;
    q[grid_.index(0)] = q[grid_.index(0)].real();
    for (int k = 1; k < grid_.k_hi(); ++k) {
        cplx avg = 0.5 * (q[grid_.index(k)] + std::conj(q[grid_.index(-k)]));
        q[grid_.index(k)] = avg;
        q[grid_.index(-k)] = std::conj(avg);
    }
}

FourierField Stepper::step(const FourierField& state) const
{
    if (!(state.grid() == grid_))
        throw InvalidInput("state grid does not match the stepper grid");
    std::vector<cplx> q(state.coeffs().begin(), state.coeffs().end());
    advance(q);
    for (const cplx& v : q)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw BlowUp("non-finite coefficient", spec_.dt);
    return FourierField(grid_, std::move(q));
}

FourierField step(const FourierField& state, const FlowSpec& spec)
{
    return Stepper(spec, state.grid()).step(state);
}

// -- evolve ------------------------------------------------------------------

double TrajectorySample::diagnostic(const std::string& name) const
{
    for (const auto& [key, value] : extra)
        if (key == name)
            return value;
    throw InvalidInput("sample has no diagnostic '" + name + "'");
}

std::vector<TrajectorySample> evolve(const FourierField& initial, const FlowSpec& spec, long sample_every,
                                     const std::vector<Observer>& observers)
{
    if (sample_every < 1)
        throw InvalidInput("sampling interval must be at least one step");
    Stepper stepper(spec, initial.grid());
    const Dispersion disp = spec.dispersion();
    const long n_steps = spec.n_steps();

    auto sample = [&](const FourierField& f, double t) {
        TrajectorySample s{t, f, momentum(f), hamiltonian(f, disp), {}};
        for (const Observer& o : observers)
            s.extra.emplace_back(o.name, o.fn(f, t));
        return s;
    };

    std::vector<TrajectorySample> out;
    std::vector<cplx> q(initial.coeffs().begin(), initial.coeffs().end());
    if (spec.dealias)
        for (int k = initial.grid().k_lo(); k < initial.grid().k_hi(); ++k)
            if (std::abs(k) > initial.grid().dealias_cutoff())
                q[initial.grid().index(k)] = 0.0;
    FourierField start(initial.grid(), q);
    out.push_back(sample(start, 0.0));

    const double l2_0 = l2_of(q);
    for (long i = 1; i <= n_steps; ++i) {
        stepper.advance(q);
        double t = static_cast<double>(i) * spec.dt;
        double l2 = l2_of(q);
        if (!std::isfinite(l2))
            throw BlowUp("non-finite coefficient", t);
        if (l2_0 > 0.0 && l2 > 1e3 * l2_0)
            throw BlowUp("L2 norm grew beyond 1000x its initial value", t);
        if (i % sample_every == 0 || i == n_steps)
            out.push_back(sample(FourierField(initial.grid(), q), t));
    }
    return out;
}

} // namespace ilw
