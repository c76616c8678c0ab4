#pragma once

// Time evolution of q_t = i ω(D) q - ∂(q²) on the circle by integrating-factor
// RK4: the linear phase e^{iωt} is applied exactly, RK4 handles the rest.

#include "ilw/spectral.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ilw {

struct FlowSpec {
    Variant variant = Variant::ilw;
    double h = 1.0;
    double c = 0.0;                              // Whitham only
    std::optional<MultiplierSymbol> m_symbol;    // Whitham only
    double dt = 1e-4;
    double t_final = 1.0;
    bool dealias = true;
    bool nonlinear = true;

    Dispersion dispersion() const;
    /// Number of steps to reach t_final; dt must divide it.
    long n_steps() const;
    void validate(const PeriodicGrid& grid) const;
};

/// -∂(q²), with the product formed under the 2/3 rule when `dealias` is set.
FourierField nonlinearity(const FourierField& field, bool dealias = true);

/// Precomputed phases and workspace for repeated steps on one grid.
class Stepper {
public:
    Stepper(const FlowSpec& spec, PeriodicGrid grid);

    /// Advances in place by one dt.
    void advance(std::vector<cplx>& coeffs) const;
    FourierField step(const FourierField& state) const;

    const PeriodicGrid& grid() const { return grid_; }

private:
    void rhs(const std::vector<cplx>& q, std::vector<cplx>& out) const;

    FlowSpec spec_;
    PeriodicGrid grid_;
    int cutoff_;
    std::vector<cplx> half_phase_; // e^{iω dt/2}
    std::vector<cplx> full_phase_; // e^{iω dt}
    mutable std::vector<cplx> k1_, k2_, k3_, k4_, tmp_, spec_buf_, phys_buf_;
};

FourierField step(const FourierField& state, const FlowSpec& spec);

struct Observer {
    std::string name;
    std::function<double(const FourierField&, double t)> fn;
};

struct TrajectorySample {
    double t = 0.0;
    FourierField field;
    double M = 0.0;
    double H = 0.0;
    std::vector<std::pair<std::string, double>> extra;

    double diagnostic(const std::string& name) const;
};

/// Runs to spec.t_final, sampling at t = 0 and every `sample_every` steps
/// (and at the final time). Deterministic in its inputs.
std::vector<TrajectorySample> evolve(const FourierField& initial, const FlowSpec& spec, long sample_every,
                                     const std::vector<Observer>& observers = {});

} // namespace ilw
