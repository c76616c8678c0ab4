#include "ilw/errors.hpp"
#include "ilw/experiments.hpp"

#include <cmath>

namespace ilw {

std::string to_string(EnsembleKind kind) { return kind == EnsembleKind::band_limited ? "band_limited" : "bumps"; }

EnsembleKind parse_ensemble_kind(const std::string& name)
{
    if (name == "band_limited")
        return EnsembleKind::band_limited;
    if (name == "bumps")
        return EnsembleKind::bumps;
    throw InvalidInput("unknown ensemble kind '" + name + "' (expected band_limited or bumps)");
}

void EnsembleSpec::validate() const
{
    if (size < 1)
        throw InvalidInput("ensemble size must be positive");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw InvalidInput("ensemble amplitude must be finite and non-negative");
    if (kind == EnsembleKind::band_limited && (band < 1 || band >= n_modes / 2))
        throw InvalidInput("ensemble band must lie in [1, n_modes/2)");
    if (kind == EnsembleKind::bumps && !(min_width > 0.0 && min_width <= max_width && max_width < 0.5))
        throw InvalidInput("bump widths must satisfy 0 < min_width <= max_width < 1/2");
    PeriodicGrid{n_modes};
}

Json EnsembleSpec::to_json() const
{
    Json j;
    j["seed"] = seed;
    j["size"] = size;
    j["kind"] = to_string(kind);
    j["band"] = band;
    j["amplitude"] = amplitude;
    j["n_modes"] = n_modes;
    j["min_width"] = min_width;
    j["max_width"] = max_width;
    return j;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<FourierField> make_ensemble(const EnsembleSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const PeriodicGrid grid(spec.n_modes);
    std::vector<FourierField> out;
    for (int m = 0; m < spec.size; ++m) {
        if (spec.kind == EnsembleKind::band_limited) {
            std::vector<TrigTerm> terms;
            for (int k = 1; k <= spec.band; ++k) {
                const double a = spec.amplitude * (2.0 * uniform01(rng) - 1.0);
                const double b = spec.amplitude * (2.0 * uniform01(rng) - 1.0);
                terms.push_back({k, a, b});
            }
            out.push_back(trig_field(grid, terms));
            continue;
        }
        const double x0 = uniform01(rng);
        const double w =
            spec.min_width * std::pow(spec.max_width / spec.min_width, uniform01(rng));
        std::vector<double> samples(spec.n_modes);
        for (int i = 0; i < spec.n_modes; ++i) {
            double d = static_cast<double>(i) / spec.n_modes - x0;
            d -= std::round(d);
            // Periodize with the two nearest images; further ones are below e^{-28}.
            double v = 0.0;
            for (int image = -1; image <= 1; ++image) {
                const double e = d + image;
                v += std::exp(-0.5 * e * e / (w * w));
            }
            samples[i] = spec.amplitude * v;
        }
        out.push_back(from_physical(grid, samples));
    }
    return out;
}

} // namespace ilw
