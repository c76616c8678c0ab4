// Regenerates the regression-locked constants of ilw/calibration.hpp: runs
// each reference computation, prints the observed range and the widened
// interval [0.75·min, 1.25·max] rounded outward to five significant digits.

#include "ilw/experiments.hpp"
#include "ilw/fkernel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

using namespace ilw;

namespace {

double round_sig(double x, bool up)
{
    if (x == 0.0)
        return 0.0;
    const double e = std::floor(std::log10(std::abs(x))) - 4;
    const double scale = std::pow(10.0, e);
    return (up ? std::ceil(x / scale) : std::floor(x / scale)) * scale;
}

void emit_interval(const std::string& name, double lo, double hi)
{
    std::printf("// observed [%.6g, %.6g]\n", lo, hi);
    std::printf("inline constexpr double %s_lo = %.5g;\n", name.c_str(), round_sig(0.75 * lo, false));
    std::printf("inline constexpr double %s_hi = %.5g;\n\n", name.c_str(), round_sig(1.25 * hi, true));
}

void emit_bound(const std::string& name, double observed)
{
    std::printf("// observed %.6g\n", observed);
    std::printf("inline constexpr double %s = %.5g;\n\n", name.c_str(), round_sig(1.25 * observed, true));
}

double max_check_value(const ExperimentReport& r, const std::string& prefix)
{
    double v = 0.0;
    for (const Check& c : r.checks)
        if (c.name.rfind(prefix, 0) == 0)
            v = std::max(v, c.value);
    return v;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Recompute the locked calibration constants"};
    std::vector<std::string> only;
    app.add_option("--only", only, "Restrict to: a_ratio, envelope, apriori, equicontinuity, limits");
    CLI11_PARSE(app, argc, argv);
    auto wanted = [&](const std::string& n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

    if (wanted("a_ratio")) {
        double lo = INFINITY, hi = 0.0;
        for (int i = 1; i <= 5000; ++i) {
            const double xi = i * 0.01;
            const double r = symbol_a(xi, 1.0) / (xi * xi / (1.0 + xi));
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        emit_interval("a_ratio", lo, hi);
    }
    if (wanted("envelope")) {
        for (Geometry g : {Geometry::line, Geometry::circle}) {
            double lo = INFINITY, hi = 0.0;
            for (const KernelPoint& p : envelope_reference_grid(g)) {
                const double r = envelope_ratio(g, p.xi, p.kappa, p.h);
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
            emit_interval(g == Geometry::line ? "envelope_line" : "envelope_circle", lo, hi);
        }
    }
    if (wanted("apriori")) {
        const ExperimentReport r = standard_experiment("apriori").run();
        emit_bound("apriori_ratio_bound", r.results["sup_ratio"].get<double>());
    }
    if (wanted("equicontinuity")) {
        const ExperimentReport r = standard_experiment("equicontinuity").run();
        emit_bound("equicontinuity_eps", r.results["E"].back().get<double>());
        const ExperimentReport l2 = standard_experiment("equicontinuity-l2").run();
        emit_bound("equicontinuity_tail", l2.results["tail_mass"].front().get<double>());
    }
    if (wanted("limits")) {
        emit_bound("shallow_ratio_bound", max_check_value(standard_experiment("shallow").run(), "sup_t norm ratio"));
        emit_bound("deep_ratio_bound", max_check_value(standard_experiment("deep").run(), "sup_t norm ratio"));
    }
    return 0;
}
