#include "ilw/experiments.hpp"

#include "ilw/errors.hpp"
#include "ilw/fkernel.hpp"
#include "ilw/format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace ilw {

namespace {

Json window_json(const FrequencyWindow& w) { return Json::array({w.k_min, w.k_max}); }

long sampling_stride(const FlowSpec& fs, int samples)
{
    const long n = fs.n_steps();
    if (samples < 1 || n % samples != 0)
        throw InvalidInput("the step count " + std::to_string(n) + " is not a multiple of samples = " +
                           std::to_string(samples));
    return n / samples;
}

double relative_change(double value, double reference)
{
    const double d = std::abs(value - reference);
    return reference != 0.0 ? d / std::abs(reference) : d;
}

bool near_time(double t, const std::vector<double>& times)
{
    for (double s : times)
        if (std::abs(t - s) < 1e-9)
            return true;
    return false;
}

double hs_norm_full(const FourierField& q, double kappa, double h) { return std::sqrt(f_weighted_sum(q, kappa, h)); }

FlowSpec flow(Variant v, double h, double dt, double t_final)
{
    FlowSpec fs;
    fs.variant = v;
    fs.h = h;
    fs.dt = dt;
    fs.t_final = t_final;
    return fs;
}

} // namespace

// -- spec serialization ------------------------------------------------------

Json AlphaConservationSpec::to_json() const
{
    Json j;
    j["h"] = h;
    j["n_modes"] = n_modes;
    j["dt"] = dt;
    j["t_final"] = t_final;
    j["samples"] = samples;
    j["delta"] = delta;
    j["alpha_window"] = window_json(alpha_window);
    j["half_window"] = window_json(half_window);
    j["eigen_window"] = window_json(eigen_window);
    j["eigen_count"] = eigen_count;
    j["eigen_times"] = eigen_times;
    j["tolerances"] = {{"alpha_drift", alpha_drift_tol}, {"window", window_tol},
                       {"momentum", momentum_tol},       {"hamiltonian", hamiltonian_tol},
                       {"hs_ratio_lo", hs_ratio_lo},     {"hs_ratio_hi", hs_ratio_hi},
                       {"eigen_drift", eigen_drift_tol}};
    return j;
}

Json AprioriSpec::to_json() const
{
    Json j;
    j["s"] = s;
    j["h_list"] = h_list;
    j["n_modes"] = n_modes;
    j["dt"] = dt;
    j["t_final"] = t_final;
    j["samples"] = samples;
    j["delta"] = delta;
    j["tolerances"] = {{"ratio_bound", bound}};
    return j;
}

Json EquicontinuitySpec::to_json() const
{
    Json j;
    j["s"] = s;
    j["h_list"] = h_list;
    j["kappas"] = kappas;
    j["n_modes"] = n_modes;
    j["dt"] = dt;
    j["t_final"] = t_final;
    j["samples"] = samples;
    j["tolerances"] = {{"eps", eps_lock}, {"tail", tail_lock}};
    return j;
}

Json LimitSpec::to_json() const
{
    Json j;
    j["s"] = s;
    j["h_list"] = h_list;
    j["n_modes"] = n_modes;
    j["dt"] = dt;
    j["t_final"] = t_final;
    j["samples"] = samples;
    j["delta"] = delta;
    j["tolerances"] = {{"norm_ratio_bound", norm_bound}};
    return j;
}

Json IllusorySpec::to_json() const
{
    Json j;
    j["c"] = c;
    j["m_symbol"] = m.name();
    j["symbol_h"] = symbol_h;
    j["n_modes"] = n_modes;
    j["dt"] = dt;
    j["t_final"] = t_final;
    j["samples"] = samples;
    j["n_max"] = n_max;
    j["tolerances"] = {{"eigen_drift", drift_tol}, {"mean", mean_tol}};
    return j;
}

LimitSpec shallow_defaults()
{
    LimitSpec s;
    s.h_list = {0.2, 0.1, 0.05};
    s.dt = 1e-5;
    s.t_final = 0.25;
    s.norm_bound = calibration::shallow_ratio_bound;
    return s;
}

LimitSpec deep_defaults()
{
    LimitSpec s;
    s.h_list = {2.0, 8.0, 32.0};
    s.dt = 1e-4;
    s.t_final = 0.25;
    s.norm_bound = calibration::deep_ratio_bound;
    return s;
}

// -- α conservation ----------------------------------------------------------

ExperimentReport run_alpha_conservation(const FourierField& q0, const AlphaConservationSpec& spec)
{
    ExperimentReport rep;
    rep.name = "alpha_conservation";
    rep.parameters = spec.to_json();
    const double h = spec.h;
    const FourierField q = q0.resampled(PeriodicGrid(spec.n_modes));

    const KappaChoice kc = choose_kappa(q, h, spec.delta);
    const double kappa = kc.kappa;
    rep.results["kappa"] = kappa;
    rep.results["kappa_doublings"] = kc.doublings;
    rep.results["kappa_closed_form"] = kc.closed_form;
    rep.results["hs_norm_initial"] = kc.hs_norm;

    // Window oracle before any conservation claim.
    const AlphaResult a_half = alpha(kappa, q, h, spec.half_window, Fill::band_limited);
    const AlphaResult a_full = alpha(kappa, q, h, spec.alpha_window, Fill::band_limited);
    const double window_gap = relative_change(a_half.alpha, a_full.alpha);
    rep.results["alpha_half_window"] = a_half.alpha;
    rep.check_below("alpha on W vs 2W", window_gap, spec.window_tol);

    FlowSpec fs = flow(Variant::ilw, h, spec.dt, spec.t_final);
    const std::vector<TrajectorySample> traj = evolve(q, fs, sampling_stride(fs, spec.samples));

    std::vector<double> alphas, hs, eig_times;
    std::vector<std::vector<double>> eigs;
    for (const TrajectorySample& s : traj) {
        const AlphaResult a = alpha(kappa, s.field, h, spec.alpha_window, Fill::band_limited);
        if (!a.converged)
            throw InvariantViolation("alpha not converged at t = " + std::to_string(s.t) +
                                     " (|A|_HS = " + std::to_string(a.hs_norm) + ")");
        Json row;
        row["t"] = s.t;
        row["alpha"] = a.alpha;
        row["hs_norm_window"] = a.hs_norm;
        row["hs_norm"] = hs_norm_full(s.field, kappa, h);
        row["M"] = s.M;
        row["H"] = s.H;
        alphas.push_back(a.alpha);
        hs.push_back(row["hs_norm"].get<double>());
        if (near_time(s.t, spec.eigen_times)) {
            eigs.push_back(lax_lowest_eigenvalues(s.field, h, spec.eigen_window, spec.eigen_count));
            eig_times.push_back(s.t);
            row["eigenvalues"] = eigs.back();
        }
        rep.series.push_back(row);
    }

    double alpha_drift = 0.0, m_drift = 0.0, h_drift = 0.0, r_min = 1.0, r_max = 1.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        alpha_drift = std::max(alpha_drift, relative_change(alphas[i], alphas[0]));
        m_drift = std::max(m_drift, relative_change(traj[i].M, traj[0].M));
        h_drift = std::max(h_drift, relative_change(traj[i].H, traj[0].H));
        if (hs[0] > 0.0) {
            r_min = std::min(r_min, hs[i] / hs[0]);
            r_max = std::max(r_max, hs[i] / hs[0]);
        }
    }
    double eig_drift = 0.0;
    for (std::size_t a = 0; a < eigs.size(); ++a)
        for (std::size_t b = a + 1; b < eigs.size(); ++b)
            for (std::size_t i = 0; i < eigs[a].size(); ++i)
                eig_drift = std::max(eig_drift, std::abs(eigs[a][i] - eigs[b][i]));

    rep.results["alpha_initial"] = alphas.front();
    rep.results["alpha_drift"] = alpha_drift;
    rep.results["momentum_drift"] = m_drift;
    rep.results["hamiltonian_drift"] = h_drift;
    rep.results["hs_ratio_min"] = r_min;
    rep.results["hs_ratio_max"] = r_max;
    rep.results["eigen_times"] = eig_times;
    rep.results["eigen_drift"] = eig_drift;

    rep.check_below("relative alpha drift", alpha_drift, spec.alpha_drift_tol);
    rep.check_below("relative momentum drift", m_drift, spec.momentum_tol);
    rep.check_below("relative Hamiltonian drift", h_drift, spec.hamiltonian_tol);
    rep.check_within("min HS-norm ratio", r_min, spec.hs_ratio_lo, spec.hs_ratio_hi);
    rep.check_within("max HS-norm ratio", r_max, spec.hs_ratio_lo, spec.hs_ratio_hi);
    rep.check_true("eigenvalues sampled at every requested time", eig_times.size() == spec.eigen_times.size());
    rep.check_below("lowest-eigenvalue drift", eig_drift, spec.eigen_drift_tol);
    return rep;
}

// -- a priori bounds ---------------------------------------------------------

ExperimentReport run_apriori(const std::vector<FourierField>& family, const AprioriSpec& spec)
{
    ExperimentReport rep;
    rep.name = "apriori";
    rep.parameters = spec.to_json();
    if (family.empty())
        throw InvalidInput("apriori needs at least one initial datum");

    Json table = Json::array();
    std::vector<double> per_h_sup;
    double overall = 0.0, s0_defect = 0.0;
    bool kappa_monotone = true;
    for (double h : spec.h_list) {
        double sup_h = 0.0;
        for (std::size_t m = 0; m < family.size(); ++m) {
            const FourierField q = family[m].resampled(PeriodicGrid(spec.n_modes));
            const double kappa = choose_kappa(q, h, spec.delta, Regime::deep, spec.s).kappa;
            const double kappa2 = choose_kappa(2.0 * q, h, spec.delta, Regime::deep, spec.s).kappa;
            const double floor = std::max(1.0, 1.0 / h);
            if (!(kappa2 > kappa || (kappa2 == kappa && kappa == floor)))
                kappa_monotone = false;

            FlowSpec fs = flow(Variant::ilw, h, spec.dt, spec.t_final);
            const auto traj = evolve(q, fs, sampling_stride(fs, spec.samples));
            const double n0 = sobolev_norm(q, {spec.s, kappa});
            double sup = 0.0;
            for (const TrajectorySample& s : traj) {
                const double r = n0 > 0.0 ? sobolev_norm(s.field, {spec.s, kappa}) / n0 : 1.0;
                sup = std::max(sup, r);
                if (spec.s == 0.0)
                    s0_defect = std::max(s0_defect, std::abs(r - 1.0));
                rep.series.push_back({{"member", m}, {"h", h}, {"t", s.t}, {"ratio", r}});
            }
            table.push_back({{"member", m}, {"h", h}, {"kappa0", kappa}, {"kappa0_doubled_amplitude", kappa2},
                             {"sup_ratio", sup}});
            sup_h = std::max(sup_h, sup);
        }
        per_h_sup.push_back(sup_h);
        overall = std::max(overall, sup_h);
    }
    rep.results["runs"] = table;
    rep.results["sup_ratio_per_h"] = per_h_sup;
    rep.results["sup_ratio"] = overall;
    for (std::size_t i = 0; i < spec.h_list.size(); ++i)
        rep.check_below("sup_t ratio at h = " + fmt_double(spec.h_list[i]), per_h_sup[i], spec.bound,
                        "one locked bound for every h");
    rep.check_true("kappa0 grows when the amplitude doubles", kappa_monotone,
                   "strictly, unless kappa0 sits at the floor max(1, 1/h)");
    if (spec.s == 0.0)
        rep.check_below("momentum identity |R - 1| at s = 0", s0_defect, 1e-9);
    return rep;
}

// -- equicontinuity ----------------------------------------------------------

ExperimentReport run_equicontinuity(const std::vector<FourierField>& ensemble, const EquicontinuitySpec& spec)
{
    ExperimentReport rep;
    rep.name = "equicontinuity";
    rep.parameters = spec.to_json();
    if (spec.s > 0.0 || spec.s <= -0.5)
        throw InvalidInput("s must lie in (-1/2, 0]");
    const bool l2 = spec.s == 0.0;

    const std::size_t nk = spec.kappas.size();
    std::vector<double> E(nk, 0.0), tail(nk, 0.0);
    double min_functional = INFINITY;
    std::vector<std::vector<double>> A_by_h;
    if (l2)
        for (double h : spec.h_list) {
            std::vector<double> As;
            for (double kappa : spec.kappas)
                As.push_back(threshold_A(kappa, h).A);
            A_by_h.push_back(As);
        }

    for (std::size_t ih = 0; ih < spec.h_list.size(); ++ih) {
        const double h = spec.h_list[ih];
        for (std::size_t m = 0; m < ensemble.size(); ++m) {
            const FourierField q = ensemble[m].resampled(PeriodicGrid(spec.n_modes));
            FlowSpec fs = flow(Variant::ilw, h, spec.dt, spec.t_final);
            const auto traj = evolve(q, fs, sampling_stride(fs, spec.samples));
            for (const TrajectorySample& s : traj) {
                Json row{{"member", m}, {"h", h}, {"t", s.t}};
                std::vector<double> norms;
                for (std::size_t i = 0; i < nk; ++i) {
                    const double kappa = spec.kappas[i];
                    const double n = sobolev_norm(s.field, {spec.s, kappa});
                    E[i] = std::max(E[i], n);
                    norms.push_back(n);
                    if (l2) {
                        const double cut = A_by_h[ih][i] * kappa;
                        tail[i] = std::max(tail[i], tail_mass(s.field, cut, 0.0));
                        min_functional = std::min(min_functional, equi_functional(s.field, kappa, h));
                    }
                }
                row["norms"] = norms;
                rep.series.push_back(row);
            }
        }
    }
    rep.results["E"] = E;
    if (l2) {
        rep.results["A"] = A_by_h;
        rep.results["tail_mass"] = tail;
        rep.results["min_equi_functional"] = min_functional;
        rep.check_below("sup tail mass at the smallest kappa", tail.front(), spec.tail_lock);
        rep.check_at_least("equi_functional is non-negative", min_functional, 0.0);
        rep.check_true("tail mass non-increasing in kappa", std::is_sorted(tail.rbegin(), tail.rend()));
    } else {
        rep.check_decreasing("E(kappa) strictly decreasing", E);
        rep.check_below("E at the largest kappa", ensemble.empty() ? 0.0 : E.back(), spec.eps_lock);
    }
    return rep;
}

// -- deep and shallow limits -------------------------------------------------

namespace {

struct LimitRun {
    double distance;
    double kappa;
    double ratio;
};

ExperimentReport run_limit(const FourierField& u0, const LimitSpec& spec, bool shallow)
{
    ExperimentReport rep;
    rep.name = shallow ? "shallow" : "deep";
    rep.parameters = spec.to_json();
    const FourierField u = u0.resampled(PeriodicGrid(spec.n_modes));

    FlowSpec ref = flow(shallow ? Variant::kdv : Variant::bo, 1.0, spec.dt, spec.t_final);
    const auto ref_traj = evolve(u, ref, ref.n_steps());
    const FourierField& u_ref = ref_traj.back().field;

    std::vector<double> distances, ratios;
    Json table = Json::array();
    for (double h : spec.h_list) {
        double kappa, weight;
        if (shallow) {
            kappa = choose_kappa((h / 3.0) * u, h, spec.delta, Regime::shallow, spec.s).kappa;
            weight = std::sqrt(kappa / h); // μ₀
        } else {
            kappa = choose_kappa(u, h, spec.delta, Regime::deep, spec.s).kappa;
            weight = kappa;
        }
        FlowSpec fs = flow(shallow ? Variant::ilw_rescaled : Variant::ilw, h, spec.dt, spec.t_final);
        const auto traj = evolve(u, fs, sampling_stride(fs, spec.samples));
        const double n0 = sobolev_norm(u, {spec.s, weight});
        double sup = 0.0;
        for (const TrajectorySample& s : traj) {
            const double r = n0 > 0.0 ? sobolev_norm(s.field, {spec.s, weight}) / n0 : 1.0;
            sup = std::max(sup, r);
            rep.series.push_back({{"h", h}, {"t", s.t}, {"ratio", r}});
        }
        const double d = l2_norm(traj.back().field - u_ref);
        distances.push_back(d);
        ratios.push_back(sup);
        table.push_back({{"h", h},
                         {"kappa", kappa},
                         {shallow ? "mu0" : "kappa0", weight},
                         {"distance", d},
                         {"sup_ratio", sup}});
    }
    rep.results["runs"] = table;
    rep.results["distances"] = distances;
    rep.results["reference"] = shallow ? "kdv" : "bo";
    const std::string ref_name = shallow ? "KdV" : "BO";
    rep.check_decreasing("L2 distance to " + ref_name + " strictly decreasing along h_list", distances);
    for (std::size_t i = 0; i < ratios.size(); ++i)
        rep.check_below("sup_t norm ratio at h = " + fmt_double(spec.h_list[i]), ratios[i], spec.norm_bound,
                        "one locked bound for every h");
    return rep;
}

} // namespace

ExperimentReport run_shallow(const FourierField& u0, const LimitSpec& spec)
{
    for (double h : spec.h_list)
        if (!(h > 0.0 && h <= 1.0))
            throw InvalidInput("shallow depths must lie in (0, 1]");
    return run_limit(u0, spec, true);
}

ExperimentReport run_deep(const FourierField& q0, const LimitSpec& spec)
{
    for (double h : spec.h_list)
        if (!(h > 0.0))
            throw InvalidInput("depths must be positive");
    return run_limit(q0, spec, false);
}

// -- illusory pair -----------------------------------------------------------

ExperimentReport run_illusory(const FourierField& q0, const IllusorySpec& spec)
{
    ExperimentReport rep;
    rep.name = "illusory";
    rep.parameters = spec.to_json();
    const FourierField q = q0.resampled(PeriodicGrid(spec.n_modes));

    FlowSpec fs = flow(Variant::whitham, spec.symbol_h, spec.dt, spec.t_final);
    fs.c = spec.c;
    fs.m_symbol = spec.m;
    const auto traj = evolve(q, fs, sampling_stride(fs, spec.samples));

    const int band = spec.n_modes / 2 - 1;
    const FrequencyWindow w{-4 * band, 4 * band + 1};
    const double mean0 = q.coeff(0).real();
    double drift = 0.0, mean_drift = 0.0, comm = 0.0;
    for (const TrajectorySample& s : traj) {
        const IllusoryChecks ic =
            illusory_checks(s.field, spec.c, spec.m, w, band, spec.n_max, spec.symbol_h, Fill::band_limited);
        double d = 0.0;
        for (int n = -spec.n_max; n <= spec.n_max; ++n)
            d = std::max(d, std::abs(ic.eigenvalues[n + spec.n_max] - (two_pi * n - mean0)));
        drift = std::max(drift, d);
        mean_drift = std::max(mean_drift, std::abs(s.field.coeff(0).real() - mean0));
        comm = std::max(comm, ic.commutator_residual);
        rep.series.push_back({{"t", s.t}, {"eigen_drift", d}, {"mean", s.field.coeff(0).real()},
                              {"commutator_residual", ic.commutator_residual}});
    }
    rep.results["eigen_drift"] = drift;
    rep.results["mean_drift"] = mean_drift;
    rep.results["commutator_residual"] = comm;
    rep.check_below("mean drift", mean_drift, spec.mean_tol);
    rep.check_below("eigenvalue drift from {2 pi n - mean(0)}", drift, spec.drift_tol);
    return rep;
}

// -- job runner --------------------------------------------------------------

std::vector<ExperimentReport> run_jobs(const std::vector<Job>& jobs, int threads)
{
    std::vector<ExperimentReport> out(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                out[i] = jobs[i].run();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i)
        pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool)
        t.join();
    for (const std::exception_ptr& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

std::vector<std::string> standard_experiment_names()
{
    return {"alpha-conservation", "apriori", "equicontinuity", "equicontinuity-l2", "shallow", "deep", "illusory"};
}

Job standard_experiment(const std::string& name, std::uint64_t seed)
{
    const PeriodicGrid g(64);
    const FourierField two_mode = trig_field(g, {{1, 1.0}, {2, 0.5}});
    const FourierField cosine = trig_field(g, {{1, 1.0}});
    auto with_provenance = [seed](ExperimentReport r) {
        r.provenance = make_provenance(seed, r.parameters);
        return r;
    };

    if (name == "alpha-conservation")
        return {name, [=] { return with_provenance(run_alpha_conservation(two_mode, {})); }};
    if (name == "apriori")
        return {name, [=] {
                    EnsembleSpec es;
                    es.seed = seed;
                    es.size = 4;
                    es.band = 3;
                    std::vector<FourierField> family = make_ensemble(es);
                    family.insert(family.begin(), two_mode);
                    ExperimentReport r = run_apriori(family, {});
                    r.parameters["family"] = es.to_json();
                    return with_provenance(r);
                }};
    if (name == "equicontinuity")
        return {name, [=] {
                    EnsembleSpec es;
                    es.seed = seed;
                    ExperimentReport r = run_equicontinuity(make_ensemble(es), {});
                    r.parameters["ensemble"] = es.to_json();
                    return with_provenance(r);
                }};
    if (name == "equicontinuity-l2")
        return {name, [=] {
                    EnsembleSpec es;
                    es.seed = seed;
                    EquicontinuitySpec spec;
                    spec.s = 0.0;
                    ExperimentReport r = run_equicontinuity(make_ensemble(es), spec);
                    r.name = "equicontinuity_l2";
                    r.parameters["ensemble"] = es.to_json();
                    return with_provenance(r);
                }};
    if (name == "shallow")
        return {name, [=] { return with_provenance(run_shallow(cosine, shallow_defaults())); }};
    if (name == "deep")
        return {name, [=] { return with_provenance(run_deep(cosine, deep_defaults())); }};
    if (name == "illusory")
        return {name, [=] { return with_provenance(run_illusory(cosine, {})); }};
    throw InvalidInput("unknown experiment '" + name + "'");
}

} // namespace ilw
