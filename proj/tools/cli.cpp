#include "cli.hpp"

#include "ilw/errors.hpp"
#include "ilw/experiments.hpp"
#include "ilw/fkernel.hpp"
#include "ilw/format.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ilw::cli {

namespace {

// "k:a:b,k:a:b": a·cos(2πkx) + b·sin(2πkx) terms.
FourierField parse_trig(const std::string& text, int n_modes)
{
    std::vector<TrigTerm> terms;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::vector<std::string> parts;
        std::stringstream is(item);
        std::string p;
        while (std::getline(is, p, ':'))
            parts.push_back(p);
        if (parts.size() < 2 || parts.size() > 3)
            throw InvalidInput("bad trig term '" + item + "' (expected k:a or k:a:b)");
        const double k = parse_double(parts[0]);
        if (k != std::floor(k) || k < 0)
            throw InvalidInput("bad mode '" + parts[0] + "' in trig term");
        terms.push_back({static_cast<int>(k), parse_double(parts[1]), parts.size() == 3 ? parse_double(parts[2]) : 0.0});
    }
    if (terms.empty())
        throw InvalidInput("empty --init");
    return trig_field(PeriodicGrid(n_modes), terms);
}

struct FieldOptions {
    std::string init = "1:1:0";
    std::string init_file;
    int n_modes = 64;

    void add(CLI::App* app, int default_modes)
    {
        n_modes = default_modes;
        app->add_option("--init", init, "Initial field as k:a:b terms, a*cos(2 pi k x) + b*sin(2 pi k x)")
            ->capture_default_str();
        app->add_option("--init-file", init_file, "Initial field from a snapshot CSV (k,re,im); overrides --init");
        app->add_option("--n-modes", n_modes, "Grid size (even)")->capture_default_str();
    }

    FourierField field() const
    {
        if (init_file.empty())
            return parse_trig(init, n_modes);
        std::ifstream in(init_file);
        if (!in)
            throw InvalidInput("cannot read " + init_file);
        return read_snapshot_csv(in).resampled(PeriodicGrid(n_modes));
    }
};

/// The subcommand's options as they were finally applied, defaults included.
Json effective_config(const CLI::App* app)
{
    Json j;
    j["subcommand"] = app->get_name();
    for (const CLI::Option* o : app->get_options()) {
        const std::string name = o->get_lnames().empty() ? o->get_name() : o->get_lnames().front();
        if (name == "help" || name.empty())
            continue;
        if (o->count() > 0) {
            const auto& r = o->results();
            j[name] = r.size() == 1 ? Json(r.front()) : Json(r);
        } else if (!o->get_default_str().empty()) {
            j[name] = o->get_default_str();
        }
    }
    return j;
}

std::filesystem::path resolve(const std::string& out_dir, const std::string& file)
{
    const std::filesystem::path p(file);
    if (p.is_absolute() || p.has_parent_path())
        return p;
    return output_directory(out_dir) / p;
}

std::ofstream open_out(const std::filesystem::path& p)
{
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out)
        throw InvalidInput("cannot write " + p.string());
    return out;
}

std::string tolerance_line(const std::string& what, double value, double tol)
{
    std::ostringstream s;
    s << what << " = " << fmt_double(value) << " (tolerance " << fmt_double(tol) << ") "
      << (value < tol ? "PASS" : "FAIL");
    return s.str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Numerical laboratory for the intermediate long wave equation", "ilw_lab"};
    // --h is the depth, so help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "INI file with one [section] per subcommand; flags override it");
    app.require_subcommand(1);
    std::string out_dir;
    std::uint64_t seed = 1;
    app.add_option("--out-dir", out_dir, "Output directory (default: $ILW_LAB_OUTPUT_DIR or .)");
    app.add_option("--seed", seed, "Seed for randomized runs")->capture_default_str();
    bool dump_config = false;
    app.add_flag("--dump-config", dump_config, "Print the effective configuration as INI and exit")
        ->configurable(false);

    // simulate
    CLI::App* sim = app.add_subcommand("simulate", "Evolve a field and write diagnostics and the final snapshot");
    FieldOptions sim_field;
    sim_field.add(sim, 128);
    std::string variant = "ilw", m_symbol = "T_dx", sim_out = "simulate";
    double sim_h = 1.0, sim_c = 0.0, dt = 1e-4, t_final = 1.0;
    int samples = 10;
    bool no_dealias = false;
    sim->add_option("--variant", variant, "ilw, ilw_rescaled, bo, kdv or whitham")->capture_default_str();
    sim->add_option("--h", sim_h, "Depth")->default_str(fmt_double(sim_h));
    sim->add_option("--c", sim_c, "Whitham drift c")->default_str(fmt_double(sim_c));
    sim->add_option("--m-symbol", m_symbol, "Whitham symbol: identity, dx, hilbert, T, T_dx, T_dxx")->capture_default_str();
    sim->add_option("--dt", dt, "Time step")->default_str(fmt_double(dt));
    sim->add_option("--t-final", t_final, "Final time")->default_str(fmt_double(t_final));
    sim->add_option("--samples", samples, "Number of diagnostic samples after t = 0")->capture_default_str();
    sim->add_flag("--no-dealias", no_dealias, "Form the nonlinearity without the 2/3 rule");
    sim->add_option("--out", sim_out, "Basename of the outputs")->capture_default_str();

    // conserved
    CLI::App* cons = app.add_subcommand("conserved", "Print momentum, Hamiltonian and Sobolev norms of a field");
    FieldOptions cons_field;
    cons_field.add(cons, 64);
    double cons_h = 1.0, cons_s = -0.25, cons_kappa = 1.0;
    cons->add_option("--h", cons_h, "Depth")->default_str(fmt_double(cons_h));
    cons->add_option("--s", cons_s, "Sobolev index")->default_str(fmt_double(cons_s));
    cons->add_option("--kappa", cons_kappa, "Sobolev frequency scale")->default_str(fmt_double(cons_kappa));

    // alpha
    CLI::App* al = app.add_subcommand("alpha", "Compute alpha(kappa; q) on a truncation window");
    FieldOptions al_field;
    al_field.add(al, 64);
    double al_h = 1.0, al_kappa = 0.0, al_delta = 1.0 / 6.0;
    int al_kmin = -16, al_kmax = 256;
    std::string al_out;
    al->add_option("--h", al_h, "Depth")->default_str(fmt_double(al_h));
    al->add_option("--kappa", al_kappa, "kappa; 0 selects it by the doubling search")->default_str(fmt_double(al_kappa));
    al->add_option("--delta", al_delta, "Target HS norm for the search")->default_str(fmt_double(al_delta));
    al->add_option("--k-min", al_kmin, "Lowest window mode")->capture_default_str();
    al->add_option("--k-max", al_kmax, "Window end (exclusive)")->capture_default_str();
    al->add_option("--out", al_out, "Write the AlphaResult JSON here");

    // lax-check
    CLI::App* lax = app.add_subcommand("lax-check", "Residual of [P, L] against the ILW multiplication operator");
    FieldOptions lax_field;
    lax_field.add(lax, 16);
    double lax_h = 1.0, lax_tol = 1e-8, coth_scale = 1.0;
    int lax_band = 0, lax_window = 32;
    std::string lax_csv;
    lax->add_option("--h", lax_h, "Depth")->default_str(fmt_double(lax_h));
    lax->add_option("--band", lax_band, "Band B of the field; 0 takes it from the field")->capture_default_str();
    lax->add_option("--window", lax_window, "Half-width: modes [-W, W)")->capture_default_str();
    lax->add_option("--tolerance", lax_tol, "Pass threshold")->default_str(fmt_double(lax_tol));
    lax->add_option("--coth-scale", coth_scale, "Multiply the coth factor in P (mutation probe)")->default_str(fmt_double(coth_scale));
    lax->add_option("--dump-csv", lax_csv, "Write L as row_k,col_k,re,im");

    // illusory-check
    CLI::App* ill = app.add_subcommand("illusory-check", "Commutator and spectrum checks for the illusory pair");
    FieldOptions ill_field;
    ill_field.add(ill, 16);
    double ill_c = 1.0, ill_h = 1.0, ill_tol = 1e-8;
    int ill_band = 0, ill_window = 32, ill_nmax = 8;
    std::string ill_symbol = "T_dx";
    ill->add_option("--c", ill_c, "Drift c")->default_str(fmt_double(ill_c));
    ill->add_option("--m-symbol", ill_symbol, "Symbol: identity, dx, hilbert, T, T_dx, T_dxx")->capture_default_str();
    ill->add_option("--h", ill_h, "Depth passed to the symbol")->default_str(fmt_double(ill_h));
    ill->add_option("--band", ill_band, "Band B of the field; 0 takes it from the field")->capture_default_str();
    ill->add_option("--window", ill_window, "Half-width: modes [-W, W)")->capture_default_str();
    ill->add_option("--n-max", ill_nmax, "Compare levels |n| <= n-max")->capture_default_str();
    ill->add_option("--tolerance", ill_tol, "Pass threshold for both residuals")->default_str(fmt_double(ill_tol));

    // fbound
    CLI::App* fb = app.add_subcommand("fbound", "Tabulate F, its envelope and their ratio");
    double fb_h = 1.0, fb_kappa = 100.0, fb_xi_max = 100.0, fb_tol = 1e-10;
    int fb_points = 200;
    std::string fb_geometry = "circle", fb_out = "fbound.csv";
    fb->add_option("--h", fb_h, "Depth")->default_str(fmt_double(fb_h));
    fb->add_option("--kappa", fb_kappa, "kappa")->default_str(fmt_double(fb_kappa));
    fb->add_option("--xi-max", fb_xi_max, "Largest frequency")->default_str(fmt_double(fb_xi_max));
    fb->add_option("--points", fb_points, "Line geometry: number of equispaced xi in [0, xi-max]")
        ->capture_default_str();
    fb->add_option("--geometry", fb_geometry, "circle (lattice xi = 2 pi k) or line")->capture_default_str();
    fb->add_option("--tolerance", fb_tol, "Accuracy of each F evaluation")->default_str(fmt_double(fb_tol));
    fb->add_option("--out", fb_out, "CSV output")->capture_default_str();

    // kappa-limit
    CLI::App* kl = app.add_subcommand("kappa-limit", "Print 2 pi kappa F(xi) against the bound 1 + C kappa^(-1/2)");
    double kl_xi = 0.0, kl_h = 1.0;
    std::string kl_kappas = "100,1000,10000";
    std::string kl_geometry = "circle";
    kl->add_option("--xi", kl_xi, "Frequency")->default_str(fmt_double(kl_xi));
    kl->add_option("--h", kl_h, "Depth")->default_str(fmt_double(kl_h));
    kl->add_option("--kappas", kl_kappas, "Comma-separated kappa values")->capture_default_str();
    kl->add_option("--geometry", kl_geometry, "circle or line")->capture_default_str();

    // experiment
    CLI::App* ex = app.add_subcommand("experiment", "Run reference experiments and write their reports");
    std::vector<std::string> ex_names;
    int threads = 1;
    std::string names_help = "Experiments to run, or all:";
    for (const std::string& n : standard_experiment_names())
        names_help += " " + n;
    ex->add_option("names", ex_names, names_help)->required();
    ex->add_option("--threads", threads, "Concurrent jobs")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        if (args.empty()) {
            out << app.help();
            return usage;
        }
        app.exit(e, out, err);
        return usage;
    }

    if (dump_config) {
        out << app.config_to_str(true, false);
        return ok;
    }

    CLI::App* chosen = app.get_subcommands().front();
    Json config = effective_config(chosen);
    config["out-dir"] = out_dir;
    const Json provenance = make_provenance(seed, config);

    try {
        if (chosen == sim) {
            FlowSpec fs;
            fs.variant = parse_variant(variant);
            fs.h = sim_h;
            fs.c = sim_c;
            if (fs.variant == Variant::whitham)
                fs.m_symbol = MultiplierSymbol::by_name(m_symbol);
            fs.dt = dt;
            fs.t_final = t_final;
            fs.dealias = !no_dealias;
            const long n = fs.n_steps();
            if (samples < 1 || n % samples != 0)
                throw InvalidInput("--samples must divide the step count " + std::to_string(n));
            const auto traj = evolve(sim_field.field(), fs, n / samples);
            auto series = open_out(resolve(out_dir, sim_out + ".series.jsonl"));
            series << Json{{"provenance", provenance}}.dump() << '\n';
            for (const TrajectorySample& s : traj)
                series << Json{{"t", s.t}, {"M", s.M}, {"H", s.H}}.dump() << '\n';
            auto snap = open_out(resolve(out_dir, sim_out + ".final.csv"));
            write_snapshot_csv(snap, traj.back().field, Json{{"provenance", provenance}}.dump());
            out << "M drift " << fmt_double(std::abs(traj.back().M - traj.front().M)) << ", H drift "
                << fmt_double(std::abs(traj.back().H - traj.front().H)) << '\n';
            return ok;
        }
        if (chosen == cons) {
            const FourierField q = cons_field.field();
            Json j;
            j["M"] = momentum(q);
            j["H"] = hamiltonian(q, cons_h);
            j["l2_norm"] = l2_norm(q);
            j["sobolev_norm"] = sobolev_norm(q, {cons_s, cons_kappa});
            j["provenance"] = provenance;
            out << j.dump(2) << '\n';
            return ok;
        }
        if (chosen == al) {
            const FourierField q = al_field.field();
            double kappa = al_kappa;
            if (kappa == 0.0)
                kappa = choose_kappa(q, al_h, al_delta).kappa;
            const FrequencyWindow w{al_kmin, al_kmax};
            const AlphaResult r = alpha(kappa, q, al_h, w, Fill::band_limited);
            Json j;
            j["kappa"] = r.kappa;
            j["hs_norm"] = r.hs_norm;
            j["op_norm_bound"] = r.op_norm_bound;
            j["alpha"] = r.alpha;
            j["eigenvalues"] = r.eigenvalues;
            j["converged"] = r.converged;
            j["window"] = {r.window.k_min, r.window.k_max};
            j["provenance"] = provenance;
            if (!al_out.empty()) {
                auto f = open_out(resolve(out_dir, al_out));
                f << j.dump(2) << '\n';
            }
            out << "alpha = " << fmt_double(r.alpha) << ", |A|_HS = " << fmt_double(r.hs_norm)
                << (r.converged ? " (converged)" : " (not converged: |A|_HS >= 1/3)") << '\n';
            return r.converged ? ok : check_failed;
        }
        if (chosen == lax) {
            const FourierField q = lax_field.field();
            const FrequencyWindow w = FrequencyWindow::symmetric(lax_window);
            const LaxResidual r = lax_residual(q, lax_h, w, lax_band > 0 ? lax_band : q.band(), coth_scale);
            if (!lax_csv.empty()) {
                auto f = open_out(resolve(out_dir, lax_csv));
                f << "# " << Json{{"provenance", provenance}}.dump() << '\n';
                write_operator_csv(f, build_L(q, lax_h, w, Fill::band_limited));
            }
            out << tolerance_line("lax residual", r.residual, lax_tol) << '\n';
            return r.residual < lax_tol ? ok : check_failed;
        }
        if (chosen == ill) {
            const FourierField q = ill_field.field();
            const IllusoryChecks r = illusory_checks(q, ill_c, MultiplierSymbol::by_name(ill_symbol),
                                                     FrequencyWindow::symmetric(ill_window),
                                                     ill_band > 0 ? ill_band : q.band(), ill_nmax,
                                                     ill_h, Fill::band_limited);
            out << tolerance_line("commutator residual", r.commutator_residual, ill_tol) << '\n';
            out << tolerance_line("spectrum residual", r.spectrum_residual, ill_tol) << '\n';
            return r.commutator_residual < ill_tol && r.spectrum_residual < ill_tol ? ok : check_failed;
        }
        if (chosen == fb) {
            const Geometry g = fb_geometry == "circle" ? Geometry::circle
                               : fb_geometry == "line" ? Geometry::line
                                                       : throw InvalidInput("--geometry must be circle or line");
            const double lo = g == Geometry::circle ? calibration::envelope_circle_lo : calibration::envelope_line_lo;
            const double hi = g == Geometry::circle ? calibration::envelope_circle_hi : calibration::envelope_line_hi;
            std::vector<double> xis;
            if (g == Geometry::circle)
                for (int k = 0; two_pi * k <= fb_xi_max; ++k)
                    xis.push_back(two_pi * k);
            else
                for (int i = 0; i < fb_points; ++i)
                    xis.push_back(fb_points == 1 ? 0.0 : fb_xi_max * i / (fb_points - 1));
            auto f = open_out(resolve(out_dir, fb_out));
            f << "# " << Json{{"provenance", provenance}}.dump() << '\n';
            f << "xi,F,envelope,ratio\n";
            bool inside = true;
            for (double xi : xis) {
                const double F = f_eval({g, xi, fb_kappa, fb_h, fb_tol});
                const double env = f_envelope(xi, fb_kappa, fb_h);
                const double r = F / env;
                inside = inside && r >= lo && r <= hi;
                f << fmt_double(xi) << ',' << fmt_double(F) << ',' << fmt_double(env) << ',' << fmt_double(r) << '\n';
            }
            out << xis.size() << " rows; ratios " << (inside ? "inside" : "OUTSIDE") << " the locked interval ["
                << fmt_double(lo) << ", " << fmt_double(hi) << "]\n";
            return inside ? ok : check_failed;
        }
        if (chosen == kl) {
            const Geometry g = kl_geometry == "line" ? Geometry::line : Geometry::circle;
            if (kl_geometry != "line" && kl_geometry != "circle")
                throw InvalidInput("--geometry must be circle or line");
            std::vector<double> kappas;
            std::stringstream ks(kl_kappas);
            for (std::string item; std::getline(ks, item, ',');)
                kappas.push_back(parse_double(item));
            const std::vector<double> v = kappa_f_limit(kl_xi, kl_h, kappas, g);
            const double C = equi_constant(kl_h);
            bool all = true;
            out << "kappa,2pi_kappa_F,deviation,bound\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double bound = C / std::sqrt(kappas[i]);
                const bool in_range = kappas[i] >= std::max(1.0, 1.0 / kl_h);
                all = all && (!in_range || std::abs(v[i] - 1.0) <= bound);
                out << fmt_double(kappas[i]) << ',' << fmt_double(v[i]) << ',' << fmt_double(std::abs(v[i] - 1.0))
                    << ',' << fmt_double(bound) << '\n';
            }
            return all ? ok : check_failed;
        }
        if (chosen == ex) {
            std::vector<std::string> names = ex_names;
            if (names.size() == 1 && names.front() == "all")
                names = standard_experiment_names();
            std::vector<Job> jobs;
            for (const std::string& n : names)
                jobs.push_back(standard_experiment(n, seed));
            const auto reports = run_jobs(jobs, threads);
            bool all = true;
            const auto dir = output_directory(out_dir);
            for (ExperimentReport r : reports) {
                r.provenance["cli"] = config;
                r.write(dir);
                out << r.name << ": " << (r.passed() ? "PASS" : "FAIL") << '\n';
                for (const Check& c : r.checks)
                    if (!c.passed)
                        out << "  failed: " << c.name << " (" << fmt_double(c.value) << " " << c.relation << " "
                            << fmt_double(c.limit) << ")\n";
                all = all && r.passed();
            }
            return all ? ok : check_failed;
        }
    } catch (const InvalidInput& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const WindowError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const RangeError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return check_failed;
    }
    return usage;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, out, err);
}

} // namespace ilw::cli
