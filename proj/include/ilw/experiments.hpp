#pragma once

// Desk-scale reference runs. Every run takes its tolerances in the spec struct,
// so they are fixed before any number is computed, and returns a report with
// one check per tolerance.

#include "ilw/calibration.hpp"
#include "ilw/flow.hpp"
#include "ilw/operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace ilw {

using Json = nlohmann::ordered_json;

std::string library_version();

// -- reports -----------------------------------------------------------------

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    std::string relation; // "<", "<=", ">=", "in", "decreasing", "true"
    bool passed = false;
    std::string note;
};

class ExperimentReport {
public:
    std::string name;
    Json parameters = Json::object();
    Json results = Json::object();
    std::vector<Json> series;
    std::vector<Check> checks;
    Json provenance = Json::object();

    void check_below(const std::string& what, double value, double limit, const std::string& note = {});
    void check_at_least(const std::string& what, double value, double limit, const std::string& note = {});
    void check_within(const std::string& what, double value, double lo, double hi, const std::string& note = {});
    /// Strictly decreasing sequence; `value` records the largest successive ratio.
    void check_decreasing(const std::string& what, const std::vector<double>& values, const std::string& note = {});
    void check_true(const std::string& what, bool ok, const std::string& note = {});

    bool passed() const;
    Json to_json() const;
    /// `<dir>/<name>.report.json` and `<dir>/<name>.series.jsonl`.
    void write(const std::filesystem::path& dir) const;
};

/// Version, seed and the effective configuration.
Json make_provenance(std::uint64_t seed, const Json& config);

/// Output directory: `explicit_dir` if non-empty, else $ILW_LAB_OUTPUT_DIR, else ".".
std::filesystem::path output_directory(const std::string& explicit_dir = {});

// -- ensembles ---------------------------------------------------------------

enum class EnsembleKind { band_limited, bumps };

std::string to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(const std::string& name);

struct EnsembleSpec {
    std::uint64_t seed = 1;
    int size = 16;
    EnsembleKind kind = EnsembleKind::band_limited;
    int band = 4;           // band_limited: modes 1..band
    double amplitude = 0.5; // cap on each cos/sin amplitude, or the bump height
    int n_modes = 64;
    double min_width = 0.04; // bumps: widths log-uniform in [min_width, max_width]
    double max_width = 0.2;

    void validate() const;
    Json to_json() const;
};

/// (x >> 11)·2⁻⁵³ from one mt19937_64 draw.
double uniform01(std::mt19937_64& rng);

/// Deterministic in the spec: equal specs give bit-identical fields.
std::vector<FourierField> make_ensemble(const EnsembleSpec& spec);

// -- experiments -------------------------------------------------------------

struct AlphaConservationSpec {
    double h = 1.0;
    int n_modes = 256;
    double dt = 1e-4;
    double t_final = 1.0;
    int samples = 10;
    double delta = 1.0 / 6.0;
    FrequencyWindow alpha_window{-16, 1024};
    FrequencyWindow half_window{-16, 512}; // the W of the W/2W oracle
    FrequencyWindow eigen_window{-48, 48};
    int eigen_count = 5;
    std::vector<double> eigen_times{0.0, 0.5, 1.0};

    double alpha_drift_tol = 1e-6;
    double window_tol = 1e-3;
    double momentum_tol = 1e-9;
    double hamiltonian_tol = 1e-7;
    double hs_ratio_lo = 0.5;
    double hs_ratio_hi = 2.0;
    double eigen_drift_tol = 1e-4;

    Json to_json() const;
};

/// Evolves ILW and samples α(κ; q(t)) with κ from choose_kappa(q₀, h, δ).
/// Also tracks M, H, ‖A(q(t))‖_HS / ‖A(q₀)‖_HS and the lowest eigenvalues of L
/// at eigen_times.
ExperimentReport run_alpha_conservation(const FourierField& q0, const AlphaConservationSpec& spec);

struct AprioriSpec {
    double s = -0.25;
    std::vector<double> h_list{1.0, 4.0, 16.0};
    int n_modes = 128;
    double dt = 1e-4;
    double t_final = 1.0;
    int samples = 20;
    double delta = 1.0 / 6.0;
    double bound = calibration::apriori_ratio_bound;

    Json to_json() const;
};

/// sup_t ‖q(t)‖_{H^s_κ₀} / ‖q(0)‖_{H^s_κ₀} for each member and depth, with
/// κ₀ = choose_kappa(q₀, h, δ, deep, s); one bound for every h.
ExperimentReport run_apriori(const std::vector<FourierField>& family, const AprioriSpec& spec);

struct EquicontinuitySpec {
    double s = -0.25;
    std::vector<double> h_list{1.0, 4.0, 16.0};
    std::vector<double> kappas{4.0, 16.0, 64.0, 256.0};
    int n_modes = 64;
    double dt = 1e-4;
    double t_final = 1.0;
    int samples = 10;
    double eps_lock = calibration::equicontinuity_eps;
    /// s = 0 only: sup ‖P_{≥Aκ} q(t)‖² at the smallest κ.
    double tail_lock = calibration::equicontinuity_tail;

    Json to_json() const;
};

/// E(κ) = sup over the ensemble, h and sampled t of ‖q(t)‖_{H^s_κ}. For s = 0
/// the high-frequency masses ‖P_{≥Aκ}q‖² and equi_functional are used instead.
ExperimentReport run_equicontinuity(const std::vector<FourierField>& ensemble, const EquicontinuitySpec& spec);

struct LimitSpec {
    double s = -0.25;
    std::vector<double> h_list;
    int n_modes = 128;
    double dt = 1e-5;
    double t_final = 0.25;
    int samples = 10;
    double delta = 1.0 / 6.0;
    double norm_bound = 0.0;

    Json to_json() const;
};

/// Both stop at t = 0.25.
LimitSpec shallow_defaults();
LimitSpec deep_defaults();

/// ILW′ at each h against one KdV run: L² distances at t_final and the
/// H^s_{μ₀} norm ratio, μ₀² = κ/h from the shallow branch of choose_kappa
/// applied to q = (h/3)u₀.
ExperimentReport run_shallow(const FourierField& u0, const LimitSpec& spec);

/// ILW at each h against one BO run: L² distances at t_final and the
/// H^s_{κ₀} norm ratio with κ₀ from the deep branch.
ExperimentReport run_deep(const FourierField& q0, const LimitSpec& spec);

struct IllusorySpec {
    double c = 1.0;
    MultiplierSymbol m = MultiplierSymbol::coth_t_dx();
    double symbol_h = 1.0;
    int n_modes = 64;
    double dt = 1e-4;
    double t_final = 1.0;
    int samples = 10;
    int n_max = 8;
    double drift_tol = 1e-4;
    double mean_tol = 1e-12;

    Json to_json() const;
};

/// Whitham flow q_t = -c q' - Mq' - 2qq'; eigenvalues of L̃(q(t)) against
/// {2πn - q̄(0)} for |n| ≤ n_max.
ExperimentReport run_illusory(const FourierField& q0, const IllusorySpec& spec);

// -- job runner --------------------------------------------------------------

struct Job {
    std::string name;
    std::function<ExperimentReport()> run;
};

/// Runs independent jobs on up to `threads` threads; results keep job order.
/// An exception inside a job is rethrown after all jobs finish.
std::vector<ExperimentReport> run_jobs(const std::vector<Job>& jobs, int threads = 1);

/// The named reference runs: alpha-conservation, apriori, equicontinuity,
/// equicontinuity-l2 (the s = 0 tail variant), shallow, deep, illusory.
std::vector<std::string> standard_experiment_names();
Job standard_experiment(const std::string& name, std::uint64_t seed = 1);

} // namespace ilw
