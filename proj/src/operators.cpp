#include "ilw/operators.hpp"

#include "ilw/errors.hpp"
#include "ilw/fkernel.hpp"
#include "ilw/format.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>

namespace ilw {

namespace {

using Matrix = Eigen::MatrixXcd;

double resolvent_symbol(double xi, double kappa, double h) { return 1.0 / (symbol_a(xi, h) + kappa); }

cplx field_coeff(const FourierField& q, int k, Fill fill)
{
    const PeriodicGrid& g = q.grid();
    if (std::abs(k) < g.k_hi())
        return q.coeff(k);
    if (fill == Fill::band_limited)
        return 0.0;
    throw WindowError("window needs mode " + std::to_string(k) + " of a field with " +
                      std::to_string(g.n_modes()) + " modes; declare it band-limited to zero-fill");
}

// Coefficients of a band-limited function as a sparse map.
using Coeffs = std::map<int, cplx>;

Coeffs coeffs_of(const FourierField& q)
{
    Coeffs out;
    const PeriodicGrid& g = q.grid();
    for (int k = g.k_lo() + 1; k < g.k_hi(); ++k)
        if (q.coeff(k) != cplx{})
            out[k] = q.coeff(k);
    return out;
}

// Exact product of two band-limited functions by direct convolution.
Coeffs convolve(const Coeffs& a, const Coeffs& b)
{
    Coeffs out;
    for (const auto& [ka, va] : a)
        for (const auto& [kb, vb] : b)
            out[ka + kb] += va * vb;
    return out;
}

Coeffs scaled_by_symbol(const Coeffs& c, const std::function<cplx(int)>& m)
{
    Coeffs out;
    for (const auto& [k, v] : c)
        out[k] = m(k) * v;
    return out;
}

Coeffs add(Coeffs a, const Coeffs& b)
{
    for (const auto& [k, v] : b)
        a[k] += v;
    return a;
}

cplx lookup(const Coeffs& c, int k)
{
    auto it = c.find(k);
    return it == c.end() ? cplx{} : it->second;
}

Matrix toeplitz(const Coeffs& c, const FrequencyWindow& w)
{
    const int n = w.size();
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = lookup(c, i - j);
    return m;
}

// μ coth(hμ) with its limit 1/h at μ = 0.
double mu_coth(double mu, double h)
{
    if (mu == 0.0)
        return 1.0 / h;
    return (zcoth_minus_one(h * mu) + 1.0) / h;
}

// Coefficients of Tq'' + q'/h + 2qq' = -(ILW right-hand side).
Coeffs ilw_commutator_target(const Coeffs& q, double h)
{
    Coeffs lin = scaled_by_symbol(q, [&](int k) {
        const double mu = two_pi * k;
        return cplx(0.0, -mu * mu_coth(mu, h) + mu / h);
    });
    Coeffs sq = convolve(q, q);
    Coeffs nl = scaled_by_symbol(sq, [](int k) { return cplx(0.0, two_pi * k); });
    return add(lin, nl);
}

int band_of(const Coeffs& c)
{
    int b = 0;
    for (const auto& [k, v] : c)
        b = std::max(b, std::abs(k));
    return b;
}

void require_margin(const FrequencyWindow& w, int band, const char* what)
{
    if (w.k_min > -4 * band || w.k_max < 4 * band + 1)
        throw WindowError(std::string(what) + ": window must extend at least 3B beyond the band B = " +
                          std::to_string(band) + " on each side");
}

} // namespace

// -- windows -----------------------------------------------------------------

FrequencyWindow FrequencyWindow::for_depth(double h, int k_pos)
{
    if (!(h > 0.0))
        throw InvalidInput("depth h must be positive");
    const int guard = static_cast<int>(std::floor(exp_budget / (2.0 * two_pi * h)));
    const int wanted = std::max(16, static_cast<int>(std::ceil(40.0 / (2.0 * two_pi * h))));
    return {-std::min(guard, wanted), k_pos};
}

void FrequencyWindow::validate() const
{
    if (k_min >= k_max)
        throw WindowError("window [" + std::to_string(k_min) + ", " + std::to_string(k_max) + ") is empty");
}

void FrequencyWindow::check_guard(double h) const
{
    validate();
    if (k_min < 0 && 2.0 * h * two_pi * (-k_min) > exp_budget)
        throw RangeError("window reaches k = " + std::to_string(k_min) + " where e^{-2h xi} exceeds e^700 (h = " +
                         fmt_double(h) + ")");
}

double TruncatedOperator::hermitian_defect() const
{
    const double scale = entries.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff() / scale;
}

// -- builders ----------------------------------------------------------------

TruncatedOperator build_R0(double kappa, double h, const FrequencyWindow& w)
{
    if (!(kappa > 0.0))
        throw InvalidInput("kappa must be positive");
    w.check_guard(h);
    TruncatedOperator op{w, Matrix::Zero(w.size(), w.size()), true, "R0"};
    for (int i = 0; i < w.size(); ++i)
        op.entries(i, i) = resolvent_symbol(two_pi * w.mode(i), kappa, h);
    return op;
}

TruncatedOperator build_sqrt_R0(double kappa, double h, const FrequencyWindow& w)
{
    TruncatedOperator op = build_R0(kappa, h, w);
    op.entries = op.entries.cwiseSqrt();
    op.name = "sqrt_R0";
    return op;
}

TruncatedOperator build_mult(const FourierField& q, const FrequencyWindow& w, Fill fill)
{
    w.validate();
    const int n = w.size();
    std::vector<cplx> diag(2 * n - 1);
    for (int d = -(n - 1); d <= n - 1; ++d)
        diag[d + n - 1] = field_coeff(q, d, fill);
    TruncatedOperator op{w, Matrix(n, n), true, "mult"};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            op.entries(i, j) = diag[i - j + n - 1];
    op.hermitian = q.hermitian_defect() == 0.0;
    return op;
}

TruncatedOperator build_A(double kappa, const FourierField& q, double h, const FrequencyWindow& w, Fill fill)
{
    TruncatedOperator s = build_sqrt_R0(kappa, h, w);
    TruncatedOperator m = build_mult(q, w, fill);
    const Eigen::VectorXd d = s.entries.diagonal().real();
    m.entries = d.asDiagonal() * m.entries * d.asDiagonal();
    m.name = "A";
    m.hermitian = true;
    return m;
}

double hs_norm(const TruncatedOperator& op) { return op.entries.norm(); }

double hs_norm_sq_banded(double kappa, const FourierField& q, double h, const FrequencyWindow& w)
{
    if (!(kappa > 0.0))
        throw InvalidInput("kappa must be positive");
    w.validate();
    w.check_guard(h);
    std::vector<std::pair<int, double>> weights; // (offset d, |q̂(d)|²)
    for (int d = q.grid().k_lo() + 1; d < q.grid().k_hi(); ++d)
        if (q.coeff(d) != cplx(0.0))
            weights.emplace_back(d, std::norm(q.coeff(d)));
    // Rows from the top of the window down, so the small terms come first.
    long double sum = 0.0L, carry = 0.0L;
    for (int k = w.k_max - 1; k >= w.k_min; --k) {
        const double rk = resolvent_symbol(two_pi * k, kappa, h);
        for (const auto& [d, wd] : weights) {
            const int j = k - d;
            if (!w.contains(j))
                continue;
            const long double term = static_cast<long double>(rk) * resolvent_symbol(two_pi * j, kappa, h) * wd - carry;
            const long double next = sum + term;
            carry = (next - sum) - term;
            sum = next;
        }
    }
    return static_cast<double>(sum);
}

double op_norm(const TruncatedOperator& op)
{
    if (op.hermitian) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(op.entries, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::BDCSVD<Matrix> svd(op.entries);
    return svd.singularValues()(0);
}

cplx trace_product(const std::vector<const TruncatedOperator*>& ops)
{
    if (ops.empty())
        throw InvalidInput("trace of an empty product");
    for (const TruncatedOperator* op : ops)
        if (!(op->window == ops.front()->window))
            throw WindowError("trace product of operators on different windows");
    if (ops.size() == 1)
        return ops.front()->entries.trace();
    Matrix acc = ops.front()->entries;
    for (std::size_t i = 1; i + 1 < ops.size(); ++i)
        acc = acc * ops[i]->entries;
    // tr(XY) = Σ_ij X_ij Y_ji.
    return acc.cwiseProduct(ops.back()->entries.transpose()).sum();
}

// -- α -----------------------------------------------------------------------

double alpha_term(double lambda)
{
    if (!(lambda < 1.0))
        throw DivergentSeries(std::abs(lambda));
    if (std::abs(lambda) < 0.1) {
        // Σ_{n≥2} λⁿ/n; 40 terms reach 1e-40 at |λ| = 0.1.
        double p = lambda * lambda, s = 0.0;
        for (int n = 2; n < 42; ++n) {
            s += p / n;
            p *= lambda;
        }
        return s;
    }
    return -std::log1p(-lambda) - lambda;
}

AlphaResult alpha(double kappa, const FourierField& q, double h, const FrequencyWindow& w, Fill fill)
{
    TruncatedOperator A = build_A(kappa, q, h, w, fill);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.entries, Eigen::EigenvaluesOnly);
    AlphaResult r;
    r.kappa = kappa;
    r.window = w;
    r.hs_norm = hs_norm(A);
    r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    for (double l : r.eigenvalues)
        r.op_norm_bound = std::max(r.op_norm_bound, std::abs(l));
    if (r.op_norm_bound >= 1.0)
        throw DivergentSeries(r.op_norm_bound);
    // Ascending order: sum the small terms first.
    std::vector<double> terms;
    for (double l : r.eigenvalues)
        terms.push_back(alpha_term(l));
    std::sort(terms.begin(), terms.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    for (double t : terms)
        r.alpha += t;
    r.converged = r.hs_norm < 1.0 / 3.0;
    if (r.converged) {
        const double hs2 = r.hs_norm * r.hs_norm;
        if (r.alpha < hs2 / 3.0 * (1 - 1e-12) || r.alpha > 2.0 * hs2 / 3.0 * (1 + 1e-12))
            throw InvariantViolation("alpha outside [|A|^2/3, 2|A|^2/3] although |A|_HS < 1/3");
    }
    return r;
}

// -- κ selection -------------------------------------------------------------

double kappa_closed_form(const FourierField& q, double h, double delta, Regime regime, double s, double C_s)
{
    const double as = std::abs(s);
    if (regime == Regime::deep) {
        const double n = sobolev_norm(q, {s, 1.0});
        return std::max(1.0 / h, std::pow(1.0 + C_s * n * n / (delta * delta), 1.0 / (1.0 - 2.0 * as)));
    }
    const double n = sobolev_norm(q, {s, 1.0}) / h;
    return h * std::pow(1.0 + C_s * n * n / (delta * delta), 1.0 / (1.5 - as));
}

namespace {

// sup over sampled κ, ξ of the (HS bdd) ratio F·weight; the constant C_s.
double hs_prefactor(double h, Regime regime, double s)
{
    const double as = std::abs(s);
    double best = 0.0;
    const double k0 = regime == Regime::deep ? std::max(1.0, 1.0 / h) : h;
    for (int i = 0; i < 8; ++i) {
        const double kappa = k0 * std::pow(4.0, i);
        if (regime == Regime::shallow && kappa > 1.0 / h)
            break;
        for (int e = -1; e <= 14; ++e) {
            const int k = e < 0 ? 0 : (1 << e);
            const double xi = two_pi * k;
            const double F = f_eval({Geometry::circle, xi, kappa, h, 1e-10});
            double v;
            if (regime == Regime::deep) {
                v = F * std::pow(kappa, 1.0 - 2.0 * as) * std::pow(kappa * kappa + xi * xi, as);
            } else {
                const double mu2 = kappa / h;
                v = F * std::pow(mu2, 1.5 - as) * h * h * std::pow(mu2 + xi * xi, as);
            }
            best = std::max(best, v);
        }
    }
    return best;
}

} // namespace

KappaChoice choose_kappa(const FourierField& q, double h, double delta, Regime regime, double s)
{
    if (!(delta > 0.0 && delta <= 1.0 / 6.0))
        throw InvalidInput("delta must lie in (0, 1/6]");
    if (!(h > 0.0))
        throw InvalidInput("depth h must be positive");
    if (!(s > -0.5 && s <= 0.0))
        throw InvalidInput("s must lie in (-1/2, 0]");
    if (regime == Regime::shallow && h > 1.0)
        throw InvalidInput("the shallow window h <= kappa <= 1/h needs h <= 1");

    KappaChoice out;
    double kappa = regime == Regime::deep ? std::max(1.0, 1.0 / h) : h;
    double previous = INFINITY;
    for (int i = 0;; ++i) {
        if (regime == Regime::shallow && kappa > 1.0 / h * (1 + 1e-12))
            throw SearchFailure("no kappa in [h, 1/h] gives |A|_HS < delta; last norm " + fmt_double(previous) +
                                " at kappa " + fmt_double(kappa / 2));
        if (i > 60)
            throw SearchFailure("kappa doubling search exhausted at kappa " + fmt_double(kappa));
        const double norm = std::sqrt(f_weighted_sum(q, kappa, h));
        if (norm > previous)
            throw InvariantViolation("|A|_HS increased when kappa doubled");
        previous = norm;
        if (norm < delta) {
            out.kappa = kappa;
            out.hs_norm = norm;
            out.doublings = i;
            break;
        }
        kappa *= 2.0;
    }
    out.closed_form = kappa_closed_form(q, h, delta, regime, s, hs_prefactor(h, regime, s));
    return out;
}

// -- Lax pair ----------------------------------------------------------------

TruncatedOperator build_L(const FourierField& q, double h, const FrequencyWindow& w, Fill fill)
{
    w.check_guard(h);
    TruncatedOperator op = build_mult(q, w, fill);
    op.entries = -op.entries;
    for (int i = 0; i < w.size(); ++i)
        op.entries(i, i) += symbol_a(two_pi * w.mode(i), h);
    op.name = "L";
    return op;
}

namespace {

cplx p_diagonal(double xi, double h)
{
    return cplx(0.0, -xi / h + xi * xi + xi / h * std::exp(-2.0 * h * xi));
}

// Off-diagonal part of P at (ξ, η), without the q̂(μ) factor.
cplx p_kernel(double xi, double eta, double h, double coth_scale)
{
    const double mu = xi - eta;
    return cplx(0.0, coth_scale * mu_coth(mu, h) - (xi + eta));
}

} // namespace

TruncatedOperator build_P(const FourierField& q, double h, const FrequencyWindow& w, Fill fill)
{
    w.check_guard(h);
    TruncatedOperator m = build_mult(q, w, fill);
    const int n = w.size();
    TruncatedOperator op{w, Matrix(n, n), false, "P"};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            op.entries(i, j) = p_kernel(two_pi * w.mode(i), two_pi * w.mode(j), h, 1.0) * m.entries(i, j);
    for (int i = 0; i < n; ++i)
        op.entries(i, i) += p_diagonal(two_pi * w.mode(i), h);
    return op;
}

LaxResidual lax_residual(const FourierField& q, double h, const FrequencyWindow& w, int band, double coth_scale)
{
    w.check_guard(h);
    const Coeffs qc = coeffs_of(q);
    if (band_of(qc) > band)
        throw InvalidInput("field has modes beyond the declared band");
    require_margin(w, band, "lax_residual");
    const int n = w.size();

    // L = D_L + O_L, P = D_P + O_P; the diagonals commute, so
    // [P, L] = [D_P, O_L] + [O_P, D_L] + [O_P, O_L], formed entrywise where the
    // exponential diagonals appear.
    Matrix OL = -toeplitz(qc, w);
    Matrix OP(n, n);
    Eigen::VectorXd a(n);
    Eigen::VectorXcd dP(n);
    for (int i = 0; i < n; ++i) {
        const double xi = two_pi * w.mode(i);
        a(i) = symbol_a(xi, h);
        dP(i) = p_diagonal(xi, h);
        for (int j = 0; j < n; ++j)
            OP(i, j) = p_kernel(xi, two_pi * w.mode(j), h, coth_scale) * (-OL(i, j));
    }
    const Matrix prod = OP * OL - OL * OP;
    const Eigen::MatrixXd prod_scale = OP.cwiseAbs() * OL.cwiseAbs() + OL.cwiseAbs() * OP.cwiseAbs();
    const Coeffs target = ilw_commutator_target(qc, h);
    double target_max = 0.0;
    for (const auto& [k, v] : target)
        target_max = std::max(target_max, std::abs(v));

    LaxResidual out;
    double worst_scaled = 0.0, worst_raw = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!w.interior(w.mode(i), 2 * band))
            continue;
        ++out.interior_modes;
        for (int j = 0; j < n; ++j) {
            if (!w.interior(w.mode(j), 2 * band))
                continue;
            const cplx t1 = (dP(i) - dP(j)) * OL(i, j);
            const cplx t2 = OP(i, j) * (a(j) - a(i));
            const cplx c = t1 + t2 + prod(i, j) - lookup(target, w.mode(i) - w.mode(j));
            const double scale = std::max({std::abs(t1), std::abs(t2), prod_scale(i, j), target_max});
            worst_scaled = std::max(worst_scaled, std::abs(c) / scale);
            worst_raw = std::max(worst_raw, std::abs(c));
        }
    }
    out.residual = worst_scaled;
    out.raw_residual = target_max > 0.0 ? worst_raw / target_max : worst_raw;
    return out;
}

double coth_identity_check(double xi, double eta, double h)
{
    if (!(h > 0.0))
        throw InvalidInput("depth h must be positive");
    if (xi == eta)
        throw InvalidInput("the identity needs xi != eta");
    for (double v : {xi, eta})
        if (v < 0.0 && 2.0 * h * -v > exp_budget)
            throw RangeError("coth identity evaluated outside the exponential guard");
    const double e1 = std::exp(-2.0 * h * xi), e2 = std::exp(-2.0 * h * eta);
    const double coth = 1.0 / std::tanh(h * (xi - eta));
    return std::abs(coth * (e1 - e2) + (e1 + e2)) / (e1 + e2);
}

std::vector<double> lax_lowest_eigenvalues(const FourierField& q, double h, const FrequencyWindow& w, int count,
                                           Fill fill)
{
    if (count < 1 || count > w.size())
        throw InvalidInput("eigenvalue count out of range");
    w.check_guard(h);
    // L + κ ≥ κ - sup|q| > 0 on the window for κ above Σ|q̂|.
    double sup = 0.0;
    for (cplx c : q.coeffs())
        sup += std::abs(c);
    const double kappa = sup + 1.0;
    TruncatedOperator A = build_A(kappa, q, h, w, fill);
    const int n = w.size();
    Matrix B = Matrix::Identity(n, n) - A.entries;
    Eigen::LLT<Matrix> llt(B);
    if (llt.info() != Eigen::Success)
        throw InvariantViolation("1 - A is not positive definite");
    Matrix inv = llt.solve(Matrix::Identity(n, n));
    const Eigen::VectorXd s = build_sqrt_R0(kappa, h, w).entries.diagonal().real();
    Matrix M = s.asDiagonal() * inv * s.asDiagonal();
    M = 0.5 * (M + M.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    const auto& mu = es.eigenvalues(); // ascending
    for (int i = 0; i < count; ++i)
        out.push_back(1.0 / mu(n - 1 - i) - kappa);
    return out;
}

// -- trace identities --------------------------------------------------------

TraceIdentityResult trace_identities(const FourierField& q, double kappa, double h, const FrequencyWindow& w, int ell)
{
    if (ell < 2)
        throw InvalidInput("the telescope identity needs l >= 2");
    w.check_guard(h);
    const Coeffs qc = coeffs_of(q);
    const int band = band_of(qc);
    require_margin(w, band, "trace_identities");

    // Tq'' has symbol -iμ·(μ coth(hμ)), which vanishes at μ = 0.
    const Coeffs tq2_exact = scaled_by_symbol(qc, [&](int k) {
        const double mu = two_pi * k;
        return cplx(0.0, -mu * mu_coth(mu, h));
    });
    const Coeffs dq_h = scaled_by_symbol(qc, [&](int k) { return cplx(0.0, two_pi * k / h); });
    const Coeffs f = add(tq2_exact, dq_h);
    const Coeffs qqx2 = scaled_by_symbol(convolve(qc, qc), [](int k) { return cplx(0.0, two_pi * k); });

    auto factor = [](const Coeffs& c) {
        TraceFactor t{false, {}};
        for (const auto& [k, v] : c)
            if (v != cplx{})
                t.coeffs.emplace_back(k, v);
        return t;
    };
    const TraceFactor R = TraceFactor::r0();
    const TraceFactor Q = factor(qc);

    TraceIdentityResult out;
    // Quadratic.
    LatticeTrace a1 = lattice_trace({R, factor(tq2_exact), R, Q}, kappa, h);
    LatticeTrace a2 = lattice_trace({R, factor(dq_h), R, Q}, kappa, h);
    const double q_scale = std::max(a1.abs_scale, a2.abs_scale);
    out.quadratic_terms[0] = a1.value;
    out.quadratic_terms[1] = a2.value;
    out.quadratic = q_scale > 0.0 ? std::abs(a1.value + a2.value) / q_scale : 0.0;

    // Telescope.
    std::vector<TraceFactor> w1{R, factor(f)}, w2{R, factor(qqx2)};
    for (int i = 0; i < ell; ++i) {
        w1.push_back(R);
        w1.push_back(Q);
    }
    for (int i = 0; i < ell - 1; ++i) {
        w2.push_back(R);
        w2.push_back(Q);
    }
    LatticeTrace b1 = lattice_trace(w1, kappa, h);
    LatticeTrace b2 = lattice_trace(w2, kappa, h);
    const double t_scale = std::max(b1.abs_scale, b2.abs_scale);
    out.telescope_terms[0] = b1.value;
    out.telescope_terms[1] = b2.value;
    out.telescope = t_scale > 0.0 ? std::abs(b1.value + b2.value) / t_scale : 0.0;

    // Dense route on the window.
    const TruncatedOperator R0 = build_R0(kappa, h, w);
    auto dense = [&](const Coeffs& c) { return TruncatedOperator{w, toeplitz(c, w), false, "mult"}; };
    const TruncatedOperator Mq = dense(qc), Mtq2 = dense(tq2_exact), Mdq = dense(dq_h), Mf = dense(f),
                            Mqq = dense(qqx2);
    const cplx d1 = trace_product({&R0, &Mtq2, &R0, &Mq});
    const cplx d2 = trace_product({&R0, &Mdq, &R0, &Mq});
    out.dense_quadratic = q_scale > 0.0 ? std::abs(d1 + d2) / q_scale : 0.0;
    std::vector<const TruncatedOperator*> p1{&R0, &Mf}, p2{&R0, &Mqq};
    for (int i = 0; i < ell; ++i) {
        p1.push_back(&R0);
        p1.push_back(&Mq);
    }
    for (int i = 0; i < ell - 1; ++i) {
        p2.push_back(&R0);
        p2.push_back(&Mq);
    }
    const cplx e1 = trace_product(p1), e2 = trace_product(p2);
    out.dense_telescope = t_scale > 0.0 ? std::abs(e1 + e2) / t_scale : 0.0;

    // Σ F(ξ)|q̂|²(hξ²coth(hξ) - ξ)/(ih), relative to Σ of absolute terms.
    double s = 0.0, s_abs = 0.0;
    for (const auto& [k, v] : qc) {
        const double xi = two_pi * k;
        const double F = f_eval({Geometry::circle, xi, kappa, h, 1e-12});
        const double t = F * std::norm(v) * (h * xi * mu_coth(xi, h) - xi) / h;
        s += t;
        s_abs += std::abs(t);
    }
    out.odd_weight_sum = s_abs > 0.0 ? std::abs(s) / s_abs : 0.0;
    return out;
}

// -- illusory pair -----------------------------------------------------------

std::pair<TruncatedOperator, TruncatedOperator> illusory_ops(const FourierField& q, double c,
                                                             const MultiplierSymbol& m, const FrequencyWindow& w,
                                                             double h, Fill fill)
{
    w.validate();
    TruncatedOperator Mq = build_mult(q, w, fill);
    const int n = w.size();
    TruncatedOperator L{w, -Mq.entries, true, "L_illusory"};
    TruncatedOperator P{w, Matrix(n, n), false, "P_illusory"};
    for (int i = 0; i < n; ++i) {
        const double xi = two_pi * w.mode(i);
        L.entries(i, i) += xi;
        for (int j = 0; j < n; ++j) {
            const double eta = two_pi * w.mode(j);
            const cplx mq = m(xi - eta, h) * Mq.entries(i, j);
            P.entries(i, j) = cplx(0.0, -1.0) * mq - cplx(0.0, xi + eta) * Mq.entries(i, j);
        }
        P.entries(i, i) += cplx(0.0, -c * xi + xi * xi);
    }
    return {std::move(L), std::move(P)};
}

IllusoryChecks illusory_checks(const FourierField& q, double c, const MultiplierSymbol& m,
                               const FrequencyWindow& w, int band, int n_max, double h, Fill fill,
                               double m_scale)
{
    const Coeffs qc = coeffs_of(q);
    if (band_of(qc) > band)
        throw InvalidInput("field has modes beyond the declared band");
    require_margin(w, band, "illusory_checks");
    if (!w.interior(-n_max, 0) || !w.interior(n_max, 0))
        throw WindowError("window does not contain the requested levels");
    const MultiplierSymbol probe(
        m.name(), [&m, m_scale](double xi, double hh) { return m_scale * m(xi, hh); }, m.real_operator());
    auto [L, P] = illusory_ops(q, c, m_scale == 1.0 ? m : probe, w, h, fill);

    // Target: c q' + Mq' + 2qq'.
    Coeffs target = scaled_by_symbol(qc, [&](int k) {
        const double mu = two_pi * k;
        return cplx(0.0, mu) * (c + m(mu, h));
    });
    target = add(target, scaled_by_symbol(convolve(qc, qc), [](int k) { return cplx(0.0, two_pi * k); }));
    double target_max = 0.0;
    for (const auto& [k, v] : target)
        target_max = std::max(target_max, std::abs(v));

    const Matrix comm = P.entries * L.entries - L.entries * P.entries;
    IllusoryChecks out;
    double worst = 0.0;
    for (int i = 0; i < w.size(); ++i)
        for (int j = 0; j < w.size(); ++j)
            if (w.interior(w.mode(i), 2 * band) && w.interior(w.mode(j), 2 * band))
                worst = std::max(worst, std::abs(comm(i, j) - lookup(target, w.mode(i) - w.mode(j))));
    out.commutator_residual = target_max > 0.0 ? worst / target_max : worst;

    Eigen::SelfAdjointEigenSolver<Matrix> es(L.entries, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double mean = q.coeff(0).real();
    for (int k = -n_max; k <= n_max; ++k) {
        const double level = two_pi * k - mean;
        Eigen::Index idx;
        (ev.array() - level).abs().minCoeff(&idx);
        out.eigenvalues.push_back(ev(idx));
        out.spectrum_residual = std::max(out.spectrum_residual, std::abs(ev(idx) - level));
    }
    return out;
}

// -- output ------------------------------------------------------------------

void write_operator_csv(std::ostream& out, const TruncatedOperator& op)
{
    out << "row_k,col_k,re,im\n";
    for (int i = 0; i < op.window.size(); ++i)
        for (int j = 0; j < op.window.size(); ++j) {
            const cplx v = op.entries(i, j);
            if (v == cplx{})
                continue;
            out << op.window.mode(i) << ',' << op.window.mode(j) << ',' << fmt_double(v.real()) << ','
                << fmt_double(v.imag()) << '\n';
        }
}

} // namespace ilw
