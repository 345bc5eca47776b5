#include "fbmclt/moments.hpp"

#include "fbmclt/constants.hpp"
#include "fbmclt/errors.hpp"
#include "fbmclt/parallel.hpp"
#include "fbmclt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace fbmclt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kMaxPairs = 16;               // q = |m|/2 cap; covariance work is q^3
constexpr std::int64_t kMcBlock = 65536;    // substream granularity for thread independence

double double_factorial_odd(int m) { // (m-1)!! for even m >= 2
    double v = 1.0;
    for (int k = m - 1; k >= 3; k -= 2) v *= static_cast<double>(k);
    return v;
}

// in-place lower Cholesky of the q x q symmetric matrix in `mat` (row-major,
// lower triangle used); returns sum of log diagonal entries of the factor, or
// NaN when the matrix is not numerically positive definite
double cholesky_half_logdet(std::vector<double>& mat, int q) {
    double sumlog = 0.0;
    for (int j = 0; j < q; ++j) {
        double diag = mat[static_cast<std::size_t>(j) * q + j];
        for (int k = 0; k < j; ++k) {
            const double l = mat[static_cast<std::size_t>(j) * q + k];
            diag -= l * l;
        }
        if (!(diag > 0.0) || !std::isfinite(diag))
            return std::numeric_limits<double>::quiet_NaN();
        const double l = std::sqrt(diag);
        mat[static_cast<std::size_t>(j) * q + j] = l;
        sumlog += std::log(l);
        for (int r = j + 1; r < q; ++r) {
            double v = mat[static_cast<std::size_t>(r) * q + j];
            for (int k = 0; k < j; ++k)
                v -= mat[static_cast<std::size_t>(r) * q + k] *
                     mat[static_cast<std::size_t>(j) * q + k];
            mat[static_cast<std::size_t>(r) * q + j] = v / l;
        }
    }
    return sumlog;
}

struct GlRule {
    std::vector<double> x; // nodes on (-1, 1)
    std::vector<double> w;
};

// Gauss-Legendre nodes/weights by Newton iteration on the recurrence
const GlRule& gl_rule_200() {
    static const GlRule rule = [] {
        const int n = 200;
        GlRule r;
        r.x.resize(n);
        r.w.resize(n);
        for (int i = 0; i < n / 2; ++i) {
            double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / pp;
                x -= dx;
                if (std::fabs(dx) < 1e-15) break;
            }
            r.x[i] = -x;
            r.x[n - 1 - i] = x;
            const double wt = 2.0 / ((1.0 - x * x) * pp * pp);
            r.w[i] = wt;
            r.w[n - 1 - i] = wt;
        }
        return r;
    }();
    return rule;
}

} // namespace

void MomentSpec::validate() const {
    if (intervals.empty()) throw config_error("moment spec: at least one interval required");
    if (intervals.size() != multi_index.size())
        throw config_error("moment spec: intervals and multi-index lengths differ");
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto [a, b] = intervals[i];
        if (!(a >= 0.0) || !(b > a) || !std::isfinite(b))
            throw config_error("moment spec: each interval needs 0 <= a < b");
        if (multi_index[i] < 1)
            throw config_error("moment spec: exponents must be positive");
        if (i > 0 && intervals[i - 1].second > a)
            throw config_error("moment spec: intervals must be ordered and disjoint (b_i <= a_{i+1})");
    }
}

int MomentSpec::total_order() const noexcept {
    int s = 0;
    for (int m : multi_index) s += m;
    return s;
}

bool MomentSpec::any_odd() const noexcept {
    for (int m : multi_index)
        if (m & 1) return true;
    return false;
}

MomentEstimate limit_moment(const MomentSpec& spec, const HurstModel& model,
                            std::int64_t mc_samples, std::uint64_t seed, std::uint32_t stage,
                            int threads) {
    spec.validate();
    model.require_local_time();
    if (mc_samples < 1) throw config_error("limit_moment: mc_samples must be positive");

    if (spec.any_odd()) {
        MomentEstimate est;
        est.exact = true; // odd multi-index kills the moment by W <-> -W symmetry
        return est;
    }

    // one integration slot per pair within each interval
    std::vector<double> lo, width;
    double kappa = 1.0, volume = 1.0;
    for (std::size_t i = 0; i < spec.intervals.size(); ++i) {
        const auto [a, b] = spec.intervals[i];
        const int m = spec.multi_index[i];
        kappa *= double_factorial_odd(m) * std::pow(kTwoPi, -0.25 * m * model.d);
        for (int r = 0; r < m / 2; ++r) {
            lo.push_back(a);
            width.push_back(b - a);
            volume *= b - a;
        }
    }
    const int q = static_cast<int>(lo.size());
    if (q > kMaxPairs)
        throw config_error("limit_moment: total order exceeds " + std::to_string(2 * kMaxPairs));

    const double twoh = 2.0 * model.h;
    const double dim = static_cast<double>(model.d);
    const std::int64_t n_blocks = (mc_samples + kMcBlock - 1) / kMcBlock;
    std::vector<Accum> partial(static_cast<std::size_t>(n_blocks));

    parallel_for(n_blocks, threads, [&](std::int64_t blk) {
        RngStream rng(seed, substream(stage, static_cast<std::uint64_t>(blk)));
        const std::int64_t count = std::min(kMcBlock, mc_samples - blk * kMcBlock);
        std::vector<double> w(q), mat(static_cast<std::size_t>(q) * q);
        Accum acc;
        int failures = 0;
        for (std::int64_t s = 0; s < count;) {
            for (int j = 0; j < q; ++j) w[j] = lo[j] + width[j] * rng.next_uniform();
            for (int j = 0; j < q; ++j) {
                const double wj = std::pow(w[j], twoh);
                mat[static_cast<std::size_t>(j) * q + j] = wj;
                for (int k = 0; k < j; ++k)
                    mat[static_cast<std::size_t>(j) * q + k] =
                        0.5 * (wj + std::pow(w[k], twoh) - std::pow(std::fabs(w[j] - w[k]), twoh));
            }
            const double half_logdet = cholesky_half_logdet(mat, q);
            if (std::isnan(half_logdet)) {
                // coincident draws make the matrix singular; measure zero, so redraw
                if (++failures > 64)
                    throw numerical_error("limit_moment: covariance factorization keeps failing");
                continue;
            }
            failures = 0;
            acc.add(std::exp(-dim * half_logdet));
            ++s;
        }
        partial[static_cast<std::size_t>(blk)] = acc;
    });

    Accum total;
    for (const auto& p : partial) total = merge(total, p);

    MomentEstimate est;
    est.value = kappa * volume * total.mean;
    est.stderr_ = kappa * volume * total.stderr_of_mean();
    est.samples = mc_samples;
    est.exact = false;
    return est;
}

double limit_moment_m2_closed_form(const HurstModel& model, double a, double b) {
    model.require_local_time();
    if (!(a >= 0.0) || !(b > a)) throw config_error("limit_moment_m2_closed_form: need 0 <= a < b");
    const double e = 1.0 - model.hd();
    return std::pow(kTwoPi, -0.5 * model.d) * (std::pow(b, e) - std::pow(a, e)) / e;
}

MomentEstimate clt_moment_target(const MomentSpec& spec, const HurstModel& model,
                                 const TestFunction& f, std::int64_t mc_samples,
                                 std::uint64_t seed, std::uint32_t stage, int threads) {
    model.require_clt_regime();
    if (f.d != model.d) throw config_error("clt_moment_target: test function dimension mismatch");
    const double beta = 1.0 / model.h - model.d;
    const auto cert = verify_membership(f, beta);
    if (!cert.ok)
        throw config_error("clt_moment_target: test function not admissible: " + cert.violation);

    MomentEstimate est = limit_moment(spec, model, mc_samples, seed, stage, threads);
    const double chd = chd_closed_form(model).value;
    const double normsq = beta_norm_spectral(f, beta).value_squared;
    const double scale = std::pow(chd * normsq, 0.5 * spec.total_order());
    est.value *= scale;
    est.stderr_ *= scale;
    return est;
}

LndReport lnd_scan(const HurstModel& model, int max_points, int n_configs, RngStream& stream) {
    if (max_points < 1 || max_points > 64)
        throw config_error("lnd_scan: max_points must be in [1, 64]");
    if (n_configs < 1) throw config_error("lnd_scan: n_configs must be positive");

    constexpr double kMinGap = 5e-3; // keeps denominators away from rounding noise
    const double twoh = 2.0 * model.h;
    const int d = model.d;

    LndReport report;
    report.min_ratio = std::numeric_limits<double>::infinity();
    report.configs_tested = n_configs;

    std::vector<double> s, u, kdiag;
    for (int c = 0; c < n_configs; ++c) {
        const int np = 1 + static_cast<int>(stream.next_u64() % static_cast<std::uint64_t>(max_points));

        s.assign(np, 0.0);
        for (int attempt = 0;; ++attempt) {
            if (attempt > 1000) throw numerical_error("lnd_scan: failed to draw admissible times");
            for (int i = 0; i < np; ++i) s[i] = stream.next_uniform();
            std::sort(s.begin(), s.end());
            bool ok = s[0] >= kMinGap;
            for (int i = 1; ok && i < np; ++i) ok = s[i] - s[i - 1] >= kMinGap;
            if (ok) break;
        }

        u.assign(static_cast<std::size_t>(np) * d, 0.0);
        for (int i = 0; i < np; ++i) {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    const double g = stream.next_gaussian();
                    u[static_cast<std::size_t>(i) * d + a] = g;
                    norm2 += g * g;
                }
            } while (norm2 < 1e-24);
            const double inv = 1.0 / std::sqrt(norm2);
            for (int a = 0; a < d; ++a) u[static_cast<std::size_t>(i) * d + a] *= inv;
        }

        // ratio = (den + cross)/den with den the diagonal (independent-increment)
        // part; the diagonal enters numerator and denominator through the very
        // same expressions, so H = 1/2 gives 1 up to the rounding of `cross`
        double den = 0.0;
        kdiag.assign(np, 0.0);
        for (int i = 0; i < np; ++i) {
            const double prev = i == 0 ? 0.0 : s[i - 1];
            const double kii = std::pow(s[i] - prev, twoh);
            kdiag[i] = kii;
            double dot = 0.0;
            for (int a = 0; a < d; ++a) {
                const double v = u[static_cast<std::size_t>(i) * d + a];
                dot += v * v;
            }
            den += dot * kii;
        }
        double cross = 0.0;
        for (int j = 1; j < np; ++j) {
            const double sj = s[j], sjp = s[j - 1];
            for (int i = 0; i < j; ++i) {
                const double si = s[i], sip = i == 0 ? 0.0 : s[i - 1];
                // Cov(B_si - B_sip, B_sj - B_sjp) in increment form
                const double kij = 0.5 * (std::pow(std::fabs(si - sjp), twoh) +
                                          std::pow(std::fabs(sip - sj), twoh) -
                                          std::pow(std::fabs(si - sj), twoh) -
                                          std::pow(std::fabs(sip - sjp), twoh));
                double dot = 0.0;
                for (int a = 0; a < d; ++a)
                    dot += u[static_cast<std::size_t>(i) * d + a] *
                           u[static_cast<std::size_t>(j) * d + a];
                cross += 2.0 * dot * kij;
            }
        }
        const double ratio = (den + cross) / den;
        if (ratio < report.min_ratio) {
            report.min_ratio = ratio;
            report.worst_times = s;
            report.worst_vectors = u;
        }
    }
    return report;
}

namespace detail {

double limit_moment_single4_quadrature(const HurstModel& model, double a, double b) {
    if (!(a >= 0.0) || !(b > a))
        throw config_error("limit_moment_single4_quadrature: need 0 <= a < b");
    model.require_local_time();

    const auto& gl = gl_rule_200();
    const int n = static_cast<int>(gl.x.size());
    const double twoh = 2.0 * model.h;
    const double halfd = 0.5 * model.d;
    const double kappa = 3.0 * std::pow(kTwoPi, -static_cast<double>(model.d));

    // ordered region {a <= w1 <= w2 <= b}; square-power maps cluster nodes at
    // the w1 = a edge and the diagonal, where det vanishes
    double outer = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ui = 0.5 * (gl.x[i] + 1.0);
        const double w1 = a + (b - a) * ui * ui;
        const double jac1 = 2.0 * (b - a) * ui;
        const double s11 = std::pow(w1, twoh);
        double inner = 0.0;
        for (int j = 0; j < n; ++j) {
            const double vj = 0.5 * (gl.x[j] + 1.0);
            const double w2 = w1 + (b - w1) * vj * vj;
            const double jac2 = 2.0 * (b - w1) * vj;
            const double s22 = std::pow(w2, twoh);
            const double s12 = 0.5 * (s11 + s22 - std::pow(w2 - w1, twoh));
            const double det = std::max(s11 * s22 - s12 * s12, 1e-300);
            inner += gl.w[j] * jac2 * std::exp(-halfd * std::log(det));
        }
        outer += gl.w[i] * jac1 * inner;
    }
    const double integral = 0.25 * outer; // two [-1,1] -> [0,1] scale factors
    return 2.0 * kappa * integral;
}

} // namespace detail

} // namespace fbmclt
