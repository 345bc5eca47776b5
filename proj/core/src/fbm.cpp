#include "fbmclt/fbm.hpp"

#include "fbmclt/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>

namespace fbmclt {

double fbm_covariance(const HurstModel& model, double s, double t) {
    if (s < 0.0 || t < 0.0) throw config_error("fbm_covariance: times must be nonnegative");
    const double h2 = 2.0 * model.h;
    return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double fgn_autocovariance(const HurstModel& model, std::int64_t lag, double dt) {
    if (dt <= 0.0) throw config_error("fgn_autocovariance: dt must be positive");
    if (lag < 0) lag = -lag;
    const double h2 = 2.0 * model.h;
    const double l = static_cast<double>(lag);
    return std::pow(dt, h2) * 0.5 *
           (std::pow(l + 1.0, h2) + std::pow(std::abs(l - 1.0), h2) - 2.0 * std::pow(l, h2));
}

void write_path_csv(std::ostream& os, const FbmPath& path) {
    os << "t";
    for (int c = 1; c <= path.model.d; ++c) os << ",coord_" << c;
    os << "\n";
    char buf[32];
    for (std::int64_t k = 0; k <= path.grid.n_steps; ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", path.grid.time(k));
        os << buf;
        for (int c = 0; c < path.model.d; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", path.coord(k, c));
            os << ',' << buf;
        }
        os << "\n";
    }
}

CovFactor scalar_covariance_matrix(const HurstModel& model, std::span<const double> times) {
    const int n = static_cast<int>(times.size());
    if (n == 0) throw config_error("scalar_covariance_matrix: empty time list");
    for (int i = 0; i < n; ++i) {
        if (!(times[i] > 0.0))
            throw config_error("scalar_covariance_matrix: times must be strictly positive");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw config_error("scalar_covariance_matrix: times must be strictly increasing");
    }

    CovFactor f;
    f.n = n;
    f.matrix.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f.matrix[static_cast<std::size_t>(i) * n + j] = fbm_covariance(model, times[i], times[j]);

    // plain Cholesky; failure pinpoints the offending time index
    f.chol.assign(static_cast<std::size_t>(n) * n, 0.0);
    f.logdet = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = f.matrix[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                sum -= f.chol[static_cast<std::size_t>(i) * n + k] *
                       f.chol[static_cast<std::size_t>(j) * n + k];
            if (i == j) {
                if (!(sum > 0.0))
                    throw numerical_error(
                        "covariance factorization failed: not positive definite at index " +
                        std::to_string(i) + " (t=" + std::to_string(times[i]) + ")");
                const double d = std::sqrt(sum);
                f.chol[static_cast<std::size_t>(i) * n + i] = d;
                f.logdet += 2.0 * std::log(d);
            } else {
                f.chol[static_cast<std::size_t>(i) * n + j] =
                    sum / f.chol[static_cast<std::size_t>(j) * n + j];
            }
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// FFT workspace: per-thread plan/buffer cache; the FFTW planner itself is not
// thread-safe, so creation/destruction is serialized.

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftWorkspace {
    std::size_t m = 0;
    fftw_complex* buf = nullptr;
    fftw_plan plan = nullptr;

    void init(std::size_t size) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        buf = fftw_alloc_complex(size);
        if (!buf) throw std::bad_alloc();
        plan = fftw_plan_dft_1d(static_cast<int>(size), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        if (!plan) {
            fftw_free(buf);
            buf = nullptr;
            throw numerical_error("fftw plan creation failed");
        }
        m = size;
    }

    ~FftWorkspace() {
        if (plan || buf) {
            std::lock_guard<std::mutex> lock(planner_mutex());
            if (plan) fftw_destroy_plan(plan);
            if (buf) fftw_free(buf);
        }
    }
};

FftWorkspace& workspace_for(std::size_t m) {
    thread_local std::map<std::size_t, std::unique_ptr<FftWorkspace>> cache;
    auto& slot = cache[m];
    if (!slot) {
        slot = std::make_unique<FftWorkspace>();
        slot->init(m);
    }
    return *slot;
}

constexpr std::int64_t kCholeskyMaxSteps = 4096;
constexpr double kNegEigRelTol = 1e-9;

} // namespace

struct FbmSampler::Impl {
    std::int64_t n = 0;          // increments per coordinate
    std::size_t m = 0;           // circulant size 2(n-1)
    double dt_pow_h = 1.0;       // increment scale
    std::vector<double> coef;    // sqrt(eig_k / m), circulant path
    std::vector<double> chol;    // lower factor of the fGn covariance, fallback path
    bool use_circulant = true;
};

FbmSampler::FbmSampler(HurstModel model, TimeGrid grid, SamplerMethod method)
    : model_(model), grid_(grid), method_(method), impl_(std::make_unique<Impl>()) {
    const std::int64_t n = grid_.n_steps;
    impl_->n = n;
    impl_->dt_pow_h = std::pow(grid_.dt, model_.h);

    const HurstModel unit_model = model_;
    auto rho = [&](std::int64_t lag) { return fgn_autocovariance(unit_model, lag, 1.0); };

    bool circulant_ok = false;
    if (n >= 2 && method != SamplerMethod::cholesky) {
        const std::size_t m = 2 * static_cast<std::size_t>(n - 1);
        FftWorkspace& ws = workspace_for(m);
        for (std::int64_t k = 0; k < n; ++k) {
            ws.buf[k][0] = rho(k);
            ws.buf[k][1] = 0.0;
        }
        for (std::int64_t k = n; k < static_cast<std::int64_t>(m); ++k) {
            ws.buf[k][0] = rho(static_cast<std::int64_t>(m) - k);
            ws.buf[k][1] = 0.0;
        }
        fftw_execute(ws.plan);

        double max_eig = 0.0, min_eig = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            max_eig = std::max(max_eig, ws.buf[k][0]);
            min_eig = std::min(min_eig, ws.buf[k][0]);
        }
        if (min_eig >= -kNegEigRelTol * max_eig) {
            impl_->m = m;
            impl_->coef.resize(m);
            for (std::size_t k = 0; k < m; ++k) {
                const double eig = std::max(ws.buf[k][0], 0.0); // clip numerical noise
                impl_->coef[k] = std::sqrt(eig / static_cast<double>(m));
            }
            circulant_ok = true;
        } else if (method == SamplerMethod::circulant) {
            throw numerical_error("circulant embedding has eigenvalue " + std::to_string(min_eig) +
                                  " below tolerance");
        }
    }
    if (n == 1 && method != SamplerMethod::cholesky) {
        impl_->use_circulant = true; // single increment: direct draw, no transform
        circulant_ok = true;
    }

    if (!circulant_ok) {
        if (n > kCholeskyMaxSteps)
            throw numerical_error(
                "sampling error: circulant embedding failed and n_steps=" + std::to_string(n) +
                " exceeds the dense Cholesky fallback limit " + std::to_string(kCholeskyMaxSteps));
        impl_->use_circulant = false;
        // factor the fGn (increment) covariance directly: better conditioned
        // than the fBm covariance on the same grid for H < 1/2
        const int ni = static_cast<int>(n);
        std::vector<double> cov(static_cast<std::size_t>(ni) * ni);
        for (int i = 0; i < ni; ++i)
            for (int j = 0; j < ni; ++j) cov[static_cast<std::size_t>(i) * ni + j] = rho(i - j);
        impl_->chol.assign(static_cast<std::size_t>(ni) * ni, 0.0);
        for (int i = 0; i < ni; ++i) {
            for (int j = 0; j <= i; ++j) {
                double sum = cov[static_cast<std::size_t>(i) * ni + j];
                for (int k = 0; k < j; ++k)
                    sum -= impl_->chol[static_cast<std::size_t>(i) * ni + k] *
                           impl_->chol[static_cast<std::size_t>(j) * ni + k];
                if (i == j) {
                    if (!(sum > 0.0))
                        throw numerical_error("fGn covariance not positive definite at step " +
                                              std::to_string(i));
                    impl_->chol[static_cast<std::size_t>(i) * ni + i] = std::sqrt(sum);
                } else {
                    impl_->chol[static_cast<std::size_t>(i) * ni + j] =
                        sum / impl_->chol[static_cast<std::size_t>(j) * ni + j];
                }
            }
        }
    }
}

FbmSampler::~FbmSampler() = default;

void FbmSampler::sample_pair(RngStream& stream, FbmPath& a, FbmPath& b) const {
    const std::int64_t n = impl_->n;
    const int d = model_.d;
    const double scale = impl_->dt_pow_h;

    for (FbmPath* p : {&a, &b}) {
        p->model = model_;
        p->grid = grid_;
        p->values.assign(static_cast<std::size_t>(n + 1) * d, 0.0);
    }

    std::vector<double> inc_a(static_cast<std::size_t>(n));
    std::vector<double> inc_b(static_cast<std::size_t>(n));

    for (int c = 0; c < d; ++c) {
        if (!impl_->use_circulant) {
            const int ni = static_cast<int>(n);
            std::vector<double> z1(ni), z2(ni);
            for (int i = 0; i < ni; ++i) stream.next_gaussian_pair(z1[i], z2[i]);
            for (int i = 0; i < ni; ++i) {
                double sa = 0.0, sb = 0.0;
                const double* row = &impl_->chol[static_cast<std::size_t>(i) * ni];
                for (int k = 0; k <= i; ++k) {
                    sa += row[k] * z1[k];
                    sb += row[k] * z2[k];
                }
                inc_a[i] = sa;
                inc_b[i] = sb;
            }
        } else if (n == 1) {
            stream.next_gaussian_pair(inc_a[0], inc_b[0]);
        } else {
            const std::size_t m = impl_->m;
            FftWorkspace& ws = workspace_for(m);
            for (std::size_t k = 0; k < m; ++k) {
                double u, v;
                stream.next_gaussian_pair(u, v);
                ws.buf[k][0] = impl_->coef[k] * u;
                ws.buf[k][1] = impl_->coef[k] * v;
            }
            fftw_execute(ws.plan);
            // real and imaginary parts are two independent fGn samples
            for (std::int64_t j = 0; j < n; ++j) {
                inc_a[j] = ws.buf[j][0];
                inc_b[j] = ws.buf[j][1];
            }
        }

        double run_a = 0.0, run_b = 0.0;
        for (std::int64_t k = 0; k < n; ++k) {
            run_a += scale * inc_a[k];
            run_b += scale * inc_b[k];
            a.values[static_cast<std::size_t>(k + 1) * d + c] = run_a;
            b.values[static_cast<std::size_t>(k + 1) * d + c] = run_b;
        }
    }
}

FbmPath FbmSampler::sample(RngStream& stream) const {
    FbmPath a, b;
    sample_pair(stream, a, b);
    return a;
}

} // namespace fbmclt
