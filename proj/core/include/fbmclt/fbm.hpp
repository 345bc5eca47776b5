#pragma once

#include "fbmclt/hurst.hpp"
#include "fbmclt/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace fbmclt {

// per-coordinate fBm covariance (t^{2H} + s^{2H} - |t-s|^{2H}) / 2
double fbm_covariance(const HurstModel& model, double s, double t);

// covariance of unit-lag increments on spacing dt:
// dt^{2H} * (|l+1|^{2H} + |l-1|^{2H} - 2 l^{2H}) / 2
double fgn_autocovariance(const HurstModel& model, std::int64_t lag, double dt);

// d-dimensional path on a uniform grid, values[k*d + c] = coordinate c at t_k,
// k = 0..n_steps. Starts at the origin; coordinates independent.
struct FbmPath {
    HurstModel model = HurstModel(0.5, 1);
    TimeGrid grid = TimeGrid(1.0, 1);
    std::vector<double> values;

    double coord(std::int64_t k, int c) const noexcept {
        return values[static_cast<std::size_t>(k) * model.d + c];
    }
};

// header t,coord_1,...,coord_d; one row per grid point; %.17g floats
void write_path_csv(std::ostream& os, const FbmPath& path);

// Dense covariance of the scalar fBm block at the given times, with its
// Cholesky factor and log-determinant. The d-dimensional determinant is the
// d-th power of this one (coordinates are i.i.d.), so only the scalar block
// is ever stored.
struct CovFactor {
    int n = 0;
    std::vector<double> matrix; // row-major symmetric n x n
    std::vector<double> chol;   // lower-triangular factor, row-major
    double logdet = 0.0;
};

CovFactor scalar_covariance_matrix(const HurstModel& model, std::span<const double> times);

enum class SamplerMethod { automatic, circulant, cholesky };

// Exact-in-law stationary-increment sampler: circulant embedding of the fGn
// covariance (two independent paths per complex FFT), dense Cholesky as the
// fallback. Immutable after construction; sample calls are reentrant given
// distinct RngStreams.
class FbmSampler {
  public:
    FbmSampler(HurstModel model, TimeGrid grid, SamplerMethod method = SamplerMethod::automatic);
    ~FbmSampler();

    FbmSampler(const FbmSampler&) = delete;
    FbmSampler& operator=(const FbmSampler&) = delete;

    const HurstModel& model() const noexcept { return model_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    SamplerMethod method() const noexcept { return method_; }

    // two independent paths per call (both halves of each transform are used)
    void sample_pair(RngStream& stream, FbmPath& a, FbmPath& b) const;
    FbmPath sample(RngStream& stream) const;

  private:
    struct Impl;
    HurstModel model_;
    TimeGrid grid_;
    SamplerMethod method_;
    std::unique_ptr<Impl> impl_;
};

} // namespace fbmclt
