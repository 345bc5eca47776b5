#pragma once

#include "fbmclt/errors.hpp"

#include <cstdint>
#include <string>

namespace fbmclt {

// Validated (H, d) pair. The CLT regime 1/(d+2) < H < 1/d is where the limit
// constant is finite; local-time machinery needs only Hd < 1.
struct HurstModel {
    double h;
    int d;

    HurstModel(double hurst, int dim) : h(hurst), d(dim) {
        if (!(h > 0.0 && h < 1.0))
            throw config_error("HurstModel: need 0 < h < 1, got h=" + std::to_string(h));
        if (d < 1)
            throw config_error("HurstModel: need d >= 1, got d=" + std::to_string(d));
    }

    double hd() const noexcept { return h * static_cast<double>(d); }

    bool clt_regime() const noexcept {
        return h > 1.0 / (d + 2.0) && h < 1.0 / static_cast<double>(d);
    }

    bool local_time_exists() const noexcept { return hd() < 1.0; }

    void require_clt_regime() const {
        if (!clt_regime())
            throw regime_error("(H=" + std::to_string(h) + ", d=" + std::to_string(d) +
                               ") outside the regime 1/(d+2) < H < 1/d");
    }

    void require_local_time() const {
        if (!local_time_exists())
            throw config_error("local time requires Hd < 1, got Hd=" + std::to_string(hd()));
    }
};

struct TimeGrid {
    double dt;
    std::int64_t n_steps;

    TimeGrid(double step, std::int64_t n) : dt(step), n_steps(n) {
        if (!(dt > 0.0)) throw config_error("TimeGrid: dt must be positive");
        if (n_steps < 1) throw config_error("TimeGrid: need at least one step");
    }

    double time(std::int64_t k) const noexcept { return static_cast<double>(k) * dt; }
    double horizon() const noexcept { return time(n_steps); }
};

} // namespace fbmclt
