// Offline references: BH and Storey-BH step-up procedures, evaluated by
// scanning candidate thresholds restricted to the observed p-values (the
// estimators are piecewise in s with jumps only at observed values).
#pragma once

#include <algorithm>
#include <vector>

#include "fdrstream/core.hpp"

namespace fdrstream {

struct OfflineBatch {
    std::vector<double> p;
    double alpha_level = 0.1;
    double lambda = 0.0;  // Storey parameter

    void validate() const {
        if (p.empty()) throw ValidationError("offline batch: empty p-value list");
        for (double v : p)
            if (!(v > 0.0 && v < 1.0))
                throw ValidationError("offline batch: p-values must lie in (0,1)");
        if (!(alpha_level > 0.0 && alpha_level < 1.0))
            throw ValidationError("offline batch: alpha must lie in (0,1)");
        if (!(lambda >= 0.0 && lambda < 1.0))
            throw ValidationError("offline batch: lambda must lie in [0,1)");
    }
};

namespace detail {
// Largest observed threshold s with n * s * scale / max(R(s),1) <= alpha;
// returns the indices of all p <= s (empty when no threshold qualifies).
inline std::vector<std::size_t> step_up(const OfflineBatch& batch, double scale) {
    const std::size_t n = batch.p.size();
    std::vector<double> sorted = batch.p;
    std::sort(sorted.begin(), sorted.end());
    double threshold = 0.0;
    for (std::size_t k = n; k >= 1; --k) {
        const double s = sorted[k - 1];
        const auto r = static_cast<double>(
            std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin());
        if (static_cast<double>(n) * s * scale / std::max(r, 1.0) <= batch.alpha_level) {
            threshold = s;
            break;
        }
    }
    std::vector<std::size_t> rejected;
    for (std::size_t i = 0; i < n; ++i)
        if (batch.p[i] <= threshold) rejected.push_back(i);
    return rejected;
}
}  // namespace detail

inline std::vector<std::size_t> bh(const OfflineBatch& batch) {
    batch.validate();
    return detail::step_up(batch, 1.0);
}

inline double storey_pi0(const OfflineBatch& batch, bool cap_at_one = false) {
    batch.validate();
    const double n = static_cast<double>(batch.p.size());
    double count = 0.0;
    for (double v : batch.p)
        if (v > batch.lambda) count += 1.0;
    double pi0 = (1.0 + count) / (n * (1.0 - batch.lambda));
    if (cap_at_one) pi0 = std::min(pi0, 1.0);
    return pi0;
}

inline std::vector<std::size_t> storey_bh(const OfflineBatch& batch, bool cap_pi0 = false) {
    batch.validate();
    return detail::step_up(batch, storey_pi0(batch, cap_pi0));
}

}  // namespace fdrstream
