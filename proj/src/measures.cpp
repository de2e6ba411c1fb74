#include "mvsim/measures.hpp"

#include "mvsim/error.hpp"

#include <algorithm>
#include <cmath>

namespace mvsim {

EmpiricalMeasure EmpiricalMeasure::from_samples(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptySample, "empirical measure needs at least one sample");
    std::vector<double> sorted(values.begin(), values.end());
    for (double v : sorted) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteSample, "sample contains a non-finite value");
    }
    std::sort(sorted.begin(), sorted.end());
    return EmpiricalMeasure(std::move(sorted));
}

double EmpiricalMeasure::mean() const {
    double s = 0.0;
    for (double v : samples_) s += v;
    return s / static_cast<double>(samples_.size());
}

double EmpiricalMeasure::moment(double p) const {
    if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "moment order must be positive");
    double s = 0.0;
    for (double v : samples_) s += p == 1.0 ? std::abs(v) : std::pow(std::abs(v), p);
    return s / static_cast<double>(samples_.size());
}

double wasserstein(double p, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (!(p >= 1.0)) throw Error(ErrorCode::InvalidOrder, "Wasserstein order must be >= 1");
    const auto a = mu.samples();
    const auto b = nu.samples();
    auto cost = [p](double d) { return p == 1.0 ? std::abs(d) : std::pow(std::abs(d), p); };
    double total = 0.0;
    if (a.size() == b.size()) {
        for (std::size_t i = 0; i < a.size(); ++i) total += cost(a[i] - b[i]);
        total /= static_cast<double>(a.size());
    } else {
        // Quantile functions are step functions with jumps at i/N and j/M.
        // Walk the merged breakpoints in integer units of 1/(N*M).
        const std::size_t n = a.size(), m = b.size();
        std::size_t i = 0, j = 0;
        std::size_t pos = 0;
        const std::size_t end = n * m;
        while (pos < end) {
            const std::size_t next_a = (i + 1) * m;
            const std::size_t next_b = (j + 1) * n;
            const std::size_t next = std::min(next_a, next_b);
            total += static_cast<double>(next - pos) * cost(a[i] - b[j]);
            pos = next;
            if (next == next_a) ++i;
            if (next == next_b) ++j;
        }
        total /= static_cast<double>(end);
    }
    return p == 1.0 ? total : std::pow(total, 1.0 / p);
}

MeasureStats MeasureStats::of(std::span<const double> samples) {
    MeasureStats s;
    s.samples = samples;
    if (samples.empty()) return s;
    for (double v : samples) {
        s.mean += v;
        s.abs_moment1 += std::abs(v);
        s.abs_moment2 += v * v;
    }
    const double n = static_cast<double>(samples.size());
    s.mean /= n;
    s.abs_moment1 /= n;
    s.abs_moment2 /= n;
    return s;
}

}  // namespace mvsim
