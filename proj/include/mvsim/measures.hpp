#pragma once

#include <span>
#include <vector>

namespace mvsim {

/// Uniform empirical probability measure on a finite sample of the real line.
class EmpiricalMeasure {
public:
    /// Sorted copy of `values`. Throws EmptySample / NonFiniteSample.
    static EmpiricalMeasure from_samples(std::span<const double> values);

    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }

    double mean() const;
    /// Raw absolute moment (1/N) sum |x_i|^p; callers apply any 1/p power.
    double moment(double p) const;

private:
    explicit EmpiricalMeasure(std::vector<double> sorted) : samples_(std::move(sorted)) {}

    std::vector<double> samples_;
};

/// p-Wasserstein distance between two empirical measures via the quantile
/// coupling. Throws InvalidOrder for p < 1.
double wasserstein(double p, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Summary of a particle cloud handed to coefficient functions. `samples` is
/// the unsorted particle vector of the current time slice.
struct MeasureStats {
    double mean = 0.0;
    double abs_moment1 = 0.0;
    double abs_moment2 = 0.0;
    std::span<const double> samples;

    static MeasureStats of(std::span<const double> samples);
};

}  // namespace mvsim
