#pragma once

#include <cmath>

namespace pmi {

// Neumaier compensated accumulator. Sums of up to ~10^5 tiny cell terms
// must not lose mass to cancellation.
class CompensatedSum {
public:
    CompensatedSum() = default;

    void add(double value) {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            compensation_ += (sum_ - t) + value;
        } else {
            compensation_ += (value - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

}  // namespace pmi
