#pragma once

#include <span>

#include "pmi/astuteness.hpp"

namespace pmi {

enum class RemainderPolicy { worst_case, empirical_mean };

const char* to_string(RemainderPolicy policy);
RemainderPolicy remainder_policy_from_string(const std::string& s);

// Assembled reliability estimate: the misclassification probability per
// input as an OP-weighted sum of cell unastuteness, with the variance
// propagated under cell-wise independence and a normal upper confidence
// bound. ACU is the unweighted mean of the cell unastuteness means.
struct ReliabilityEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double upper_bound = 0.0;
    double alpha = 0.0;
    double acu = 0.0;
    std::size_t cells_assessed = 0;
    double op_mass_covered = 0.0;
    double remainder_mass = 0.0;
    RemainderPolicy remainder_policy = RemainderPolicy::worst_case;
};

// mean     = sum E[l_i] E[Op_i] + remainder * (1 or ACU)
// variance = sum E[l_i]^2 Var[Op_i] + E[Op_i]^2 Var[l_i] + Var[l_i] Var[Op_i]
// Ub       = mean + z_{1-alpha} sqrt(variance)
// The remainder term contributes no variance. Compensated accumulation
// throughout; the fold order is fixed so threading upstream cannot change
// the result.
ReliabilityEstimate assemble(std::span<const CellAssessment> cells, double alpha,
                             double remainder_mass, RemainderPolicy policy);

// Inverse standard normal CDF: rational approximation plus one Newton
// refinement against an erf-based CDF; absolute error <= 1e-8.
double normal_quantile(double p);
double normal_cdf(double z);

// The comparison row reported next to the estimate: test error vs ACU vs
// the assembled mean, with strict-order flags.
struct ComparisonRow {
    double test_error = 0.0;
    double acu = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double upper_bound = 0.0;
    bool acu_below_test_error = false;
    bool mean_above_acu = false;
    bool mean_below_test_error = false;
    bool mean_between = false;
};

ComparisonRow compare_metrics(double test_error, const ReliabilityEstimate& estimate);

}  // namespace pmi
