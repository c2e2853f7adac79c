#include "pmi/assembly.hpp"

#include <cmath>

#include "pmi/accumulate.hpp"
#include "pmi/error.hpp"

namespace pmi {

const char* to_string(RemainderPolicy policy) {
    return policy == RemainderPolicy::worst_case ? "worst_case" : "empirical_mean";
}

RemainderPolicy remainder_policy_from_string(const std::string& s) {
    if (s == "worst_case") return RemainderPolicy::worst_case;
    if (s == "empirical_mean") return RemainderPolicy::empirical_mean;
    throw Error(ErrorKind::config, "unknown remainder policy: " + s);
}

ReliabilityEstimate assemble(std::span<const CellAssessment> cells, double alpha,
                             double remainder_mass, RemainderPolicy policy) {
    if (cells.empty())
        throw Error(ErrorKind::argument, "cannot assemble an empty cell list");
    if (!(alpha > 0.0 && alpha < 0.5))
        throw Error(ErrorKind::argument, "alpha must be in (0, 0.5)");
    if (!(remainder_mass >= 0.0))
        throw Error(ErrorKind::argument, "remainder mass must be >= 0");

    CompensatedSum mean_sum, var_sum, acu_sum, mass_sum;
    for (const auto& cell : cells) {
        if (cell.lambda_var < 0.0 || cell.op.variance < 0.0 ||
            !std::isfinite(cell.lambda_mean) || !std::isfinite(cell.op.mean))
            throw Error(ErrorKind::data_integrity,
                        "cell " + to_string(cell.index) +
                            " carries a negative variance or non-finite mean");
        mean_sum.add(cell.lambda_mean * cell.op.mean);
        var_sum.add(cell.lambda_mean * cell.lambda_mean * cell.op.variance +
                    cell.op.mean * cell.op.mean * cell.lambda_var +
                    cell.lambda_var * cell.op.variance);
        acu_sum.add(cell.lambda_mean);
        mass_sum.add(cell.op.mean);
    }

    ReliabilityEstimate est;
    est.cells_assessed = cells.size();
    est.acu = acu_sum.value() / static_cast<double>(cells.size());
    est.op_mass_covered = mass_sum.value();
    est.remainder_mass = remainder_mass;
    est.remainder_policy = policy;
    est.alpha = alpha;

    const double remainder_rate =
        policy == RemainderPolicy::worst_case ? 1.0 : est.acu;
    mean_sum.add(remainder_mass * remainder_rate);
    est.mean = mean_sum.value();
    est.variance = var_sum.value();
    est.upper_bound = est.mean + normal_quantile(1.0 - alpha) * std::sqrt(est.variance);
    return est;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Acklam's rational approximation to the inverse normal CDF (~1.15e-9
// relative error), used as the seed for one Newton step.
double inverse_cdf_seed(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorKind::argument, "quantile probability must be in (0,1)");
    double z = inverse_cdf_seed(p);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
    if (pdf > 0.0) z -= (normal_cdf(z) - p) / pdf;
    return z;
}

ComparisonRow compare_metrics(double test_error, const ReliabilityEstimate& estimate) {
    if (!std::isfinite(test_error))
        throw Error(ErrorKind::argument, "test error must be finite");
    ComparisonRow row;
    row.test_error = test_error;
    row.acu = estimate.acu;
    row.mean = estimate.mean;
    row.variance = estimate.variance;
    row.upper_bound = estimate.upper_bound;
    row.acu_below_test_error = estimate.acu < test_error;
    row.mean_above_acu = estimate.mean > estimate.acu;
    row.mean_below_test_error = estimate.mean < test_error;
    const double lo = std::min(estimate.acu, test_error);
    const double hi = std::max(estimate.acu, test_error);
    row.mean_between = estimate.mean > lo && estimate.mean < hi;
    return row;
}

}  // namespace pmi
