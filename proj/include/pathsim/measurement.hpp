#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pathsim/errors.hpp"
#include "pathsim/hilbert.hpp"
#include "pathsim/pathways.hpp"

namespace pathsim {

/// Outcome statistics of an accurate (interference-destroying) meter:
/// branch probabilities P_k = |Ã_k|² and the post-selected conditional
/// mean. The mean is disengaged (never NaN) when post-selection is
/// impossible.
struct StrongResult {
    std::vector<double> branch_values;
    std::vector<double> probabilities;
    std::optional<double> conditional_mean;
    double postselect_prob = 0.0;
};

/// First-order response of an inaccurate meter: relative amplitudes
/// α̃_k = Ã_k / ΣÃ_j and the weak value Σ𝓕_k α̃_k.
struct WeakResult {
    std::vector<Complex> relative_amplitudes;
    Complex weak_value;
    double real_shift = 0.0;
    double imag_shift = 0.0;
};

/// Verdict on Σ𝓕_k·w_k = 0 (amplitude or probability weights).
struct SumRuleReport {
    Complex weighted_amplitude_sum;
    bool is_null = false;
    double tol = defaults::sum_rule_tol;
};

struct PerturbationReport {
    std::vector<double> exact_dP;
    std::vector<double> linear_dP;
    double max_deviation = 0.0;
    bool large_delta_warning = false;
};

inline StrongResult strong_statistics(const BranchDecomposition& branches) {
    StrongResult out;
    out.branch_values = branches.branch_values;
    out.probabilities.reserve(branches.size());
    double total = 0.0;
    double weighted = 0.0;
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const double p = std::norm(branches.branch_amplitudes[k]);
        out.probabilities.push_back(p);
        total += p;
        weighted += branches.branch_values[k] * p;
    }
    out.postselect_prob = total;
    if (total > defaults::postselection_floor) out.conditional_mean = weighted / total;
    return out;
}

inline std::optional<double> require_conditional_mean(const StrongResult& r) {
    if (!r.conditional_mean)
        throw PostselectionError("conditional mean undefined: every branch has (near-)zero post-selection probability");
    return r.conditional_mean;
}

inline WeakResult weak_statistics(const BranchDecomposition& branches) {
    const Complex total = branches.total_amplitude();
    if (std::norm(total) <= defaults::postselection_floor)
        throw PostselectionError("weak value undefined: total transition amplitude vanishes");
    WeakResult out;
    out.relative_amplitudes.reserve(branches.size());
    Complex wv(0.0, 0.0);
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const Complex alpha = branches.branch_amplitudes[k] / total;
        out.relative_amplitudes.push_back(alpha);
        wv += branches.branch_values[k] * alpha;
    }
    out.weak_value = wv;
    out.real_shift = wv.real();
    out.imag_shift = wv.imag();
    return out;
}

namespace detail {

inline SumRuleReport weighted_sum_rule(const std::vector<double>& values, const std::vector<Complex>& weights,
                                       double tol) {
    Complex sum(0.0, 0.0);
    double scale = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const Complex term = values[k] * weights[k];
        sum += term;
        scale += std::abs(term);
    }
    SumRuleReport out;
    out.weighted_amplitude_sum = sum;
    out.tol = tol;
    out.is_null = std::abs(sum) <= tol * std::max(1.0, scale);
    return out;
}

}  // namespace detail

/// Amplitude sum rule Σ𝓕_k Ã_k = 0; `is_null` iff the weak value of the
/// same branch set vanishes (whenever the weak value is defined).
inline SumRuleReport check_sum_rule(const BranchDecomposition& branches, double tol = defaults::sum_rule_tol) {
    return detail::weighted_sum_rule(branches.branch_values, branches.branch_amplitudes, tol);
}

/// Probability sum rule Σ𝓕_k P_k = 0 over a strong-measurement result.
inline SumRuleReport strong_sum_rule(const StrongResult& result, double tol = defaults::sum_rule_tol) {
    std::vector<Complex> weights;
    weights.reserve(result.probabilities.size());
    for (double p : result.probabilities) weights.push_back(Complex(p, 0.0));
    return detail::weighted_sum_rule(result.branch_values, weights, tol);
}

/// Compare the exact probability change |A+δA|² − |A|² against its
/// first-order form 2·Re[conj(A)·δA], per path.
inline PerturbationReport perturbation_check(const PathwaySet& paths, const std::vector<Complex>& delta) {
    if (delta.size() != paths.size())
        throw DimensionError("perturbation_check: " + std::to_string(delta.size()) + " deltas for " +
                             std::to_string(paths.size()) + " paths");
    double norm_a = 0.0, norm_d = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (!is_finite(delta[i])) throw InvalidArgumentError("perturbation_check: non-finite delta");
        norm_a += std::norm(paths.amplitude(i));
        norm_d += std::norm(delta[i]);
    }
    PerturbationReport out;
    out.large_delta_warning = std::sqrt(norm_d) > 0.1 * std::sqrt(norm_a);
    out.exact_dP.reserve(delta.size());
    out.linear_dP.reserve(delta.size());
    for (std::size_t i = 0; i < delta.size(); ++i) {
        const Complex a = paths.amplitude(i);
        const double exact = std::norm(a + delta[i]) - std::norm(a);
        const double linear = 2.0 * (std::conj(a) * delta[i]).real();
        out.exact_dP.push_back(exact);
        out.linear_dP.push_back(linear);
        out.max_deviation = std::max(out.max_deviation, std::abs(exact - linear));
    }
    return out;
}

}  // namespace pathsim
