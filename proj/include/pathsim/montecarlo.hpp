#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pathsim/errors.hpp"
#include "pathsim/measurement.hpp"
#include "pathsim/pathways.hpp"
#include "pathsim/scenario.hpp"

namespace pathsim {

/// Joint law of one strong-measurement trial: branch outcome k and
/// post-selection flag ξ = ±1.
struct TrialDistribution {
    std::vector<double> p_success;  // P(k, +1) = |Ã_k|²
    std::vector<double> p_failure;  // P(k, -1) = q_k − |Ã_k|²

    std::size_t branches() const noexcept { return p_success.size(); }
};

/// Counts M(B_k, ξ) from M seeded trials, plus the partition parameters
/// that make the tally reproducible.
struct TrialTally {
    std::uint64_t trials = 0;
    std::vector<std::uint64_t> success;
    std::vector<std::uint64_t> failure;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::uint64_t block_size = 0;
};

struct EstimatorResult {
    std::vector<double> frequencies;  // ω_k = M(B_k,+1)/M
    double conditional_mean_estimate = 0.0;
    double std_error = 0.0;
    std::vector<double> exact_probabilities;  // reference P_k, when supplied
    std::uint64_t postselected = 0;
};

/// Joint trial law for a strong measurement of the coarse-grained
/// functional followed by post-selection. The unconditional branch weight
/// is q_k = ‖Σ_{i∈k} c_i |b_{i_L}⟩‖² with c_i the chain coefficient up to
/// the last slice: the meter decoheres distinct functional values only, so
/// coherence between member paths survives into the failure branch.
inline TrialDistribution trial_distribution(const ScenarioSpec& spec, const BranchDecomposition& branches) {
    const std::vector<Complex> chain = chain_coefficients(spec);
    const std::size_t last_size = spec.slices.empty() ? 1 : spec.slices.back().basis.size();

    TrialDistribution out;
    out.p_success.reserve(branches.size());
    out.p_failure.reserve(branches.size());
    double total = 0.0;
    for (std::size_t k = 0; k < branches.size(); ++k) {
        std::vector<Complex> collapsed(last_size, Complex(0.0, 0.0));
        for (std::size_t i : branches.branch_members[k]) collapsed[i % last_size] += chain[i];
        double q = 0.0;
        for (const Complex& c : collapsed) q += std::norm(c);

        const double ps = std::norm(branches.branch_amplitudes[k]);
        double pf = q - ps;
        if (pf < 0.0) {
            if (pf < -1e-12)
                throw NumericalError("trial_distribution: negative failure probability " + std::to_string(pf) +
                                     " for branch " + std::to_string(k));
            pf = 0.0;
        }
        out.p_success.push_back(ps);
        out.p_failure.push_back(pf);
        total += ps + pf;
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw NumericalError("trial_distribution: joint law sums to " + std::to_string(total) +
                             "; the functional admits no sequential meter of this form");
    return out;
}

/// M categorical draws from the joint law. Trials are split into
/// contiguous blocks of ceil(M/workers); worker w draws its block from a
/// mt19937_64 stream seeded seed⊕w, so a (seed, workers) pair fixes the
/// tally bit-exactly. Cells are ordered (k,+1),(k,−1) by ascending k.
inline TrialTally sample_trials(const TrialDistribution& dist, std::uint64_t trials, std::uint64_t seed,
                                unsigned workers = 1) {
    if (trials < 1) throw InvalidArgumentError("sample_trials: need at least one trial");
    if (workers < 1) throw InvalidArgumentError("sample_trials: need at least one worker");
    const std::size_t K = dist.branches();

    std::vector<double> cumulative;
    cumulative.reserve(2 * K);
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        acc += dist.p_success[k];
        cumulative.push_back(acc);
        acc += dist.p_failure[k];
        cumulative.push_back(acc);
    }

    TrialTally tally;
    tally.trials = trials;
    tally.success.assign(K, 0);
    tally.failure.assign(K, 0);
    tally.seed = seed;
    tally.workers = workers;
    tally.block_size = (trials + workers - 1) / workers;

    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t begin = static_cast<std::uint64_t>(w) * tally.block_size;
        if (begin >= trials) break;
        const std::uint64_t end = std::min(trials, begin + tally.block_size);
        std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(w));
        for (std::uint64_t t = begin; t < end; ++t) {
            // Top 53 bits -> uniform double in [0, 1); portable across platforms.
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            std::size_t cell = 2 * K - 1;
            for (std::size_t c = 0; c < cumulative.size(); ++c) {
                if (u < cumulative[c]) {
                    cell = c;
                    break;
                }
            }
            if (cell % 2 == 0)
                ++tally.success[cell / 2];
            else
                ++tally.failure[cell / 2];
        }
    }
    return tally;
}

/// Frequencies ω_k and the conditional-average estimator
/// B̂_s = Σ𝓕_k ω_k / Σω_k, with a binomial-propagation standard error.
inline EstimatorResult estimate(const TrialTally& tally, const std::vector<double>& branch_values,
                                const std::vector<double>& exact_probabilities = {}) {
    if (branch_values.size() != tally.success.size())
        throw DimensionError("estimate: " + std::to_string(branch_values.size()) + " branch values for " +
                             std::to_string(tally.success.size()) + " tallied branches");
    std::uint64_t postselected = 0;
    for (std::uint64_t c : tally.success) postselected += c;
    if (postselected == 0) throw PostselectionError("estimate: no successful post-selection in any trial");

    EstimatorResult out;
    out.postselected = postselected;
    out.exact_probabilities = exact_probabilities;
    const double m = static_cast<double>(tally.trials);
    const double mplus = static_cast<double>(postselected);
    double mean = 0.0;
    for (std::size_t k = 0; k < branch_values.size(); ++k) {
        const double omega = static_cast<double>(tally.success[k]) / m;
        out.frequencies.push_back(omega);
        mean += branch_values[k] * static_cast<double>(tally.success[k]) / mplus;
    }
    out.conditional_mean_estimate = mean;

    double var = 0.0;
    for (std::size_t k = 0; k < branch_values.size(); ++k) {
        const double d = branch_values[k] - mean;
        var += (static_cast<double>(tally.success[k]) / mplus) * d * d;
    }
    out.std_error = std::sqrt(var / mplus);
    return out;
}

}  // namespace pathsim
