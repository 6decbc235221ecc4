#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pathsim/errors.hpp"
#include "pathsim/measurement.hpp"
#include "pathsim/pathways.hpp"

namespace pathsim {

enum class Readout { position, momentum };

/// Von Neumann meter parameters: impulsive coupling λ (pointer shift per
/// unit of functional value) and initial Gaussian spread σ, with |G(x)|²
/// a zero-mean Gaussian of variance σ². ħ = 1.
struct MeterConfig {
    double coupling = 1.0;
    double width = 1.0;
    Readout readout = Readout::position;
};

inline void validate_meter(const MeterConfig& m) {
    if (!(std::isfinite(m.coupling) && m.coupling > 0.0))
        throw InvalidArgumentError("MeterConfig: coupling must be finite and positive");
    if (!(std::isfinite(m.width) && m.width > 0.0))
        throw InvalidArgumentError("MeterConfig: width must be finite and positive");
}

/// Post-selected pointer wavefunction Φ(x) = Σ_k Ã_k G(x − λ𝓕_k) on a
/// uniform symmetric grid, with its trapezoidal squared norm.
struct PointerDistribution {
    std::vector<double> grid;
    std::vector<Complex> wavefunction;
    double norm2 = 0.0;

    double spacing() const { return grid.size() > 1 ? grid[1] - grid[0] : 0.0; }
};

namespace detail {

/// Initial pointer profile, L²-normalized: (2πσ²)^{-1/4} e^{-x²/4σ²}.
inline double gaussian_amp(double x, double sigma) {
    return std::pow(2.0 * M_PI * sigma * sigma, -0.25) * std::exp(-x * x / (4.0 * sigma * sigma));
}

inline double trapezoid_weight(std::size_t j, std::size_t n, double h) {
    return (j == 0 || j + 1 == n) ? 0.5 * h : h;
}

}  // namespace detail

/// Couple a Gaussian pointer to the branch decomposition and post-select.
/// Grid spans ±(λ·max|𝓕_k| + 8σ), so truncated tails are negligible.
inline PointerDistribution entangle_and_postselect(const BranchDecomposition& branches, const MeterConfig& meter,
                                                   int grid_points = 4096) {
    validate_meter(meter);
    if (grid_points < 512) throw InvalidArgumentError("entangle_and_postselect: grid_points must be >= 512");
    if (branches.size() == 0) throw InvalidArgumentError("entangle_and_postselect: empty branch decomposition");
    bool any = false;
    double fmax = 0.0;
    for (std::size_t k = 0; k < branches.size(); ++k) {
        fmax = std::max(fmax, std::abs(branches.branch_values[k]));
        any = any || std::norm(branches.branch_amplitudes[k]) > 0.0;
    }
    if (!any) throw PostselectionError("entangle_and_postselect: every branch amplitude vanishes");

    const double lambda = meter.coupling;
    const double sigma = meter.width;
    const double range = lambda * fmax + 8.0 * sigma;
    const std::size_t n = static_cast<std::size_t>(grid_points);

    PointerDistribution out;
    out.grid.resize(n);
    out.wavefunction.resize(n);
    const double h = 2.0 * range / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = -range + h * static_cast<double>(j);
        out.grid[j] = x;
        Complex phi(0.0, 0.0);
        for (std::size_t k = 0; k < branches.size(); ++k)
            phi += branches.branch_amplitudes[k] * detail::gaussian_amp(x - lambda * branches.branch_values[k], sigma);
        out.wavefunction[j] = phi;
    }
    double norm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) norm2 += detail::trapezoid_weight(j, n, h) * std::norm(out.wavefunction[j]);
    out.norm2 = norm2;
    if (!(norm2 > defaults::postselection_floor))
        throw PostselectionError("entangle_and_postselect: post-selected norm below threshold");
    return out;
}

/// ⟨x⟩ = ∫ x|Φ|²dx / ∫ |Φ|²dx, trapezoidal rule.
inline double pointer_mean_position(const PointerDistribution& dist) {
    if (!(dist.norm2 > defaults::postselection_floor))
        throw PostselectionError("pointer_mean_position: degenerate norm");
    const std::size_t n = dist.grid.size();
    const double h = dist.spacing();
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        acc += detail::trapezoid_weight(j, n, h) * dist.grid[j] * std::norm(dist.wavefunction[j]);
    return acc / dist.norm2;
}

/// ⟨p⟩ = Im[∫ conj(Φ) Φ' dx] / ∫ |Φ|²dx, with Φ' by central differences.
/// Endpoint contributions are dropped (the ≥8σ tails carry no weight).
inline double pointer_mean_momentum(const PointerDistribution& dist) {
    if (!(dist.norm2 > defaults::postselection_floor))
        throw PostselectionError("pointer_mean_momentum: degenerate norm");
    const std::size_t n = dist.grid.size();
    const double h = dist.spacing();
    Complex acc(0.0, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const Complex dphi = (dist.wavefunction[j + 1] - dist.wavefunction[j - 1]) / (2.0 * h);
        acc += h * std::conj(dist.wavefunction[j]) * dphi;
    }
    return acc.imag() / dist.norm2;
}

struct PointerMeans {
    double position = 0.0;
    double momentum = 0.0;
};

/// Closed-form Gaussian-overlap means for the same pointer model:
///   ⟨x⟩ = Σ_{k,l} conj(Ã_k)Ã_l·O_{kl}·λ(𝓕_k+𝓕_l)/2 / Σ_{k,l} conj(Ã_k)Ã_l·O_{kl}
///   ⟨p⟩ = Σ_{k,l} conj(Ã_k)Ã_l·O_{kl}·iλ(𝓕_k−𝓕_l)/(4σ²) / (same denominator)
/// with O_{kl} = exp(−λ²(𝓕_k−𝓕_l)²/8σ²). In the weak limit
/// ⟨x⟩/λ → Re[B_w] and ⟨p⟩/λ → Im[B_w]/(2σ²).
inline PointerMeans analytic_pointer_mean(const BranchDecomposition& branches, const MeterConfig& meter) {
    validate_meter(meter);
    const double lambda = meter.coupling;
    const double sigma = meter.width;
    Complex denom(0.0, 0.0);
    Complex num_x(0.0, 0.0);
    Complex num_p(0.0, 0.0);
    for (std::size_t k = 0; k < branches.size(); ++k) {
        for (std::size_t l = 0; l < branches.size(); ++l) {
            const double fk = branches.branch_values[k];
            const double fl = branches.branch_values[l];
            const double gap = lambda * (fk - fl);
            const double overlap = std::exp(-gap * gap / (8.0 * sigma * sigma));
            const Complex w = std::conj(branches.branch_amplitudes[k]) * branches.branch_amplitudes[l] * overlap;
            denom += w;
            num_x += w * (lambda * (fk + fl) / 2.0);
            num_p += w * Complex(0.0, lambda * (fk - fl) / (4.0 * sigma * sigma));
        }
    }
    if (!(denom.real() > defaults::postselection_floor))
        throw PostselectionError("analytic_pointer_mean: post-selected norm below threshold");
    return PointerMeans{num_x.real() / denom.real(), num_p.real() / denom.real()};
}

struct SweepRow {
    double ratio = 0.0;             // λ/σ
    double normalized_shift = 0.0;  // ⟨x⟩/λ from the grid model
    std::optional<double> weak_prediction;
    std::optional<double> strong_prediction;
};

/// Normalized pointer shift across the weak→strong transition, next to the
/// first-order (weak) and interference-free (strong) predictions.
inline std::vector<SweepRow> regime_sweep(const BranchDecomposition& branches, const MeterConfig& base,
                                          const std::vector<double>& ratios, int grid_points = 4096) {
    validate_meter(base);
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (!(std::isfinite(ratios[i]) && ratios[i] > 0.0))
            throw InvalidArgumentError("regime_sweep: ratios must be finite and positive");
        if (i > 0 && ratios[i] < ratios[i - 1]) throw InvalidArgumentError("regime_sweep: ratios must be sorted ascending");
    }

    std::optional<double> weak;
    try {
        const WeakResult w = weak_statistics(branches);
        weak = w.real_shift;
    } catch (const PostselectionError&) {
    }
    const StrongResult s = strong_statistics(branches);

    std::vector<SweepRow> rows;
    rows.reserve(ratios.size());
    for (double r : ratios) {
        MeterConfig m{r * base.width, base.width, base.readout};
        const PointerDistribution dist = entangle_and_postselect(branches, m, grid_points);
        SweepRow row;
        row.ratio = r;
        row.normalized_shift = pointer_mean_position(dist) / m.coupling;
        row.weak_prediction = weak;
        row.strong_prediction = s.conditional_mean;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace pathsim
