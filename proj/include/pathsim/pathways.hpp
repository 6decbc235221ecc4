#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "pathsim/errors.hpp"
#include "pathsim/hilbert.hpp"
#include "pathsim/scenario.hpp"

namespace pathsim {

/// One virtual path: a basis index per intermediate slice.
struct VirtualPath {
    std::vector<int> indices;
};

/// All virtual paths of a scenario with their chain-product amplitudes, in
/// lexicographic order over (slice 1 index, ..., slice L index).
class PathwaySet {
  public:
    PathwaySet(std::vector<VirtualPath> paths, std::vector<Complex> amplitudes, std::vector<int> slice_sizes,
               std::string scenario_digest)
        : paths_(std::move(paths)),
          amplitudes_(std::move(amplitudes)),
          slice_sizes_(std::move(slice_sizes)),
          scenario_digest_(std::move(scenario_digest)) {
        if (paths_.size() != amplitudes_.size()) throw InvalidArgumentError("PathwaySet: paths/amplitudes size mismatch");
    }

    std::size_t size() const noexcept { return paths_.size(); }
    const std::vector<VirtualPath>& paths() const noexcept { return paths_; }
    const VirtualPath& path(std::size_t i) const { return paths_[i]; }
    const std::vector<Complex>& amplitudes() const noexcept { return amplitudes_; }
    const Complex& amplitude(std::size_t i) const { return amplitudes_[i]; }
    const std::vector<int>& slice_sizes() const noexcept { return slice_sizes_; }
    const std::string& scenario_digest() const noexcept { return scenario_digest_; }

    /// Σ_i A_i; equals the total transition amplitude by the
    /// resolution-of-identity check enforced at enumeration.
    Complex total_amplitude() const noexcept {
        Complex s(0.0, 0.0);
        for (const Complex& a : amplitudes_) s += a;
        return s;
    }

  private:
    std::vector<VirtualPath> paths_;
    std::vector<Complex> amplitudes_;
    std::vector<int> slice_sizes_;
    std::string scenario_digest_;
};

/// A real value per path, already resolved against a PathwaySet.
struct PathFunctional {
    FunctionalKind kind = FunctionalKind::table;
    std::vector<double> values;
};

/// Coarse-grained branches: the distinct functional values (descending),
/// the summed member amplitudes, and the member path indices per branch.
struct BranchDecomposition {
    std::vector<double> branch_values;
    std::vector<Complex> branch_amplitudes;
    std::vector<std::vector<std::size_t>> branch_members;

    std::size_t size() const noexcept { return branch_values.size(); }
    Complex total_amplitude() const noexcept {
        Complex s(0.0, 0.0);
        for (const Complex& a : branch_amplitudes) s += a;
        return s;
    }
};

namespace detail {

inline void require_valid(const ScenarioSpec& spec) {
    auto diags = validate(spec);
    if (!diags.empty()) throw ValidationError(std::move(diags));
}

/// Per-slice overlap tables for the chain products:
///   entry[j]          = ⟨b¹_j | U₁ ψ_I⟩
///   transfer[s][j][k] = ⟨b^{s+2}_j | U_{s+2} b^{s+1}_k⟩
///   exit[j]           = ⟨ψ_F | U_{L+1} b^L_j⟩
struct OverlapTables {
    std::vector<Complex> entry;
    std::vector<std::vector<std::vector<Complex>>> transfer;
    std::vector<Complex> exit;
};

inline OverlapTables build_overlaps(const ScenarioSpec& spec) {
    OverlapTables t;
    const std::size_t L = spec.slices.size();
    if (L == 0) return t;

    const StateVector entry_state = apply(spec.segments[0], spec.psi_initial);
    for (const StateVector& b : spec.slices[0].basis) t.entry.push_back(inner_product(b, entry_state));

    t.transfer.resize(L >= 1 ? L - 1 : 0);
    for (std::size_t s = 0; s + 1 < L; ++s) {
        const SliceBasis& from = spec.slices[s];
        const SliceBasis& to = spec.slices[s + 1];
        const LinearOperator& u = spec.segments[s + 1];
        t.transfer[s].assign(to.basis.size(), std::vector<Complex>(from.basis.size()));
        for (std::size_t k = 0; k < from.basis.size(); ++k) {
            const StateVector uk = apply(u, from.basis[k]);
            for (std::size_t j = 0; j < to.basis.size(); ++j) t.transfer[s][j][k] = inner_product(to.basis[j], uk);
        }
    }

    const SliceBasis& last = spec.slices[L - 1];
    for (const StateVector& b : last.basis) t.exit.push_back(inner_product(spec.psi_final, apply(spec.segments[L], b)));
    return t;
}

/// Walk every index tuple in lexicographic order (first slice most
/// significant), invoking f(indices).
template <typename F>
inline void for_each_path(const std::vector<int>& sizes, F&& f) {
    std::vector<int> idx(sizes.size(), 0);
    while (true) {
        f(idx);
        int pos = static_cast<int>(sizes.size()) - 1;
        while (pos >= 0) {
            if (++idx[static_cast<std::size_t>(pos)] < sizes[static_cast<std::size_t>(pos)]) break;
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
}

}  // namespace detail

/// Enumerate every virtual path and its chain-product amplitude
///   A_i = ⟨ψ_F|U_{L+1}|b_{i_L}⟩ ⟨b_{i_L}|U_L|b_{i_{L-1}}⟩ ··· ⟨b_{i_1}|U_1|ψ_I⟩.
/// The amplitude sum is checked against the directly composed evolution
/// (resolution of identity) to 1e-10.
inline PathwaySet enumerate_paths(const ScenarioSpec& spec) {
    detail::require_valid(spec);
    const std::size_t n_paths = path_count(spec);
    if (n_paths > defaults::max_paths)
        throw Error(Errc::path_cap_exceeded, "path count " + std::to_string(n_paths) + " exceeds cap");

    std::vector<int> sizes;
    for (const auto& s : spec.slices) sizes.push_back(static_cast<int>(s.basis.size()));

    const detail::OverlapTables tables = detail::build_overlaps(spec);
    std::vector<VirtualPath> paths;
    std::vector<Complex> amplitudes;
    paths.reserve(n_paths);
    amplitudes.reserve(n_paths);

    if (spec.slices.empty()) {
        paths.push_back(VirtualPath{});
        amplitudes.push_back(inner_product(spec.psi_final, apply(spec.segments[0], spec.psi_initial)));
    } else {
        detail::for_each_path(sizes, [&](const std::vector<int>& idx) {
            Complex a = tables.entry[static_cast<std::size_t>(idx[0])];
            for (std::size_t s = 0; s + 1 < idx.size(); ++s)
                a *= tables.transfer[s][static_cast<std::size_t>(idx[s + 1])][static_cast<std::size_t>(idx[s])];
            a *= tables.exit[static_cast<std::size_t>(idx.back())];
            paths.push_back(VirtualPath{idx});
            amplitudes.push_back(a);
        });
    }

    // Conservation: Σ A_i must match ⟨ψ_F|U_total|ψ_I⟩.
    StateVector evolved = spec.psi_initial;
    for (const auto& u : spec.segments) evolved = apply(u, evolved);
    const Complex direct = inner_product(spec.psi_final, evolved);
    Complex total(0.0, 0.0);
    for (const Complex& a : amplitudes) total += a;
    if (std::abs(total - direct) > 1e-10)
        throw NumericalError("enumerate_paths: amplitude sum " + std::to_string(std::abs(total - direct)) +
                             " away from the composed transition amplitude");

    return PathwaySet(std::move(paths), std::move(amplitudes), std::move(sizes), scenario_digest(spec));
}

/// Chain coefficients c_i: the amplitude chain through the last slice but
/// before the final segment and post-selection, so that
/// A_i = ⟨ψ_F|U_{L+1}|b_{i_L}⟩ · c_i. Lexicographic path order.
inline std::vector<Complex> chain_coefficients(const ScenarioSpec& spec) {
    detail::require_valid(spec);
    std::vector<Complex> out;
    if (spec.slices.empty()) {
        out.push_back(Complex(1.0, 0.0));
        return out;
    }
    std::vector<int> sizes;
    for (const auto& s : spec.slices) sizes.push_back(static_cast<int>(s.basis.size()));
    const detail::OverlapTables tables = detail::build_overlaps(spec);
    out.reserve(path_count(spec));
    detail::for_each_path(sizes, [&](const std::vector<int>& idx) {
        Complex c = tables.entry[static_cast<std::size_t>(idx[0])];
        for (std::size_t s = 0; s + 1 < idx.size(); ++s)
            c *= tables.transfer[s][static_cast<std::size_t>(idx[s + 1])][static_cast<std::size_t>(idx[s])];
        out.push_back(c);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Functional construction
// ---------------------------------------------------------------------------

/// Indicator of a path subset: 1 on the subset, 0 elsewhere.
inline PathFunctional indicator_functional(const std::vector<std::size_t>& subset, const PathwaySet& paths) {
    for (std::size_t p : subset)
        if (p >= paths.size())
            throw InvalidArgumentError("indicator_functional: path index " + std::to_string(p) + " out of range");
    PathFunctional f;
    f.kind = FunctionalKind::indicator;
    f.values.assign(paths.size(), 0.0);
    for (std::size_t p : subset) f.values[p] = 1.0;
    return f;
}

namespace detail {

inline int required_slice(const ScenarioSpec& spec, const std::string& label) {
    const int pos = slice_position(spec, label);
    if (pos < 0) throw InvalidArgumentError("unknown slice label '" + label + "'");
    return pos;
}

inline const LinearOperator& required_observable(const ScenarioSpec& spec, const std::string& name) {
    auto it = spec.observables.find(name);
    if (it == spec.observables.end()) throw InvalidArgumentError("unknown observable '" + name + "'");
    return it->second;
}

inline std::vector<double> slice_eigenvalues(const ScenarioSpec& spec, int slice_pos, const LinearOperator& obs) {
    const auto chk = observable_on_slice(obs, spec.slices[static_cast<std::size_t>(slice_pos)]);
    if (!chk.ok)
        throw InvalidArgumentError("observable is not diagonal in slice '" +
                                   spec.slices[static_cast<std::size_t>(slice_pos)].time_label + "' (basis vector " +
                                   std::to_string(chk.bad_index) + ")");
    return chk.values;
}

}  // namespace detail

/// Eigenvalue of the named observable read off at one slice.
inline PathFunctional observable_at_functional(const ScenarioSpec& spec, const std::string& slice_label,
                                               const LinearOperator& obs, const PathwaySet& paths) {
    const int pos = detail::required_slice(spec, slice_label);
    const std::vector<double> mu = detail::slice_eigenvalues(spec, pos, obs);
    PathFunctional f;
    f.kind = FunctionalKind::observable_at;
    f.values.reserve(paths.size());
    for (const VirtualPath& p : paths.paths()) f.values.push_back(mu[static_cast<std::size_t>(p.indices[static_cast<std::size_t>(pos)])]);
    return f;
}

/// Indicator of all paths whose basis index at `slice_label` equals m;
/// identical to the observable-at functional of Π_m = |b_m⟩⟨b_m|.
inline PathFunctional projector_functional(const ScenarioSpec& spec, const std::string& slice_label, int m,
                                           const PathwaySet& paths) {
    const int pos = detail::required_slice(spec, slice_label);
    const auto slice_size = spec.slices[static_cast<std::size_t>(pos)].basis.size();
    if (m < 0 || static_cast<std::size_t>(m) >= slice_size)
        throw InvalidArgumentError("projector_functional: basis index " + std::to_string(m) + " out of range");
    PathFunctional f;
    f.kind = FunctionalKind::projector;
    f.values.reserve(paths.size());
    for (const VirtualPath& p : paths.paths())
        f.values.push_back(p.indices[static_cast<std::size_t>(pos)] == m ? 1.0 : 0.0);
    return f;
}

/// B(slice_b) − B(slice_a), read off as eigenvalues at the two slices.
inline PathFunctional two_time_difference_functional(const ScenarioSpec& spec, const std::string& slice_a,
                                                     const std::string& slice_b, const LinearOperator& obs,
                                                     const PathwaySet& paths) {
    const int pa = detail::required_slice(spec, slice_a);
    const int pb = detail::required_slice(spec, slice_b);
    const std::vector<double> mu_a = detail::slice_eigenvalues(spec, pa, obs);
    const std::vector<double> mu_b = detail::slice_eigenvalues(spec, pb, obs);
    PathFunctional f;
    f.kind = FunctionalKind::two_time_difference;
    f.values.reserve(paths.size());
    for (const VirtualPath& p : paths.paths())
        f.values.push_back(mu_b[static_cast<std::size_t>(p.indices[static_cast<std::size_t>(pb)])] -
                           mu_a[static_cast<std::size_t>(p.indices[static_cast<std::size_t>(pa)])]);
    return f;
}

/// Arbitrary user-supplied table of per-path values.
inline PathFunctional table_functional(std::vector<double> values, const PathwaySet& paths) {
    if (values.size() != paths.size())
        throw InvalidArgumentError("table_functional: " + std::to_string(values.size()) + " values for " +
                                   std::to_string(paths.size()) + " paths");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidArgumentError("table_functional: non-finite value");
    PathFunctional f;
    f.kind = FunctionalKind::table;
    f.values = std::move(values);
    return f;
}

/// Resolve a declarative FunctionalSpec against an enumerated PathwaySet.
inline PathFunctional make_functional(const ScenarioSpec& spec, const FunctionalSpec& fs, const PathwaySet& paths) {
    switch (fs.kind) {
        case FunctionalKind::indicator: return indicator_functional(fs.paths, paths);
        case FunctionalKind::projector: return projector_functional(spec, fs.slice, fs.index, paths);
        case FunctionalKind::observable_at:
            return observable_at_functional(spec, fs.slice, detail::required_observable(spec, fs.observable), paths);
        case FunctionalKind::two_time_difference:
            return two_time_difference_functional(spec, fs.slice_a, fs.slice_b,
                                                  detail::required_observable(spec, fs.observable), paths);
        case FunctionalKind::table: return table_functional(fs.values, paths);
    }
    throw InvalidArgumentError("make_functional: unknown kind");
}

/// Look up a named functional (or the functional a meter points at).
inline PathFunctional make_functional(const ScenarioSpec& spec, const std::string& name, const PathwaySet& paths) {
    auto it = spec.functionals.find(name);
    if (it == spec.functionals.end()) {
        auto mt = spec.meters.find(name);
        if (mt != spec.meters.end()) it = spec.functionals.find(mt->second);
        if (it == spec.functionals.end())
            throw Error(Errc::unknown_name, "no functional or meter named '" + name + "'");
    }
    return make_functional(spec, it->second, paths);
}

/// The per-path values; checks the functional was built over the same
/// path structure.
inline std::vector<double> evaluate_functional(const PathFunctional& f, const PathwaySet& paths) {
    if (f.values.size() != paths.size())
        throw DimensionError("evaluate_functional: functional covers " + std::to_string(f.values.size()) +
                             " paths, set has " + std::to_string(paths.size()));
    return f.values;
}

/// Group paths by functional value (single-linkage clustering within tol)
/// and sum member amplitudes per branch. Branch values descend; the
/// representative value of a cluster is its member mean.
inline BranchDecomposition coarse_grain(const PathwaySet& paths, const PathFunctional& f,
                                        double tol = defaults::branch_value_tol) {
    if (tol < 0.0) throw InvalidArgumentError("coarse_grain: negative tolerance");
    if (f.values.size() != paths.size())
        throw DimensionError("coarse_grain: functional covers " + std::to_string(f.values.size()) + " paths, set has " +
                             std::to_string(paths.size()));

    std::vector<std::size_t> order(paths.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (f.values[a] != f.values[b]) return f.values[a] > f.values[b];
        return a < b;
    });

    BranchDecomposition out;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        // Single linkage: extend while adjacent sorted values stay within tol.
        while (j < order.size() && f.values[order[j - 1]] - f.values[order[j]] <= tol) ++j;
        std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(i),
                                         order.begin() + static_cast<std::ptrdiff_t>(j));
        std::sort(members.begin(), members.end());
        double value = 0.0;
        Complex amp(0.0, 0.0);
        for (std::size_t m : members) {
            value += f.values[m];
            amp += paths.amplitude(m);
        }
        value /= static_cast<double>(members.size());
        out.branch_values.push_back(value);
        out.branch_amplitudes.push_back(amp);
        out.branch_members.push_back(std::move(members));
        i = j;
    }
    return out;
}

}  // namespace pathsim
