#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathsim/errors.hpp"

namespace pathsim {

using Complex = std::complex<double>;

/// Default absolute tolerances. Every check that uses one of these also
/// accepts an explicit override.
namespace defaults {
inline constexpr double unitarity_tol = 1e-9;
inline constexpr double compose_tol = 1e-8;
inline constexpr double hermiticity_tol = 1e-9;
inline constexpr double orthonormality_tol = 1e-9;
inline constexpr double completeness_tol = 1e-8;
inline constexpr double reconstruction_tol = 1e-8;
inline constexpr double eigenvalue_group_tol = 1e-9;
inline constexpr double boundary_norm_tol = 1e-9;
inline constexpr double branch_value_tol = 1e-9;
inline constexpr double sum_rule_tol = 1e-12;
inline constexpr double postselection_floor = 1e-24;  // threshold on squared magnitudes
inline constexpr int max_dim = 64;
inline constexpr int max_slices = 6;
inline constexpr std::size_t max_paths = 1000000;
}  // namespace defaults

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// A ket in a finite-dimensional complex Hilbert space. Entries are validated
/// finite at construction; normalization is a separate, caller-level check
/// (boundary states must be normalized, intermediate results need not be).
class StateVector {
  public:
    explicit StateVector(std::vector<Complex> entries) : entries_(std::move(entries)) {
        if (entries_.empty()) throw InvalidArgumentError("StateVector: empty entry list");
        for (const Complex& c : entries_)
            if (!is_finite(c)) throw InvalidArgumentError("StateVector: non-finite entry");
    }

    int dim() const noexcept { return static_cast<int>(entries_.size()); }
    const Complex& operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
    const std::vector<Complex>& entries() const noexcept { return entries_; }

    double norm2() const noexcept {
        double s = 0.0;
        for (const Complex& c : entries_) s += std::norm(c);
        return s;
    }
    double norm() const noexcept { return std::sqrt(norm2()); }

    /// Computational basis vector e_i.
    static StateVector basis(int dim, int index) {
        std::vector<Complex> e(static_cast<std::size_t>(dim), Complex(0.0, 0.0));
        e[static_cast<std::size_t>(index)] = Complex(1.0, 0.0);
        return StateVector(std::move(e));
    }

  private:
    std::vector<Complex> entries_;
};

/// A dense square operator, row-major. Finite entries enforced at
/// construction; structural properties (unitarity, hermiticity) are checked
/// by the specific call sites that need them.
class LinearOperator {
  public:
    LinearOperator(int dim, std::vector<Complex> row_major) : dim_(dim), entries_(std::move(row_major)) {
        if (dim_ <= 0) throw InvalidArgumentError("LinearOperator: non-positive dimension");
        if (entries_.size() != static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_))
            throw InvalidArgumentError("LinearOperator: entry count does not match dim*dim");
        for (const Complex& c : entries_)
            if (!is_finite(c)) throw InvalidArgumentError("LinearOperator: non-finite entry");
    }

    explicit LinearOperator(const std::vector<std::vector<Complex>>& rows)
        : LinearOperator(static_cast<int>(rows.size()), flatten(rows)) {}

    int dim() const noexcept { return dim_; }
    const Complex& at(int r, int c) const {
        return entries_[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(c)];
    }
    const std::vector<Complex>& entries() const noexcept { return entries_; }

    static LinearOperator identity(int dim) {
        std::vector<Complex> e(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), Complex(0.0, 0.0));
        for (int i = 0; i < dim; ++i) e[static_cast<std::size_t>(i) * (dim + 1)] = Complex(1.0, 0.0);
        return LinearOperator(dim, std::move(e));
    }

    LinearOperator adjoint() const {
        std::vector<Complex> e(entries_.size());
        for (int r = 0; r < dim_; ++r)
            for (int c = 0; c < dim_; ++c)
                e[static_cast<std::size_t>(c) * dim_ + r] = std::conj(at(r, c));
        return LinearOperator(dim_, std::move(e));
    }

  private:
    static std::vector<Complex> flatten(const std::vector<std::vector<Complex>>& rows) {
        std::vector<Complex> flat;
        flat.reserve(rows.size() * rows.size());
        for (const auto& row : rows) {
            if (row.size() != rows.size()) throw InvalidArgumentError("LinearOperator: ragged rows");
            flat.insert(flat.end(), row.begin(), row.end());
        }
        return flat;
    }

    int dim_;
    std::vector<Complex> entries_;
};

/// max |(U†U - I)_{rc}|
inline double unitarity_defect(const LinearOperator& u) {
    const int n = u.dim();
    double worst = 0.0;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            Complex s(0.0, 0.0);
            for (int k = 0; k < n; ++k) s += std::conj(u.at(k, r)) * u.at(k, c);
            if (r == c) s -= 1.0;
            worst = std::max(worst, std::abs(s));
        }
    }
    return worst;
}

/// max |(B - B†)_{rc}|
inline double hermiticity_defect(const LinearOperator& b) {
    const int n = b.dim();
    double worst = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) worst = std::max(worst, std::abs(b.at(r, c) - std::conj(b.at(c, r))));
    return worst;
}

/// A LinearOperator validated unitary at construction.
class UnitaryOperator {
  public:
    explicit UnitaryOperator(LinearOperator op, double tol = defaults::unitarity_tol) : op_(std::move(op)) {
        const double defect = unitarity_defect(op_);
        if (defect > tol)
            throw InvalidArgumentError("UnitaryOperator: unitarity defect " + std::to_string(defect) +
                                       " exceeds tolerance " + std::to_string(tol));
    }

    int dim() const noexcept { return op_.dim(); }
    const Complex& at(int r, int c) const { return op_.at(r, c); }
    const LinearOperator& matrix() const noexcept { return op_; }

    static UnitaryOperator identity(int dim) { return UnitaryOperator(LinearOperator::identity(dim)); }

  private:
    LinearOperator op_;
};

/// ⟨bra|ket⟩, conjugate-linear in the first argument.
inline Complex inner_product(const StateVector& bra, const StateVector& ket) {
    if (bra.dim() != ket.dim())
        throw DimensionError("inner_product: dims " + std::to_string(bra.dim()) + " vs " + std::to_string(ket.dim()));
    Complex s(0.0, 0.0);
    for (int i = 0; i < bra.dim(); ++i) s += std::conj(bra[i]) * ket[i];
    return s;
}

inline StateVector apply(const LinearOperator& op, const StateVector& state) {
    if (op.dim() != state.dim())
        throw DimensionError("apply: operator dim " + std::to_string(op.dim()) + " vs state dim " +
                             std::to_string(state.dim()));
    const int n = op.dim();
    std::vector<Complex> out(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        Complex s(0.0, 0.0);
        for (int c = 0; c < n; ++c) s += op.at(r, c) * state[c];
        out[static_cast<std::size_t>(r)] = s;
    }
    return StateVector(std::move(out));
}

inline StateVector apply(const UnitaryOperator& u, const StateVector& state) { return apply(u.matrix(), state); }

inline LinearOperator multiply(const LinearOperator& a, const LinearOperator& b) {
    if (a.dim() != b.dim())
        throw DimensionError("multiply: dims " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    const int n = a.dim();
    std::vector<Complex> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            Complex s(0.0, 0.0);
            for (int k = 0; k < n; ++k) s += a.at(r, k) * b.at(k, c);
            out[static_cast<std::size_t>(r) * n + c] = s;
        }
    }
    return LinearOperator(n, std::move(out));
}

/// u2 ∘ u1 (apply u1 first). The product is re-checked for unitarity at a
/// looser tolerance; failure signals accumulated numerical damage.
inline UnitaryOperator compose(const UnitaryOperator& u2, const UnitaryOperator& u1) {
    if (u2.dim() != u1.dim())
        throw DimensionError("compose: dims " + std::to_string(u2.dim()) + " vs " + std::to_string(u1.dim()));
    LinearOperator prod = multiply(u2.matrix(), u1.matrix());
    const double defect = unitarity_defect(prod);
    if (defect > defaults::compose_tol)
        throw NumericalError("compose: product unitarity defect " + std::to_string(defect));
    return UnitaryOperator(std::move(prod), defaults::compose_tol);
}

/// A hermitian operator together with its spectral decomposition.
/// Eigenvalues are sorted descending; eigenvectors are orthonormal and
/// aligned index-for-index with the eigenvalues.
struct Observable {
    LinearOperator op;
    std::vector<double> eigenvalues;
    std::vector<StateVector> eigenvectors;
};

namespace detail {

/// Stabilized (modified, two-pass) Gram-Schmidt over the given column set.
inline void reorthonormalize(std::vector<std::vector<Complex>>& vecs) {
    const std::size_t n = vecs.empty() ? 0 : vecs[0].size();
    for (std::size_t v = 0; v < vecs.size(); ++v) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t w = 0; w < v; ++w) {
                Complex proj(0.0, 0.0);
                for (std::size_t i = 0; i < n; ++i) proj += std::conj(vecs[w][i]) * vecs[v][i];
                for (std::size_t i = 0; i < n; ++i) vecs[v][i] -= proj * vecs[w][i];
            }
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += std::norm(vecs[v][i]);
        nrm = std::sqrt(nrm);
        if (nrm <= 0.0) throw NumericalError("eigendecompose: degenerate eigenvector collapsed");
        for (std::size_t i = 0; i < n; ++i) vecs[v][i] /= nrm;
    }
}

}  // namespace detail

/// Spectral decomposition of a hermitian operator. Eigenvalues within
/// `group_tol` of each other are treated as one degenerate group and the
/// group's eigenvectors re-orthonormalized.
inline Observable eigendecompose(const LinearOperator& op, double hermiticity_tol = defaults::hermiticity_tol,
                                 double group_tol = defaults::eigenvalue_group_tol) {
    const double h = hermiticity_defect(op);
    if (h > hermiticity_tol)
        throw InvalidArgumentError("eigendecompose: hermiticity defect " + std::to_string(h) + " exceeds tolerance");
    const int n = op.dim();

    Eigen::MatrixXcd m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = op.at(r, c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: eigensolver failed to converge");

    // Eigen returns ascending order; flip to descending.
    std::vector<double> values(static_cast<std::size_t>(n));
    std::vector<std::vector<Complex>> vectors(static_cast<std::size_t>(n),
                                              std::vector<Complex>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        const int src = n - 1 - i;
        values[static_cast<std::size_t>(i)] = solver.eigenvalues()(src);
        for (int r = 0; r < n; ++r) vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)] = solver.eigenvectors()(r, src);
    }

    // Re-orthonormalize within degenerate groups (single linkage within group_tol).
    std::size_t start = 0;
    for (std::size_t i = 1; i <= values.size(); ++i) {
        if (i == values.size() || values[i - 1] - values[i] > group_tol) {
            if (i - start > 1) {
                std::vector<std::vector<Complex>> group(vectors.begin() + static_cast<std::ptrdiff_t>(start),
                                                        vectors.begin() + static_cast<std::ptrdiff_t>(i));
                detail::reorthonormalize(group);
                std::copy(group.begin(), group.end(), vectors.begin() + static_cast<std::ptrdiff_t>(start));
            }
            start = i;
        }
    }

    // Reconstruction check: Σ |b_i⟩ B_i ⟨b_i| must reproduce the input.
    double worst = 0.0;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            Complex s(0.0, 0.0);
            for (int k = 0; k < n; ++k)
                s += vectors[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] * values[static_cast<std::size_t>(k)] *
                     std::conj(vectors[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)]);
            worst = std::max(worst, std::abs(s - op.at(r, c)));
        }
    }
    if (worst > defaults::reconstruction_tol)
        throw NumericalError("eigendecompose: reconstruction defect " + std::to_string(worst));

    std::vector<StateVector> eigvecs;
    eigvecs.reserve(static_cast<std::size_t>(n));
    for (auto& v : vectors) eigvecs.emplace_back(std::move(v));
    return Observable{op, std::move(values), std::move(eigvecs)};
}

/// An orthonormal, spanning basis attached to one intermediate time slice.
struct SliceBasis {
    std::string time_label;
    std::vector<StateVector> basis;
};

}  // namespace pathsim
