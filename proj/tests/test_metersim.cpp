#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "oracle.hpp"
#include "pathsim/pathsim.hpp"

using namespace pathsim;
using Catch::Approx;

namespace {

BranchDecomposition branches_of(const std::string& scenario, const std::string& functional) {
    const ScenarioSpec spec = builtin(scenario);
    const PathwaySet ps = enumerate_paths(spec);
    return coarse_grain(ps, make_functional(spec, spec.functionals.at(functional), ps));
}

BranchDecomposition two_branches(Complex a0, Complex a1, double v0 = 1.0, double v1 = -1.0) {
    BranchDecomposition br;
    br.branch_values = {v0, v1};
    br.branch_amplitudes = {a0, a1};
    br.branch_members = {{0}, {1}};
    return br;
}

}  // namespace

TEST_CASE("single branch pointer is a shifted Gaussian") {
    BranchDecomposition br;
    br.branch_values = {1.7};
    br.branch_amplitudes = {Complex(1.0, 0.0)};
    br.branch_members = {{0}};
    for (const double lambda : {0.05, 1.0, 20.0}) {
        for (const double sigma : {0.5, 2.0}) {
            const MeterConfig m{lambda, sigma, Readout::position};
            const PointerDistribution dist = entangle_and_postselect(br, m);
            CHECK(dist.norm2 == Approx(1.0).epsilon(1e-10));
            CHECK(pointer_mean_position(dist) == Approx(lambda * 1.7).margin(1e-10 * std::max(1.0, lambda)));
            CHECK(pointer_mean_momentum(dist) == 0.0);
            const PointerMeans a = analytic_pointer_mean(br, m);
            CHECK(a.position == Approx(lambda * 1.7).epsilon(1e-14));
            CHECK(a.momentum == 0.0);
        }
    }
}

TEST_CASE("three_path meter at O sees no shift at any coupling") {
    const BranchDecomposition br = branches_of("three_path", "union12");
    for (const double lambda : {1e-3, 1e-1, 1.0, 10.0, 100.0}) {
        const MeterConfig m{lambda, 1.0, Readout::position};
        const PointerDistribution dist = entangle_and_postselect(br, m);
        CHECK(std::abs(pointer_mean_position(dist)) < 1e-10);
        CHECK(std::abs(analytic_pointer_mean(br, m).position) < 1e-14);
    }
}

TEST_CASE("hadamard_qubit sigma_z pointer") {
    const BranchDecomposition br = branches_of("hadamard_qubit", "sz");

    SECTION("norm^2 matches the closed-form overlap and an independent quadrature") {
        const MeterConfig m{1.0, 1.0, Readout::position};
        const PointerDistribution dist = entangle_and_postselect(br, m);
        const double a0 = std::abs(br.branch_amplitudes[0]);
        const double a1 = std::abs(br.branch_amplitudes[1]);
        const double closed = a0 * a0 + a1 * a1 + 2.0 * a0 * a1 * std::exp(-4.0 / 8.0);
        CHECK(dist.norm2 == Approx(closed).epsilon(1e-10));

        // Independent Simpson quadrature of |A0 G(x-1) + A1 G(x+1)|^2.
        auto phi2 = [&](double x) {
            auto g = [](double u) { return std::pow(2.0 * M_PI, -0.25) * std::exp(-u * u / 4.0); };
            const double phi = a0 * g(x - 1.0) + a1 * g(x + 1.0);
            return phi * phi;
        };
        CHECK(dist.norm2 == Approx(oracle::simpson(phi2, -12.0, 12.0, 4000)).epsilon(1e-9));
    }
    SECTION("weak regime mean shift vanishes") {
        const MeterConfig m{0.01, 1.0, Readout::position};
        const PointerDistribution dist = entangle_and_postselect(br, m);
        CHECK(std::abs(pointer_mean_position(dist) / m.coupling) < 1e-4);
    }
    SECTION("strong regime reproduces the conditional mean 0") {
        const MeterConfig m{10.0, 1.0, Readout::position};
        const PointerDistribution dist = entangle_and_postselect(br, m);
        CHECK(std::abs(pointer_mean_position(dist) / m.coupling) < 1e-3);
    }
}

TEST_CASE("momentum readout reads the imaginary part with constant 1/(2 sigma^2)") {
    // Qubit with a phase gate: B_w = -i tan(phi/2), purely imaginary.
    const double phi = 0.6;
    const double s = 1.0 / std::sqrt(2.0);
    const LinearOperator h = detail::hadamard2();
    const LinearOperator hp({{Complex(s, 0), Complex(s * std::cos(phi), s * std::sin(phi))},
                             {Complex(s, 0), Complex(-s * std::cos(phi), -s * std::sin(phi))}});
    ScenarioSpec spec{"phase_qubit",
                      2,
                      StateVector::basis(2, 0),
                      StateVector::basis(2, 0),
                      {h, hp},
                      {SliceBasis{"t", {StateVector::basis(2, 0), StateVector::basis(2, 1)}}},
                      {{"sz", detail::sigma_z()}},
                      {{"sz", FunctionalSpec::observable_at("t", "sz")}},
                      {}};
    REQUIRE(validate(spec).empty());
    const PathwaySet ps = enumerate_paths(spec);
    const BranchDecomposition br = coarse_grain(ps, make_functional(spec, spec.functionals.at("sz"), ps));
    const WeakResult w = weak_statistics(br);
    CHECK(w.imag_shift == Approx(-std::tan(phi / 2.0)).epsilon(1e-12));

    for (const double sigma : {1.0, 1.7}) {
        const MeterConfig m{1e-3 * sigma, sigma, Readout::momentum};
        const PointerDistribution dist = entangle_and_postselect(br, m);
        const double mean_p = pointer_mean_momentum(dist);
        const double constant = 1.0 / (2.0 * sigma * sigma);
        CHECK(mean_p / m.coupling == Approx(constant * w.imag_shift).epsilon(0.01));
        // Grid momentum against the closed-form overlap expression.
        const PointerMeans a = analytic_pointer_mean(br, m);
        CHECK(mean_p == Approx(a.momentum).margin(1e-8));
    }
}

TEST_CASE("real amplitudes give vanishing momentum in the weak limit") {
    const BranchDecomposition br = two_branches(Complex(0.7, 0.0), Complex(0.2, 0.0));
    const MeterConfig m{1e-4, 1.0, Readout::momentum};
    const PointerDistribution dist = entangle_and_postselect(br, m);
    CHECK(std::abs(pointer_mean_momentum(dist)) < 1e-8);
}

TEST_CASE("analytic and grid means agree across regimes") {
    oracle::Rng rng(307);
    for (int trial = 0; trial < 8; ++trial) {
        const BranchDecomposition br = oracle::random_branches(rng.integer(2, 4), rng);
        for (const double ratio : {1e-3, 1e-1, 1.0, 10.0, 100.0}) {
            const MeterConfig m{ratio, 1.0, Readout::position};
            const PointerDistribution dist = entangle_and_postselect(br, m);
            const PointerMeans a = analytic_pointer_mean(br, m);
            CAPTURE(trial, ratio);
            CHECK(std::abs(pointer_mean_position(dist) - a.position) < 1e-8);
            CHECK(std::abs(pointer_mean_momentum(dist) - a.momentum) < 1e-6);
        }
    }
}

TEST_CASE("weak-limit error scales as (coupling/width)^2") {
    oracle::Rng rng(311);
    for (int trial = 0; trial < 6; ++trial) {
        const BranchDecomposition br = oracle::random_branches(rng.integer(2, 4), rng);
        const WeakResult w = weak_statistics(br);
        auto err = [&](double lambda) {
            const MeterConfig m{lambda, 1.0, Readout::position};
            return std::abs(analytic_pointer_mean(br, m).position / lambda - w.real_shift);
        };
        const double e0 = err(1e-2);
        if (e0 < 1e-8) continue;  // quadratic term too small for a clean ratio
        const double ratio = e0 / err(5e-3);
        CHECK(ratio > 3.2);
        CHECK(ratio < 4.8);
    }
    SECTION("grid route shows the same scaling on one case") {
        const BranchDecomposition br = two_branches(Complex(0.8, 0.1), Complex(0.35, -0.2), 1.3, -0.4);
        const WeakResult w = weak_statistics(br);
        auto err = [&](double lambda) {
            const MeterConfig m{lambda, 1.0, Readout::position};
            return std::abs(pointer_mean_position(entangle_and_postselect(br, m)) / lambda - w.real_shift);
        };
        const double ratio = err(2e-2) / err(1e-2);
        CHECK(ratio == Approx(4.0).epsilon(0.2));
    }
}

TEST_CASE("strong limit reproduces the conditional mean") {
    SECTION("two_time_qubit at ratio 10") {
        const BranchDecomposition br = branches_of("two_time_qubit", "diff");
        const MeterConfig m{10.0, 1.0, Readout::position};
        const PointerDistribution dist = entangle_and_postselect(br, m);
        CHECK(std::abs(pointer_mean_position(dist) / 10.0 - 1.0) <= 1e-3);
    }
    SECTION("random branch sets with unit-separated values") {
        oracle::Rng rng(313);
        for (int trial = 0; trial < 5; ++trial) {
            BranchDecomposition br;
            const int k = rng.integer(2, 4);
            for (int i = 0; i < k; ++i) {
                br.branch_values.push_back(static_cast<double>(k - i));
                br.branch_amplitudes.push_back(Complex(rng.uniform(0.2, 0.7), rng.uniform(-0.3, 0.3)));
                br.branch_members.push_back({static_cast<std::size_t>(i)});
            }
            const StrongResult s = strong_statistics(br);
            const MeterConfig m{10.0, 1.0, Readout::position};
            const PointerDistribution dist = entangle_and_postselect(br, m);
            CHECK(std::abs(pointer_mean_position(dist) / 10.0 - *s.conditional_mean) <= 1e-3);
        }
    }
}

TEST_CASE("regime_sweep spans weak to strong") {
    const ScenarioSpec spec = builtin("three_path");
    const PathwaySet ps = enumerate_paths(spec);
    const BranchDecomposition br = coarse_grain(ps, make_functional(spec, spec.functionals.at("proj2"), ps));
    std::vector<double> ratios;
    for (int i = 0; i < 9; ++i) ratios.push_back(std::pow(10.0, -3.0 + 0.5 * i));  // 1e-3 .. 10
    const std::vector<SweepRow> rows = regime_sweep(br, MeterConfig{1.0, 1.0, Readout::position}, ratios);
    REQUIRE(rows.size() == ratios.size());
    REQUIRE(rows.front().weak_prediction.has_value());
    REQUIRE(rows.front().strong_prediction.has_value());
    CHECK(*rows.front().weak_prediction == Approx(-1.0));
    CHECK(*rows.front().strong_prediction == Approx(0.2));
    CHECK(rows.front().normalized_shift == Approx(*rows.front().weak_prediction).margin(2e-5));
    CHECK(rows.back().normalized_shift == Approx(*rows.back().strong_prediction).margin(1e-3));
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].normalized_shift >= rows[i - 1].normalized_shift - 1e-12);
}

TEST_CASE("meter and grid validation") {
    const BranchDecomposition br = two_branches(Complex(0.7, 0.0), Complex(0.2, 0.0));
    CHECK_THROWS_AS(entangle_and_postselect(br, MeterConfig{0.0, 1.0, Readout::position}), InvalidArgumentError);
    CHECK_THROWS_AS(entangle_and_postselect(br, MeterConfig{1.0, -1.0, Readout::position}), InvalidArgumentError);
    CHECK_THROWS_AS(entangle_and_postselect(br, MeterConfig{1.0, 1.0, Readout::position}, 100), InvalidArgumentError);
    BranchDecomposition dead;
    dead.branch_values = {1.0};
    dead.branch_amplitudes = {Complex(0.0, 0.0)};
    dead.branch_members = {{0}};
    CHECK_THROWS_AS(entangle_and_postselect(dead, MeterConfig{1.0, 1.0, Readout::position}), PostselectionError);
    CHECK_THROWS_AS(regime_sweep(br, MeterConfig{1.0, 1.0, Readout::position}, {2.0, 1.0}), InvalidArgumentError);
}
