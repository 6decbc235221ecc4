#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "oracle.hpp"
#include "pathsim/pathsim.hpp"

using namespace pathsim;
using Catch::Approx;

namespace {

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
    return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

bool has_code(const ParseError& e, const std::string& code) { return has_code(e.diagnostics(), code); }

}  // namespace

TEST_CASE("every builtin validates cleanly") {
    for (const std::string& name : builtin_names()) {
        const ScenarioSpec spec = builtin(name);
        CAPTURE(name);
        CHECK(validate(spec).empty());
        CHECK(spec.name == name);
    }
    CHECK_THROWS_AS(builtin("no_such_scenario"), Error);
}

TEST_CASE("three_path matches its design constraints") {
    const PathwaySet ps = enumerate_paths(builtin("three_path"));
    REQUIRE(ps.size() == 3);
    // A1 = -A2 exactly, A3 nonzero, all proportional to (1,-1,1).
    CHECK(std::abs(ps.amplitude(0) + ps.amplitude(1)) <= 1e-12);
    CHECK(std::abs(ps.amplitude(2)) > 0.1);
    CHECK(ps.amplitude(0).real() == Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(ps.amplitude(1).real() == Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(ps.amplitude(2).real() == Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("blocked_arm kills both loop amplitudes") {
    const PathwaySet ps = enumerate_paths(builtin("blocked_arm"));
    double loop_weight = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
        if (ps.path(i).indices[0] != 2) loop_weight += std::abs(ps.amplitude(i));
    CHECK(loop_weight <= 1e-15);
    CHECK(std::abs(ps.total_amplitude()) == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("serialize/parse round trip preserves amplitudes") {
    for (const std::string& name : builtin_names()) {
        CAPTURE(name);
        const ScenarioSpec original = builtin(name);
        const ScenarioSpec reparsed = parse_scenario(serialize_scenario(original));
        const ScenarioSpec twice = parse_scenario(serialize_scenario(reparsed));
        const PathwaySet a = enumerate_paths(original);
        const PathwaySet b = enumerate_paths(reparsed);
        const PathwaySet c = enumerate_paths(twice);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(a.amplitude(i) - b.amplitude(i)) <= 1e-15);
            CHECK(b.amplitude(i) == c.amplitude(i));
        }
        CHECK(scenario_digest(reparsed) == scenario_digest(twice));
    }
}

TEST_CASE("parsed hadamard_qubit reproduces A = (1/2, 1/2)") {
    const ScenarioSpec spec = parse_scenario(serialize_scenario(builtin("hadamard_qubit")));
    const PathwaySet ps = enumerate_paths(spec);
    REQUIRE(ps.size() == 2);
    CHECK(ps.amplitude(0).real() == Approx(0.5));
    CHECK(ps.amplitude(1).real() == Approx(0.5));
}

TEST_CASE("digest is stable and discriminates scenarios") {
    const std::string d1 = scenario_digest(builtin("three_path"));
    const std::string d2 = scenario_digest(builtin("three_path"));
    const std::string d3 = scenario_digest(builtin("nested_loop"));
    CHECK(d1 == d2);
    CHECK(d1 != d3);
    CHECK(d1.size() == 16);
}

TEST_CASE("parser diagnostics") {
    SECTION("empty document") {
        try {
            parse_scenario("");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(has_code(e, "syntax_error"));
        }
    }
    SECTION("junk inputs never crash") {
        for (const char* doc : {"[", "{", "123", "[1,2,3]", "\"str\"", "{\"dim\": []}", "null", "{]"}) {
            CAPTURE(doc);
            CHECK_THROWS_AS(parse_scenario(doc), ParseError);
        }
    }
    SECTION("random byte soup never crashes") {
        oracle::Rng rng(37);
        for (int trial = 0; trial < 200; ++trial) {
            std::string soup;
            const int len = rng.integer(0, 120);
            for (int i = 0; i < len; ++i) soup.push_back(static_cast<char>(rng.integer(1, 255)));
            CHECK_THROWS_AS(parse_scenario(soup), ParseError);
        }
    }
    SECTION("structurally valid JSON with mangled fields never crashes") {
        oracle::Rng rng(41);
        const std::string base = serialize_scenario(builtin("two_time_qubit"));
        for (int trial = 0; trial < 100; ++trial) {
            std::string doc = base;
            const int cut = rng.integer(1, static_cast<int>(doc.size()) - 2);
            doc.erase(static_cast<std::size_t>(cut), static_cast<std::size_t>(rng.integer(1, 40)));
            try {
                parse_scenario(doc);  // a lucky deletion may still be valid
            } catch (const ParseError&) {
            }
        }
    }
    SECTION("non-unitary segment is named") {
        nlohmann::json doc = nlohmann::json::parse(serialize_scenario(builtin("hadamard_qubit")));
        doc["segments"][0][0][0][0] = doc["segments"][0][0][0][0].get<double>() + 1e-3;
        try {
            parse_scenario(doc.dump());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            REQUIRE(has_code(e, "non_unitary_segment"));
            bool names_segment = false;
            for (const auto& d : e.diagnostics()) names_segment = names_segment || d.location == "$.segments[0]";
            CHECK(names_segment);
        }
    }
    SECTION("unknown top-level key") {
        nlohmann::json doc = nlohmann::json::parse(serialize_scenario(builtin("hadamard_qubit")));
        doc["extra"] = 1;
        try {
            parse_scenario(doc.dump());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(has_code(e, "unknown_key"));
        }
    }
    SECTION("unknown functional kind") {
        nlohmann::json doc = nlohmann::json::parse(serialize_scenario(builtin("hadamard_qubit")));
        doc["functionals"]["bad"] = {{"kind", "no_such_kind"}};
        try {
            parse_scenario(doc.dump());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(has_code(e, "unknown_kind"));
        }
    }
    SECTION("ragged matrix") {
        nlohmann::json doc = nlohmann::json::parse(serialize_scenario(builtin("hadamard_qubit")));
        doc["segments"][0][0].erase(1);
        CHECK_THROWS_AS(parse_scenario(doc.dump()), ParseError);
    }
    SECTION("malformed complex entry") {
        nlohmann::json doc = nlohmann::json::parse(serialize_scenario(builtin("hadamard_qubit")));
        doc["psi_initial"][0] = 1.0;
        try {
            parse_scenario(doc.dump());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(has_code(e, "bad_complex"));
        }
    }
    SECTION("missing required field") {
        nlohmann::json doc = nlohmann::json::parse(serialize_scenario(builtin("hadamard_qubit")));
        doc.erase("psi_final");
        try {
            parse_scenario(doc.dump());
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(has_code(e, "missing_field"));
        }
    }
}

TEST_CASE("validate diagnostics") {
    SECTION("incomplete slice basis") {
        ScenarioSpec spec = builtin("hadamard_qubit");
        spec.slices[0].basis.pop_back();
        CHECK(has_code(validate(spec), "incomplete_slice"));
    }
    SECTION("unnormalized boundary state") {
        ScenarioSpec spec = builtin("hadamard_qubit");
        spec.psi_initial = StateVector({Complex(2.0, 0.0), Complex(0.0, 0.0)});
        CHECK(has_code(validate(spec), "unnormalized_boundary_state"));
    }
    SECTION("dangling meter reference") {
        ScenarioSpec spec = builtin("hadamard_qubit");
        spec.meters["broken"] = "no_such_functional";
        CHECK(has_code(validate(spec), "dangling_meter_reference"));
    }
    SECTION("non-orthonormal slice") {
        ScenarioSpec spec = builtin("hadamard_qubit");
        const double s = 1.0 / std::sqrt(2.0);
        spec.slices[0].basis[1] = StateVector({Complex(s, 0.0), Complex(s, 0.0)});
        spec.slices[0].basis[0] = StateVector({Complex(s, 0.0), Complex(s, 0.0)});
        CHECK(has_code(validate(spec), "non_orthonormal_slice"));
    }
    SECTION("observable not diagonal in the slice basis") {
        ScenarioSpec spec = builtin("hadamard_qubit");
        spec.observables.at("sz") = LinearOperator({{Complex(0, 0), Complex(1, 0)}, {Complex(1, 0), Complex(0, 0)}});
        CHECK(has_code(validate(spec), "observable_not_diagonal_in_slice"));
    }
    SECTION("indicator path index out of range") {
        ScenarioSpec spec = builtin("three_path");
        spec.functionals["bad"] = FunctionalSpec::indicator_of({17});
        CHECK(has_code(validate(spec), "invalid_functional"));
    }
    SECTION("segment count mismatch") {
        ScenarioSpec spec = builtin("hadamard_qubit");
        spec.segments.pop_back();
        CHECK(has_code(validate(spec), "dimension_mismatch"));
    }
    SECTION("path count cap") {
        oracle::Rng rng(23);
        ScenarioSpec spec = oracle::random_scenario(16, 6, rng);  // 16^6 paths
        CHECK(has_code(validate(spec), "path_cap"));
    }
    SECTION("dimension cap") {
        oracle::Rng rng(29);
        ScenarioSpec spec = oracle::random_scenario(2, 1, rng);
        spec.dim = 65;
        CHECK(has_code(validate(spec), "dimension_cap"));
    }
}

TEST_CASE("validated specs enumerate without precondition errors") {
    oracle::Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = rng.integer(2, 4);
        const int slices = rng.integer(1, 3);
        const ScenarioSpec spec = oracle::random_scenario(dim, slices, rng);
        REQUIRE(validate(spec).empty());
        CHECK_NOTHROW(enumerate_paths(spec));
    }
}
