#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "pathsim/pathsim.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args, bool merge_stderr = false) {
    const std::string cmd = std::string(PATHSIM_CLI_PATH) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

nlohmann::json run_json(const std::string& args) {
    const RunResult r = run_cli(args + " --format json");
    REQUIRE(r.exit_code == 0);
    return nlohmann::json::parse(r.output);
}

std::string write_temp_scenario(const std::string& name, const pathsim::ScenarioSpec& spec) {
    const std::string path = std::string("/tmp/pathsim_test_") + name + ".json";
    std::ofstream out(path);
    out << pathsim::serialize_scenario(spec);
    return path;
}

}  // namespace

TEST_CASE("cli amplitudes") {
    SECTION("three_path table") {
        const nlohmann::json j = run_json("amplitudes --builtin three_path");
        REQUIRE(j["results"]["paths"].size() == 3);
        CHECK(j["results"]["paths"][0]["re"].get<double>() == Catch::Approx(1.0 / 3.0).epsilon(1e-9));
        CHECK(j["results"]["paths"][1]["re"].get<double>() == Catch::Approx(-1.0 / 3.0).epsilon(1e-9));
        CHECK(j["results"]["paths"][2]["re"].get<double>() == Catch::Approx(1.0 / 3.0).epsilon(1e-9));
        CHECK(j["command"] == "amplitudes");
        CHECK(j["scenario_digest"].get<std::string>().size() == 16);
    }
    SECTION("hadamard_qubit totals to one") {
        const nlohmann::json j = run_json("amplitudes --builtin hadamard_qubit");
        CHECK(j["results"]["paths"][0]["re"].get<double>() == Catch::Approx(0.5));
        CHECK(j["results"]["paths"][1]["re"].get<double>() == Catch::Approx(0.5));
        CHECK(j["results"]["total"]["re"].get<double>() == Catch::Approx(1.0));
    }
    SECTION("nonexistent file exits 2 with no stdout payload") {
        const RunResult r = run_cli("amplitudes --scenario /nonexistent/file.json");
        CHECK(r.exit_code == 2);
        CHECK(r.output.empty());
    }
    SECTION("unknown builtin exits 2") { CHECK(run_cli("amplitudes --builtin nope").exit_code == 2); }
    SECTION("deterministic byte-identical reruns") {
        const RunResult a = run_cli("amplitudes --builtin nested_loop --format json");
        const RunResult b = run_cli("amplitudes --builtin nested_loop --format json");
        CHECK(a.output == b.output);
    }
}

TEST_CASE("cli weak") {
    SECTION("meter O on three_path is null") {
        const nlohmann::json j = run_json("weak --builtin three_path --meter O");
        CHECK(std::abs(j["results"]["weak_value"]["re"].get<double>()) < 1e-12);
        CHECK(std::abs(j["results"]["weak_value"]["im"].get<double>()) < 1e-12);
        CHECK(j["results"]["sum_rule"]["is_null"].get<bool>());
    }
    SECTION("meter E on three_path reads 1") {
        const nlohmann::json j = run_json("weak --builtin three_path --meter E");
        CHECK(j["results"]["weak_value"]["re"].get<double>() == Catch::Approx(1.0));
        CHECK(!j["results"]["sum_rule"]["is_null"].get<bool>());
    }
    SECTION("meter E on blocked_arm is null") {
        const nlohmann::json j = run_json("weak --builtin blocked_arm --meter E");
        CHECK(std::abs(j["results"]["weak_value"]["re"].get<double>()) < 1e-12);
    }
    SECTION("vanishing post-selection exits 3") {
        pathsim::ScenarioSpec spec = pathsim::builtin("hadamard_qubit");
        spec.segments[1] = pathsim::LinearOperator::identity(2);
        spec.psi_final = pathsim::StateVector::basis(2, 1);
        spec.segments[0] = pathsim::LinearOperator::identity(2);
        const std::string path = write_temp_scenario("orthogonal", spec);
        CHECK(run_cli("weak --scenario " + path + " --functional sz").exit_code == 3);
    }
    SECTION("missing functional selection exits 2") { CHECK(run_cli("weak --builtin three_path").exit_code == 2); }
    SECTION("unknown meter exits 2") { CHECK(run_cli("weak --builtin three_path --meter Q").exit_code == 2); }
}

TEST_CASE("cli strong") {
    SECTION("two_time_qubit difference") {
        const nlohmann::json j = run_json("strong --builtin two_time_qubit --functional diff");
        REQUIRE(j["results"]["branches"].size() == 3);
        CHECK(j["results"]["branches"][0]["probability"].get<double>() == Catch::Approx(0.25));
        CHECK(j["results"]["branches"][1]["probability"].get<double>() == Catch::Approx(0.25));
        CHECK(j["results"]["branches"][2]["probability"].get<double>() == Catch::Approx(0.0).margin(1e-12));
        CHECK(j["results"]["conditional_mean"].get<double>() == Catch::Approx(1.0));
    }
    SECTION("all-null branches exit 3") {
        pathsim::ScenarioSpec spec = pathsim::builtin("hadamard_qubit");
        spec.segments[0] = pathsim::LinearOperator::identity(2);
        spec.segments[1] = pathsim::LinearOperator::identity(2);
        spec.psi_final = pathsim::StateVector::basis(2, 1);
        const std::string path = write_temp_scenario("allnull", spec);
        CHECK(run_cli("strong --scenario " + path + " --functional sz").exit_code == 3);
    }
}

TEST_CASE("cli pointer") {
    SECTION("three_path meter O sits at zero") {
        const nlohmann::json j = run_json("pointer --builtin three_path --meter O --coupling 1 --width 1");
        CHECK(std::abs(j["results"]["mean_position"].get<double>()) < 1e-10);
        CHECK(std::abs(j["results"]["analytic_position"].get<double>()) < 1e-12);
    }
    SECTION("zero width exits 2") {
        CHECK(run_cli("pointer --builtin three_path --meter O --coupling 1 --width 0").exit_code == 2);
    }
    SECTION("sweep interpolates between weak and strong on three_path proj2") {
        const nlohmann::json j =
            run_json("pointer --builtin three_path --functional proj2 --coupling 1 --width 1 --sweep 1e-3:10:log --sweep-points 7");
        const auto& rows = j["results"]["sweep"];
        REQUIRE(rows.size() == 7);
        CHECK(rows[0]["normalized_shift"].get<double>() == Catch::Approx(-1.0).margin(1e-4));
        CHECK(rows[6]["normalized_shift"].get<double>() == Catch::Approx(0.2).margin(1e-3));
        for (std::size_t i = 1; i < rows.size(); ++i)
            CHECK(rows[i]["normalized_shift"].get<double>() >= rows[i - 1]["normalized_shift"].get<double>() - 1e-9);
        CHECK(rows[0]["weak_prediction"].get<double>() == Catch::Approx(-1.0));
        CHECK(rows[0]["strong_prediction"].get<double>() == Catch::Approx(0.2));
    }
    SECTION("sweep plot writes an SVG") {
        const std::string svg = "/tmp/pathsim_test_sweep.svg";
        std::remove(svg.c_str());
        const RunResult r = run_cli("pointer --builtin three_path --functional proj2 --coupling 1 --width 1 --sweep 1e-2:10:log --sweep-points 5 --plot " + svg);
        CHECK(r.exit_code == 0);
        std::ifstream in(svg);
        REQUIRE(in.good());
        std::string head;
        std::getline(in, head);
        CHECK(head.find("<svg") != std::string::npos);
    }
}

TEST_CASE("cli montecarlo") {
    SECTION("hadamard_qubit estimate near zero, reproducible") {
        const std::string args = "montecarlo --builtin hadamard_qubit --functional sz --trials 200000 --seed 42 --workers 4";
        const nlohmann::json j = run_json(args);
        CHECK(std::abs(j["results"]["estimate"].get<double>()) <= 5.0 * j["results"]["std_error"].get<double>());
        CHECK(j["inputs"]["block_size"].get<std::uint64_t>() == 50000);
        const RunResult a = run_cli(args + " --format json");
        const RunResult b = run_cli(args + " --format json");
        CHECK(a.output == b.output);
    }
    SECTION("single trial yields a report or exit 3") {
        const RunResult r = run_cli("montecarlo --builtin hadamard_qubit --functional sz --trials 1 --seed 7");
        CHECK((r.exit_code == 0 || r.exit_code == 3));
    }
    SECTION("a functional with no sequential meter exits 4") {
        pathsim::ScenarioSpec spec = pathsim::builtin("two_time_qubit");
        spec.functionals["twisted"] = pathsim::FunctionalSpec::table_of({1.0, 1.0, 1.0, 0.0});
        const std::string path = write_temp_scenario("twisted", spec);
        CHECK(run_cli("montecarlo --scenario " + path + " --functional twisted --trials 100 --seed 1").exit_code == 4);
    }
}

TEST_CASE("cli human output mentions the scenario") {
    const RunResult r = run_cli("weak --builtin three_path --meter O");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("three_path") != std::string::npos);
    CHECK(r.output.find("NULL") != std::string::npos);
}

TEST_CASE("cli validation diagnostics reach stderr") {
    pathsim::ScenarioSpec spec = pathsim::builtin("hadamard_qubit");
    nlohmann::json doc = nlohmann::json::parse(pathsim::serialize_scenario(spec));
    doc["segments"][0][0][0][0] = 0.9;
    const std::string path = "/tmp/pathsim_test_nonunitary.json";
    std::ofstream(path) << doc.dump();
    const RunResult r = run_cli("amplitudes --scenario " + path, /*merge_stderr=*/true);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("non_unitary_segment") != std::string::npos);
}
