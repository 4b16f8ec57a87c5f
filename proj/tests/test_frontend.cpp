// Problem ingestion (sparse semidefinite exchange format and the JSON
// mixed-cone format), normalized writers, report byte-stability, and the
// command-line driver's exit-code contract.
#include <conereg/cli.hpp>
#include <conereg/io.hpp>
#include <conereg/report.hpp>

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "support.hpp"

using namespace conereg;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Scratch directory for files the CLI tests create.
std::string scratch_file(const std::string& name) {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "conereg-frontend-tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

bool systems_equal(const ConicSystem& a, const ConicSystem& b) {
    if (a.m() != b.m() || a.dim() != b.dim()) return false;
    if ((a.A - b.A).lpNorm<Eigen::Infinity>() > 1e-12) return false;
    if ((a.b - b.b).lpNorm<Eigen::Infinity>() > 1e-12) return false;
    if (a.cone.blocks.size() != b.cone.blocks.size()) return false;
    for (std::size_t i = 0; i < a.cone.blocks.size(); ++i)
        if (a.cone.blocks[i].kind != b.cone.blocks[i].kind ||
            a.cone.blocks[i].n != b.cone.blocks[i].n)
            return false;
    return true;
}

}  // namespace

TEST_CASE("sparse format: fixture, off-diagonal scaling, orthant blocks") {
    const ParsedProblem pp = parse_sdpa(slurp(testsupport::fixture_path("psd_pair.dat-s")));
    REQUIRE(pp.system.m() == 2);
    REQUIRE(pp.system.cone.blocks.size() == 1);
    CHECK(pp.system.cone.blocks[0].kind == ConeClass::Psd);
    CHECK(pp.system.cone.blocks[0].n == 2);
    CHECK(pp.system.b(0) == doctest::Approx(0.0));
    CHECK(pp.system.b(1) == doctest::Approx(1.0));
    // Rows are the vectorized E22 and E11: coordinates (s11, s12*sqrt2, s22).
    CHECK((pp.system.A.row(0) - Vector{{0.0, 0.0, 1.0}}.transpose()).norm() <= 1e-14);
    CHECK((pp.system.A.row(1) - Vector{{1.0, 0.0, 0.0}}.transpose()).norm() <= 1e-14);
    CHECK(pp.system.surjective);

    // An off-diagonal entry lands in the scaled coordinate and is mirrored.
    const ParsedProblem off = parse_sdpa("1\n1\n2\n3.0\n1 1 1 2 0.5\n");
    CHECK(off.system.A(0, 1) == doctest::Approx(0.5 * std::sqrt(2.0)));
    CHECK(off.system.A(0, 0) == doctest::Approx(0.0));

    // Negative block sizes are diagonal blocks, i.e. orthant coordinates.
    const ParsedProblem diag = parse_sdpa("1\n1\n-3\n1.0\n1 1 2 2 2.5\n");
    REQUIRE(diag.system.cone.blocks.size() == 1);
    CHECK(diag.system.cone.blocks[0].kind == ConeClass::Orthant);
    CHECK(diag.system.cone.blocks[0].n == 3);
    CHECK(diag.system.A(0, 1) == doctest::Approx(2.5));
}

TEST_CASE("sparse format: comments, objective metadata, zero rows") {
    const std::string text =
        "\"leading comment\n"
        "* another comment\n"
        "2\n"
        "1\n"
        "2\n"
        "0.0 1.0\n"
        "0 1 1 1 9.0\n"   // objective block data: metadata only
        "2 1 1 1 1.0\n";  // constraint 1 has no entries -> zero row
    const ParsedProblem pp = parse_sdpa(text);
    CHECK(pp.objective(0) == doctest::Approx(9.0));
    CHECK(pp.system.A.row(0).norm() == doctest::Approx(0.0));
    CHECK(!pp.system.surjective);  // the zero row cannot be independent
}

TEST_CASE("sparse format: malformed inputs are rejected") {
    // Conflicting duplicate entries.
    CHECK_THROWS_AS(parse_sdpa("1\n1\n2\n0.0\n1 1 1 1 1.0\n1 1 1 1 2.0\n"),
                    std::invalid_argument);
    // Off-diagonal entry inside a diagonal block.
    CHECK_THROWS_AS(parse_sdpa("1\n1\n-2\n0.0\n1 1 1 2 1.0\n"), std::invalid_argument);
    // Matrix number out of range.
    CHECK_THROWS_AS(parse_sdpa("1\n1\n2\n0.0\n3 1 1 1 1.0\n"), std::invalid_argument);
    // Index out of block range.
    CHECK_THROWS_AS(parse_sdpa("1\n1\n2\n0.0\n1 1 1 5 1.0\n"), std::invalid_argument);
}

TEST_CASE("json format: dense and triplet matrices parse identically") {
    const std::string dense = R"({
      "cones": [{"type": "orthant", "n": 3}],
      "A": [[1, 0, 2], [0, 0, 3]],
      "b": [1, 2]
    })";
    const std::string sparse = R"({
      "cones": [{"type": "orthant", "n": 3}],
      "A": {"rows": 2, "cols": 3, "entries": [[0, 0, 1], [0, 2, 2], [1, 2, 3]]},
      "b": [1, 2]
    })";
    CHECK(systems_equal(parse_cone_json(dense).system, parse_cone_json(sparse).system));
}

TEST_CASE("json format: semidefinite rows accept raw matrices or vectorized form") {
    // One psd(2) block: a row may be given raw (4 = n*n entries, row-major)
    // or already vectorized (3 = n(n+1)/2 entries).
    const std::string raw = R"({
      "cones": [{"type": "psd", "n": 2}],
      "A": [[0, 1, 1, 0]],
      "b": [0]
    })";
    const std::string packed = R"({
      "cones": [{"type": "psd", "n": 2}],
      "A": [[0, 1.4142135623730951, 0]],
      "b": [0]
    })";
    const ParsedProblem a = parse_cone_json(raw);
    const ParsedProblem b = parse_cone_json(packed);
    CHECK((a.system.A - b.system.A).lpNorm<Eigen::Infinity>() <= 1e-12);

    // Raw input is symmetrized: an asymmetric raw matrix averages.
    const std::string skew = R"({
      "cones": [{"type": "psd", "n": 2}],
      "A": [[0, 2, 0, 0]],
      "b": [0]
    })";
    CHECK(parse_cone_json(skew).system.A(0, 1) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("json format: metadata, points, candidates, and errors") {
    const ParsedProblem pp =
        load_problem(testsupport::fixture_path("exp_example.json"));
    CHECK(pp.format == ProblemFormat::ConeJson);
    CHECK(pp.system.name == "exp_example");
    REQUIRE(pp.candidates.size() == 2);
    CHECK((pp.candidates[0] - Vector{{1.0, 0.0}}).norm() <= 1e-14);
    REQUIRE(pp.points.size() == 2);
    CHECK(point_to_ambient(pp.system.cone, pp.points[0])(2) == doctest::Approx(1.0));

    CHECK_THROWS_AS(parse_cone_json(R"({"cones": [{"type": "warp", "n": 2}],
                                        "A": [[1, 0]], "b": [0]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_cone_json(R"({"cones": [{"type": "orthant", "n": 3}],
                                        "A": [[1, 0]], "b": [0]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_cone_json(R"({"cones": [{"type": "orthant", "n": 2}],
                                        "A": [[1, 0]], "b": [0, 1]})"),
                    std::invalid_argument);
}

TEST_CASE("parse_points_json follows the block coordinate conventions") {
    ConeSpec spec;
    spec.blocks.push_back({ConeClass::Orthant, 2});
    const std::vector<Point> pts = parse_points_json("[[1, 2], [3, 4]]", spec);
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].vec(0)(1) == doctest::Approx(4.0));
}

TEST_CASE("writers normalize: write(parse(f)) is a fixed point of the corpus") {
    const char* fixtures[] = {"exp_example.json", "lp_trivial.json",   "orthant_forced.json",
                              "assignment3.json", "psd_pair.dat-s",    "psd_single.dat-s"};
    for (const char* name : fixtures) {
        const ParsedProblem p1 = load_problem(testsupport::fixture_path(name));
        const bool sdpa = p1.format == ProblemFormat::SdpaSparse;
        const std::string w1 = sdpa ? write_sdpa(p1) : write_cone_json(p1);
        const ParsedProblem p2 = sdpa ? parse_sdpa(w1, p1.system.name)
                                      : parse_cone_json(w1, p1.system.name);
        CHECK(systems_equal(p1.system, p2.system));
        CHECK(p2.points.size() == p1.points.size());
        CHECK(p2.candidates.size() == p1.candidates.size());
        const std::string w2 = sdpa ? write_sdpa(p2) : write_cone_json(p2);
        CHECK(w1 == w2);  // normalized form is stable byte-for-byte
    }

    // The sparse format cannot express an exponential block.
    const ParsedProblem exp_pp = load_problem(testsupport::fixture_path("exp_example.json"));
    CHECK_THROWS_AS(write_sdpa(exp_pp), std::invalid_argument);
}

TEST_CASE("cross-format bridge: semidefinite fixture through json and back") {
    const ParsedProblem sdpa = load_problem(testsupport::fixture_path("psd_pair.dat-s"));
    const ParsedProblem via_json = parse_cone_json(write_cone_json(sdpa));
    CHECK(systems_equal(sdpa.system, via_json.system));
}

TEST_CASE("load_problem dispatches on the extension") {
    CHECK(load_problem(testsupport::fixture_path("psd_pair.dat-s")).format ==
          ProblemFormat::SdpaSparse);
    CHECK(load_problem(testsupport::fixture_path("lp_trivial.json")).format ==
          ProblemFormat::ConeJson);
    CHECK_THROWS_AS(load_problem("/nonexistent/problem.json"), std::invalid_argument);
    const std::string odd = scratch_file("problem.txt");
    write_file(odd, "not a problem");
    CHECK_THROWS_AS(load_problem(odd), std::invalid_argument);
}

TEST_CASE("reports are byte-stable for identical inputs") {
    const ParsedProblem pp = load_problem(testsupport::fixture_path("exp_example.json"));
    AuxOptions aux;
    aux.candidates = pp.candidates;
    const SlaterVerdict v = solve_auto(pp.system, aux);

    const auto build = [&] {
        ReportBuilder rb(pp.system, pp.format, 1, TolerancePolicy{});
        rb.add_slater(v);
        rb.add_note("context", "frontend determinism test");
        return rb;
    };
    const std::string j1 = build().json_string();
    const std::string j2 = build().json_string();
    CHECK(j1 == j2);
    CHECK(!build().text().empty());

    const json doc = json::parse(j1);
    CHECK(doc.at("slater").at("status").get<std::string>() == "fails");
    CHECK(doc.at("problem").at("m").get<int>() == 2);
}

TEST_CASE("cli: subcommands complete with exit code 0 and write reports") {
    const std::string out1 = scratch_file("slater.json");
    CHECK(run_cli({"check-slater", testsupport::fixture_path("exp_example.json"), "--out",
                   out1}) == 0);
    const json slater = json::parse(slurp(out1));
    CHECK(slater.at("slater").at("status").get<std::string>() == "fails");

    const std::string out2 = scratch_file("singularity.json");
    CHECK(run_cli({"singularity", testsupport::fixture_path("exp_example.json"), "--out",
                   out2}) == 0);
    const json sing = json::parse(slurp(out2));
    CHECK(sing.at("singularity").at("sd_upper").get<int>() == 2);
    CHECK(sing.at("singularity").at("ips").get<int>() == 2);

    const std::string out3 = scratch_file("reduce.txt");
    CHECK(run_cli({"reduce", testsupport::fixture_path("lp_trivial.json"), "--format", "text",
                   "--out", out3}) == 0);
    CHECK(slurp(out3).find("steps") != std::string::npos);

    const std::string out4 = scratch_file("degeneracy.json");
    CHECK(run_cli({"degeneracy", testsupport::fixture_path("assignment3.json"), "--out",
                   out4}) == 0);
    const json degen = json::parse(slurp(out4));
    REQUIRE(degen.at("degeneracy").at("points").size() == 7);

    const std::string out5 = scratch_file("probe.json");
    CHECK(run_cli({"ipm-probe", testsupport::fixture_path("psd_pair.dat-s"), "--out", out5}) == 0);

    const std::string out6 = scratch_file("perturb.json");
    CHECK(run_cli({"perturb", testsupport::fixture_path("psd_pair.dat-s"), "--eps", "0.1",
                   "--out", out6}) == 0);
    const json pert = json::parse(slurp(out6));
    CHECK(pert.at("perturbation").at("consistent").get<bool>());
}

TEST_CASE("cli: identical invocations produce identical bytes") {
    const std::string a = scratch_file("det_a.json");
    const std::string b = scratch_file("det_b.json");
    REQUIRE(run_cli({"singularity", testsupport::fixture_path("psd_pair.dat-s"), "--seed", "3",
                     "--out", a}) == 0);
    REQUIRE(run_cli({"singularity", testsupport::fixture_path("psd_pair.dat-s"), "--seed", "3",
                     "--out", b}) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("cli: exit code 2 flags undetermined verdicts") {
    // A strictly feasible exponential-cone system: the general search cannot
    // certify Slater, so the verdict stays undetermined by contract.
    const std::string feasible_exp = scratch_file("exp_feasible.json");
    write_file(feasible_exp, R"({
      "cones": [{"type": "exp", "n": 3}],
      "A": [[0, 0, 1]],
      "b": [1]
    })");
    CHECK(run_cli({"check-slater", feasible_exp, "--out", scratch_file("undet.json")}) == 2);
}

TEST_CASE("cli: input errors exit with code 1") {
    CHECK(run_cli({"check-slater", "/nonexistent/file.json"}) == 1);
    CHECK(run_cli({"not-a-command"}) == 1);
    CHECK(run_cli({"perturb", testsupport::fixture_path("psd_pair.dat-s")}) == 1);  // --eps missing
    const std::string bad = scratch_file("bad.json");
    write_file(bad, "{ this is not json");
    CHECK(run_cli({"reduce", bad}) == 1);
}
