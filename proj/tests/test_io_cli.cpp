#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <sys/wait.h>
#include <unistd.h>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "pep/counting.hpp"
#include "pep/io.hpp"

using namespace pep;
using namespace fixtures;

namespace {

std::string data_path(const std::string& name) { return std::string(PEP_TEST_DATA) + "/" + name; }

struct CliResult {
    int code = 0;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    std::string outfile = std::string("/tmp/pep_cli_test_") + std::to_string(::getpid()) + ".out";
    std::string cmd = std::string(PEP_CLI_PATH) + " " + args + " > " + outfile + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = read_file(outfile);
    std::remove(outfile.c_str());
    return r;
}

}  // namespace

TEST_CASE("problem files round-trip bit-exactly") {
    std::vector<PepVector> fs = {canonicalize(two_pow()), canonicalize(two_pow_plus_minus_two_pow()),
                                 canonicalize(two_three_grid()), canonicalize(omega_vector()),
                                 canonicalize(twisted_pair())};
    for (const auto& f : fs) {
        Json j = pep_to_json(f);
        PepVector g = parse_pep(parse_json_text(j.dump()));
        Json j2 = pep_to_json(g);
        CHECK(j.dump() == j2.dump());
        std::mt19937_64 rng(1);
        std::uniform_int_distribution<long> d(-5, 5);
        for (int i = 0; i < 20; ++i) {
            ZVec n(f.variables);
            for (auto& x : n) x = d(rng);
            CHECK(evaluate(f, n) == evaluate(g, n));
        }
    }
}

TEST_CASE("element and coset serialization") {
    auto K = FieldDescriptor::quadratic(-3);
    FieldElement w(K, mpq_class(-1, 2), mpq_class(1, 2));
    CHECK(parse_elem(elem_to_json(w), K) == w);
    CHECK(parse_rational("22/7") == mpq_class(22, 7));
    CHECK_THROWS_AS(parse_rational("2.5"), ParseError);

    Coset c(zvec({3, -1}), Lattice::from_rows(2, {zvec({2, 0}), zvec({1, 5})}));
    Coset back = parse_coset(coset_to_json(c));
    CHECK(back == c);
}

TEST_CASE("cli: rank") {
    auto r = run_cli("rank " + data_path("grid.json"));
    CHECK(r.code == 0);
    Json j = parse_json_text(r.output);
    CHECK(j["rank"] == 2);
}

TEST_CASE("cli: zeros finds the odd progression") {
    auto r = run_cli("zeros " + data_path("altsum.json") + " --box 100");
    CHECK(r.code == 0);
    Json j = parse_json_text(r.output);
    CHECK(j["witness_count"] == 100);
    REQUIRE(j["verified_cosets"].size() == 1);
    CHECK(j["verified_cosets"][0]["offset"][0] == "1");
    CHECK(j["verified_cosets"][0]["basis"][0][0] == "2");
    CHECK(j["uncovered_witnesses"].empty());
}

TEST_CASE("cli: reduce output re-ingests and evaluates identically") {
    auto r = run_cli("reduce " + data_path("altsum.json"));
    REQUIRE(r.code == 0);
    Json j = parse_json_text(r.output);
    PepVector canon = parse_pep(j["canonical"]);
    PepVector orig = parse_pep(parse_json_text(read_file(data_path("altsum.json"))));
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long> d(-12, 12);
    for (int i = 0; i < 20; ++i) {
        ZVec n = zvec({d(rng)});
        CHECK(evaluate(canon, n) == evaluate(orig, n));
    }
    // pieces re-ingest as problem files too
    for (const auto& jp : j["pieces"]) {
        PepVector piece = parse_pep(jp["pep"]);
        CHECK(piece.variables <= orig.variables);
    }
}

TEST_CASE("cli: count emits csv and json with consistent numbers") {
    std::string args = "count " + data_path("two_pow.json") + " --thresholds 1000:1000:3";
    auto csv = run_cli(args + " --format csv");
    REQUIRE(csv.code == 0);
    std::istringstream ss(csv.output);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "T,N,certified");
    std::vector<long> ns;
    while (std::getline(ss, line)) {
        auto p1 = line.find(','), p2 = line.rfind(',');
        ns.push_back(std::stol(line.substr(p1 + 1, p2 - p1 - 1)));
        CHECK(line.substr(p2 + 1) == "1");
    }
    REQUIRE(ns.size() == 3);
    CHECK(ns[0] == 19);
    CHECK(ns[1] == 39);
    CHECK(ns[2] == 59);

    auto js = run_cli(args);
    REQUIRE(js.code == 0);
    Json j = parse_json_text(js.output);
    CHECK(j["summary"]["rank"] == 1);
    CHECK(j["rows"][0]["N"] == 19);
    CHECK(j.contains("input_hash"));
    CHECK(j["version"] == kLibraryVersion);
}

TEST_CASE("cli: fit carries the cross-check") {
    auto r = run_cli("fit " + data_path("two_pow.json") + " --thresholds 1000:1000:4");
    REQUIRE(r.code == 0);
    Json j = parse_json_text(r.output);
    CHECK(j["fit"]["rprime_hat"] == 1);
    CHECK(j["fit"]["diagnostic_ok"] == true);
}

TEST_CASE("cli: norm report") {
    auto r = run_cli("norm " + data_path("grid.json"));
    REQUIRE(r.code == 0);
    Json j = parse_json_text(r.output);
    double vol = j["volume"].get<double>();
    CHECK(std::fabs(vol - 3.0 / (std::log(2) * std::log(3))) < 1e-6);
    CHECK(j["volume_exact_cells"] == true);
    CHECK(j["kernel_basis"].empty());
    CHECK(j["forms"].size() == 3);  // infinity, 2, 3
}

TEST_CASE("cli: fibers") {
    auto r = run_cli("fibers " + data_path("fibers.json") + " --box 50");
    REQUIRE(r.code == 0);
    Json j = parse_json_text(r.output);
    CHECK(j["modulus"] == 1);
    CHECK(j["certified"] == true);
    CHECK(j["violations"].empty());
    REQUIRE(j["classes"].size() == 1);
    CHECK(j["classes"][0]["fiber_count"] == 1);
}

TEST_CASE("cli: bg converts matrices to a problem file") {
    auto r = run_cli("bg " + data_path("rotation.json"));
    REQUIRE(r.code == 0);
    PepVector f = parse_pep(parse_json_text(r.output));
    CHECK(f.components.size() == 4);
    CHECK(f.variables == 1);
    CHECK(pep_rank(f) == 0);
}

TEST_CASE("cli: words") {
    auto r = run_cli("words " + data_path("sanov.json") + " --lmax 5 --format csv");
    REQUIRE(r.code == 0);
    std::istringstream ss(r.output);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "l,distinct,max_height");
    long rows = 0;
    while (std::getline(ss, line)) ++rows;
    CHECK(rows == 6);
}

TEST_CASE("cli: sl2 baseline and sparseness") {
    auto r = run_cli("sl2-baseline --thresholds 50:2:3");
    REQUIRE(r.code == 0);
    Json j = parse_json_text(r.output);
    double slope = j["fitted_exponent"].get<double>();
    CHECK(std::fabs(slope - 2.0) < 0.3);

    auto s = run_cli("sparseness " + data_path("two_pow.json") + " --thresholds 50:2:3");
    REQUIRE(s.code == 0);
    Json sj = parse_json_text(s.output);
    CHECK(sj["decreasing"] == true);
}

TEST_CASE("cli: partition") {
    auto r = run_cli("partition " + data_path("twisted.json") + " --box 6");
    REQUIRE(r.code == 0);
    Json j = parse_json_text(r.output);
    REQUIRE(j["pieces"].size() >= 2);
    bool diag_piece = false;
    for (const auto& jp : j["pieces"])
        if (jp["constant_height"] == true && jp["coset"]["basis"].size() == 1) diag_piece = true;
    CHECK(diag_piece);
}

TEST_CASE("cli: count on a constant fixture") {
    auto r = run_cli("count " + data_path("constant.json") + " --thresholds 10:10:2 --format csv");
    REQUIRE(r.code == 0);
    std::istringstream ss(r.output);
    std::string line;
    std::getline(ss, line);
    std::getline(ss, line);
    CHECK(line == "10,1,1");  // N = 1, certified
}

TEST_CASE("cli: determinism") {
    std::string args = "norm " + data_path("grid.json") + " --seed 999";
    auto a = run_cli(args);
    auto b = run_cli(args);
    CHECK(a.output == b.output);
    std::string args2 = "count " + data_path("grid.json") + " --thresholds 100:10:4";
    CHECK(run_cli(args2).output == run_cli(args2).output);
}

TEST_CASE("cli: fit flags a slope/rank contradiction with exit 5") {
    // tiny box: counts of 2^n + 3^n saturate, the fitted slope collapses to 0
    // while the exact rank is 1
    std::string file = std::string("/tmp/pep_fitfail_") + std::to_string(::getpid()) + ".json";
    {
        PepPolynomial comp;
        comp.terms.push_back(term_of(q(1), {{1}, {0}}));
        comp.terms.push_back(term_of(q(1), {{0}, {1}}));
        auto f = make_pep_vector(Q(), {q(2), q(3)}, 1, {comp});
        std::ofstream out(file);
        out << pep_to_json(f).dump(2);
    }
    auto r = run_cli("fit " + file + " --box 2 --thresholds 1e6:1000:4");
    CHECK(r.code == 5);
    Json j = parse_json_text(r.output);
    CHECK(j["fit"]["diagnostic_ok"] == false);
    std::remove(file.c_str());
}

TEST_CASE("cli: thread count does not change reports") {
    std::string base = "count " + data_path("grid.json") + " --thresholds 100:10:4";
    auto one = run_cli(base + " --threads 1");
    auto four = run_cli(base + " --threads 4");
    CHECK(one.output == four.output);
}

TEST_CASE("cli: exit codes") {
    CHECK(run_cli("rank " + data_path("bad.json")).code == 2);
    CHECK(run_cli("rank " + data_path("badfield.json")).code == 3);
    CHECK(run_cli("rank " + data_path("capped.json")).code == 4);
    CHECK(run_cli("rank /nonexistent/file.json").code == 2);
    CHECK(run_cli("rank " + data_path("badshape.json")).code == 2);  // wrong value types
}
