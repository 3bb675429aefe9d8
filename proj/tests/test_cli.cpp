#include "doctest.h"

#include "wta/cli.hpp"
#include "wta/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <unistd.h>

using namespace wta;
namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path root;
    Scratch() : root(fs::temp_directory_path() / ("wta_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Scratch() { fs::remove_all(root); }
    std::string dir(const std::string& name) const { return (root / name).string(); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

} // namespace

TEST_CASE("simulate writes graphs and a manifest") {
    Scratch s;
    const auto r = run({"simulate", "--n", "1", "--alpha", "2", "--semantics", "remove", "--out", s.dir("one")});
    REQUIRE(r.code == cli::pass);
    CHECK(slurp(s.root / "one/graph_r0.csv") == "i,j,multiplicity\n1,1,2\n");
    const auto sidecar = io::parse_graph_sidecar(slurp(s.root / "one/graph_r0.json"));
    CHECK(sidecar.m == 2);
    CHECK(sidecar.semantics == LeakSemantics::remove);
    CHECK(fs::exists(s.root / "one/manifest.json"));

    const auto g = io::read_graph(s.root / "one/graph_r0.csv", s.root / "one/graph_r0.json");
    CHECK(g.at(1, 1) == 2);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
    Scratch s;
    const std::vector<std::string> base{"simulate", "--n", "300", "--replicates", "4", "--seed", "9", "--degrees"};
    auto with = [&](std::string threads, std::string dir) {
        auto args = base;
        args.insert(args.end(), {"--threads", threads, "--out", s.dir(dir)});
        return run(args).code;
    };
    REQUIRE(with("1", "a") == cli::pass);
    REQUIRE(with("1", "b") == cli::pass);
    REQUIRE(with("4", "c") == cli::pass);
    for (int r = 0; r < 4; ++r) {
        const std::string name = "graph_r" + std::to_string(r) + ".csv";
        CHECK(slurp(s.root / "a" / name) == slurp(s.root / "b" / name));
        CHECK(slurp(s.root / "a" / name) == slurp(s.root / "c" / name));
        CHECK(slurp(s.root / "a" / ("degrees_r" + std::to_string(r) + ".csv")) ==
              slurp(s.root / "c" / ("degrees_r" + std::to_string(r) + ".csv")));
    }
    CHECK(slurp(s.root / "a/graph_r0.csv") != slurp(s.root / "a/graph_r1.csv"));
}

TEST_CASE("usage errors") {
    Scratch s;
    CHECK(run({"simulate", "--engine", "poisson", "--semantics", "remove", "--out", s.dir("x")}).code == cli::usage_error);
    CHECK(run({"simulate", "--n", "-4"}).code == cli::usage_error);
    CHECK(run({"spectrum", "--kind", "kappa", "--n", "50", "--out", s.dir("x")}).code == cli::usage_error);
    CHECK(run({"spectrum", "--kind", "kappa", "--eps-exponent", "1.2", "--out", s.dir("x")}).code == cli::usage_error);
    CHECK(run({"oracle", "--what", "bogus", "--out", s.dir("x")}).code == cli::usage_error);
    CHECK(run({"frobnicate"}).code == cli::usage_error);
    CHECK(run({}).code == cli::usage_error);
    CHECK(run({"sweep", "--out", s.dir("x")}).code == cli::usage_error);
    CHECK(run({"--help"}).code == cli::pass);
    const auto msg = run({"simulate", "--engine", "poisson", "--semantics", "remove", "--out", s.dir("x")});
    CHECK(msg.err.find("poisson") != std::string::npos);
}

TEST_CASE("spectrum command") {
    Scratch s;
    REQUIRE(run({"spectrum", "--n", "1", "--alpha", "2", "--kind", "mu", "--out", s.dir("one")}).code == cli::pass);
    const std::string one = slurp(s.root / "one/spectra.csv");
    CHECK(one == "kind,n,alpha,eps,semantics,replicate,rank,atom\nmu,1,2,,remove,0,1,2\n");

    REQUIRE(run({"simulate", "--n", "200", "--replicates", "2", "--out", s.dir("graphs")}).code == cli::pass);
    REQUIRE(run({"spectrum", "--graphs", s.dir("graphs"), "--kind", "kappa", "--eps-exponent", "0.75", "--top", "0",
                 "--out", s.dir("kappa")})
                .code == cli::pass);
    std::istringstream rows(slurp(s.root / "kappa/spectra.csv"));
    std::string line;
    std::getline(rows, line);
    int zeros = 0, total = 0;
    while (std::getline(rows, line)) {
        ++total;
        if (line.substr(line.rfind(',') + 1) == "0") ++zeros;
    }
    CHECK(total == 400);
    CHECK(zeros >= 2 * truncation_rank(200, std::pow(200.0, -0.75)));
}

TEST_CASE("oracle command") {
    Scratch s;
    REQUIRE(run({"oracle", "--what", "k-spectrum", "--count", "1000", "--trunc-N", "50", "--out", s.dir("k")}).code ==
            cli::pass);
    std::istringstream rows(slurp(s.root / "k/oracle.csv"));
    std::string line;
    std::getline(rows, line);
    CHECK(line == "k,j1_zero,lambda_K,lambda_M_truncN,provenance");
    double sum = 0;
    double first = 0;
    while (std::getline(rows, line)) {
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        const double lambda = std::stod(line.substr(b + 1, line.find(',', b + 1) - b - 1));
        if (first == 0) first = lambda;
        sum += lambda;
    }
    CHECK(first == doctest::Approx(0.54489).epsilon(1e-5));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));

    REQUIRE(run({"oracle", "--what", "m-spectrum", "--trunc-N", "1", "--out", s.dir("m")}).code == cli::pass);
    CHECK(slurp(s.root / "m/oracle.csv") == "k,j1_zero,lambda_K,lambda_M_truncN,provenance\n1,,,1,m_truncated\n");

    REQUIRE(run({"oracle", "--what", "edge-prob", "--n", "4", "--semantics", "stay", "--out", s.dir("e")}).code ==
            cli::pass);
    CHECK(first_line(slurp(s.root / "e/edge_prob.csv")) == "u,visit,edge_offdiag,edge_diag,semantics");
    CHECK(slurp(s.root / "e/edge_prob.csv").find("\n4,0.25,0.083333333333333329,0,stay\n") != std::string::npos);

    REQUIRE(run({"oracle", "--what", "nystrom", "--count", "2", "--grid", "1000", "--out", s.dir("n")}).code == cli::pass);
    CHECK(slurp(s.root / "n/oracle.csv").find(",nystrom\n") != std::string::npos);
}

TEST_CASE("gate configuration") {
    const auto gates = cli::parse_gates("# comment\n[compare]\nrel_err_finite_max = 0.1 ; inline\n\nmin_decreasing_steps=3\n");
    CHECK(gates.rel_err_finite_max == 0.1);
    CHECK_FALSE(gates.rel_err_limit_max);
    CHECK(gates.min_decreasing_steps == 3);
    CHECK_THROWS_AS(cli::parse_gates("rel_err_max = 1\n"), DomainError);
    CHECK_THROWS_AS(cli::parse_gates("rel_err_finite_max = abc\n"), DomainError);
    CHECK_THROWS_AS(cli::parse_gates("rel_err_finite_max\n"), DomainError);
}

TEST_CASE("compare and sweep gates") {
    Scratch s;
    io::write_file(s.root / "loose.gates", "rel_err_finite_max = 0.15\n");
    const std::vector<std::string> mu{"compare", "--kind", "mu", "--n", "500", "--replicates", "5", "--top", "2"};

    auto self = mu;
    self.insert(self.end(), {"--gates", s.dir("loose.gates"), "--out", s.dir("self")});
    const auto pass = run(self);
    CHECK(pass.code == cli::pass);
    CHECK(pass.out.find("PASS") != std::string::npos);
    CHECK(first_line(slurp(s.root / "self/comparison.csv")) ==
          "kind,n,alpha,eps,semantics,rank,emp_mean,emp_std,oracle_finite,oracle_limit,rel_err_finite,rel_err_limit");

    // Remove-dynamics spectra judged against the stay kernel: the second atom is off by ~40%.
    auto mismatched = mu;
    mismatched.insert(mismatched.end(), {"--oracle-semantics", "stay", "--gates", s.dir("loose.gates"), "--out", s.dir("mm")});
    const auto fail = run(mismatched);
    CHECK(fail.code == cli::gate_failure);
    CHECK(fail.out.find("FAIL") != std::string::npos);

    io::write_file(s.root / "limit.gates", "rel_err_limit_max = 0.3\n");
    const auto sweep = run({"sweep", "--kind", "kappa", "--n-grid", "250,500,1000,2000", "--replicates", "4", "--top", "1",
                            "--gates", s.dir("limit.gates"), "--out", s.dir("sweep")});
    INFO(sweep.out);
    CHECK(sweep.code == cli::pass);
    CHECK(sweep.out.find("gate rel_err_limit_max") != std::string::npos);
    std::istringstream rows(slurp(s.root / "sweep/sweep.csv"));
    std::string line;
    int count = 0;
    while (std::getline(rows, line)) ++count;
    CHECK(count == 5);

    // Four grid points allow at most three decreasing steps.
    io::write_file(s.root / "trend.gates", "min_decreasing_steps = 4\n");
    const auto trend = run({"sweep", "--kind", "kappa", "--n-grid", "250,500,1000,2000", "--replicates", "4", "--top", "1",
                            "--gates", s.dir("trend.gates"), "--out", s.dir("trend")});
    CHECK(trend.code == cli::gate_failure);
    CHECK(trend.out.find("min_decreasing_steps") != std::string::npos);
    CHECK(trend.out.find("FAIL") != std::string::npos);

    io::write_file(s.root / "bad.gates", "min_decreasing_steps = 2\n");
    auto wrong = mu;
    wrong.insert(wrong.end(), {"--gates", s.dir("bad.gates"), "--out", s.dir("bad")});
    CHECK(run(wrong).code == cli::usage_error);
}

TEST_CASE("manifest replay and output directory override") {
    Scratch s;
    REQUIRE(run({"compare", "--kind", "kappa", "--n", "400", "--replicates", "3", "--seed", "5", "--out", s.dir("orig")})
                .code == cli::pass);
    REQUIRE(run({"replay", "--manifest", s.dir("orig/manifest.json"), "--threads", "3", "--out", s.dir("again")}).code ==
            cli::pass);
    CHECK(slurp(s.root / "orig/comparison.csv") == slurp(s.root / "again/comparison.csv"));

    ::setenv("WTA_OUT_DIR", s.dir("env").c_str(), 1);
    const int code = run({"simulate", "--n", "5", "--out", s.dir("ignored")}).code;
    ::unsetenv("WTA_OUT_DIR");
    CHECK(code == cli::pass);
    CHECK(fs::exists(s.root / "env/graph_r0.csv"));
    CHECK_FALSE(fs::exists(s.root / "ignored"));
}

TEST_CASE("number formatting") {
    CHECK(io::format_real(0.1) == "0.10000000000000001");
    CHECK(io::format_real(1.0) == "1");
    CHECK(io::format_real(2.5e-20) == "2.4999999999999999e-20");
    CHECK(io::format_real(std::optional<double>{}) == "");
}
