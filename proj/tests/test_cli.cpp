// Drives the installed CLI binary end to end: exit codes, output files,
// byte-for-byte reproducibility and the SUBSPACE_TOL override.

#include "subspace/closed_form.hpp"
#include "subspace/matrix_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <string>

using namespace subspace;
namespace fs = std::filesystem;
using json = nlohmann::json;

#ifndef SUBSPACE_CLI_PATH
#error "SUBSPACE_CLI_PATH must point at the CLI binary"
#endif

namespace {

struct RunResult {
    int exit_code;
    std::string stdout_text;
};

struct CliFixture {
    fs::path dir;

    CliFixture() {
        dir = fs::temp_directory_path() /
              ("subspace_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(dir);

        Matrix y = Matrix::Zero(3, 9);
        for (int c = 0; c < 3; ++c) {
            for (int s = 0; s < 3; ++s) {
                y(c, c * 3 + s) = 1.0;
            }
        }
        write_matrix_csv(dir / "y.csv", y);

        std::ofstream(dir / "names.txt") << "a\nb\nc\n";
        std::ofstream(dir / "queries.txt") << "a\nb & !c\na | c\n";
    }

    ~CliFixture() { fs::remove_all(dir); }

    RunResult run(const std::string &args, const std::string &env = "") const {
        const fs::path out = dir / "stdout.txt";
        const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" +
                                SUBSPACE_CLI_PATH + "' " + args + " > '" + out.string() +
                                "' 2> stderr.txt";
        const int raw = std::system(cmd.c_str());
        RunResult result;
        result.exit_code = WEXITSTATUS(raw);
        std::ifstream in(out);
        result.stdout_text.assign(std::istreambuf_iterator<char>(in), {});
        return result;
    }

    std::string slurp(const fs::path &p) const {
        std::ifstream in(p);
        return {std::istreambuf_iterator<char>(in), {}};
    }
};

} // namespace

TEST_CASE("closed-form command") {
    CliFixture cli;

    SUBCASE("reports t* matching the library and writes X*") {
        const auto r = cli.run("closed-form --labels y.csv --alpha 0.99 --beta 0.7 "
                               "--out-dir cf");
        REQUIRE(r.exit_code == 0);
        const json report = json::parse(r.stdout_text);
        const double expected =
            solve_t_star({std::sqrt(3.0), std::sqrt(3.0), std::sqrt(3.0)}, 3, 0.99, 0.7);
        CHECK(report["t_star"].get<double>() == doctest::Approx(expected).epsilon(1e-12));
        CHECK(fs::exists(cli.dir / "cf" / "x_star.csv"));
        const Matrix x_star = read_matrix_csv(cli.dir / "cf" / "x_star.csv");
        CHECK(x_star.rows() == 3);
        CHECK(x_star.cols() == 9);
    }

    SUBCASE("invalid alpha is a usage error") {
        CHECK(cli.run("closed-form --labels y.csv --alpha 1.5").exit_code == 1);
    }

    SUBCASE("d below the label rank is a shape error") {
        CHECK(cli.run("closed-form --labels y.csv --d 2").exit_code == 2);
    }

    SUBCASE("rank-deficient labels are a rank error") {
        Matrix dup(2, 4);
        dup << 1, 1, 0, 0, 1, 1, 0, 0;
        write_matrix_csv(cli.dir / "dup.csv", dup);
        CHECK(cli.run("closed-form --labels dup.csv").exit_code == 2);
    }

    SUBCASE("missing file is a usage error") {
        CHECK(cli.run("closed-form --labels nope.csv").exit_code == 1);
    }
}

TEST_CASE("train command") {
    CliFixture cli;

    SUBCASE("zero epochs dumps the init") {
        const auto r = cli.run("train --labels y.csv --epochs 0 --seed 5 --out-dir t0");
        REQUIRE(r.exit_code == 0);
        const json report = json::parse(r.stdout_text);
        CHECK(report["iterations"].get<int>() == 1);
        CHECK(fs::exists(cli.dir / "t0" / "x_final.csv"));
        CHECK(fs::exists(cli.dir / "t0" / "trajectory.csv"));
        CHECK(fs::exists(cli.dir / "t0" / "gram.pgm"));
    }

    SUBCASE("same flags and seed give byte-identical outputs") {
        REQUIRE(cli.run("train --labels y.csv --epochs 50 --seed 9 --out-dir a").exit_code ==
                0);
        REQUIRE(cli.run("train --labels y.csv --epochs 50 --seed 9 --out-dir b").exit_code ==
                0);
        for (const char *name : {"x_final.csv", "trajectory.csv", "gram.pgm"}) {
            CHECK(cli.slurp(cli.dir / "a" / name) == cli.slurp(cli.dir / "b" / name));
        }
    }

    SUBCASE("divergence exits 3 and keeps the partial trajectory") {
        const auto r = cli.run("train --labels y.csv --epochs 200 --lr 1e9 --batch 3 "
                               "--seed 2 --out-dir dv");
        CHECK(r.exit_code == 3);
        CHECK(fs::exists(cli.dir / "dv" / "trajectory.csv"));
    }

    SUBCASE("baseline training runs") {
        const auto r =
            cli.run("train --labels y.csv --epochs 30 --baseline mmcr --out-dir bl");
        REQUIRE(r.exit_code == 0);
        const json report = json::parse(r.stdout_text);
        CHECK(report["config"]["baseline"] == "mmcr");
    }
}

TEST_CASE("query command") {
    CliFixture cli;
    REQUIRE(cli.run("closed-form --labels y.csv --out-dir cf").exit_code == 0);

    SUBCASE("minimizer embeddings retrieve perfectly") {
        const auto r = cli.run("query --embeddings cf/x_star.csv --labels y.csv "
                               "--label-names names.txt --queries queries.txt --top-k 3 "
                               "--out-dir q");
        REQUIRE(r.exit_code == 0);
        const json report = json::parse(r.stdout_text);
        CHECK(report["mean_ap"].get<double>() == doctest::Approx(1.0));
        CHECK(fs::exists(cli.dir / "q" / "metrics.csv"));
        CHECK(fs::exists(cli.dir / "q" / "topk.txt"));
        const std::string metrics = cli.slurp(cli.dir / "q" / "metrics.csv");
        CHECK(metrics.find("query,ap,pr_at_k,n_relevant") == 0);
    }

    SUBCASE("parallel evaluation gives identical metrics") {
        REQUIRE(cli.run("query --embeddings cf/x_star.csv --labels y.csv "
                        "--label-names names.txt --queries queries.txt --out-dir q1")
                    .exit_code == 0);
        REQUIRE(cli.run("query --embeddings cf/x_star.csv --labels y.csv "
                        "--label-names names.txt --queries queries.txt --jobs 4 "
                        "--out-dir q4")
                    .exit_code == 0);
        CHECK(cli.slurp(cli.dir / "q1" / "metrics.csv") ==
              cli.slurp(cli.dir / "q4" / "metrics.csv"));
    }

    SUBCASE("random embeddings are rejected as basis degeneracy") {
        write_matrix_csv(cli.dir / "noise.csv", gaussian_matrix(3, 9, 77));
        const auto r = cli.run("query --embeddings noise.csv --labels y.csv "
                               "--label-names names.txt --queries queries.txt");
        CHECK(r.exit_code == 4);
    }

    SUBCASE("a bad query line is a usage error") {
        std::ofstream(cli.dir / "bad.txt") << "a &\n";
        const auto r = cli.run("query --embeddings cf/x_star.csv --labels y.csv "
                               "--label-names names.txt --queries bad.txt");
        CHECK(r.exit_code == 1);
    }
}

TEST_CASE("multi-label pipeline via --expand-minterms") {
    CliFixture cli;

    // 2 labels, 3 observed minterms: the raw closed form cannot carry
    // orthogonal minterm blocks, the expanded one can.
    Matrix y(2, 6);
    y << 1, 1, 0, 0, 1, 1, //
        1, 1, 1, 1, 0, 0;
    write_matrix_csv(cli.dir / "ml.csv", y);
    std::ofstream(cli.dir / "ml_names.txt") << "p\nq\n";
    std::ofstream(cli.dir / "ml_queries.txt") << "p\nq\np & !q\np | q\n";

    REQUIRE(cli.run("closed-form --labels ml.csv --expand-minterms --d 3 --out-dir cf")
                .exit_code == 0);
    const auto r = cli.run("query --embeddings cf/x_star.csv --labels ml.csv "
                           "--label-names ml_names.txt --queries ml_queries.txt "
                           "--top-k 3 --out-dir q");
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.stdout_text)["mean_ap"].get<double>() == doctest::Approx(1.0));

    // without the expansion the embeddings are rejected as degenerate
    REQUIRE(cli.run("closed-form --labels ml.csv --d 3 --out-dir cf_raw").exit_code == 0);
    CHECK(cli.run("query --embeddings cf_raw/x_star.csv --labels ml.csv "
                  "--label-names ml_names.txt --queries ml_queries.txt")
              .exit_code == 4);
}

TEST_CASE("verify command") {
    CliFixture cli;

    SUBCASE("single check filter") {
        const auto r = cli.run("verify --only stacked-spectrum --trials 20 --seed 7");
        CHECK(r.exit_code == 0);
        CHECK(r.stdout_text.find("[PASS] stacked-spectrum") != std::string::npos);
    }

    SUBCASE("unknown check name is a usage error") {
        CHECK(cli.run("verify --only no-such-check").exit_code == 1);
    }

    SUBCASE("deterministic across reruns") {
        const auto a = cli.run("verify --trials 50 --seed 7");
        const auto b = cli.run("verify --trials 50 --seed 7");
        REQUIRE(a.exit_code == 0);
        // strip the wall-time line before comparing
        auto strip_time = [](std::string text) {
            const auto pos = text.find("wall_time_s");
            return pos == std::string::npos ? text : text.substr(0, pos);
        };
        CHECK(strip_time(a.stdout_text) == strip_time(b.stdout_text));
    }
}

TEST_CASE("SUBSPACE_TOL environment override") {
    CliFixture cli;
    CHECK(cli.run("verify --only nuclear-triangle --trials 5", "SUBSPACE_TOL=1e-9").exit_code ==
          0);
    CHECK(cli.run("verify --only nuclear-triangle --trials 5", "SUBSPACE_TOL=abc").exit_code ==
          1);
}

TEST_CASE("usage and help exit codes") {
    CliFixture cli;
    CHECK(cli.run("").exit_code == 1);              // no subcommand
    CHECK(cli.run("bogus-command").exit_code == 1); // unknown subcommand
    CHECK(cli.run("closed-form").exit_code == 1);   // missing required flag
    CHECK(cli.run("query --embeddings x.csv --labels y.csv --label-names n.txt "
                  "--queries q.txt --top-k 0")
              .exit_code == 1); // flag out of range
    CHECK(cli.run("--help").exit_code == 0);

    // default verify run: every check passes
    CHECK(cli.run("verify").exit_code == 0);
}
