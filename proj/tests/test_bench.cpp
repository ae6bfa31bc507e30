#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "optdesign/bench.hpp"
#include "optdesign/io.hpp"
#include "test_util.hpp"

using namespace optdesign;

TEST_CASE("random K is deterministic per seed and full rank", "[bench]") {
  const Matrix K1 = random_K(4, 3, 42);
  const Matrix K2 = random_K(4, 3, 42);
  CHECK(K1 == K2);  // bitwise
  CHECK(random_K(4, 3, 43) != K1);

  for (uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix K = random_K(4, 3, seed);
    const Vector sv = K.jacobiSvd().singularValues();
    CHECK(sv[sv.size() - 1] > 1e-10 * sv[0]);
  }

  CHECK_THROWS_AS(random_K(3, 4, 1), ConfigError);
}

TEST_CASE("single-point file problem solves immediately through run()", "[bench]") {
  const std::string path = "/tmp/optdesign_test_single.json";
  std::ofstream(path) << R"({"m": 1, "n": 1, "matrices": [[2.0]],
                            "criterion": {"kind": "A", "K": "identity"}})";

  RunConfig config;
  config.problem_file = path;
  config.run_mult = false;
  const std::vector<BenchRow> rows = run(config);
  REQUIRE(rows.size() == 1);
  CHECK(!rows[0].error);
  CHECK(rows[0].objective == Catch::Approx(0.5).epsilon(1e-14));
  CHECK(rows[0].iterations == 0);
  CHECK(rows[0].support_size == 1);
  std::remove(path.c_str());
}

TEST_CASE("run covers both solvers and stays deterministic", "[bench]") {
  RunConfig config;
  config.space = SpaceFamily::Chi4;
  config.n = 200;
  config.criterion = CriterionKind::A;

  const std::vector<BenchRow> first = run(config);
  REQUIRE(first.size() == 2);
  CHECK(first[0].solver == "ip");
  CHECK(first[1].solver == "mult");
  CHECK(first[0].objective <= first[1].objective + 1e-9 * first[1].objective);

  const std::vector<BenchRow> second = run(config);
  CHECK(first[0].objective == second[0].objective);
  CHECK(first[1].objective == second[1].objective);
}

TEST_CASE("seeded random-K cells", "[bench]") {
  RunConfig config;
  config.space = SpaceFamily::Chi4;
  config.n = 100;
  config.criterion = CriterionKind::D;
  config.k_mode = KMode::Random;
  config.k = 3;
  config.seeds = {7, 8};
  config.run_mult = false;

  const std::vector<BenchRow> rows = run(config);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].k_mode == "random:7");
  CHECK(rows[1].k_mode == "random:8");
  CHECK(rows[0].objective != rows[1].objective);

  const std::vector<BenchRow> again = run(config);
  CHECK(again[0].objective == rows[0].objective);
  CHECK(again[1].objective == rows[1].objective);
}

TEST_CASE("config validation", "[bench]") {
  RunConfig config;
  CHECK_THROWS_AS(run(config), ConfigError);  // neither space nor file

  config.space = SpaceFamily::Chi1;
  config.n = 10;
  config.criterion = CriterionKind::PMean;
  config.p = 0.5;
  CHECK_THROWS_AS(run(config), ConfigError);  // pmean needs p < 0

  config.criterion = CriterionKind::A;
  config.k_mode = KMode::Random;
  config.seeds = {};
  CHECK_THROWS_AS(run(config), ConfigError);  // no seeds
}

TEST_CASE("emission formats", "[bench]") {
  std::ostringstream empty_csv;
  emit({}, OutputFormat::Csv, empty_csv);
  CHECK(empty_csv.str() ==
        "space,n,criterion,p,k_mode,solver,objective,best_objective,iterations,"
        "inner_newton_steps,wall_time_seconds,termination,support_size,error\n");

  BenchRow row;
  row.space = "chi4";
  row.n = 100;
  row.criterion = "A";
  row.k_mode = "identity";
  row.solver = "ip";
  row.objective = 1.25;
  row.iterations = 17;
  row.inner_newton_steps = 17;
  row.wall_time_seconds = 0.125;
  row.termination = "MuStop";
  row.support_size = 4;

  // JSON rows round-trip through the loader.
  const std::string path = "/tmp/optdesign_test_rows.json";
  emit({row}, OutputFormat::Json, path);
  const std::vector<BenchRow> loaded = load_rows(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].space == "chi4");
  CHECK(loaded[0].objective == 1.25);
  CHECK(loaded[0].iterations == 17);
  CHECK(!loaded[0].p);
  CHECK(!loaded[0].error);
  std::remove(path.c_str());

  // Markdown renders one pipe row per bench row.
  BenchRow mult_row = row;
  mult_row.solver = "mult";
  mult_row.best_objective = 1.5;
  mult_row.termination = "MaxIters";
  std::ostringstream md;
  emit({row, mult_row}, OutputFormat::Md, md);
  int pipe_rows = 0;
  std::string line;
  std::istringstream lines(md.str());
  while (std::getline(lines, line))
    if (line.rfind("| chi4", 0) == 0) ++pipe_rows;
  CHECK(pipe_rows == 2);
  CHECK(md.str().find("min over iterations") != std::string::npos);
}
