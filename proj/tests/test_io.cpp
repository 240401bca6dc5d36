#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "netprec/io.hpp"
#include "netprec/rng.hpp"

using namespace netprec;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("netprec_io_test_" + std::to_string(::getpid()) + "_" +
                                   std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out);
  out << content;
}

}  // namespace

TEST_CASE("format_double round-trips doubles exactly") {
  CounterRng rng(2718);
  for (int rep = 0; rep < 200; ++rep) {
    const double v = (rng.next_uniform() - 0.5) * std::pow(10.0, double(rep % 40) - 20.0);
    const std::string s = format_double(v);
    CHECK(parse_double(s, "mem", 0) == v);
    CHECK(s.size() <= 24);  // shortest repr never needs more
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.5) == "1.5");
  CHECK(format_double(-0.1) == "-0.1");
}

TEST_CASE("matrix CSV round trip is byte-identical") {
  const fs::path dir = temp_dir();
  CounterRng rng(14);
  DenseMatrix m(7, 3);
  for (double& v : m.data()) v = rng.next_normal() * 1e3;

  const fs::path file = dir / "m.csv";
  write_csv_matrix(file.string(), m);
  const DenseMatrix back = read_csv_matrix(file.string());
  CHECK(back == m);

  const fs::path file2 = dir / "m2.csv";
  write_csv_matrix(file2.string(), back);
  CHECK(slurp(file) == slurp(file2));
}

TEST_CASE("read_csv_matrix reports file and line on malformed input") {
  const fs::path dir = temp_dir();
  const fs::path ragged = dir / "ragged.csv";
  spit(ragged, "1,2\n3,4,5\n");
  try {
    read_csv_matrix(ragged.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string what = e.what();
    CHECK(what.find("ragged.csv:2") != std::string::npos);
  }

  const fs::path junk = dir / "junk.csv";
  spit(junk, "1,2\n3,four\n");
  try {
    read_csv_matrix(junk.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("junk.csv:2") != std::string::npos);
  }

  CHECK_THROWS_AS(read_csv_matrix((dir / "missing.csv").string()), IoError);
  const fs::path empty = dir / "empty.csv";
  spit(empty, "");
  CHECK_THROWS_AS(read_csv_matrix(empty.string()), IoError);
  const fs::path inf = dir / "inf.csv";
  spit(inf, "1,inf\n2,3\n");
  CHECK_THROWS_AS(read_csv_matrix(inf.string()), IoError);
}

TEST_CASE("structure file: dense adjacency") {
  const fs::path dir = temp_dir();
  const fs::path dense = dir / "band.csv";
  spit(dense, "0,1,0\n1,0,1\n0,1,0\n");
  const GraphStructure g = read_structure(dense.string(), 3);
  CHECK(g.support(0) == std::vector<std::size_t>{0, 1});
  CHECK(g.support(1) == std::vector<std::size_t>{0, 1, 2});
  CHECK(g.support(2) == std::vector<std::size_t>{1, 2});

  const fs::path asym = dir / "asym.csv";
  spit(asym, "0,1,0\n0,0,1\n0,1,0\n");
  CHECK_THROWS_AS(read_structure(asym.string(), 3), NotSymmetric);
}

TEST_CASE("structure file: edge list applies symmetric closure") {
  const fs::path dir = temp_dir();
  const fs::path edges = dir / "edges.csv";
  spit(edges, "0,1\n1,2\n");  // each edge appears once
  const GraphStructure g = read_structure(edges.string(), 3);
  CHECK(g.support(0) == std::vector<std::size_t>{0, 1});
  CHECK(g.support(1) == std::vector<std::size_t>{0, 1, 2});
  CHECK(g.support(2) == std::vector<std::size_t>{1, 2});
  CHECK(g.edge_count() == 2);

  const fs::path out_of_range = dir / "oor.csv";
  spit(out_of_range, "0,9\n");
  CHECK_THROWS_AS(read_structure(out_of_range.string(), 3), IoError);

  const fs::path not_an_edge = dir / "bad.csv";
  spit(not_an_edge, "0,1,2\n");
  CHECK_THROWS_AS(read_structure(not_an_edge.string(), 3), IoError);

  const fs::path fractional = dir / "frac.csv";
  spit(fractional, "0,1.5\n");
  CHECK_THROWS_AS(read_structure(fractional.string(), 3), IoError);
}

TEST_CASE("a p x p 0/1 file is always read as dense") {
  const fs::path dir = temp_dir();
  const fs::path ambiguous = dir / "amb.csv";
  spit(ambiguous, "0,1\n1,0\n");  // also a valid 2-line edge list
  const GraphStructure g = read_structure(ambiguous.string(), 2);
  CHECK(g.support(0) == std::vector<std::size_t>{0, 1});
  CHECK(g.support(1) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("study CSV layout") {
  StudyRow row;
  row.n = 100;
  row.ratio = 0.5;
  row.method = Method::kProposed;
  row.rel_bias_mean = 0.21;
  row.rel_bias_sd = 0.12;
  row.abs_bias_mean = 0.09;
  row.abs_bias_sd = 0.06;
  row.failures = 0;
  row.component_means = {1.05, 0.62};
  row.component_sds = {0.15, 0.12};
  StudyResult result;
  result.s0 = 2;
  result.rows = {row};

  const std::string csv = study_to_csv(result);
  CHECK(csv.find("n,ratio,method,rel_bias_mean,rel_bias_sd,abs_bias_mean,abs_bias_sd,failures,"
                 "comp_mean_1,comp_mean_2,comp_sd_1,comp_sd_2\n") == 0);
  CHECK(csv.find("100,0.5,proposed,0.21,0.12,0.09,0.06,0,1.05,0.62,0.15,0.12\n") !=
        std::string::npos);

  const std::string table = study_to_table(result);
  CHECK(table.find("0.21 (0.12)") != std::string::npos);
  CHECK(table.find("method: proposed") != std::string::npos);

  StudyRow tiger_row = row;
  tiger_row.method = Method::kTiger;
  tiger_row.rel_bias_mean = 0.65;
  result.rows.push_back(tiger_row);
  const std::string cmp = comparison_table(result);
  CHECK(cmp.find("proposed RelBias") != std::string::npos);
  CHECK(cmp.find("tiger RelBias") != std::string::npos);
  CHECK(cmp.find("0.65") != std::string::npos);
}

TEST_CASE("atomic_write leaves no temporary behind and replaces content") {
  const fs::path dir = temp_dir();
  const fs::path target = dir / "out.txt";
  atomic_write(target.string(), "first\n");
  CHECK(slurp(target) == "first\n");
  atomic_write(target.string(), "second\n");
  CHECK(slurp(target) == "second\n");
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));

  CHECK_THROWS_AS(atomic_write((dir / "no_such_dir" / "f.txt").string(), "x"), IoError);
}
