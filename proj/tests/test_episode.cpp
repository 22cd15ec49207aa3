#include <mgp/episode.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"

using namespace mgp;

namespace {

struct TempCsv {
  std::string path;

  explicit TempCsv(const std::string& contents) {
    static int counter = 0;
    path = "mgp_test_tmp_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path);
    out << contents;
  }
  ~TempCsv() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("ingest_csv happy path") {
  TempCsv f(
      "episode_id,time,hr,bp\n"
      "e1,0.5,70,120\n"
      "e1,1.5,72,118\n"
      "e1,2.5,75,\n");
  Episode ep = ingest_csv(f.path);
  CHECK(ep.id == "e1");
  CHECK(ep.n() == 3);
  CHECK(ep.m() == 2);
  CHECK(ep.channels == std::vector<std::string>{"hr", "bp"});
  CHECK(ep.times(0) == 0.5);
  CHECK(ep.times(2) == 2.5);
  CHECK(ep.obs(1, 1) == 118.0);
  CHECK(ep.mask(0, 0));
  CHECK(ep.mask(1, 1));
  CHECK_FALSE(ep.mask(2, 1));  // empty cell is missing
  CHECK(ep.n_present() == 5);
  CHECK_FALSE(ep.complete());
}

TEST_CASE("ingest_csv sorts rows by time and skips comments") {
  TempCsv f(
      "# generator=manual\n"
      "episode_id,time,y\n"
      "e1,3.0,30\n"
      "# midway comment\n"
      "e1,1.0,10\n"
      "e1,2.0,20\n");
  Episode ep = ingest_csv(f.path);
  CHECK(ep.times(0) == 1.0);
  CHECK(ep.times(1) == 2.0);
  CHECK(ep.times(2) == 3.0);
  CHECK(ep.obs(0, 0) == 10.0);
  CHECK(ep.obs(2, 0) == 30.0);
}

TEST_CASE("ingest_csv rejects duplicate timestamps naming the value") {
  TempCsv f(
      "episode_id,time,y\n"
      "e1,0.5,1\n"
      "e1,0.5,2\n");
  try {
    ingest_csv(f.path);
    FAIL("expected duplicate_timestamp");
  } catch (const duplicate_timestamp& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("ingest_csv error reporting") {
  SUBCASE("bad number names row and column") {
    TempCsv f(
        "episode_id,time,y\n"
        "e1,1.0,abc\n");
    try {
      ingest_csv(f.path);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(std::string(e.what()).find("abc") != std::string::npos);
    }
  }
  SUBCASE("multiple episode ids rejected") {
    TempCsv f(
        "episode_id,time,y\n"
        "e1,1.0,1\n"
        "e2,2.0,2\n");
    CHECK_THROWS_AS(ingest_csv(f.path), parse_error);
  }
  SUBCASE("bad header") {
    TempCsv f("id,time,y\ne1,1.0,1\n");
    CHECK_THROWS_AS(ingest_csv(f.path), parse_error);
  }
  SUBCASE("header without channels") {
    TempCsv f("episode_id,time\ne1,1.0\n");
    CHECK_THROWS_AS(ingest_csv(f.path), parse_error);
  }
  SUBCASE("empty file") {
    TempCsv f("");
    CHECK_THROWS_AS(ingest_csv(f.path), empty_data);
  }
  SUBCASE("header only") {
    TempCsv f("episode_id,time,y\n");
    CHECK_THROWS_AS(ingest_csv(f.path), empty_data);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(ingest_csv("does_not_exist_anywhere.csv"), data_error);
  }
  SUBCASE("row with every cell empty") {
    TempCsv f(
        "episode_id,time,a,b\n"
        "e1,1.0,,\n");
    CHECK_THROWS_AS(ingest_csv(f.path), data_error);
  }
  SUBCASE("ragged row") {
    TempCsv f(
        "episode_id,time,a,b\n"
        "e1,1.0,1\n");
    CHECK_THROWS_AS(ingest_csv(f.path), parse_error);
  }
}

TEST_CASE("episode csv round-trips every double exactly") {
  Episode ep;
  ep.id = "rt";
  ep.channels = {"a", "b"};
  ep.times.resize(4);
  ep.times << 0.1, 0.1 + 0.2, 1.0 / 3.0, 3.141592653589793;
  ep.obs.resize(4, 2);
  ep.obs << 1.0000000000000002, -7.3e-12, 123456.789012345678, 0.0, 2.2250738585072014e-308, 42.0,
      -1.7976931348623157e308, 1e17;
  ep.mask = Mask::Constant(4, 2, true);
  ep.mask(1, 1) = false;
  ep.validate();

  TempCsv f("");
  write_episode_csv(ep, f.path, {"origin=test"});
  Episode back = ingest_csv(f.path);
  CHECK(back.id == ep.id);
  CHECK(back.channels == ep.channels);
  REQUIRE(back.n() == ep.n());
  for (Eigen::Index i = 0; i < ep.n(); ++i) {
    CHECK(back.times(i) == ep.times(i));
    for (Eigen::Index j = 0; j < ep.m(); ++j) {
      CHECK(back.mask(i, j) == ep.mask(i, j));
      if (ep.mask(i, j)) CHECK(back.obs(i, j) == ep.obs(i, j));
    }
  }
}

TEST_CASE("validate catches structural problems") {
  Episode ep;
  ep.id = "v";
  ep.channels = {"a"};
  ep.times.resize(2);
  ep.times << 1.0, 2.0;
  ep.obs = Matrix::Zero(2, 1);
  ep.mask = Mask::Constant(2, 1, true);
  CHECK_NOTHROW(ep.validate());

  SUBCASE("empty") {
    ep.times.resize(0);
    ep.obs.resize(0, 1);
    ep.mask.resize(0, 1);
    CHECK_THROWS_AS(ep.validate(), empty_data);
  }
  SUBCASE("unsorted") {
    ep.times << 2.0, 1.0;
    CHECK_THROWS_AS(ep.validate(), data_error);
  }
  SUBCASE("duplicate") {
    ep.times << 1.0, 1.0;
    CHECK_THROWS_AS(ep.validate(), duplicate_timestamp);
  }
  SUBCASE("shape disagreement") {
    ep.obs = Matrix::Zero(3, 1);
    CHECK_THROWS_AS(ep.validate(), dimension_mismatch);
  }
  SUBCASE("channel names disagree") {
    ep.channels = {"a", "b"};
    CHECK_THROWS_AS(ep.validate(), dimension_mismatch);
  }
  SUBCASE("all-missing row") {
    ep.mask(1, 0) = false;
    CHECK_THROWS_AS(ep.validate(), data_error);
  }
}

TEST_CASE("split_last takes the final k rows") {
  Episode ep;
  ep.id = "s";
  ep.channels = {"a", "b"};
  ep.times = Vector::LinSpaced(5, 0.0, 4.0);
  ep.obs.resize(5, 2);
  for (Eigen::Index i = 0; i < 5; ++i) {
    ep.obs(i, 0) = 10.0 + i;
    ep.obs(i, 1) = 20.0 + i;
  }
  ep.mask = Mask::Constant(5, 2, true);
  ep.mask(4, 0) = false;

  auto [train, test] = split_last(ep, 2);
  CHECK(train.n() == 3);
  CHECK(test.n() == 2);
  CHECK(train.times(2) == 2.0);
  CHECK(test.times(0) == 3.0);
  CHECK(test.obs(1, 1) == 24.0);
  CHECK_FALSE(test.mask(1, 0));
  CHECK(train.id == ep.id);
  CHECK(test.channels == ep.channels);

  CHECK_THROWS_AS(split_last(ep, 0), empty_holdout);
  CHECK_THROWS_AS(split_last(ep, 5), empty_training);
  CHECK_THROWS_AS(split_last(ep, 9), empty_training);
}
