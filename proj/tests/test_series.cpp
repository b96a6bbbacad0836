#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "tailvar/prng.hpp"
#include "tailvar/series.hpp"
#include "tailvar/special_functions.hpp"

using namespace tailvar;
namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tailvar_series_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path path = scratch_file(name);
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_SUITE("series") {

TEST_CASE("returns column is parsed in file order") {
  const fs::path path = write_text(
      "returns.csv", "date,r\n2020-01-02,0.01\n2020-01-03,-0.02\n"
                     "2020-01-06,0.005\n");
  const ReturnSeries s = load_csv(path.string(), "r", InputKind::returns,
                                  "date");
  REQUIRE(s.size() == 3);
  CHECK(s.values[0] == 0.01);
  CHECK(s.values[1] == -0.02);
  CHECK(s.values[2] == 0.005);
  CHECK(s.timestamps[0] == "2020-01-02");
  CHECK(s.timestamps[2] == "2020-01-06");
}

TEST_CASE("price columns become simple returns") {
  const fs::path path =
      write_text("prices.csv", "p\n100\n101\n");
  const ReturnSeries s = load_csv(path.string(), "p", InputKind::prices);
  REQUIRE(s.size() == 1);
  CHECK(s.values[0] == doctest::Approx(0.01).epsilon(1e-14));

  const fs::path longer =
      write_text("prices2.csv", "p\n100\n110\n99\n");
  const ReturnSeries s2 = load_csv(longer.string(), "p", InputKind::prices);
  REQUIRE(s2.size() == 2);
  CHECK(s2.values[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(s2.values[1] == doctest::Approx(-0.1).epsilon(1e-14));
}

TEST_CASE("zero prices cannot form returns") {
  const fs::path path = write_text("zero_price.csv", "p\n0\n1\n");
  CHECK_THROWS_AS(load_csv(path.string(), "p", InputKind::prices), DataError);
}

TEST_CASE("malformed cells are reported with their row") {
  const fs::path path =
      write_text("blank.csv", "t,r\n0,0.01\n1,\n2,0.02\n");
  try {
    load_csv(path.string(), "r");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }

  const fs::path junk = write_text("junk.csv", "r\n0.01\nabc\n");
  CHECK_THROWS_AS(load_csv(junk.string(), "r"), DataError);
  const fs::path inf_cell = write_text("inf.csv", "r\n0.01\ninf\n");
  CHECK_THROWS_AS(load_csv(inf_cell.string(), "r"), DataError);
}

TEST_CASE("missing inputs are data errors") {
  CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv", "r"), DataError);
  const fs::path path = write_text("wrong_col.csv", "a,b\n1,2\n3,4\n");
  CHECK_THROWS_AS(load_csv(path.string(), "r"), DataError);
  const fs::path tiny = write_text("tiny.csv", "r\n0.01\n");
  CHECK_THROWS_AS(load_csv(tiny.string(), "r"), DataError);
}

TEST_CASE("written series round-trips") {
  ReturnSeries s;
  Prng rng(5);
  for (int i = 0; i < 10; ++i) {
    s.timestamps.push_back(std::to_string(i));
    s.values.push_back(rng.next_range(-0.1, 0.1));
  }
  const fs::path path = scratch_file("roundtrip.csv");
  write_csv(s, path.string(), "r", "t", 17);
  const ReturnSeries back = load_csv(path.string(), "r", InputKind::returns,
                                     "t");
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.values[i] == s.values[i]);
    CHECK(back.timestamps[i] == s.timestamps[i]);
  }
}

TEST_CASE("split sizes follow the floor rule") {
  ReturnSeries s;
  Prng rng(6);
  for (int i = 0; i < 100; ++i) {
    s.timestamps.push_back(std::to_string(i));
    s.values.push_back(rng.next_range(-1.0, 1.0));
  }
  const SeriesSplit split = split_normalize(s);
  CHECK(split.train.size() == 80);
  CHECK(split.validation.size() == 10);
  CHECK(split.test.size() == 10);

  while (s.size() > 57) {
    s.values.pop_back();
    s.timestamps.pop_back();
  }
  const SeriesSplit odd = split_normalize(s);
  CHECK(odd.train.size() == 45);
  CHECK(odd.validation.size() == 5);
  CHECK(odd.test.size() == 7);
}

TEST_CASE("normalization gives the train segment mean 0 and variance 1") {
  ReturnSeries s;
  Prng rng(7);
  for (int i = 0; i < 10000; ++i) {
    s.timestamps.push_back(std::to_string(i));
    s.values.push_back(std_normal_quantile(rng.next_open_uniform()) * 0.02 +
                       0.001);
  }
  const SeriesSplit split = split_normalize(s);
  const auto [mean, variance] = mean_and_variance(split.train.values);
  CHECK(std::abs(mean) < 1e-12);
  CHECK(std::abs(variance - 1.0) < 1e-12);

  // The same affine map is applied to the other segments.
  for (std::size_t i = 0; i < split.validation.size(); ++i) {
    const double original = s.values[split.train.size() + i];
    const double expected = (original - split.norm_mean) / split.norm_std;
    REQUIRE(split.validation.values[i] ==
            doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("denormalization recovers the original segments") {
  ReturnSeries s;
  Prng rng(8);
  for (int i = 0; i < 200; ++i) {
    s.timestamps.push_back(std::to_string(i));
    s.values.push_back(rng.next_range(-0.05, 0.05));
  }
  const SeriesSplit split = split_normalize(s);
  const std::vector<double> recovered =
      denormalize(split.test.values, split.norm_mean, split.norm_std);
  for (std::size_t i = 0; i < recovered.size(); ++i) {
    REQUIRE(std::abs(recovered[i] -
                     s.values[split.train.size() + split.validation.size() +
                              i]) < 1e-10);
  }
}

TEST_CASE("degenerate splits are rejected") {
  ReturnSeries constant;
  for (int i = 0; i < 100; ++i) {
    constant.timestamps.push_back(std::to_string(i));
    constant.values.push_back(0.01);
  }
  CHECK_THROWS_AS(split_normalize(constant), DataError);

  ReturnSeries tiny;
  for (int i = 0; i < 49; ++i) {
    tiny.timestamps.push_back(std::to_string(i));
    tiny.values.push_back(i * 0.001);
  }
  CHECK_THROWS_AS(split_normalize(tiny), DataError);
  tiny.timestamps.push_back("49");
  tiny.values.push_back(0.049);
  CHECK_NOTHROW(split_normalize(tiny));
}

TEST_CASE("normalization constants persist bit-exactly") {
  const fs::path path = scratch_file("norm.txt");
  const double mean = 0.00012345678901234567;
  const double std_dev = 0.9876543210987654;
  write_normalization(path.string(), mean, std_dev);
  const auto [m, s] = read_normalization(path.string());
  CHECK(m == mean);
  CHECK(s == std_dev);
  CHECK_THROWS_AS(read_normalization("/nonexistent/norm.txt"), DataError);
}

}  // TEST_SUITE
