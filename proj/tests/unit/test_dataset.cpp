#include <doctest.h>

#include <cmath>
#include <string>

#include "knnmi/dataset.hpp"
#include "knnmi/error.hpp"

using namespace knnmi;

namespace {

std::string data(const char* name) { return std::string(KNNMI_TEST_DATA_DIR) + "/" + name; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("load_csv reads rows in order with ordered groups") {
  const Dataset ds = load_csv(data("small4x2.csv"), {1, 1}, false);
  CHECK(ds.rows() == 4);
  CHECK(ds.cols() == 2);
  CHECK(ds.group_count() == 2);
  CHECK(ds.group(0).name == "X");
  CHECK(ds.group(1).name == "Y");
  CHECK(ds.at(0, 0) == 0.5);
  CHECK(ds.at(1, 1) == 0.3);
  CHECK(ds.at(2, 0) == 4.25);
  CHECK(ds.at(3, 1) == 0.0);
}

TEST_CASE("group dims partition the columns in order") {
  const Dataset ds = load_csv(data("three_cols.csv"), {2, 1}, true);
  CHECK(ds.rows() == 3);
  CHECK(ds.group(0).first_column == 0);
  CHECK(ds.group(0).dim == 2);
  CHECK(ds.group(1).first_column == 2);
  CHECK(ds.group(1).dim == 1);
  const std::size_t y[] = {1};
  CHECK(ds.columns_of(y) == std::vector<std::size_t>{2});
  CHECK(ds.at(2, 2) == 10.0);
}

TEST_CASE("empty group dims read every column as one group") {
  const Dataset ds = load_csv(data("three_cols.csv"), {}, true);
  CHECK(ds.cols() == 3);
  CHECK(ds.group_count() == 1);
  CHECK(ds.group(0).name == "Z");
}

TEST_CASE("ingestion errors are descriptive") {
  CHECK(kind_of([] { load_csv(data("nan.csv"), {1, 1}, true); }) == ErrorKind::Ingestion);
  CHECK(kind_of([] { load_csv(data("ragged.csv"), {1, 1}, false); }) == ErrorKind::Ingestion);
  CHECK(kind_of([] { load_csv(data("garbage.csv"), {1, 1}, false); }) == ErrorKind::Ingestion);
  CHECK(kind_of([] { load_csv(data("small4x2.csv"), {2, 1}, false); }) == ErrorKind::Ingestion);
  CHECK(kind_of([] { load_csv(data("missing.csv"), {1}, false); }) == ErrorKind::Ingestion);
  try {
    load_csv(data("nan.csv"), {1, 1}, true);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  try {
    parse_csv("1,2\n3,abc\n", {1, 1}, false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("abc") != std::string::npos);
  }
}

TEST_CASE("parse_csv handles whitespace, blank lines and a BOM") {
  const Dataset ds = parse_csv("\xEF\xBB\xBF 1 , 2\n\n3,4 \r\n", {1, 1}, false);
  CHECK(ds.rows() == 2);
  CHECK(ds.at(1, 1) == 4.0);
}

TEST_CASE("dataset invariants are enforced") {
  CHECK_THROWS_AS(Dataset({1.0, 2.0}, 2, {2}), Error);  // N = 1
  CHECK_THROWS_AS(Dataset({1.0, 2.0, 3.0, 4.0}, 2, {1, 2}), Error);
  CHECK_THROWS_AS(Dataset({1.0, NAN, 3.0, 4.0}, 2, {1, 1}), Error);
  CHECK_THROWS_AS(Dataset({1.0, INFINITY, 3.0, 4.0}, 2, {1, 1}), Error);
  const Dataset three({1, 2, 3, 4, 5, 6}, 3, {1, 1, 1});
  CHECK(three.group(2).name == "X3");
  const std::size_t ids[] = {0, 2};
  const Dataset sub = three.select(ids);
  CHECK(sub.cols() == 2);
  CHECK(sub.at(1, 1) == 6.0);
  CHECK(sub.group(0).name == "X1X3");
}

TEST_CASE("check_duplicates in error mode") {
  const Dataset clean = load_csv(data("small4x2.csv"), {1, 1}, false);
  DegeneracyPolicy policy;
  const Dataset same = check_duplicates(clean, policy, 0);
  CHECK(same.values() == clean.values());

  const Dataset dup = load_csv(data("dup.csv"), {1, 1}, false);
  try {
    check_duplicates(dup, policy, 0);
    FAIL("duplicates accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicateSample);
    const std::string msg = e.what();
    CHECK(msg.find("(1, 3)") != std::string::npos);
  }
  const std::size_t all[] = {0, 1};
  const auto pairs = find_duplicate_rows(dup, dup.columns_of(all));
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<std::size_t, std::size_t>{1, 3});
}

TEST_CASE("jitter breaks ties within the requested scale, deterministically") {
  const Dataset dup = load_csv(data("dup.csv"), {1, 1}, false);
  DegeneracyPolicy policy{DegeneracyMode::Jitter, 1e-10};
  const Dataset a = check_duplicates(dup, policy, 99);
  const Dataset b = check_duplicates(dup, policy, 99);
  const Dataset c = check_duplicates(dup, policy, 100);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  const std::size_t all[] = {0, 1};
  CHECK(find_duplicate_rows(a, a.columns_of(all)).empty());
  for (std::size_t i = 0; i < dup.values().size(); ++i)
    CHECK(std::abs(a.values()[i] - dup.values()[i]) <= 1e-10);
}

TEST_CASE("degeneracy policy validation") {
  CHECK_THROWS_AS((DegeneracyPolicy{DegeneracyMode::Jitter, 0.0}.validate()), Error);
  CHECK_THROWS_AS((DegeneracyPolicy{DegeneracyMode::Error, 0.5}.validate()), Error);
  CHECK_NOTHROW((DegeneracyPolicy{DegeneracyMode::Error, 0.0}.validate()));
}
