#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "combkit/errors.hpp"
#include "combkit/io.hpp"
#include "combkit/network.hpp"
#include "combkit/random.hpp"

using namespace combkit;

namespace {

LabeledOperator sample_operator(std::uint64_t seed) {
  const NetworkSignature sig = NetworkSignature::parse("2,3;1,2");
  return random_comb(sig, seed).op;
}

Json minimal() {
  return Json::parse(R"({"version": 1,
    "systems": [{"name": "out1", "dim": 2, "role": "out", "tooth": 1}],
    "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]})");
}

}  // namespace

TEST(OperatorJson, RoundTripIsBitExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto op = sample_operator(seed);
    std::stringstream ss;
    write_operator(ss, op);
    const auto back = read_operator(ss);
    ASSERT_EQ(back.systems().size(), op.systems().size());
    for (std::size_t k = 0; k < op.systems().size(); ++k) {
      EXPECT_EQ(back.systems()[k].name, op.systems()[k].name);
      EXPECT_EQ(back.systems()[k].dim, op.systems()[k].dim);
      EXPECT_EQ(back.systems()[k].role, op.systems()[k].role);
      EXPECT_EQ(back.systems()[k].tooth, op.systems()[k].tooth);
    }
    // Exact equality of every real and imaginary part.
    EXPECT_TRUE((back.matrix().array() == op.matrix().array()).all());
  }
}

TEST(OperatorJson, SerializationIsDeterministic) {
  std::stringstream a, b;
  write_operator(a, sample_operator(3));
  write_operator(b, sample_operator(3));
  EXPECT_EQ(a.str(), b.str());
}

TEST(OperatorJson, ReadsMinimalDocument) {
  const auto op = operator_from_json(minimal());
  EXPECT_EQ(op.side(), 2);
  EXPECT_EQ(op.systems()[0].role, Role::out);
  EXPECT_DOUBLE_EQ(op.trace().real(), 1.0);
}

TEST(OperatorJson, MalformedInputsAreInputErrors) {
  auto expect_bad = [](Json j) { EXPECT_THROW(operator_from_json(j), InputError) << j.dump(); };
  {
    Json j = minimal();
    j["version"] = 2;
    expect_bad(j);
  }
  {
    Json j = minimal();
    j.erase("systems");
    expect_bad(j);
  }
  {
    Json j = minimal();
    j["systems"][0]["role"] = "sideways";
    expect_bad(j);
  }
  {
    Json j = minimal();
    j["systems"][0]["dim"] = 0;
    expect_bad(j);
  }
  {
    Json j = minimal();
    j["matrix"].erase(1);
    expect_bad(j);
  }
  {
    Json j = minimal();
    j["matrix"][0][1] = Json::array({1.0});
    expect_bad(j);
  }
  {
    Json j = minimal();
    j["matrix"][0][0][0] = "half";
    expect_bad(j);
  }
  {
    Json j = minimal();
    j["systems"].push_back(j["systems"][0]);  // duplicate label, wrong size
    expect_bad(j);
  }
  std::stringstream garbage("{\"version\": 1, \"systems\": [");
  EXPECT_THROW(read_operator(garbage), InputError);
  EXPECT_THROW(read_operator_file("/nonexistent/dir/op.json"), InputError);
}

TEST(NumberJson, NonFiniteValuesAreStrings) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(number_to_json(inf), Json("inf"));
  EXPECT_EQ(number_to_json(-inf), Json("-inf"));
  EXPECT_EQ(number_to_json(std::nan("")), Json("nan"));
  EXPECT_EQ(number_from_json(Json("inf")), inf);
  EXPECT_EQ(number_from_json(Json("-inf")), -inf);
  EXPECT_TRUE(std::isnan(number_from_json(Json("nan"))));
  EXPECT_EQ(number_from_json(number_to_json(0.1)), 0.1);
  EXPECT_THROW(number_from_json(Json("many")), InputError);
}

TEST(NumberJson, FormatRoundTrips) {
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_number(0.5), "0.5");
  Rng rng(7);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double x = n(rng);
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
}
