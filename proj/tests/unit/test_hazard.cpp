#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "predism/error.hpp"
#include "predism/hazard.hpp"

using namespace predism;
using nlohmann::json;

namespace {

const ThresholdTable kTable = ThresholdTable::defaults();

// Published thresholds for levels 5, 4, 3, 2, 1, written out independently.
const std::array<std::array<double, 5>, 7> kPublished = {{
    {10000, 1000, 100, 10, 1},
    {100000, 10000, 1000, 100, 10},
    {500, 100, 50, 10, 1},
    {100, 10, 1, 0.1, 0.01},
    {100, 10, 1, 0.1, 0.01},
    {30, 14, 7, 3, 1},
    {30, 14, 7, 3, 1},
}};

// Rounded-half-up mean by exact integer comparison: the largest L with
// sum / n >= L - 1/2.
int mean_oracle(const std::vector<int>& levels) {
  const int n = static_cast<int>(levels.size());
  int sum = 0;
  for (int l : levels) sum += l;
  int best = 1;
  for (int l = 1; l <= 5; ++l)
    if (2 * sum >= (2 * l - 1) * n) best = l;
  return best;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("default thresholds equal the published table") {
  for (HazardAttribute a : kAllHazardAttributes) {
    CAPTURE(to_string(a));
    CHECK(kTable.row(a) == kPublished[index_of(a)]);
  }
  CHECK(load_thresholds(std::nullopt).row(HazardAttribute::Fatality) == ThresholdTable::Row{10000, 1000, 100, 10, 1});
}

TEST_CASE("score_attribute: examples") {
  CHECK(score_attribute(HazardAttribute::Fatality, 15000, kTable).value() == 5);
  CHECK(score_attribute(HazardAttribute::DirectDamage, 0.5, kTable).value() == 2);
  CHECK(score_attribute(HazardAttribute::WaterDisruption, 3, kTable).value() == 1);
  CHECK(score_attribute(HazardAttribute::Fatality, 0, kTable).value() == 1);
  CHECK(score_attribute("Land Impaired", 75, kTable).value() == 3);
  CHECK(score_attribute("energy-disruption", 31, kTable).value() == 5);
}

TEST_CASE("score_attribute: errors") {
  CHECK(code_of([] { score_attribute(HazardAttribute::Injury, -1, kTable); }) == ErrorCode::NegativeValue);
  CHECK(code_of([] { score_attribute(HazardAttribute::Injury, std::nan(""), kTable); }) == ErrorCode::NegativeValue);
  CHECK(code_of([] { score_attribute("magnitude", 3, kTable); }) == ErrorCode::UnknownAttribute);
}

TEST_CASE("score_attribute: every boundary is strict") {
  for (HazardAttribute a : kAllHazardAttributes) {
    for (int level = 2; level <= 5; ++level) {
      const double t = kPublished[index_of(a)][static_cast<std::size_t>(5 - level)];
      CAPTURE(to_string(a));
      CAPTURE(level);
      CHECK(score_attribute(a, t, kTable).value() == level - 1);
      CHECK(score_attribute(a, t * (1 + 1e-9), kTable).value() == level);
    }
  }
}

TEST_CASE("score_attribute is monotone in the value") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> logv(-3, 6);
  for (HazardAttribute a : kAllHazardAttributes) {
    std::vector<double> values(200);
    for (auto& v : values) v = std::pow(10.0, logv(rng));
    std::sort(values.begin(), values.end());
    int prev = 1;
    for (double v : values) {
      const int l = score_attribute(a, v, kTable).value();
      CHECK(l >= prev);
      prev = l;
    }
  }
}

TEST_CASE("overall_level: examples") {
  HazardAttributes all5;
  for (HazardAttribute a : kAllHazardAttributes) all5[a] = kPublished[index_of(a)][0] * 2;
  CHECK(overall_level(all5, kTable).value() == 5);

  const std::vector<int> levels{5, 4, 3, 2, 1, 1, 1};
  CHECK(mean_level(levels).value() == 2);
  CHECK(mean_oracle(levels) == 2);

  HazardAttributes mixed;
  mixed[HazardAttribute::Fatality] = 20000;          // 5
  mixed[HazardAttribute::Injury] = 20000;            // 4
  mixed[HazardAttribute::LandImpaired] = 60;         // 3
  mixed[HazardAttribute::DirectDamage] = 0.5;        // 2
  mixed[HazardAttribute::IndirectDamage] = 0.001;    // 1
  mixed[HazardAttribute::WaterDisruption] = 0;       // 1
  mixed[HazardAttribute::EnergyDisruption] = 1;      // 1
  CHECK(overall_level(mixed, kTable).value() == 2);

  HazardAttributes single;
  single[HazardAttribute::Fatality] = 15000;
  CHECK(overall_level(single, kTable).value() == 5);
}

TEST_CASE("mean_level rounds half up") {
  CHECK(mean_level(std::vector<int>{2, 3}).value() == 3);
  CHECK(mean_level(std::vector<int>{1, 2}).value() == 2);
  CHECK(mean_level(std::vector<int>{1, 1, 2}).value() == 1);
  CHECK(mean_level(std::vector<int>{4, 5}).value() == 5);
  CHECK(code_of([] { mean_level(std::vector<int>{}); }) == ErrorCode::NoAttributes);
}

TEST_CASE("overall_level: no attributes") {
  CHECK(code_of([] { overall_level(HazardAttributes{}, kTable); }) == ErrorCode::NoAttributes);
}

TEST_CASE("overall_level is permutation invariant and bounded by its inputs") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    std::vector<int> levels(1 + rng() % 7);
    for (auto& l : levels) l = 1 + static_cast<int>(rng() % 5);
    const int want = mean_oracle(levels);
    CHECK(mean_level(levels).value() == want);
    std::shuffle(levels.begin(), levels.end(), rng);
    CHECK(mean_level(levels).value() == want);
    CHECK(want >= *std::min_element(levels.begin(), levels.end()));
    CHECK(want <= *std::max_element(levels.begin(), levels.end()));
  }
}

TEST_CASE("load_thresholds: overrides") {
  CHECK(code_of([] { load_thresholds(json{{"fatality", {1, 2, 3, 4, 5}}}); }) == ErrorCode::NonMonotoneRow);
  CHECK(code_of([] { load_thresholds(json{{"fatality", {5, 4, 4, 2, 1}}}); }) == ErrorCode::NonMonotoneRow);
  CHECK(code_of([] { load_thresholds(json{{"fatality", {5, 4, 3}}}); }) == ErrorCode::IncompleteRow);
  CHECK(code_of([] { load_thresholds(json{{"wind_speed", {5, 4, 3, 2, 1}}}); }) == ErrorCode::UnknownAttribute);

  const ThresholdTable t = load_thresholds(json{{"energy_disruption", {60, 30, 14, 7, 2}}});
  CHECK(t.row(HazardAttribute::EnergyDisruption) == ThresholdTable::Row{60, 30, 14, 7, 2});
  CHECK(t.row(HazardAttribute::Fatality) == kTable.row(HazardAttribute::Fatality));
  CHECK(score_attribute(HazardAttribute::EnergyDisruption, 31, t).value() == 4);
  CHECK(score_attribute(HazardAttribute::EnergyDisruption, 2, t).value() == 1);
  CHECK(score_attribute(HazardAttribute::EnergyDisruption, 7.5, t).value() == 2);
  CHECK(score_attribute(HazardAttribute::EnergyDisruption, 2.5, t).value() == 1);
}

TEST_CASE("HazardLevel range") {
  CHECK(HazardLevel(1).value() == 1);
  CHECK(HazardLevel(5).value() == 5);
  CHECK_THROWS_AS(HazardLevel(0), Error);
  CHECK_THROWS_AS(HazardLevel(6), Error);
}

TEST_CASE("hazard attributes JSON") {
  const HazardAttributes a = parse_hazard_attributes(json{{"fatality", 12}, {"Water Disruption", 4.5}});
  CHECK(a[HazardAttribute::Fatality] == 12.0);
  CHECK(a[HazardAttribute::WaterDisruption] == 4.5);
  CHECK_FALSE(a[HazardAttribute::Injury].has_value());
  CHECK(parse_hazard_attributes(to_json(a)).values == a.values);
  CHECK(code_of([] { parse_hazard_attributes(json{{"fatality", -3}}); }) == ErrorCode::NegativeValue);
  CHECK(code_of([] { parse_hazard_attributes(json{{"height", 3}}); }) == ErrorCode::UnknownAttribute);
  const auto levels = attribute_levels(a, kTable);
  CHECK(levels[index_of(HazardAttribute::Fatality)] == 2);
  CHECK(levels[index_of(HazardAttribute::WaterDisruption)] == 2);
  CHECK_FALSE(levels[index_of(HazardAttribute::Injury)].has_value());
}
