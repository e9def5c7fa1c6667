#include <doctest.h>

#include "evida/errors.hpp"
#include "evida/values.hpp"
#include "testutil.hpp"

using namespace evida;

namespace {
const DiscretizationThresholds kPaperThresholds{0.33, 0.67};
}

TEST_CASE("discretize_scalar piecewise definition") {
  CHECK(discretize_scalar(0.20, kPaperThresholds) == LMHLabel::low);
  // Boundaries are closed on the upper side.
  CHECK(discretize_scalar(0.33, kPaperThresholds) == LMHLabel::medium);
  CHECK(discretize_scalar(0.67, kPaperThresholds) == LMHLabel::high);
  CHECK(discretize_scalar(0.0, kPaperThresholds) == LMHLabel::low);
  CHECK(discretize_scalar(1.0, kPaperThresholds) == LMHLabel::high);
}

TEST_CASE("discretize_scalar rejects out-of-range input") {
  CHECK_THROWS_AS(discretize_scalar(-0.001, kPaperThresholds), DomainError);
  CHECK_THROWS_AS(discretize_scalar(1.001, kPaperThresholds), DomainError);
  CHECK_THROWS_AS(discretize_scalar(0.5, DiscretizationThresholds{0.7, 0.3}), DomainError);
}

TEST_CASE("discretize_scalar is monotone and partitions the unit interval") {
  std::uint64_t state = 42;
  std::vector<double> samples = {0.0, 0.33, 0.67, 1.0};
  for (int i = 0; i < 2000; ++i) samples.push_back(testutil::unit_draw(state));
  for (double a : samples) {
    const LMHLabel label = discretize_scalar(a, kPaperThresholds);
    CHECK(label == testutil::oracle_lmh(a, 0.33, 0.67));
  }
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double a = std::min(samples[i], samples[i + 1]);
    const double b = std::max(samples[i], samples[i + 1]);
    CHECK(static_cast<int>(discretize_scalar(a, kPaperThresholds)) <=
          static_cast<int>(discretize_scalar(b, kPaperThresholds)));
  }
}

TEST_CASE("discretize_profile applies the map component-wise") {
  const WelzelProfile zeros;
  const LMHSignature all_low = discretize_profile(zeros, kPaperThresholds);
  for (LMHLabel label : all_low.labels) CHECK(label == LMHLabel::low);

  const WelzelProfile ones =
      WelzelProfile::from_values({1, 1, 1, 1, 1, 1, 1, 1});
  const LMHSignature all_high = discretize_profile(ones, kPaperThresholds);
  for (LMHLabel label : all_high.labels) CHECK(label == LMHLabel::high);

  const WelzelProfile mixed =
      WelzelProfile::from_values({0.1, 0.5, 0.9, 0.1, 0.5, 0.9, 0.1, 0.5});
  const LMHSignature signature = discretize_profile(mixed, kPaperThresholds);
  const std::vector<std::string> expected = {"low",  "medium", "high", "low",
                                             "medium", "high", "low",  "medium"};
  CHECK(signature.to_strings() == expected);
}

TEST_CASE("mean_profile identities") {
  const WelzelProfile zeros;
  const WelzelProfile ones = WelzelProfile::from_values({1, 1, 1, 1, 1, 1, 1, 1});
  const WelzelProfile mid = mean_profile({zeros, ones});
  for (std::size_t d = 0; d < kSubIndexCount; ++d) CHECK(mid[d] == doctest::Approx(0.5));

  std::uint64_t state = 7;
  const WelzelProfile single = testutil::random_profile(state);
  CHECK(mean_profile({single}) == single);

  CHECK_THROWS_AS(mean_profile({}), DomainError);
}

TEST_CASE("mean_profile matches an independent accumulation oracle") {
  std::uint64_t state = 99;
  std::vector<WelzelProfile> profiles;
  for (int i = 0; i < 5; ++i) profiles.push_back(testutil::random_profile(state));

  std::array<double, kSubIndexCount> sums{};
  for (const WelzelProfile& profile : profiles) {
    for (std::size_t d = 0; d < kSubIndexCount; ++d) sums[d] += profile[d];
  }
  const WelzelProfile mean = mean_profile(profiles);
  for (std::size_t d = 0; d < kSubIndexCount; ++d) {
    CHECK(mean[d] == doctest::Approx(sums[d] / 5.0).epsilon(1e-12));
  }
}

TEST_CASE("mean_profile is permutation invariant") {
  std::uint64_t state = 123;
  std::vector<WelzelProfile> profiles;
  for (int i = 0; i < 6; ++i) profiles.push_back(testutil::random_profile(state));
  std::vector<WelzelProfile> reversed(profiles.rbegin(), profiles.rend());
  CHECK(mean_profile(profiles) == mean_profile(reversed));
}

TEST_CASE("signature_match_fraction counts exact per-position agreement") {
  LMHSignature a;
  a.labels.fill(LMHLabel::medium);
  CHECK(signature_match_fraction(a, a) == 1.0);

  LMHSignature b;
  b.labels.fill(LMHLabel::high);
  CHECK(signature_match_fraction(a, b) == 0.0);

  LMHSignature c = a;
  c.labels[0] = LMHLabel::low;
  c.labels[5] = LMHLabel::high;
  CHECK(signature_match_fraction(a, c) == doctest::Approx(0.75));
  CHECK(signature_match_fraction(c, a) == doctest::Approx(0.75));  // symmetry

  // Values lie on the k/8 grid.
  const double fraction = signature_match_fraction(a, c);
  CHECK(std::abs(fraction * 8.0 - std::round(fraction * 8.0)) < 1e-12);
}

TEST_CASE("WelzelProfile rejects out-of-range components strictly") {
  CHECK_THROWS_AS(WelzelProfile::from_values({-0.01, 0, 0, 0, 0, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(WelzelProfile::from_values({0, 0, 0, 1.2, 0, 0, 0, 0}), DomainError);
}

TEST_CASE("LMHSignature string round-trip is strict about labels") {
  const std::vector<std::string> labels = {"low",    "medium", "high", "low",
                                           "medium", "high",   "low",  "medium"};
  CHECK(LMHSignature::from_strings(labels).to_strings() == labels);
  CHECK_THROWS_AS(LMHSignature::from_strings({"low", "medium"}), DomainError);
  std::vector<std::string> capitalized = labels;
  capitalized[2] = "High";
  CHECK_THROWS_AS(LMHSignature::from_strings(capitalized), DomainError);
}
