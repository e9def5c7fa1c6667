#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace evida {

// The eight value sub-indices in their canonical order. Positions 0-3 are
// the secular side, 4-7 the emancipative side. The order is part of every
// serialized signature and must never change.
inline constexpr std::size_t kSubIndexCount = 8;

inline constexpr std::array<std::string_view, kSubIndexCount> kSubIndexNames = {
    "DEFIANCE", "DISBELIEF", "RELATIVISM", "SCEPTICISM",
    "AUTONOMY", "EQUALITY",  "CHOICE",     "VOICE",
};

// One-line meaning per sub-index, rendered into prompts.
inline constexpr std::array<std::string_view, kSubIndexCount> kSubIndexMeanings = {
    "Less deference to authority/tradition (higher = more defiant).",
    "Lower religiosity (higher = more disbelief).",
    "Less moral absolutism (higher = more relativist).",
    "More skepticism toward traditional state institutions.",
    "Preference for independence/imagination over obedience in child-raising.",
    "Support for gender equality.",
    "Acceptance of private-life choices (e.g., divorce/abortion/homosexuality).",
    "Support for free speech and people having a say.",
};

// Index of a sub-index name in canonical order, or -1 when unknown.
int sub_index_ordinal(std::string_view name);

enum class LMHLabel { low, medium, high };

std::string_view to_string(LMHLabel label);
// Strict: accepts exactly "low" / "medium" / "high", nothing else.
bool parse_lmh_label(std::string_view text, LMHLabel& out);

// A point in value space: one real in [0,1] per sub-index.
class WelzelProfile {
 public:
  WelzelProfile() : values_{} {}

  // Throws DomainError when any component falls outside [0,1].
  static WelzelProfile from_values(const std::array<double, kSubIndexCount>& values);

  double operator[](std::size_t index) const { return values_[index]; }
  const std::array<double, kSubIndexCount>& values() const { return values_; }

  bool operator==(const WelzelProfile& other) const = default;

 private:
  std::array<double, kSubIndexCount> values_;
};

// Discretized counterpart of a profile: one LMH label per sub-index.
struct LMHSignature {
  std::array<LMHLabel, kSubIndexCount> labels{};

  std::vector<std::string> to_strings() const;
  // Throws DomainError unless given exactly eight valid lowercase labels.
  static LMHSignature from_strings(const std::vector<std::string>& labels);

  bool operator==(const LMHSignature& other) const = default;
};

// Cut points of the low/medium/high map; 0 < tau1 < tau2 < 1.
struct DiscretizationThresholds {
  double tau1 = 0.33;
  double tau2 = 0.67;

  void validate() const;  // throws DomainError

  bool operator==(const DiscretizationThresholds& other) const = default;
};

// Piecewise map: low on [0,tau1), medium on [tau1,tau2), high on [tau2,1].
// Inputs outside [0,1] are a DomainError; upstream clamping is the
// ingester's job, this module stays strict.
LMHLabel discretize_scalar(double value, const DiscretizationThresholds& thresholds);

LMHSignature discretize_profile(const WelzelProfile& profile,
                                const DiscretizationThresholds& thresholds);

// Component-wise arithmetic mean. Throws DomainError on an empty list.
WelzelProfile mean_profile(const std::vector<WelzelProfile>& profiles);

// Fraction of the eight positions where the two signatures agree exactly.
double signature_match_fraction(const LMHSignature& predicted, const LMHSignature& gold);

}  // namespace evida
