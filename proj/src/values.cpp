#include "evida/values.hpp"

#include <algorithm>
#include <sstream>

#include "evida/errors.hpp"

namespace evida {

int sub_index_ordinal(std::string_view name) {
  for (std::size_t i = 0; i < kSubIndexNames.size(); ++i) {
    if (kSubIndexNames[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string_view to_string(LMHLabel label) {
  switch (label) {
    case LMHLabel::low: return "low";
    case LMHLabel::medium: return "medium";
    case LMHLabel::high: return "high";
  }
  return "low";
}

bool parse_lmh_label(std::string_view text, LMHLabel& out) {
  if (text == "low") {
    out = LMHLabel::low;
  } else if (text == "medium") {
    out = LMHLabel::medium;
  } else if (text == "high") {
    out = LMHLabel::high;
  } else {
    return false;
  }
  return true;
}

WelzelProfile WelzelProfile::from_values(const std::array<double, kSubIndexCount>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      std::ostringstream message;
      message << "profile component " << kSubIndexNames[i] << " = " << values[i]
              << " outside [0,1]";
      throw DomainError(message.str());
    }
  }
  WelzelProfile profile;
  profile.values_ = values;
  return profile;
}

std::vector<std::string> LMHSignature::to_strings() const {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (LMHLabel label : labels) {
    out.emplace_back(to_string(label));
  }
  return out;
}

LMHSignature LMHSignature::from_strings(const std::vector<std::string>& labels) {
  if (labels.size() != kSubIndexCount) {
    throw DomainError("signature needs exactly 8 labels, got " +
                      std::to_string(labels.size()));
  }
  LMHSignature signature;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!parse_lmh_label(labels[i], signature.labels[i])) {
      throw DomainError("invalid LMH label: '" + labels[i] + "'");
    }
  }
  return signature;
}

void DiscretizationThresholds::validate() const {
  if (!(0.0 < tau1 && tau1 < tau2 && tau2 < 1.0)) {
    std::ostringstream message;
    message << "invalid thresholds: require 0 < tau1 < tau2 < 1, got tau1=" << tau1
            << " tau2=" << tau2;
    throw DomainError(message.str());
  }
}

LMHLabel discretize_scalar(double value, const DiscretizationThresholds& thresholds) {
  thresholds.validate();
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError("discretize_scalar input " + std::to_string(value) +
                      " outside [0,1]");
  }
  if (value < thresholds.tau1) return LMHLabel::low;
  if (value < thresholds.tau2) return LMHLabel::medium;
  return LMHLabel::high;
}

LMHSignature discretize_profile(const WelzelProfile& profile,
                                const DiscretizationThresholds& thresholds) {
  LMHSignature signature;
  for (std::size_t i = 0; i < kSubIndexCount; ++i) {
    signature.labels[i] = discretize_scalar(profile[i], thresholds);
  }
  return signature;
}

WelzelProfile mean_profile(const std::vector<WelzelProfile>& profiles) {
  if (profiles.empty()) {
    throw DomainError("mean_profile over empty support");
  }
  // Addends are sorted per dimension before accumulation: float addition is
  // not associative, and the mean must be exactly permutation-invariant.
  std::array<double, kSubIndexCount> means{};
  std::vector<double> column(profiles.size());
  for (std::size_t i = 0; i < kSubIndexCount; ++i) {
    for (std::size_t p = 0; p < profiles.size(); ++p) {
      column[p] = profiles[p][i];
    }
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double value : column) sum += value;
    // The true mean lies in [0,1]; clamp only the last-bit float dust so
    // the checked constructor stays satisfied.
    means[i] = std::clamp(sum / static_cast<double>(profiles.size()), 0.0, 1.0);
  }
  return WelzelProfile::from_values(means);
}

double signature_match_fraction(const LMHSignature& predicted, const LMHSignature& gold) {
  std::size_t matches = 0;
  for (std::size_t i = 0; i < kSubIndexCount; ++i) {
    if (predicted.labels[i] == gold.labels[i]) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(kSubIndexCount);
}

}  // namespace evida
