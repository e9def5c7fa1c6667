#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// deliberately avoid the library's aggregation/scoring code paths: they are
// separate brute-force implementations used to cross-check results.

#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "evida/evidence_bank.hpp"
#include "evida/retrieval.hpp"
#include "evida/util.hpp"
#include "evida/values.hpp"

namespace testutil {

inline std::filesystem::path fixture_dir() {
#ifdef EVIDA_FIXTURE_DIR
  return std::filesystem::path(EVIDA_FIXTURE_DIR);
#else
  return std::filesystem::path("tests/fixtures");
#endif
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto path = std::filesystem::temp_directory_path() /
              ("evida-test-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
  return path;
}

// Deterministic unit draw decoupled from the library's splitmix usage.
inline double unit_draw(std::uint64_t& state) {
  state ^= state << 13;
  state ^= state >> 7;
  state ^= state << 17;
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

inline evida::WelzelProfile random_profile(std::uint64_t& state) {
  std::array<double, evida::kSubIndexCount> values{};
  for (double& value : values) value = unit_draw(state);
  return evida::WelzelProfile::from_values(values);
}

// Synthetic microdata: `respondents` rows split across `countries`, each
// answering every item in `items` with a deterministic option choice.
struct SyntheticData {
  std::vector<evida::RespondentRecord> records;
  std::vector<evida::SurveyItem> items;
};

inline evida::SurveyItem make_item(const std::string& id, const std::string& question,
                                   int option_count) {
  evida::SurveyItem item;
  item.item_id = id;
  item.question_text = question;
  for (int i = 0; i < option_count; ++i) {
    const std::string option_id(1, static_cast<char>('A' + i));
    item.options.push_back({option_id, "option " + option_id + " of " + id});
  }
  return item;
}

inline SyntheticData make_synthetic_data(std::size_t respondents,
                                         const std::vector<std::string>& countries,
                                         std::size_t item_count, std::uint64_t seed) {
  SyntheticData data;
  for (std::size_t i = 0; i < item_count; ++i) {
    data.items.push_back(make_item("Q" + std::to_string(i + 1),
                                   "Synthetic question number " + std::to_string(i + 1), 4));
  }
  std::uint64_t state = seed * 2654435761ull + 1;
  for (std::size_t r = 0; r < respondents; ++r) {
    evida::RespondentRecord record;
    record.respondent_id = "R" + std::to_string(r + 1);
    record.group.country = countries[r % countries.size()];
    record.profile = random_profile(state);
    for (const evida::SurveyItem& item : data.items) {
      // Sparse missingness: ~10% of answers absent.
      if (unit_draw(state) < 0.1) continue;
      const std::size_t pick =
          static_cast<std::size_t>(unit_draw(state) * static_cast<double>(item.options.size()));
      record.answers[item.item_id] =
          item.options[std::min(pick, item.options.size() - 1)].id;
    }
    data.records.push_back(std::move(record));
  }
  return data;
}

// Brute-force per-(group, item) tally, independent of build_bank: counts,
// distribution, per-option mean profiles via plain accumulation.
struct OracleOptionStats {
  std::int64_t count = 0;
  std::array<double, evida::kSubIndexCount> mean{};
};

struct OracleItemStats {
  std::int64_t support = 0;
  std::map<std::string, OracleOptionStats> options;
};

inline OracleItemStats oracle_tally(const std::vector<evida::RespondentRecord>& records,
                                    const evida::GroupKey& group,
                                    const evida::SurveyItem& item) {
  OracleItemStats stats;
  std::map<std::string, std::array<double, evida::kSubIndexCount>> sums;
  for (const evida::RespondentRecord& record : records) {
    if (!(record.group == group)) continue;
    auto it = record.answers.find(item.item_id);
    if (it == record.answers.end()) continue;
    if (!item.has_option(it->second)) continue;
    stats.support += 1;
    auto& option = stats.options[it->second];
    option.count += 1;
    auto& sum = sums[it->second];
    for (std::size_t d = 0; d < evida::kSubIndexCount; ++d) {
      sum[d] += record.profile[d];
    }
  }
  for (auto& [option_id, option] : stats.options) {
    for (std::size_t d = 0; d < evida::kSubIndexCount; ++d) {
      option.mean[d] = sums[option_id][d] / static_cast<double>(option.count);
    }
  }
  return stats;
}

// Golden-file comparison with normalized line endings. Returns an empty
// string on match; with EVIDA_UPDATE_GOLDEN set, rewrites the fixture and
// reports a match.
inline std::string normalize_newlines(std::string text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
    out.push_back(text[i]);
  }
  return out;
}

inline std::string golden_mismatch(const std::string& actual, const std::string& name) {
  const auto path = fixture_dir() / "golden" / name;
  if (std::getenv("EVIDA_UPDATE_GOLDEN") != nullptr) {
    evida::write_file(path, actual);
    return {};
  }
  if (!std::filesystem::exists(path)) {
    return "golden file missing: " + path.string() +
           " (run with EVIDA_UPDATE_GOLDEN=1 to create)";
  }
  const std::string expected = evida::read_file(path);
  if (normalize_newlines(expected) != normalize_newlines(actual)) {
    return "golden mismatch for " + name;
  }
  return {};
}

// Hand-built retrieval evidence with exact decimal masses, so golden prompt
// renders stay readable.
inline evida::RetrievedEvidence fixed_evidence() {
  evida::RetrievedEvidence retrieved;

  evida::ItemEvidence first;
  first.item = make_item("Q7", "How important is tradition in daily life?", 3);
  first.item.instruction = "Choose the closest answer";
  first.support = 80;
  first.distribution = {{"A", 0.5}, {"B", 0.25}, {"C", 0.25}};
  {
    evida::OptionEvidence a;
    a.count = 40;
    a.mean_profile = evida::WelzelProfile::from_values({0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1, 0.2});
    a.signature = evida::discretize_profile(*a.mean_profile, {0.33, 0.67});
    first.option_evidence["A"] = a;
    evida::OptionEvidence b;
    b.count = 20;
    b.mean_profile = evida::WelzelProfile::from_values({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
    b.signature = evida::discretize_profile(*b.mean_profile, {0.33, 0.67});
    first.option_evidence["B"] = b;
    evida::OptionEvidence c;
    c.count = 20;
    c.mean_profile = evida::WelzelProfile::from_values({0.9, 0.8, 0.9, 0.8, 0.9, 0.8, 0.9, 0.8});
    c.signature = evida::discretize_profile(*c.mean_profile, {0.33, 0.67});
    first.option_evidence["C"] = c;
  }
  retrieved.entries.push_back({"Q7", 0.75, first});

  evida::ItemEvidence second;
  second.item = make_item("Q9", "How acceptable is questioning authority?", 2);
  second.support = 60;
  second.distribution = {{"A", 0.75}, {"B", 0.25}};
  {
    evida::OptionEvidence a;
    a.count = 45;
    a.mean_profile = evida::WelzelProfile::from_values({0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7, 0.7});
    a.signature = evida::discretize_profile(*a.mean_profile, {0.33, 0.67});
    second.option_evidence["A"] = a;
    evida::OptionEvidence b;
    b.count = 15;
    b.mean_profile = evida::WelzelProfile::from_values({0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2});
    b.signature = evida::discretize_profile(*b.mean_profile, {0.33, 0.67});
    second.option_evidence["B"] = b;
  }
  retrieved.entries.push_back({"Q9", 0.6, second});

  return retrieved;
}

// Piecewise reference for the LMH map, written directly from its definition.
inline evida::LMHLabel oracle_lmh(double a, double tau1, double tau2) {
  if (a < tau1) return evida::LMHLabel::low;
  if (a < tau2) return evida::LMHLabel::medium;
  return evida::LMHLabel::high;
}

// Direct KL-term JSD oracle (base 2) over the union of keys.
inline double oracle_jsd(const evida::AnswerDistribution& p,
                         const evida::AnswerDistribution& q) {
  std::map<std::string, std::pair<double, double>> joined;
  for (const auto& [k, v] : p) joined[k].first = v;
  for (const auto& [k, v] : q) joined[k].second = v;
  double kl_pm = 0.0;
  double kl_qm = 0.0;
  for (const auto& [k, pair] : joined) {
    const double m = 0.5 * (pair.first + pair.second);
    if (pair.first > 0.0) kl_pm += pair.first * std::log2(pair.first / m);
    if (pair.second > 0.0) kl_qm += pair.second * std::log2(pair.second / m);
  }
  return 0.5 * kl_pm + 0.5 * kl_qm;
}

inline std::string write_tsv_microdata(const SyntheticData& data,
                                       const std::filesystem::path& path) {
  std::ostringstream out;
  out << "respondent_id\tcountry";
  for (std::string_view name : evida::kSubIndexNames) out << "\t" << name;
  for (const evida::SurveyItem& item : data.items) out << "\t" << item.item_id;
  out << "\n";
  for (const evida::RespondentRecord& record : data.records) {
    out << record.respondent_id << "\t" << record.group.country;
    for (std::size_t d = 0; d < evida::kSubIndexCount; ++d) {
      out << "\t" << record.profile[d];
    }
    for (const evida::SurveyItem& item : data.items) {
      auto it = record.answers.find(item.item_id);
      out << "\t" << (it == record.answers.end() ? "" : it->second);
    }
    out << "\n";
  }
  evida::write_file(path, out.str());
  return out.str();
}

inline void write_items_jsonl(const std::vector<evida::SurveyItem>& items,
                              const std::filesystem::path& path) {
  std::ostringstream out;
  for (const evida::SurveyItem& item : items) {
    out << "{\"item_id\":\"" << item.item_id << "\",\"question_text\":\""
        << item.question_text << "\",\"options\":[";
    for (std::size_t i = 0; i < item.options.size(); ++i) {
      if (i > 0) out << ",";
      out << "{\"id\":\"" << item.options[i].id << "\",\"text\":\"" << item.options[i].text
          << "\"}";
    }
    out << "]}\n";
  }
  evida::write_file(path, out.str());
}

}  // namespace testutil
