#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evida/values.hpp"

namespace evida {

inline constexpr int kBankSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// A demographic group: country plus optional categorical attributes.
// std::map keeps attribute comparison independent of insertion order.
struct GroupKey {
  std::string country;
  std::map<std::string, std::string> attributes;

  // "Vietnam" or "Vietnam|gender=female,age=18-29".
  std::string label() const;

  bool operator==(const GroupKey& other) const = default;
  auto operator<=>(const GroupKey& other) const = default;
};

struct SurveyOption {
  std::string id;
  std::string text;

  bool operator==(const SurveyOption& other) const = default;
};

struct SurveyItem {
  std::string item_id;
  std::string question_text;
  std::optional<std::string> instruction;
  std::vector<SurveyOption> options;

  // Throws InputError unless there are >=2 options with unique ids.
  void validate() const;
  bool has_option(const std::string& option_id) const;
  std::vector<std::string> option_ids() const;

  bool operator==(const SurveyItem& other) const = default;
};

struct RespondentRecord {
  std::string respondent_id;
  GroupKey group;
  WelzelProfile profile;
  std::map<std::string, std::string> answers;  // item_id -> option_id
};

// Probabilities keyed by option id. Bank-derived distributions carry every
// option of the item explicitly, including zero-probability ones.
using AnswerDistribution = std::map<std::string, double>;

double distribution_sum(const AnswerDistribution& distribution);

struct OptionEvidence {
  std::int64_t count = 0;
  std::optional<WelzelProfile> mean_profile;  // present iff count > 0
  std::optional<LMHSignature> signature;      // present iff count > 0

  bool operator==(const OptionEvidence& other) const = default;
};

// Aggregated evidence for one (group, item) pair.
struct ItemEvidence {
  SurveyItem item;
  std::int64_t support = 0;  // respondents of the group with an observed answer
  AnswerDistribution distribution;
  std::map<std::string, OptionEvidence> option_evidence;

  bool operator==(const ItemEvidence& other) const = default;
};

struct GroupEvidence {
  LMHSignature group_profile;  // discretized mean profile over all respondents
  std::int64_t respondent_count = 0;
  std::map<std::string, ItemEvidence> items;

  bool operator==(const GroupEvidence& other) const = default;
};

struct EvidenceBank {
  DiscretizationThresholds thresholds;
  std::map<GroupKey, GroupEvidence> groups;

  const GroupEvidence* find_group(const GroupKey& group) const;
  const ItemEvidence* find_item(const GroupKey& group, const std::string& item_id) const;
  // Stored support; 0 when the group or item is absent.
  std::int64_t support(const GroupKey& group, const std::string& item_id) const;

  bool operator==(const EvidenceBank& other) const = default;
};

// --- Ingestion ---------------------------------------------------------

struct IngestOptions {
  char delimiter = '\t';
  // Columns treated as group attributes in addition to the positional rule
  // (delimited input: columns between "country" and the first sub-index).
  std::vector<std::string> attribute_columns;
};

struct RejectedRow {
  std::size_t line_number = 0;
  std::string reason;
};

struct IngestResult {
  std::vector<RespondentRecord> records;
  std::vector<RejectedRow> rejected;
};

// Reads delimited text (header row required) or JSON lines, autodetected by
// the first non-space byte. Malformed rows land in the rejection report and
// ingestion continues; an unreadable source is fatal (InputError).
IngestResult ingest_respondents(std::istream& source, const IngestOptions& options = {});
IngestResult ingest_respondents_file(const std::filesystem::path& path,
                                     const IngestOptions& options = {});

// Survey item definitions, one JSON object per line:
// {"item_id":..., "question_text":..., "instruction":..., "options":[{"id":..,"text":..}]}
std::vector<SurveyItem> load_items_file(const std::filesystem::path& path);

// --- Aggregation -------------------------------------------------------

// Empirical evidence for one item within one group: support, answer
// distribution over all item options, and per-option mean profile plus
// discretized signature. Records outside the group or without an observed
// answer to the item are ignored. Answers naming an option id the item does
// not define count as missing.
ItemEvidence build_item_evidence(const std::vector<RespondentRecord>& records,
                                 const GroupKey& group, const SurveyItem& item,
                                 const DiscretizationThresholds& thresholds);

// Full bank over every group found in the records. Only (group, item) pairs
// with support > 0 are stored. No respondents yields an empty bank.
EvidenceBank build_bank(const std::vector<RespondentRecord>& records,
                        const std::vector<SurveyItem>& items,
                        const DiscretizationThresholds& thresholds);

// --- Persistence -------------------------------------------------------

// Directory layout: manifest.json plus one JSON-lines file per group under
// groups/. The manifest records tool version, thresholds, the group list,
// item count, and a per-file checksum. Writing is deterministic: identical
// banks produce byte-identical directories.
void save_bank(const EvidenceBank& bank, const std::filesystem::path& directory);

// Throws BankError with distinct codes: version_mismatch, checksum_mismatch,
// malformed.
EvidenceBank load_bank(const std::filesystem::path& directory);

}  // namespace evida
