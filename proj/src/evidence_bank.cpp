#include "evida/evidence_bank.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evida/errors.hpp"
#include "evida/util.hpp"

namespace evida {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kClampTolerance = 1e-9;

bool parse_double(std::string_view text, double& out) {
  std::string trimmed = trim(text);
  if (trimmed.empty()) return false;
  char* end = nullptr;
  out = std::strtod(trimmed.c_str(), &end);
  return end == trimmed.c_str() + trimmed.size();
}

// Clamps float dust around [0,1]; values further out are the caller's error.
bool clamp_unit(double& value) {
  if (value >= 0.0 && value <= 1.0) return true;
  if (value > -kClampTolerance && value < 0.0) {
    value = 0.0;
    return true;
  }
  if (value > 1.0 && value < 1.0 + kClampTolerance) {
    value = 1.0;
    return true;
  }
  return false;
}

std::string scalar_to_string(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
  if (value.is_number_unsigned()) return std::to_string(value.get<std::uint64_t>());
  return {};
}

ordered_json profile_to_json(const WelzelProfile& profile) {
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < kSubIndexCount; ++i) out.push_back(profile[i]);
  return out;
}

WelzelProfile profile_from_json(const nlohmann::json& value) {
  if (!value.is_array() || value.size() != kSubIndexCount) {
    throw DomainError("profile must be an array of 8 numbers");
  }
  std::array<double, kSubIndexCount> components{};
  for (std::size_t i = 0; i < kSubIndexCount; ++i) {
    components[i] = value[i].get<double>();
  }
  return WelzelProfile::from_values(components);
}

ordered_json signature_to_json(const LMHSignature& signature) {
  ordered_json out = ordered_json::array();
  for (const std::string& label : signature.to_strings()) out.push_back(label);
  return out;
}

LMHSignature signature_from_json(const nlohmann::json& value) {
  std::vector<std::string> labels;
  for (const auto& entry : value) labels.push_back(entry.get<std::string>());
  return LMHSignature::from_strings(labels);
}

ordered_json group_key_to_json(const GroupKey& group) {
  ordered_json out;
  out["country"] = group.country;
  ordered_json attrs = ordered_json::object();
  for (const auto& [name, value] : group.attributes) attrs[name] = value;
  out["attributes"] = attrs;
  return out;
}

std::string slugify(std::string_view text, std::size_t max_length = 32) {
  std::string slug;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      slug.push_back(static_cast<char>(std::tolower(c)));
    } else if (!slug.empty() && slug.back() != '-') {
      slug.push_back('-');
    }
    if (slug.size() >= max_length) break;
  }
  while (!slug.empty() && slug.back() == '-') slug.pop_back();
  return slug.empty() ? "group" : slug;
}

ordered_json item_to_json(const SurveyItem& item) {
  ordered_json out;
  out["item_id"] = item.item_id;
  out["question_text"] = item.question_text;
  if (item.instruction) out["instruction"] = *item.instruction;
  ordered_json options = ordered_json::array();
  for (const SurveyOption& option : item.options) {
    options.push_back({{"id", option.id}, {"text", option.text}});
  }
  out["options"] = options;
  return out;
}

SurveyItem item_from_json(const nlohmann::json& value) {
  SurveyItem item;
  item.item_id = value.at("item_id").get<std::string>();
  item.question_text = value.at("question_text").get<std::string>();
  if (value.contains("instruction") && !value.at("instruction").is_null()) {
    item.instruction = value.at("instruction").get<std::string>();
  }
  for (const auto& option : value.at("options")) {
    item.options.push_back(
        {option.at("id").get<std::string>(), option.at("text").get<std::string>()});
  }
  item.validate();
  return item;
}

}  // namespace

std::string GroupKey::label() const {
  if (attributes.empty()) return country;
  std::string out = country + "|";
  bool first = true;
  for (const auto& [name, value] : attributes) {
    if (!first) out += ",";
    out += name + "=" + value;
    first = false;
  }
  return out;
}

void SurveyItem::validate() const {
  if (item_id.empty()) throw InputError("survey item with empty item_id");
  if (options.size() < 2) {
    throw InputError("item '" + item_id + "' needs at least 2 options");
  }
  std::set<std::string> seen;
  for (const SurveyOption& option : options) {
    if (option.id.empty()) throw InputError("item '" + item_id + "' has an empty option id");
    if (!seen.insert(option.id).second) {
      throw InputError("item '" + item_id + "' has duplicate option id '" + option.id + "'");
    }
  }
}

bool SurveyItem::has_option(const std::string& option_id) const {
  return std::any_of(options.begin(), options.end(),
                     [&](const SurveyOption& option) { return option.id == option_id; });
}

std::vector<std::string> SurveyItem::option_ids() const {
  std::vector<std::string> ids;
  ids.reserve(options.size());
  for (const SurveyOption& option : options) ids.push_back(option.id);
  return ids;
}

double distribution_sum(const AnswerDistribution& distribution) {
  double sum = 0.0;
  for (const auto& [option, probability] : distribution) sum += probability;
  return sum;
}

const GroupEvidence* EvidenceBank::find_group(const GroupKey& group) const {
  auto it = groups.find(group);
  return it == groups.end() ? nullptr : &it->second;
}

const ItemEvidence* EvidenceBank::find_item(const GroupKey& group,
                                            const std::string& item_id) const {
  const GroupEvidence* group_evidence = find_group(group);
  if (group_evidence == nullptr) return nullptr;
  auto it = group_evidence->items.find(item_id);
  return it == group_evidence->items.end() ? nullptr : &it->second;
}

std::int64_t EvidenceBank::support(const GroupKey& group, const std::string& item_id) const {
  const ItemEvidence* evidence = find_item(group, item_id);
  return evidence == nullptr ? 0 : evidence->support;
}

// --- Ingestion ---------------------------------------------------------

namespace {

struct DelimitedLayout {
  int respondent_column = -1;
  int country_column = -1;
  std::array<int, kSubIndexCount> sub_index_columns{};
  std::vector<std::pair<int, std::string>> attribute_columns;  // column, name
  std::vector<std::pair<int, std::string>> item_columns;       // column, item_id
};

DelimitedLayout parse_header(const std::vector<std::string>& header,
                             const IngestOptions& options) {
  DelimitedLayout layout;
  layout.sub_index_columns.fill(-1);

  std::set<std::string> declared_attributes(options.attribute_columns.begin(),
                                            options.attribute_columns.end());
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name == "respondent_id") {
      layout.respondent_column = static_cast<int>(i);
    } else if (name == "country") {
      layout.country_column = static_cast<int>(i);
    } else {
      int ordinal = sub_index_ordinal(name);
      if (ordinal >= 0) layout.sub_index_columns[static_cast<std::size_t>(ordinal)] = static_cast<int>(i);
    }
  }
  if (layout.respondent_column < 0 || layout.country_column < 0) {
    throw InputError("microdata header must contain respondent_id and country columns");
  }
  int first_sub_index = static_cast<int>(header.size());
  for (std::size_t i = 0; i < kSubIndexCount; ++i) {
    if (layout.sub_index_columns[i] < 0) {
      throw InputError(std::string("microdata header missing sub-index column ") +
                       std::string(kSubIndexNames[i]));
    }
    first_sub_index = std::min(first_sub_index, layout.sub_index_columns[i]);
  }

  for (std::size_t i = 0; i < header.size(); ++i) {
    const int column = static_cast<int>(i);
    if (column == layout.respondent_column || column == layout.country_column) continue;
    const std::string name = trim(header[i]);
    if (sub_index_ordinal(name) >= 0) continue;
    const bool positional_attribute =
        column > layout.country_column && column < first_sub_index;
    if (positional_attribute || declared_attributes.count(name) > 0) {
      layout.attribute_columns.emplace_back(column, name);
    } else {
      layout.item_columns.emplace_back(column, name);
    }
  }
  return layout;
}

void ingest_delimited(std::istream& source, const IngestOptions& options,
                      IngestResult& result) {
  std::string line;
  if (!std::getline(source, line)) {
    throw InputError("microdata source is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const DelimitedLayout layout = parse_header(split(line, options.delimiter), options);

  std::size_t line_number = 1;
  while (std::getline(source, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    const std::vector<std::string> fields = split(line, options.delimiter);
    auto field_at = [&](int column) -> std::string {
      return column < static_cast<int>(fields.size()) ? trim(fields[static_cast<std::size_t>(column)])
                                                      : std::string();
    };

    RespondentRecord record;
    record.respondent_id = field_at(layout.respondent_column);
    record.group.country = field_at(layout.country_column);
    if (record.respondent_id.empty()) {
      result.rejected.push_back({line_number, "missing respondent_id"});
      continue;
    }
    if (record.group.country.empty()) {
      result.rejected.push_back({line_number, "missing country"});
      continue;
    }

    std::array<double, kSubIndexCount> components{};
    bool ok = true;
    for (std::size_t i = 0; i < kSubIndexCount && ok; ++i) {
      const std::string raw = field_at(layout.sub_index_columns[i]);
      if (raw.empty()) {
        result.rejected.push_back(
            {line_number, std::string("missing sub-index ") + std::string(kSubIndexNames[i])});
        ok = false;
        break;
      }
      double value = 0.0;
      if (!parse_double(raw, value)) {
        result.rejected.push_back(
            {line_number,
             std::string("non-numeric sub-index ") + std::string(kSubIndexNames[i]) + ": '" + raw + "'"});
        ok = false;
        break;
      }
      if (!clamp_unit(value)) {
        result.rejected.push_back(
            {line_number,
             std::string("sub-index ") + std::string(kSubIndexNames[i]) + " out of range: " + raw});
        ok = false;
        break;
      }
      components[i] = value;
    }
    if (!ok) continue;
    record.profile = WelzelProfile::from_values(components);

    for (const auto& [column, name] : layout.attribute_columns) {
      const std::string value = field_at(column);
      if (!value.empty()) record.group.attributes[name] = value;
    }
    for (const auto& [column, item_id] : layout.item_columns) {
      const std::string value = field_at(column);
      if (!value.empty()) record.answers[item_id] = value;
    }
    result.records.push_back(std::move(record));
  }
}

void ingest_jsonl(std::istream& source, const IngestOptions& options, IngestResult& result) {
  std::set<std::string> declared_attributes(options.attribute_columns.begin(),
                                            options.attribute_columns.end());
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(source, line)) {
    ++line_number;
    if (trim(line).empty()) continue;

    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      result.rejected.push_back({line_number, std::string("invalid JSON: ") + ex.what()});
      continue;
    }
    if (!row.is_object()) {
      result.rejected.push_back({line_number, "row is not a JSON object"});
      continue;
    }

    RespondentRecord record;
    record.respondent_id = row.contains("respondent_id") ? scalar_to_string(row["respondent_id"]) : "";
    record.group.country = row.contains("country") ? scalar_to_string(row["country"]) : "";
    if (record.respondent_id.empty()) {
      result.rejected.push_back({line_number, "missing respondent_id"});
      continue;
    }
    if (record.group.country.empty()) {
      result.rejected.push_back({line_number, "missing country"});
      continue;
    }

    std::array<double, kSubIndexCount> components{};
    bool ok = true;
    for (std::size_t i = 0; i < kSubIndexCount; ++i) {
      const std::string name(kSubIndexNames[i]);
      if (!row.contains(name) || row[name].is_null()) {
        result.rejected.push_back({line_number, "missing sub-index " + name});
        ok = false;
        break;
      }
      if (!row[name].is_number()) {
        result.rejected.push_back({line_number, "non-numeric sub-index " + name});
        ok = false;
        break;
      }
      double value = row[name].get<double>();
      if (!clamp_unit(value)) {
        result.rejected.push_back({line_number, "sub-index " + name + " out of range"});
        ok = false;
        break;
      }
      components[i] = value;
    }
    if (!ok) continue;
    record.profile = WelzelProfile::from_values(components);

    for (const auto& [key, value] : row.items()) {
      if (key == "respondent_id" || key == "country" || sub_index_ordinal(key) >= 0) continue;
      if (value.is_null()) continue;
      if (declared_attributes.count(key) > 0) {
        const std::string text = scalar_to_string(value);
        if (!text.empty()) record.group.attributes[key] = text;
        continue;
      }
      const std::string answer = scalar_to_string(value);
      if (answer.empty()) {
        result.rejected.push_back({line_number, "invalid answer value for item '" + key + "'"});
        ok = false;
        break;
      }
      record.answers[key] = answer;
    }
    if (!ok) continue;
    result.records.push_back(std::move(record));
  }
}

}  // namespace

IngestResult ingest_respondents(std::istream& source, const IngestOptions& options) {
  if (!source) {
    throw InputError("microdata source not readable");
  }
  // Autodetect: JSON lines start with '{', anything else is delimited text.
  int first = source.peek();
  while (first == ' ' || first == '\n' || first == '\r' || first == '\t') {
    source.get();
    first = source.peek();
  }
  IngestResult result;
  if (first == std::char_traits<char>::eof()) {
    throw InputError("microdata source is empty");
  }
  if (first == '{') {
    ingest_jsonl(source, options, result);
  } else {
    ingest_delimited(source, options, result);
  }
  return result;
}

IngestResult ingest_respondents_file(const std::filesystem::path& path,
                                     const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot read microdata file: " + path.string());
  }
  return ingest_respondents(in, options);
}

std::vector<SurveyItem> load_items_file(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<SurveyItem> items;
  try {
    const std::string head = trim(content.substr(0, 1));
    if (head == "[") {
      for (const auto& entry : nlohmann::json::parse(content)) {
        items.push_back(item_from_json(entry));
      }
    } else {
      for_each_line(content, [&](std::size_t, std::string_view line) {
        if (trim(line).empty()) return;
        items.push_back(item_from_json(nlohmann::json::parse(line)));
      });
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError("malformed items file " + path.string() + ": " + ex.what());
  }
  std::set<std::string> ids;
  for (const SurveyItem& item : items) {
    if (!ids.insert(item.item_id).second) {
      throw InputError("duplicate item_id '" + item.item_id + "' in " + path.string());
    }
  }
  return items;
}

// --- Aggregation -------------------------------------------------------

ItemEvidence build_item_evidence(const std::vector<RespondentRecord>& records,
                                 const GroupKey& group, const SurveyItem& item,
                                 const DiscretizationThresholds& thresholds) {
  item.validate();
  thresholds.validate();

  ItemEvidence evidence;
  evidence.item = item;

  std::map<std::string, std::vector<WelzelProfile>> profiles_by_option;
  for (const RespondentRecord& record : records) {
    if (record.group != group) continue;
    auto answer = record.answers.find(item.item_id);
    if (answer == record.answers.end()) continue;
    if (!item.has_option(answer->second)) continue;  // unknown code, treated as missing
    profiles_by_option[answer->second].push_back(record.profile);
    ++evidence.support;
  }

  if (evidence.support == 0) {
    return evidence;  // empty distribution, no option evidence
  }

  for (const SurveyOption& option : item.options) {
    auto it = profiles_by_option.find(option.id);
    OptionEvidence option_evidence;
    option_evidence.count =
        it == profiles_by_option.end() ? 0 : static_cast<std::int64_t>(it->second.size());
    evidence.distribution[option.id] =
        static_cast<double>(option_evidence.count) / static_cast<double>(evidence.support);
    if (option_evidence.count > 0) {
      option_evidence.mean_profile = mean_profile(it->second);
      option_evidence.signature = discretize_profile(*option_evidence.mean_profile, thresholds);
    }
    evidence.option_evidence[option.id] = std::move(option_evidence);
  }
  return evidence;
}

EvidenceBank build_bank(const std::vector<RespondentRecord>& records,
                        const std::vector<SurveyItem>& items,
                        const DiscretizationThresholds& thresholds) {
  thresholds.validate();
  std::set<std::string> item_ids;
  for (const SurveyItem& item : items) {
    item.validate();
    if (!item_ids.insert(item.item_id).second) {
      throw InputError("duplicate item_id '" + item.item_id + "'");
    }
  }

  EvidenceBank bank;
  bank.thresholds = thresholds;

  std::map<GroupKey, std::vector<WelzelProfile>> profiles_by_group;
  for (const RespondentRecord& record : records) {
    profiles_by_group[record.group].push_back(record.profile);
  }

  for (const auto& [group, profiles] : profiles_by_group) {
    GroupEvidence group_evidence;
    group_evidence.respondent_count = static_cast<std::int64_t>(profiles.size());
    group_evidence.group_profile = discretize_profile(mean_profile(profiles), thresholds);
    for (const SurveyItem& item : items) {
      ItemEvidence evidence = build_item_evidence(records, group, item, thresholds);
      if (evidence.support > 0) {
        group_evidence.items[item.item_id] = std::move(evidence);
      }
    }
    bank.groups[group] = std::move(group_evidence);
  }
  return bank;
}

// --- Persistence -------------------------------------------------------

namespace {

ordered_json item_evidence_to_json(const ItemEvidence& evidence) {
  ordered_json out;
  out["record"] = "item";
  out["item"] = item_to_json(evidence.item);
  out["support"] = evidence.support;
  ordered_json distribution = ordered_json::object();
  for (const auto& [option, probability] : evidence.distribution) {
    distribution[option] = probability;
  }
  out["distribution"] = distribution;
  ordered_json option_evidence = ordered_json::object();
  for (const auto& [option, entry] : evidence.option_evidence) {
    ordered_json record;
    record["count"] = entry.count;
    if (entry.mean_profile) record["mean_profile"] = profile_to_json(*entry.mean_profile);
    if (entry.signature) record["signature"] = signature_to_json(*entry.signature);
    option_evidence[option] = record;
  }
  out["option_evidence"] = option_evidence;
  return out;
}

ItemEvidence item_evidence_from_json(const nlohmann::json& value) {
  ItemEvidence evidence;
  evidence.item = item_from_json(value.at("item"));
  evidence.support = value.at("support").get<std::int64_t>();
  for (const auto& [option, probability] : value.at("distribution").items()) {
    evidence.distribution[option] = probability.get<double>();
  }
  for (const auto& [option, entry] : value.at("option_evidence").items()) {
    OptionEvidence option_evidence;
    option_evidence.count = entry.at("count").get<std::int64_t>();
    if (entry.contains("mean_profile")) {
      option_evidence.mean_profile = profile_from_json(entry.at("mean_profile"));
    }
    if (entry.contains("signature")) {
      option_evidence.signature = signature_from_json(entry.at("signature"));
    }
    evidence.option_evidence[option] = std::move(option_evidence);
  }
  std::int64_t total = 0;
  for (const auto& [option, entry] : evidence.option_evidence) total += entry.count;
  if (total != evidence.support) {
    throw DomainError("option counts do not sum to support for item '" +
                      evidence.item.item_id + "'");
  }
  return evidence;
}

}  // namespace

void save_bank(const EvidenceBank& bank, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  std::filesystem::remove(directory / "manifest.json");
  std::filesystem::remove_all(directory / "groups");
  std::filesystem::create_directories(directory / "groups");

  ordered_json manifest;
  manifest["schema_version"] = kBankSchemaVersion;
  manifest["tool_version"] = kToolVersion;
  manifest["thresholds"] = {{"tau1", bank.thresholds.tau1}, {"tau2", bank.thresholds.tau2}};

  std::set<std::string> distinct_items;
  ordered_json group_entries = ordered_json::array();
  std::size_t index = 0;
  for (const auto& [group, evidence] : bank.groups) {
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "g%04zu", index++);
    const std::string file_name =
        std::string("groups/") + prefix + "-" + slugify(group.label()) + ".jsonl";

    std::string content;
    {
      ordered_json header = group_key_to_json(group);
      ordered_json line;
      line["record"] = "group";
      line["country"] = header["country"];
      line["attributes"] = header["attributes"];
      line["group_profile"] = signature_to_json(evidence.group_profile);
      line["respondents"] = evidence.respondent_count;
      content += line.dump();
      content += "\n";
    }
    for (const auto& [item_id, item_evidence] : evidence.items) {
      distinct_items.insert(item_id);
      content += item_evidence_to_json(item_evidence).dump();
      content += "\n";
    }
    write_file(directory / file_name, content);

    ordered_json entry = group_key_to_json(group);
    entry["file"] = file_name;
    entry["checksum"] = crc32_hex(content);
    entry["respondents"] = evidence.respondent_count;
    entry["items"] = evidence.items.size();
    group_entries.push_back(entry);
  }
  manifest["item_count"] = distinct_items.size();
  manifest["groups"] = group_entries;
  write_file(directory / "manifest.json", manifest.dump(2) + "\n");
}

EvidenceBank load_bank(const std::filesystem::path& directory) {
  const std::string manifest_text = read_file(directory / "manifest.json");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_text);
  } catch (const nlohmann::json::exception& ex) {
    throw BankError(BankErrorCode::malformed, std::string("manifest is not JSON: ") + ex.what());
  }

  try {
    if (!manifest.contains("schema_version")) {
      throw BankError(BankErrorCode::malformed, "manifest missing schema_version");
    }
    if (manifest["schema_version"].get<int>() != kBankSchemaVersion) {
      throw BankError(BankErrorCode::version_mismatch,
                      "bank schema version " + manifest["schema_version"].dump() +
                          " unsupported (expected " + std::to_string(kBankSchemaVersion) + ")");
    }

    EvidenceBank bank;
    bank.thresholds.tau1 = manifest.at("thresholds").at("tau1").get<double>();
    bank.thresholds.tau2 = manifest.at("thresholds").at("tau2").get<double>();
    bank.thresholds.validate();

    for (const auto& entry : manifest.at("groups")) {
      GroupKey group;
      group.country = entry.at("country").get<std::string>();
      for (const auto& [name, value] : entry.at("attributes").items()) {
        group.attributes[name] = value.get<std::string>();
      }

      std::string content;
      try {
        content = read_file(directory / entry.at("file").get<std::string>());
      } catch (const InputError& ex) {
        throw BankError(BankErrorCode::malformed, ex.what());
      }
      const std::string expected_checksum = entry.at("checksum").get<std::string>();
      if (crc32_hex(content) != expected_checksum) {
        throw BankError(BankErrorCode::checksum_mismatch,
                        "checksum mismatch for " + entry.at("file").get<std::string>());
      }

      GroupEvidence group_evidence;
      bool saw_group_record = false;
      for_each_line(content, [&](std::size_t, std::string_view line) {
        if (trim(line).empty()) return;
        const nlohmann::json record = nlohmann::json::parse(line);
        const std::string kind = record.at("record").get<std::string>();
        if (kind == "group") {
          group_evidence.group_profile = signature_from_json(record.at("group_profile"));
          group_evidence.respondent_count = record.at("respondents").get<std::int64_t>();
          saw_group_record = true;
        } else if (kind == "item") {
          ItemEvidence evidence = item_evidence_from_json(record);
          group_evidence.items[evidence.item.item_id] = std::move(evidence);
        } else {
          throw DomainError("unknown record kind '" + kind + "'");
        }
      });
      if (!saw_group_record) {
        throw BankError(BankErrorCode::malformed,
                        "group file without group record: " + entry.at("file").get<std::string>());
      }
      bank.groups[group] = std::move(group_evidence);
    }
    return bank;
  } catch (const BankError&) {
    throw;
  } catch (const nlohmann::json::exception& ex) {
    throw BankError(BankErrorCode::malformed, std::string("malformed bank: ") + ex.what());
  } catch (const Error& ex) {
    throw BankError(BankErrorCode::malformed, std::string("malformed bank: ") + ex.what());
  }
}

}  // namespace evida
