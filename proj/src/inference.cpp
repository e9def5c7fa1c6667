#include "evida/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "evida/errors.hpp"
#include "evida/json_extract.hpp"

namespace evida {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ParseFailureKind kind) {
  switch (kind) {
    case ParseFailureKind::no_json: return "no_json";
    case ParseFailureKind::malformed_json: return "malformed_json";
    case ParseFailureKind::wrong_keys: return "wrong_keys";
  }
  return "no_json";
}

ValidationReport ValidationReport::from_checks(std::vector<ValidationCheck> checks) {
  ValidationReport report;
  report.valid = std::all_of(checks.begin(), checks.end(),
                             [](const ValidationCheck& check) { return check.passed; });
  report.checks = std::move(checks);
  return report;
}

ValidationReport ValidationReport::for_parse_failure(const ParseFailure& failure) {
  ValidationReport report;
  report.valid = false;
  report.checks.push_back(
      {"parse", false, std::string(to_string(failure.kind)) + ": " + failure.detail});
  return report;
}

// --- Parsing -----------------------------------------------------------

namespace {

std::variant<nlohmann::json, ParseFailure> extract_payload(const std::string& text) {
  if (text.find('{') == std::string::npos) {
    return ParseFailure{ParseFailureKind::no_json, "no JSON object in completion"};
  }
  const auto raw = extract_first_json_object(text);
  if (!raw) {
    return ParseFailure{ParseFailureKind::malformed_json,
                        "braces present but no parseable JSON object"};
  }
  return nlohmann::json::parse(*raw);
}

}  // namespace

std::variant<StageAOutput, ParseFailure> parse_stage_a(const std::string& text) {
  auto payload = extract_payload(text);
  if (std::holds_alternative<ParseFailure>(payload)) {
    return std::get<ParseFailure>(payload);
  }
  const nlohmann::json& body = std::get<nlohmann::json>(payload);

  if (!body.contains("option_profiles") || !body["option_profiles"].is_array()) {
    return ParseFailure{ParseFailureKind::wrong_keys,
                        "missing required top-level key 'option_profiles'"};
  }
  StageAOutput output;
  if (body.contains("subindex_order") && body["subindex_order"].is_array()) {
    for (const auto& name : body["subindex_order"]) {
      if (!name.is_string()) {
        return ParseFailure{ParseFailureKind::wrong_keys, "subindex_order entries must be strings"};
      }
      output.subindex_order.push_back(name.get<std::string>());
    }
  }
  for (const auto& profile : body["option_profiles"]) {
    if (!profile.is_object() || !profile.contains("option") || !profile["option"].is_string() ||
        !profile.contains("subindex_LMH") || !profile["subindex_LMH"].is_array()) {
      return ParseFailure{ParseFailureKind::wrong_keys,
                          "option_profiles entries need 'option' and 'subindex_LMH' list"};
    }
    StageAOptionProfile parsed;
    parsed.option = profile["option"].get<std::string>();
    for (const auto& label : profile["subindex_LMH"]) {
      if (!label.is_string()) {
        return ParseFailure{ParseFailureKind::wrong_keys, "subindex_LMH entries must be strings"};
      }
      parsed.labels.push_back(label.get<std::string>());
    }
    output.option_profiles.push_back(std::move(parsed));
  }
  if (body.contains("notes") && body["notes"].is_string()) {
    output.notes = body["notes"].get<std::string>();
  }
  return output;
}

std::variant<StageBOutput, ParseFailure> parse_stage_b(const std::string& text) {
  auto payload = extract_payload(text);
  if (std::holds_alternative<ParseFailure>(payload)) {
    return std::get<ParseFailure>(payload);
  }
  const nlohmann::json& body = std::get<nlohmann::json>(payload);

  if (!body.contains("predicted_distribution") || !body["predicted_distribution"].is_object()) {
    return ParseFailure{ParseFailureKind::wrong_keys,
                        "missing required top-level key 'predicted_distribution'"};
  }
  StageBOutput output;
  for (const auto& [key, value] : body["predicted_distribution"].items()) {
    if (!value.is_number()) {
      return ParseFailure{ParseFailureKind::wrong_keys,
                          "non-numeric probability for key '" + key + "'"};
    }
    output.predicted_distribution[key] = value.get<double>();
  }
  if (body.contains("rationale") && body["rationale"].is_string()) {
    output.rationale = body["rationale"].get<std::string>();
  }
  return output;
}

// --- Validation --------------------------------------------------------

namespace {

// Option id or full option text, canonicalized to the id. A key matching
// more than one option is ambiguous and rejected.
std::optional<std::string> canonical_option(const SurveyItem& question, const std::string& key,
                                            std::string& error) {
  std::set<std::string> candidates;
  for (const SurveyOption& option : question.options) {
    if (key == option.id || key == option.text) candidates.insert(option.id);
  }
  if (candidates.empty()) {
    error = "unknown option '" + key + "'";
    return std::nullopt;
  }
  if (candidates.size() > 1) {
    error = "ambiguous option '" + key + "'";
    return std::nullopt;
  }
  return *candidates.begin();
}

}  // namespace

ValidationReport validate_stage_a(const StageAOutput& output, const SurveyItem& question) {
  std::vector<ValidationCheck> checks;

  {
    bool ok = output.subindex_order.size() == kSubIndexCount;
    for (std::size_t i = 0; ok && i < kSubIndexCount; ++i) {
      ok = output.subindex_order[i] == kSubIndexNames[i];
    }
    checks.push_back({"subindex_order", ok,
                      ok ? "canonical order" : "subindex_order differs from canonical order"});
  }

  {
    std::map<std::string, int> seen;
    std::string error;
    bool ok = true;
    std::string detail;
    for (const StageAOptionProfile& profile : output.option_profiles) {
      const auto id = canonical_option(question, profile.option, error);
      if (!id) {
        ok = false;
        detail = error;
        break;
      }
      if (++seen[*id] > 1) {
        ok = false;
        detail = "duplicate profile for option '" + *id + "'";
        break;
      }
    }
    if (ok && seen.size() != question.options.size()) {
      ok = false;
      detail = "expected one profile per option (" + std::to_string(question.options.size()) +
               "), got " + std::to_string(seen.size());
    }
    checks.push_back({"option_coverage", ok, ok ? "one profile per option" : detail});
  }

  {
    bool ok = true;
    std::string detail = "all signatures have 8 labels";
    for (const StageAOptionProfile& profile : output.option_profiles) {
      if (profile.labels.size() != kSubIndexCount) {
        ok = false;
        detail = "option '" + profile.option + "' has " +
                 std::to_string(profile.labels.size()) + " labels, expected 8";
        break;
      }
    }
    checks.push_back({"signature_length", ok, detail});
  }

  {
    bool ok = true;
    std::string detail = "labels restricted to low/medium/high";
    for (const StageAOptionProfile& profile : output.option_profiles) {
      for (const std::string& label : profile.labels) {
        LMHLabel parsed;
        if (!parse_lmh_label(label, parsed)) {
          ok = false;
          detail = "invalid label '" + label + "' for option '" + profile.option + "'";
          break;
        }
      }
      if (!ok) break;
    }
    checks.push_back({"label_values", ok, detail});
  }

  return ValidationReport::from_checks(std::move(checks));
}

ValidationReport validate_stage_b(const StageBOutput& output, const SurveyItem& question,
                                  double tolerance) {
  std::vector<ValidationCheck> checks;

  {
    std::map<std::string, int> covered;
    std::string error;
    bool ok = true;
    std::string detail;
    for (const auto& [key, value] : output.predicted_distribution) {
      const auto id = canonical_option(question, key, error);
      if (!id) {
        ok = false;
        detail = error;
        break;
      }
      if (++covered[*id] > 1) {
        ok = false;
        detail = "duplicate probability for option '" + *id + "'";
        break;
      }
    }
    if (ok && covered.size() != question.options.size()) {
      ok = false;
      detail = "distribution must cover all " + std::to_string(question.options.size()) +
               " options, got " + std::to_string(covered.size());
    }
    checks.push_back({"option_keys", ok, ok ? "keys cover the option set" : detail});
  }

  {
    bool ok = true;
    std::string detail = "all probabilities >= 0";
    for (const auto& [key, value] : output.predicted_distribution) {
      if (value < 0.0) {
        ok = false;
        detail = "negative probability " + std::to_string(value) + " for '" + key + "'";
        break;
      }
    }
    checks.push_back({"non_negative", ok, detail});
  }

  {
    double sum = 0.0;
    for (const auto& [key, value] : output.predicted_distribution) sum += value;
    const bool ok = std::abs(sum - 1.0) <= tolerance;
    std::ostringstream detail;
    detail << "sum = " << sum << " (tolerance " << tolerance << ")";
    checks.push_back({"normalization", ok, detail.str()});
  }

  return ValidationReport::from_checks(std::move(checks));
}

PredictedSignatures extract_signatures(const StageAOutput& output, const SurveyItem& question) {
  std::map<std::string, std::vector<std::string>> by_option;
  std::string error;
  for (const StageAOptionProfile& profile : output.option_profiles) {
    if (const auto id = canonical_option(question, profile.option, error)) {
      by_option[*id] = profile.labels;
    }
  }
  PredictedSignatures signatures;
  for (const SurveyOption& option : question.options) {
    auto it = by_option.find(option.id);
    if (it != by_option.end()) {
      signatures.emplace_back(option.id, it->second);
    }
  }
  return signatures;
}

AnswerDistribution canonicalize_distribution(const StageBOutput& output,
                                             const SurveyItem& question) {
  AnswerDistribution distribution;
  std::string error;
  for (const auto& [key, value] : output.predicted_distribution) {
    if (const auto id = canonical_option(question, key, error)) {
      distribution[*id] = value;
    }
  }
  return distribution;
}

AnswerDistribution normalize_distribution(const AnswerDistribution& distribution) {
  double sum = 0.0;
  for (const auto& [option, value] : distribution) {
    if (value < 0.0) {
      throw DomainError("cannot normalize: negative mass on '" + option + "'");
    }
    sum += value;
  }
  if (sum <= 0.0) {
    throw DomainError("cannot normalize an all-zero distribution");
  }
  AnswerDistribution normalized;
  for (const auto& [option, value] : distribution) {
    normalized[option] = value / sum;
  }
  return normalized;
}

// --- Two-stage orchestration -------------------------------------------

namespace {

StageAResult run_stage_a(const std::string& prompt, const SurveyItem& question, LLMClient& llm,
                         const TwoStageConfig& config) {
  StageAResult result;
  result.prompt = prompt;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    result.attempts = attempt + 1;
    const Completion completion = llm.complete(prompt, config.decoding);
    result.raw_text = completion.text;
    auto parsed = parse_stage_a(completion.text);
    if (std::holds_alternative<ParseFailure>(parsed)) {
      result.parse_failure = std::get<ParseFailure>(parsed);
      result.output.reset();
      result.report = ValidationReport::for_parse_failure(*result.parse_failure);
      continue;
    }
    result.parse_failure.reset();
    result.output = std::get<StageAOutput>(std::move(parsed));
    result.report = validate_stage_a(*result.output, question);
    if (result.report.valid) break;
  }
  return result;
}

StageBResult run_stage_b(const std::string& prompt, const SurveyItem& question, LLMClient& llm,
                         const TwoStageConfig& config) {
  StageBResult result;
  result.prompt = prompt;
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    result.attempts = attempt + 1;
    const Completion completion = llm.complete(prompt, config.decoding);
    result.raw_text = completion.text;
    auto parsed = parse_stage_b(completion.text);
    if (std::holds_alternative<ParseFailure>(parsed)) {
      result.parse_failure = std::get<ParseFailure>(parsed);
      result.output.reset();
      result.report = ValidationReport::for_parse_failure(*result.parse_failure);
      continue;
    }
    result.parse_failure.reset();
    result.output = std::get<StageBOutput>(std::move(parsed));
    result.report = validate_stage_b(*result.output, question, config.stage_b_tolerance);
    if (result.report.valid) break;
  }
  return result;
}

}  // namespace

PredictionResult run_two_stage_with_evidence(const SurveyItem& question, const GroupKey& group,
                                             const std::optional<LMHSignature>& group_profile,
                                             const RetrievedEvidence& evidence, LLMClient& llm,
                                             const TwoStageConfig& config) {
  question.validate();

  PredictionResult result;
  result.item_id = question.item_id;
  result.question_text = question.question_text;
  result.group = group;
  result.no_evidence = config.no_evidence;
  result.no_welzel = config.no_welzel;
  for (const RetrievedEntry& entry : evidence.entries) {
    result.retrieval_trace.push_back({entry.item_id, entry.score, entry.evidence.support});
  }

  const std::optional<LMHSignature> profile =
      config.no_evidence ? std::nullopt : group_profile;

  PredictedSignatures predicted;
  if (!config.no_welzel) {
    const std::string prompt = render_stage_a_prompt(question, group, profile, evidence);
    result.stage_a = run_stage_a(prompt, question, llm, config);
    if (result.stage_a->report.valid && result.stage_a->output) {
      predicted = extract_signatures(*result.stage_a->output, question);
    }
  }

  const std::string stage_b_prompt =
      config.no_welzel ? render_direct_distribution_prompt(question, group, evidence)
                       : render_stage_b_prompt(question, group, profile, evidence, predicted);
  result.stage_b = run_stage_b(stage_b_prompt, question, llm, config);

  if (result.stage_b.report.valid && result.stage_b.output) {
    result.normalized_distribution =
        normalize_distribution(canonicalize_distribution(*result.stage_b.output, question));
  }
  return result;
}

PredictionResult run_two_stage(const SurveyItem& question, const GroupKey& group,
                               const EvidenceBank& bank, EncoderClient& encoder, LLMClient& llm,
                               const TwoStageConfig& config) {
  const GroupEvidence* group_evidence = bank.find_group(group);
  if (group_evidence == nullptr) {
    throw DomainError("unknown group '" + group.label() + "'");
  }

  RetrievedEvidence evidence;
  if (!config.no_evidence) {
    RetrievalQuery query;
    query.question_text = question.question_text;
    query.instruction = question.instruction;
    query.group = group;
    query.k = config.k;
    query.n_min = config.n_min;
    if (!question.item_id.empty()) query.exclude_item_ids.insert(question.item_id);
    evidence = retrieve(query, bank, encoder, config.encode);
  }
  return run_two_stage_with_evidence(question, group, group_evidence->group_profile, evidence,
                                     llm, config);
}

// --- Serialization -----------------------------------------------------

namespace {

ordered_json report_to_json(const ValidationReport& report) {
  ordered_json out;
  out["valid"] = report.valid;
  ordered_json checks = ordered_json::array();
  for (const ValidationCheck& check : report.checks) {
    checks.push_back({{"name", check.name}, {"passed", check.passed}, {"detail", check.detail}});
  }
  out["checks"] = checks;
  return out;
}

ordered_json parse_failure_to_json(const std::optional<ParseFailure>& failure) {
  if (!failure) return nullptr;
  return ordered_json{{"kind", std::string(to_string(failure->kind))},
                      {"detail", failure->detail}};
}

}  // namespace

ordered_json prediction_to_json(const PredictionResult& result) {
  ordered_json out;
  out["item_id"] = result.item_id;
  out["question_text"] = result.question_text;
  ordered_json group;
  group["country"] = result.group.country;
  ordered_json attributes = ordered_json::object();
  for (const auto& [name, value] : result.group.attributes) attributes[name] = value;
  group["attributes"] = attributes;
  out["group"] = group;
  out["ablation"] = {{"no_evidence", result.no_evidence}, {"no_welzel", result.no_welzel}};

  ordered_json trace = ordered_json::array();
  for (const RetrievalTraceEntry& entry : result.retrieval_trace) {
    trace.push_back(
        {{"item_id", entry.item_id}, {"score", entry.score}, {"support", entry.support}});
  }
  out["retrieval"] = trace;

  if (result.stage_a) {
    ordered_json stage;
    stage["prompt"] = result.stage_a->prompt;
    stage["raw_text"] = result.stage_a->raw_text;
    stage["parse_failure"] = parse_failure_to_json(result.stage_a->parse_failure);
    if (result.stage_a->output) {
      ordered_json output;
      output["subindex_order"] = result.stage_a->output->subindex_order;
      ordered_json profiles = ordered_json::array();
      for (const StageAOptionProfile& profile : result.stage_a->output->option_profiles) {
        profiles.push_back({{"option", profile.option}, {"subindex_LMH", profile.labels}});
      }
      output["option_profiles"] = profiles;
      output["notes"] = result.stage_a->output->notes;
      stage["output"] = output;
    } else {
      stage["output"] = nullptr;
    }
    stage["report"] = report_to_json(result.stage_a->report);
    stage["attempts"] = result.stage_a->attempts;
    out["stage_a"] = stage;
  } else {
    out["stage_a"] = nullptr;
  }

  {
    ordered_json stage;
    stage["prompt"] = result.stage_b.prompt;
    stage["raw_text"] = result.stage_b.raw_text;
    stage["parse_failure"] = parse_failure_to_json(result.stage_b.parse_failure);
    if (result.stage_b.output) {
      ordered_json output;
      ordered_json distribution = ordered_json::object();
      for (const auto& [key, value] : result.stage_b.output->predicted_distribution) {
        distribution[key] = value;
      }
      output["predicted_distribution"] = distribution;
      output["rationale"] = result.stage_b.output->rationale;
      stage["output"] = output;
    } else {
      stage["output"] = nullptr;
    }
    stage["report"] = report_to_json(result.stage_b.report);
    stage["attempts"] = result.stage_b.attempts;
    out["stage_b"] = stage;
  }

  if (result.normalized_distribution) {
    ordered_json distribution = ordered_json::object();
    for (const auto& [option, probability] : *result.normalized_distribution) {
      distribution[option] = probability;
    }
    out["normalized_distribution"] = distribution;
  } else {
    out["normalized_distribution"] = nullptr;
  }
  return out;
}

namespace {

ValidationReport report_from_json(const nlohmann::json& body) {
  ValidationReport report;
  report.valid = body.at("valid").get<bool>();
  for (const auto& check : body.at("checks")) {
    report.checks.push_back({check.at("name").get<std::string>(),
                             check.at("passed").get<bool>(),
                             check.value("detail", std::string())});
  }
  return report;
}

std::optional<ParseFailure> parse_failure_from_json(const nlohmann::json& body) {
  if (body.is_null()) return std::nullopt;
  ParseFailure failure{ParseFailureKind::no_json, body.value("detail", std::string())};
  const std::string kind = body.at("kind").get<std::string>();
  if (kind == "malformed_json") failure.kind = ParseFailureKind::malformed_json;
  if (kind == "wrong_keys") failure.kind = ParseFailureKind::wrong_keys;
  return failure;
}

}  // namespace

PredictionResult prediction_from_json(const nlohmann::json& body) {
  try {
    PredictionResult result;
    result.item_id = body.at("item_id").get<std::string>();
    result.question_text = body.at("question_text").get<std::string>();
    result.group.country = body.at("group").at("country").get<std::string>();
    for (const auto& [name, value] : body.at("group").at("attributes").items()) {
      result.group.attributes[name] = value.get<std::string>();
    }
    result.no_evidence = body.at("ablation").at("no_evidence").get<bool>();
    result.no_welzel = body.at("ablation").at("no_welzel").get<bool>();
    for (const auto& entry : body.at("retrieval")) {
      result.retrieval_trace.push_back({entry.at("item_id").get<std::string>(),
                                        entry.at("score").get<double>(),
                                        entry.at("support").get<std::int64_t>()});
    }

    if (!body.at("stage_a").is_null()) {
      const auto& stage = body["stage_a"];
      StageAResult stage_a;
      stage_a.prompt = stage.at("prompt").get<std::string>();
      stage_a.raw_text = stage.at("raw_text").get<std::string>();
      stage_a.parse_failure = parse_failure_from_json(stage.at("parse_failure"));
      if (!stage.at("output").is_null()) {
        StageAOutput output;
        for (const auto& name : stage["output"].at("subindex_order")) {
          output.subindex_order.push_back(name.get<std::string>());
        }
        for (const auto& profile : stage["output"].at("option_profiles")) {
          StageAOptionProfile parsed;
          parsed.option = profile.at("option").get<std::string>();
          for (const auto& label : profile.at("subindex_LMH")) {
            parsed.labels.push_back(label.get<std::string>());
          }
          output.option_profiles.push_back(std::move(parsed));
        }
        output.notes = stage["output"].value("notes", std::string());
        stage_a.output = std::move(output);
      }
      stage_a.report = report_from_json(stage.at("report"));
      stage_a.attempts = stage.at("attempts").get<int>();
      result.stage_a = std::move(stage_a);
    }

    {
      const auto& stage = body.at("stage_b");
      result.stage_b.prompt = stage.at("prompt").get<std::string>();
      result.stage_b.raw_text = stage.at("raw_text").get<std::string>();
      result.stage_b.parse_failure = parse_failure_from_json(stage.at("parse_failure"));
      if (!stage.at("output").is_null()) {
        StageBOutput output;
        for (const auto& [key, value] : stage["output"].at("predicted_distribution").items()) {
          output.predicted_distribution[key] = value.get<double>();
        }
        output.rationale = stage["output"].value("rationale", std::string());
        result.stage_b.output = std::move(output);
      }
      result.stage_b.report = report_from_json(stage.at("report"));
      result.stage_b.attempts = stage.at("attempts").get<int>();
    }

    if (!body.at("normalized_distribution").is_null()) {
      AnswerDistribution distribution;
      for (const auto& [option, probability] : body["normalized_distribution"].items()) {
        distribution[option] = probability.get<double>();
      }
      result.normalized_distribution = std::move(distribution);
    }
    return result;
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("malformed prediction record: ") + ex.what());
  }
}

}  // namespace evida
