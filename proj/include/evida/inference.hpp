#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "evida/evidence_bank.hpp"
#include "evida/llm.hpp"
#include "evida/prompts.hpp"
#include "evida/retrieval.hpp"

namespace evida {

enum class ParseFailureKind { no_json, malformed_json, wrong_keys };

std::string_view to_string(ParseFailureKind kind);

struct ParseFailure {
  ParseFailureKind kind;
  std::string detail;
};

// Parsed Stage A body. Labels stay raw strings here: decoding is lenient on
// content (a 7-label signature decodes fine) and validation is where
// length/vocabulary rules live.
struct StageAOptionProfile {
  std::string option;
  std::vector<std::string> labels;
};

struct StageAOutput {
  std::vector<std::string> subindex_order;
  std::vector<StageAOptionProfile> option_profiles;
  std::string notes;
};

struct StageBOutput {
  std::map<std::string, double> predicted_distribution;  // keys as emitted
  std::string rationale;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool valid = false;  // conjunction of all checks

  static ValidationReport from_checks(std::vector<ValidationCheck> checks);
  // A parse failure counts as an all-failed report (schema reward 0).
  static ValidationReport for_parse_failure(const ParseFailure& failure);
};

// Extracts the first balanced JSON object (fences and prose stripped) and
// decodes it against the stage schema. Wrong top-level shape is a distinct
// failure from malformed or absent JSON.
std::variant<StageAOutput, ParseFailure> parse_stage_a(const std::string& text);
std::variant<StageBOutput, ParseFailure> parse_stage_b(const std::string& text);

// Stage A checks: canonical subindex_order, exactly one profile per question
// option, eight labels each, labels restricted to the lowercase LMH set.
ValidationReport validate_stage_a(const StageAOutput& output, const SurveyItem& question);

// Stage B checks: keys cover exactly the option set (option id or full text,
// canonicalized; ambiguity fails), non-negative values, |sum-1| <= tol.
ValidationReport validate_stage_b(const StageBOutput& output, const SurveyItem& question,
                                  double tolerance);

// Signatures per option id, in question option order. Only meaningful after
// validate_stage_a passes.
PredictedSignatures extract_signatures(const StageAOutput& output, const SurveyItem& question);

// Stage B keys mapped to option ids. Only meaningful after the key-set check
// passes.
AnswerDistribution canonicalize_distribution(const StageBOutput& output,
                                             const SurveyItem& question);

// Scales a nonnegative distribution to sum 1. DomainError when the total
// mass is zero.
AnswerDistribution normalize_distribution(const AnswerDistribution& distribution);

struct StageAResult {
  std::string prompt;
  std::string raw_text;
  std::optional<ParseFailure> parse_failure;
  std::optional<StageAOutput> output;
  ValidationReport report;
  int attempts = 0;
};

struct StageBResult {
  std::string prompt;
  std::string raw_text;
  std::optional<ParseFailure> parse_failure;
  std::optional<StageBOutput> output;
  ValidationReport report;
  int attempts = 0;
};

struct RetrievalTraceEntry {
  std::string item_id;
  double score = 0.0;
  std::int64_t support = 0;
};

struct PredictionResult {
  std::string item_id;
  std::string question_text;
  GroupKey group;
  bool no_evidence = false;
  bool no_welzel = false;
  std::vector<RetrievalTraceEntry> retrieval_trace;
  std::optional<StageAResult> stage_a;  // absent in no-welzel runs
  StageBResult stage_b;
  // Present iff Stage B validated; sums to 1 within 1e-9.
  std::optional<AnswerDistribution> normalized_distribution;
};

struct TwoStageConfig {
  int k = 10;
  std::int64_t n_min = 30;
  double stage_b_tolerance = 0.01;
  int retries = 2;  // extra attempts per stage on invalid output
  DecodingParams decoding;
  EncodeOptions encode;
  bool no_evidence = false;
  bool no_welzel = false;
};

// Full pipeline against precomputed evidence (the episode path).
PredictionResult run_two_stage_with_evidence(const SurveyItem& question, const GroupKey& group,
                                             const std::optional<LMHSignature>& group_profile,
                                             const RetrievedEvidence& evidence, LLMClient& llm,
                                             const TwoStageConfig& config);

// Retrieve, then run both stages. The question's own item id is excluded
// from retrieval so bank items never see themselves as evidence. Throws
// DomainError when the group is unknown.
PredictionResult run_two_stage(const SurveyItem& question, const GroupKey& group,
                               const EvidenceBank& bank, EncoderClient& encoder, LLMClient& llm,
                               const TwoStageConfig& config);

nlohmann::ordered_json prediction_to_json(const PredictionResult& result);

// Inverse of prediction_to_json. InputError on structural problems.
PredictionResult prediction_from_json(const nlohmann::json& body);

}  // namespace evida
