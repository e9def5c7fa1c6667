#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evida/evidence_bank.hpp"
#include "evida/inference.hpp"
#include "evida/llm.hpp"

namespace evida {

struct BenchmarkCase {
  std::string case_id;
  std::string question_text;
  std::optional<std::string> instruction;
  std::vector<SurveyOption> options;
  std::string country;
  AnswerDistribution gold;  // renormalized at load

  SurveyItem as_item() const;
  GroupKey group() const { return GroupKey{country, {}}; }
};

struct BenchmarkLoadResult {
  std::vector<BenchmarkCase> cases;
  std::vector<RejectedRow> rejected;
};

// JSON lines: {"case_id","question","options":[{"id","text"}],"country","gold":{id:prob}}.
// Gold distributions are renormalized when |sum-1| <= 1e-6 and rejected
// otherwise; schema violations land in the per-line rejection report.
BenchmarkLoadResult load_benchmark(const std::filesystem::path& path);

// A method under evaluation: per case, a normalized distribution or nothing.
using Predictor = std::function<std::optional<AnswerDistribution>(const BenchmarkCase&)>;

struct CaseScore {
  std::string case_id;
  std::string country;
  double jsd = 1.0;   // invalid cases are scored as 1.0
  bool valid = false;
};

struct MethodResult {
  std::string method;
  std::vector<CaseScore> per_case;
  double mean_jsd = 1.0;       // macro mean over cases
  double validity_rate = 0.0;
  std::map<std::string, double> per_country_mean;
  std::map<std::string, int> per_country_count;
};

// Scores every case with the shared jsd implementation. Absent or failing
// predictions count as JSD 1.0 with valid=false; the validity rate reports
// them separately. Cases run under a bounded in-flight window when
// max_in_flight > 1 (the predictor must then be thread-safe); aggregation is
// single-owner. DomainError on an empty case list.
MethodResult evaluate(const std::string& method, const Predictor& predictor,
                      const std::vector<BenchmarkCase>& cases, int max_in_flight = 1);

struct LMHAccuracyResult {
  double overall = 0.0;  // macro over scored cases
  std::map<std::string, double> per_country;
  std::map<std::string, int> per_country_cases;
  std::vector<std::string> skipped;  // case ids without gold coverage
};

// Per-dimension exact-match accuracy of predicted signatures against the
// bank's gold signatures (cases matched to bank items by case_id within the
// case's country group), averaged over options and dimensions per case,
// then macro-averaged per country.
LMHAccuracyResult lmh_accuracy(
    const std::vector<BenchmarkCase>& cases,
    const std::map<std::string, std::map<std::string, LMHSignature>>& predicted_signatures,
    const EvidenceBank& bank);

// --- Baselines ---------------------------------------------------------

// Direct JSON distribution prompt; validated with the Stage B checks.
std::optional<AnswerDistribution> baseline_verbalized(LLMClient& llm, const BenchmarkCase& c,
                                                      const DecodingParams& decoding,
                                                      double tolerance, int retries);

// First-token log-probabilities over positional option letters A, B, ...;
// missing letters carry zero mass before renormalization. DomainError when
// the backend lacks logprob support or the case has more than 26 options.
std::optional<AnswerDistribution> baseline_logprob(LLMClient& llm, const BenchmarkCase& c,
                                                   const DecodingParams& decoding);

struct SamplingOutcome {
  std::optional<AnswerDistribution> distribution;
  int sampled = 0;
  int dropped = 0;  // unparseable samples
};

// Empirical distribution of n single-choice answers.
SamplingOutcome baseline_sampling(LLMClient& llm, const BenchmarkCase& c, int n,
                                  const DecodingParams& decoding);

// Uniform mass over the case's options; the reference point for smoke tests.
AnswerDistribution uniform_prediction(const BenchmarkCase& c);

// --- Reports -----------------------------------------------------------

// summary.json, per_case.tsv, and report.md (methods x countries matrix plus
// an overall column, the per-country table layout).
void write_reports(const std::vector<MethodResult>& results,
                   const std::vector<BenchmarkCase>& cases,
                   const std::filesystem::path& output_directory);

std::string render_markdown_report(const std::vector<MethodResult>& results);

}  // namespace evida
