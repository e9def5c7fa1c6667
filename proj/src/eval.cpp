#include "evida/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "evida/errors.hpp"
#include "evida/prompts.hpp"
#include "evida/rewards.hpp"
#include "evida/util.hpp"

namespace evida {

using ordered_json = nlohmann::ordered_json;

SurveyItem BenchmarkCase::as_item() const {
  SurveyItem item;
  item.item_id = case_id;
  item.question_text = question_text;
  item.instruction = instruction;
  item.options = options;
  return item;
}

BenchmarkLoadResult load_benchmark(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  BenchmarkLoadResult result;

  for_each_line(content, [&](std::size_t line_number, std::string_view line) {
    if (trim(line).empty()) return;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      result.rejected.push_back({line_number, std::string("invalid JSON: ") + ex.what()});
      return;
    }
    try {
      BenchmarkCase benchmark_case;
      benchmark_case.case_id = row.at("case_id").get<std::string>();
      benchmark_case.question_text = row.at("question").get<std::string>();
      if (row.contains("instruction") && row["instruction"].is_string()) {
        benchmark_case.instruction = row["instruction"].get<std::string>();
      }
      for (const auto& option : row.at("options")) {
        benchmark_case.options.push_back(
            {option.at("id").get<std::string>(), option.at("text").get<std::string>()});
      }
      benchmark_case.country = row.at("country").get<std::string>();
      benchmark_case.as_item().validate();

      AnswerDistribution gold;
      for (const auto& [option, probability] : row.at("gold").items()) {
        if (!benchmark_case.as_item().has_option(option)) {
          throw InputError("gold option '" + option + "' not in option set");
        }
        const double value = probability.get<double>();
        if (value < 0.0) throw InputError("negative gold probability");
        gold[option] = value;
      }
      const double sum = distribution_sum(gold);
      if (std::abs(sum - 1.0) > 1e-6) {
        throw InputError("gold distribution sums to " + std::to_string(sum));
      }
      for (auto& [option, probability] : gold) probability /= sum;
      // Zero-probability options appear explicitly.
      for (const SurveyOption& option : benchmark_case.options) {
        gold.try_emplace(option.id, 0.0);
      }
      benchmark_case.gold = std::move(gold);
      result.cases.push_back(std::move(benchmark_case));
    } catch (const nlohmann::json::exception& ex) {
      result.rejected.push_back({line_number, std::string("schema violation: ") + ex.what()});
    } catch (const Error& ex) {
      result.rejected.push_back({line_number, ex.what()});
    }
  });
  return result;
}

MethodResult evaluate(const std::string& method, const Predictor& predictor,
                      const std::vector<BenchmarkCase>& cases, int max_in_flight) {
  if (cases.empty()) {
    throw DomainError("cannot evaluate an empty case list");
  }

  MethodResult result;
  result.method = method;
  result.per_case.resize(cases.size());

  auto score_case = [&](std::size_t index) {
    const BenchmarkCase& benchmark_case = cases[index];
    CaseScore score;
    score.case_id = benchmark_case.case_id;
    score.country = benchmark_case.country;
    std::optional<AnswerDistribution> prediction;
    try {
      prediction = predictor(benchmark_case);
    } catch (const Error&) {
      prediction.reset();
    }
    if (prediction) {
      try {
        score.jsd = jsd(*prediction, benchmark_case.gold);
        score.valid = true;
      } catch (const Error&) {
        score.jsd = 1.0;  // unusable prediction counts as maximal divergence
        score.valid = false;
      }
    }
    result.per_case[index] = std::move(score);
  };

  const std::size_t window = static_cast<std::size_t>(std::max(1, max_in_flight));
  if (window <= 1) {
    for (std::size_t i = 0; i < cases.size(); ++i) score_case(i);
  } else {
    std::size_t next = 0;
    while (next < cases.size()) {
      const std::size_t batch = std::min(window, cases.size() - next);
      std::vector<std::thread> workers;
      workers.reserve(batch);
      for (std::size_t i = 0; i < batch; ++i) workers.emplace_back(score_case, next + i);
      for (std::thread& worker : workers) worker.join();
      next += batch;
    }
  }

  // Single-owner aggregation over the filled slots.
  std::map<std::string, double> country_sum;
  double total = 0.0;
  std::size_t valid_count = 0;
  for (const CaseScore& score : result.per_case) {
    total += score.jsd;
    if (score.valid) ++valid_count;
    country_sum[score.country] += score.jsd;
    result.per_country_count[score.country] += 1;
  }
  result.mean_jsd = total / static_cast<double>(cases.size());
  result.validity_rate = static_cast<double>(valid_count) / static_cast<double>(cases.size());
  for (const auto& [country, sum] : country_sum) {
    result.per_country_mean[country] = sum / result.per_country_count[country];
  }
  return result;
}

LMHAccuracyResult lmh_accuracy(
    const std::vector<BenchmarkCase>& cases,
    const std::map<std::string, std::map<std::string, LMHSignature>>& predicted_signatures,
    const EvidenceBank& bank) {
  LMHAccuracyResult result;
  std::map<std::string, double> country_sum;
  double total = 0.0;
  std::size_t scored = 0;

  for (const BenchmarkCase& benchmark_case : cases) {
    const ItemEvidence* evidence = bank.find_item(benchmark_case.group(), benchmark_case.case_id);
    const auto prediction = predicted_signatures.find(benchmark_case.case_id);
    if (evidence == nullptr || prediction == predicted_signatures.end()) {
      result.skipped.push_back(benchmark_case.case_id);
      continue;
    }

    std::size_t matches = 0;
    std::size_t compared_options = 0;
    for (const auto& [option, option_evidence] : evidence->option_evidence) {
      if (!option_evidence.signature) continue;  // zero support, no gold
      auto predicted = prediction->second.find(option);
      if (predicted == prediction->second.end()) continue;
      ++compared_options;
      for (std::size_t dim = 0; dim < kSubIndexCount; ++dim) {
        if (predicted->second.labels[dim] == option_evidence.signature->labels[dim]) {
          ++matches;
        }
      }
    }
    if (compared_options == 0) {
      result.skipped.push_back(benchmark_case.case_id);
      continue;
    }
    const double accuracy = static_cast<double>(matches) /
                            (static_cast<double>(compared_options) * kSubIndexCount);
    total += accuracy;
    country_sum[benchmark_case.country] += accuracy;
    result.per_country_cases[benchmark_case.country] += 1;
    ++scored;
  }

  if (scored > 0) {
    result.overall = total / static_cast<double>(scored);
  }
  for (const auto& [country, sum] : country_sum) {
    result.per_country[country] = sum / result.per_country_cases[country];
  }
  return result;
}

// --- Baselines ---------------------------------------------------------

std::optional<AnswerDistribution> baseline_verbalized(LLMClient& llm, const BenchmarkCase& c,
                                                      const DecodingParams& decoding,
                                                      double tolerance, int retries) {
  const SurveyItem item = c.as_item();
  const std::string prompt = render_verbalized_prompt(item, c.group());
  for (int attempt = 0; attempt <= retries; ++attempt) {
    const Completion completion = llm.complete(prompt, decoding);
    auto parsed = parse_stage_b(completion.text);
    if (std::holds_alternative<ParseFailure>(parsed)) continue;
    const StageBOutput& output = std::get<StageBOutput>(parsed);
    if (!validate_stage_b(output, item, tolerance).valid) continue;
    return normalize_distribution(canonicalize_distribution(output, item));
  }
  return std::nullopt;
}

std::optional<AnswerDistribution> baseline_logprob(LLMClient& llm, const BenchmarkCase& c,
                                                   const DecodingParams& decoding) {
  if (!llm.supports_logprobs()) {
    throw DomainError("log-probability baseline unavailable: backend lacks logprobs");
  }
  if (c.options.size() > 26) {
    throw DomainError("log-probability baseline supports at most 26 options");
  }
  const std::string prompt = render_letter_choice_prompt(c.as_item(), c.group());
  const Completion completion = llm.complete(prompt, decoding, /*want_logprobs=*/true);
  if (!completion.first_token_logprobs) {
    return std::nullopt;
  }

  // Mass per positional letter; token variants that trim to the letter are
  // pooled. Missing letters stay at zero before renormalization.
  std::vector<double> mass(c.options.size(), 0.0);
  for (const auto& [token, logprob] : *completion.first_token_logprobs) {
    const std::string cleaned = trim(token);
    if (cleaned.size() != 1) continue;
    const char letter = cleaned[0];
    if (letter < 'A' || letter >= static_cast<char>('A' + c.options.size())) continue;
    mass[static_cast<std::size_t>(letter - 'A')] += std::exp(logprob);
  }
  double total = 0.0;
  for (double value : mass) total += value;
  if (total <= 0.0) {
    return std::nullopt;
  }
  AnswerDistribution distribution;
  for (std::size_t i = 0; i < c.options.size(); ++i) {
    distribution[c.options[i].id] = mass[i] / total;
  }
  return distribution;
}

SamplingOutcome baseline_sampling(LLMClient& llm, const BenchmarkCase& c, int n,
                                  const DecodingParams& decoding) {
  if (n < 1) {
    throw DomainError("opinion sampling needs n >= 1");
  }
  const SurveyItem item = c.as_item();
  const std::string prompt = render_single_choice_prompt(item, c.group());

  SamplingOutcome outcome;
  std::map<std::string, std::int64_t> counts;
  for (int i = 0; i < n; ++i) {
    const Completion completion = llm.complete(prompt, decoding);
    ++outcome.sampled;
    const std::string answer = trim(completion.text);

    std::optional<std::string> option_id;
    // Exact option id first, then a positional letter.
    for (const SurveyOption& option : item.options) {
      if (answer == option.id) {
        option_id = option.id;
        break;
      }
    }
    if (!option_id && answer.size() == 1) {
      const char letter = answer[0];
      if (letter >= 'A' && letter < static_cast<char>('A' + item.options.size())) {
        option_id = item.options[static_cast<std::size_t>(letter - 'A')].id;
      }
    }
    if (option_id) {
      counts[*option_id] += 1;
    } else {
      ++outcome.dropped;
    }
  }

  const std::int64_t kept = outcome.sampled - outcome.dropped;
  if (kept <= 0) {
    return outcome;  // all samples unparseable, no distribution
  }
  AnswerDistribution distribution;
  for (const SurveyOption& option : item.options) {
    const auto it = counts.find(option.id);
    distribution[option.id] =
        it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(kept);
  }
  outcome.distribution = std::move(distribution);
  return outcome;
}

AnswerDistribution uniform_prediction(const BenchmarkCase& c) {
  AnswerDistribution distribution;
  const double probability = 1.0 / static_cast<double>(c.options.size());
  for (const SurveyOption& option : c.options) {
    distribution[option.id] = probability;
  }
  return distribution;
}

// --- Reports -----------------------------------------------------------

namespace {

std::string format_float(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

}  // namespace

std::string render_markdown_report(const std::vector<MethodResult>& results) {
  std::set<std::string> countries;
  for (const MethodResult& result : results) {
    for (const auto& [country, mean] : result.per_country_mean) countries.insert(country);
  }

  std::ostringstream out;
  out << "# Distribution prediction (Jensen-Shannon divergence, lower is better)\n\n";
  out << "| Method |";
  for (const std::string& country : countries) out << " " << country << " |";
  out << " Overall | Validity |\n";
  out << "|---|";
  for (std::size_t i = 0; i < countries.size(); ++i) out << "---|";
  out << "---|---|\n";
  for (const MethodResult& result : results) {
    out << "| " << result.method << " |";
    for (const std::string& country : countries) {
      auto it = result.per_country_mean.find(country);
      out << " " << (it == result.per_country_mean.end() ? "-" : format_float(it->second))
          << " |";
    }
    out << " " << format_float(result.mean_jsd) << " | " << format_float(result.validity_rate)
        << " |\n";
  }
  return out.str();
}

void write_reports(const std::vector<MethodResult>& results,
                   const std::vector<BenchmarkCase>& cases,
                   const std::filesystem::path& output_directory) {
  std::filesystem::create_directories(output_directory);

  ordered_json summary;
  summary["cases"] = cases.size();
  ordered_json methods = ordered_json::array();
  for (const MethodResult& result : results) {
    ordered_json entry;
    entry["method"] = result.method;
    entry["mean_jsd"] = result.mean_jsd;
    entry["validity_rate"] = result.validity_rate;
    ordered_json per_country = ordered_json::object();
    for (const auto& [country, mean] : result.per_country_mean) {
      per_country[country] = {{"mean_jsd", mean},
                              {"cases", result.per_country_count.at(country)}};
    }
    entry["per_country"] = per_country;
    methods.push_back(entry);
  }
  summary["methods"] = methods;
  write_file(output_directory / "summary.json", summary.dump(2) + "\n");

  std::string table = "method\tcase_id\tcountry\tjsd\tvalid\n";
  for (const MethodResult& result : results) {
    for (const CaseScore& score : result.per_case) {
      table += result.method + "\t" + score.case_id + "\t" + score.country + "\t" +
               format_float(score.jsd) + "\t" + (score.valid ? "1" : "0") + "\n";
    }
  }
  write_file(output_directory / "per_case.tsv", table);

  write_file(output_directory / "report.md", render_markdown_report(results));
}

}  // namespace evida
