// evida: country-conditioned answer-distribution prediction over a survey
// evidence bank. Subcommands cover bank construction, retrieval, two-stage
// prediction, evaluation, episode export, and reward scoring.

#include <cstdint>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evida/config.hpp"
#include "evida/errors.hpp"
#include "evida/eval.hpp"
#include "evida/evidence_bank.hpp"
#include "evida/inference.hpp"
#include "evida/llm.hpp"
#include "evida/prompts.hpp"
#include "evida/retrieval.hpp"
#include "evida/rewards.hpp"
#include "evida/util.hpp"

namespace {

using evida::AnswerDistribution;
using evida::BenchmarkCase;
using evida::EvidenceBank;
using evida::GroupKey;
using evida::PipelineConfig;
using evida::SurveyItem;
using ordered_json = nlohmann::ordered_json;

struct Backends {
  std::shared_ptr<evida::EncoderClient> encoder;
  std::shared_ptr<evida::LLMClient> llm;
};

Backends make_backends(const PipelineConfig& config, bool need_llm, bool need_encoder) {
  Backends backends;
  if (config.mock) {
    backends.encoder = std::make_shared<evida::HashingEncoder>(config.seed);
    if (!config.mock_fixture.empty()) {
      backends.llm = std::make_shared<evida::ScriptedLLMClient>(config.mock_fixture);
    } else {
      backends.llm = std::make_shared<evida::SyntheticLLMClient>(config.seed);
    }
    return backends;
  }
  if (need_encoder) {
    evida::HttpEncoderConfig encoder_config;
    encoder_config.base_url = config.encoder_base_url;
    encoder_config.model = config.encoder_model;
    encoder_config.timeout_seconds = config.encoder_timeout_s;
    auto http_encoder = std::make_shared<evida::HttpEncoderClient>(encoder_config);
    if (!config.cache_dir.empty()) {
      backends.encoder = std::make_shared<evida::CachingEncoder>(http_encoder, config.cache_dir);
    } else {
      backends.encoder = http_encoder;
    }
  }
  if (need_llm) {
    evida::HttpChatConfig llm_config;
    llm_config.base_url = config.llm_base_url;
    llm_config.model = config.llm_model;
    llm_config.timeout_seconds = config.llm_timeout_s;
    backends.llm = std::make_shared<evida::HttpChatClient>(llm_config);
  }
  return backends;
}

evida::TwoStageConfig two_stage_config(const PipelineConfig& config) {
  evida::TwoStageConfig out;
  out.k = config.k;
  out.n_min = config.n_min;
  out.stage_b_tolerance = config.stage_b_tolerance;
  out.retries = config.retries;
  out.decoding = config.decoding;
  out.encode.batch_size = config.batch_size;
  out.encode.max_in_flight = config.max_in_flight;
  out.no_evidence = config.no_evidence;
  out.no_welzel = config.no_welzel;
  return out;
}

GroupKey parse_group(const std::string& country, const std::vector<std::string>& attributes) {
  GroupKey group;
  group.country = country;
  for (const std::string& attribute : attributes) {
    const std::size_t eq = attribute.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw evida::InputError("attribute must be name=value, got '" + attribute + "'");
    }
    group.attributes[attribute.substr(0, eq)] = attribute.substr(eq + 1);
  }
  return group;
}

SurveyItem question_from_flags(const std::string& question_file, const std::string& question,
                               const std::string& instruction,
                               const std::vector<std::string>& options) {
  if (!question_file.empty()) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(evida::read_file(question_file));
    } catch (const nlohmann::json::exception& ex) {
      throw evida::InputError("malformed question file: " + std::string(ex.what()));
    }
    SurveyItem item;
    item.item_id = body.value("item_id", std::string("adhoc"));
    item.question_text = body.at("question_text").get<std::string>();
    if (body.contains("instruction") && body["instruction"].is_string()) {
      item.instruction = body["instruction"].get<std::string>();
    }
    for (const auto& option : body.at("options")) {
      item.options.push_back(
          {option.at("id").get<std::string>(), option.at("text").get<std::string>()});
    }
    item.validate();
    return item;
  }

  if (question.empty()) {
    throw evida::InputError("provide --question-file or --question with --option entries");
  }
  SurveyItem item;
  item.item_id = "adhoc";
  item.question_text = question;
  if (!instruction.empty()) item.instruction = instruction;
  for (const std::string& option : options) {
    const std::size_t eq = option.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw evida::InputError("option must be id=text, got '" + option + "'");
    }
    item.options.push_back({option.substr(0, eq), option.substr(eq + 1)});
  }
  item.validate();
  return item;
}

void print_ingest_summary(const evida::IngestResult& ingest) {
  std::map<std::string, std::size_t> per_group;
  for (const auto& record : ingest.records) {
    per_group[record.group.label()] += 1;
  }
  std::cerr << "ingested " << ingest.records.size() << " respondents across "
            << per_group.size() << " groups, rejected " << ingest.rejected.size() << " rows\n";
  for (const auto& [label, count] : per_group) {
    std::cerr << "  " << label << ": " << count << " respondents\n";
  }
  for (const auto& rejected : ingest.rejected) {
    std::cerr << "  rejected line " << rejected.line_number << ": " << rejected.reason << "\n";
  }
}

// --- Subcommand bodies --------------------------------------------------

int run_build_bank(const PipelineConfig& config, const std::string& microdata_path,
                   const std::string& items_path, const std::string& out_dir,
                   const std::string& delimiter, const std::vector<std::string>& attrs) {
  evida::IngestOptions options;
  if (!delimiter.empty()) options.delimiter = delimiter[0];
  options.attribute_columns = attrs;

  const evida::IngestResult ingest = evida::ingest_respondents_file(microdata_path, options);
  const std::vector<SurveyItem> items = evida::load_items_file(items_path);
  const EvidenceBank bank = evida::build_bank(ingest.records, items, config.thresholds());
  if (bank.groups.empty()) {
    std::cerr << "warning: no respondents ingested, writing an empty bank\n";
  }
  evida::save_bank(bank, out_dir);
  print_ingest_summary(ingest);

  std::size_t pairs = 0;
  for (const auto& [group, evidence] : bank.groups) pairs += evidence.items.size();
  std::cerr << "bank written to " << out_dir << ": " << bank.groups.size() << " groups, "
            << pairs << " (group, item) evidence entries\n";
  return 0;
}

int run_inspect_bank(const std::string& bank_dir) {
  const EvidenceBank bank = evida::load_bank(bank_dir);
  ordered_json out;
  out["thresholds"] = {{"tau1", bank.thresholds.tau1}, {"tau2", bank.thresholds.tau2}};
  ordered_json groups = ordered_json::array();
  for (const auto& [group, evidence] : bank.groups) {
    ordered_json entry;
    entry["country"] = group.country;
    ordered_json attributes = ordered_json::object();
    for (const auto& [name, value] : group.attributes) attributes[name] = value;
    entry["attributes"] = attributes;
    entry["respondents"] = evidence.respondent_count;
    entry["items"] = evidence.items.size();
    std::int64_t min_support = 0;
    std::int64_t max_support = 0;
    bool first = true;
    for (const auto& [item_id, item_evidence] : evidence.items) {
      if (first || item_evidence.support < min_support) min_support = item_evidence.support;
      if (first || item_evidence.support > max_support) max_support = item_evidence.support;
      first = false;
    }
    entry["support_min"] = min_support;
    entry["support_max"] = max_support;
    groups.push_back(entry);
  }
  out["groups"] = groups;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_retrieve(const PipelineConfig& config, const std::string& bank_dir,
                 const std::string& question, const std::string& instruction,
                 const std::string& country, const std::vector<std::string>& attrs,
                 const std::vector<std::string>& exclude) {
  const EvidenceBank bank = evida::load_bank(bank_dir);
  Backends backends = make_backends(config, /*need_llm=*/false, /*need_encoder=*/true);

  evida::RetrievalQuery query;
  query.question_text = question;
  if (!instruction.empty()) query.instruction = instruction;
  query.group = parse_group(country, attrs);
  query.k = config.k;
  query.n_min = config.n_min;
  query.exclude_item_ids.insert(exclude.begin(), exclude.end());

  evida::EncodeOptions encode;
  encode.batch_size = config.batch_size;
  encode.max_in_flight = config.max_in_flight;
  const evida::RetrievedEvidence evidence = evida::retrieve(query, bank, *backends.encoder, encode);

  ordered_json out = ordered_json::array();
  for (const evida::RetrievedEntry& entry : evidence.entries) {
    out.push_back({{"item_id", entry.item_id},
                   {"score", entry.score},
                   {"support", entry.evidence.support},
                   {"question_text", entry.evidence.item.question_text}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_predict(const PipelineConfig& config, const std::string& bank_dir,
                const SurveyItem& question, const GroupKey& group, const std::string& out_path) {
  const EvidenceBank bank = evida::load_bank(bank_dir);
  Backends backends = make_backends(config, /*need_llm=*/true, /*need_encoder=*/true);

  const evida::PredictionResult result = evida::run_two_stage(
      question, group, bank, *backends.encoder, *backends.llm, two_stage_config(config));
  const std::string payload = evida::prediction_to_json(result).dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << payload;
  } else {
    evida::write_file(out_path, payload);
    std::cerr << "prediction written to " << out_path << "\n";
  }
  return 0;
}

int run_evaluate(const PipelineConfig& config, const std::string& bank_dir,
                 const std::string& benchmark_path, const std::string& methods_csv,
                 const std::string& out_dir, int n_samples, const std::string& k_sweep,
                 bool with_lmh_accuracy) {
  const evida::BenchmarkLoadResult loaded = evida::load_benchmark(benchmark_path);
  for (const auto& rejected : loaded.rejected) {
    std::cerr << "benchmark line " << rejected.line_number << " rejected: " << rejected.reason
              << "\n";
  }
  if (loaded.cases.empty()) {
    throw evida::InputError("benchmark has no usable cases: " + benchmark_path);
  }
  const std::vector<BenchmarkCase>& cases = loaded.cases;

  const EvidenceBank bank = evida::load_bank(bank_dir);
  Backends backends = make_backends(config, /*need_llm=*/true, /*need_encoder=*/true);

  // Stage A signatures and full prediction records collected while the
  // evida method runs; signatures feed the optional accuracy report, the
  // records are persisted as JSON lines.
  std::map<std::string, std::map<std::string, evida::LMHSignature>> collected_signatures;
  std::map<std::string, std::string> collected_predictions;  // case_id -> JSON line
  std::mutex collect_mutex;

  auto evida_predictor_at_k = [&](int k, bool collect) {
    return [&, k, collect](const BenchmarkCase& benchmark_case)
               -> std::optional<AnswerDistribution> {
      evida::TwoStageConfig stage_config = two_stage_config(config);
      stage_config.k = k;
      const evida::PredictionResult result =
          evida::run_two_stage(benchmark_case.as_item(), benchmark_case.group(), bank,
                               *backends.encoder, *backends.llm, stage_config);
      if (collect) {
        std::map<std::string, evida::LMHSignature> signatures;
        if (result.stage_a && result.stage_a->report.valid && result.stage_a->output) {
          for (const auto& [option, labels] :
               evida::extract_signatures(*result.stage_a->output, benchmark_case.as_item())) {
            signatures[option] = evida::LMHSignature::from_strings(labels);
          }
        }
        std::lock_guard<std::mutex> lock(collect_mutex);
        if (!signatures.empty()) {
          collected_signatures[benchmark_case.case_id] = std::move(signatures);
        }
        collected_predictions[benchmark_case.case_id] =
            evida::prediction_to_json(result).dump();
      }
      return result.normalized_distribution;
    };
  };

  std::vector<evida::MethodResult> results;
  for (const std::string& method : evida::split(methods_csv, ',')) {
    const std::string name = evida::trim(method);
    if (name.empty()) continue;
    evida::Predictor predictor;
    if (name == "evida") {
      predictor = evida_predictor_at_k(config.k, /*collect=*/true);
    } else if (name == "verbalized") {
      predictor = [&](const BenchmarkCase& c) {
        return evida::baseline_verbalized(*backends.llm, c, config.decoding,
                                          config.stage_b_tolerance, config.retries);
      };
    } else if (name == "logprob") {
      predictor = [&](const BenchmarkCase& c) {
        return evida::baseline_logprob(*backends.llm, c, config.decoding);
      };
    } else if (name == "sampling") {
      predictor = [&](const BenchmarkCase& c) {
        return evida::baseline_sampling(*backends.llm, c, n_samples, config.decoding)
            .distribution;
      };
    } else if (name == "uniform") {
      predictor = [](const BenchmarkCase& c) {
        return std::optional<AnswerDistribution>(evida::uniform_prediction(c));
      };
    } else {
      throw evida::InputError("unknown method '" + name + "'");
    }
    results.push_back(evida::evaluate(name, predictor, cases, config.max_in_flight));
    std::cerr << name << ": mean JSD " << results.back().mean_jsd << ", validity "
              << results.back().validity_rate << "\n";
  }

  if (!k_sweep.empty()) {
    for (const std::string& field : evida::split(k_sweep, ',')) {
      const std::string cleaned = evida::trim(field);
      if (cleaned.empty()) continue;
      const int k = std::stoi(cleaned);
      results.push_back(evida::evaluate("evida[k=" + std::to_string(k) + "]",
                                        evida_predictor_at_k(k, /*collect=*/false), cases,
                                        config.max_in_flight));
      std::cerr << "k=" << k << ": mean JSD " << results.back().mean_jsd << "\n";
    }
  }

  evida::write_reports(results, cases, out_dir);

  if (!collected_predictions.empty()) {
    // One prediction record per (question, group), in benchmark order.
    std::string lines;
    for (const BenchmarkCase& benchmark_case : cases) {
      auto it = collected_predictions.find(benchmark_case.case_id);
      if (it != collected_predictions.end()) {
        lines += it->second;
        lines += "\n";
      }
    }
    evida::write_file(std::filesystem::path(out_dir) / "predictions.jsonl", lines);
  }

  if (with_lmh_accuracy) {
    const evida::LMHAccuracyResult accuracy =
        evida::lmh_accuracy(cases, collected_signatures, bank);
    ordered_json out;
    out["overall"] = accuracy.overall;
    ordered_json per_country = ordered_json::object();
    for (const auto& [country, value] : accuracy.per_country) per_country[country] = value;
    out["per_country"] = per_country;
    out["skipped_cases"] = accuracy.skipped.size();
    evida::write_file(std::filesystem::path(out_dir) / "lmh_accuracy.json",
                      out.dump(2) + "\n");
  }
  std::cerr << "reports written to " << out_dir << "\n";
  return 0;
}

int run_episodes(const PipelineConfig& config, const std::string& bank_dir,
                 const std::string& groups_csv, bool all_groups, int count,
                 const std::string& out_path) {
  const EvidenceBank bank = evida::load_bank(bank_dir);
  Backends backends = make_backends(config, /*need_llm=*/true, /*need_encoder=*/true);

  std::vector<GroupKey> groups;
  if (all_groups) {
    for (const auto& [group, evidence] : bank.groups) groups.push_back(group);
  } else {
    for (const std::string& field : evida::split(groups_csv, ',')) {
      const std::string country = evida::trim(field);
      if (country.empty()) continue;
      GroupKey group{country, {}};
      if (bank.find_group(group) == nullptr) {
        throw evida::DomainError("unknown group '" + country + "'");
      }
      groups.push_back(group);
    }
  }
  if (groups.empty()) {
    throw evida::InputError("no groups selected");
  }

  evida::EpisodeRetrievalConfig retrieval;
  retrieval.k = config.k;
  retrieval.n_min = config.n_min;
  retrieval.encode.batch_size = config.batch_size;
  retrieval.encode.max_in_flight = config.max_in_flight;

  // Eligible pairs in deterministic shuffled order; the seed is recorded in
  // the export header.
  std::vector<std::pair<GroupKey, std::string>> eligible;
  for (const GroupKey& group : groups) {
    const evida::GroupEvidence* evidence = bank.find_group(group);
    std::size_t found = 0;
    for (const auto& [item_id, item_evidence] : evidence->items) {
      if (item_evidence.support >= config.n_min) {
        eligible.emplace_back(group, item_id);
        ++found;
      }
    }
    if (found == 0) {
      std::cerr << "skipping group '" << group.label()
                << "': no items with support >= " << config.n_min << "\n";
    }
  }
  if (eligible.empty()) {
    throw evida::DomainError("no (group, item) pairs satisfy the support floor");
  }
  evida::deterministic_shuffle(eligible, config.seed);
  if (count > 0 && static_cast<std::size_t>(count) < eligible.size()) {
    eligible.resize(static_cast<std::size_t>(count));
  }

  std::vector<evida::EpisodeRollouts> batches;
  for (const auto& [group, item_id] : eligible) {
    evida::Episode episode;
    try {
      episode = evida::build_episode(bank, group, item_id, retrieval, *backends.encoder);
    } catch (const evida::DomainError& ex) {
      std::cerr << "skipping episode (" << group.label() << ", " << item_id
                << "): " << ex.what() << "\n";
      continue;
    }

    evida::EpisodeRollouts rollouts;
    std::vector<double> rewards;
    for (int rollout_index = 0; rollout_index < config.group_size; ++rollout_index) {
      const evida::PredictionResult rollout = evida::run_two_stage_with_evidence(
          episode.target_item, episode.group, episode.group_profile, episode.evidence,
          *backends.llm, two_stage_config(config));
      evida::ScoredRollout scored{rollout, evida::score_rollout(episode, rollout, config.weights)};
      rewards.push_back(scored.breakdown.total);
      rollouts.rollouts.push_back(std::move(scored));
    }
    rollouts.advantages = evida::group_advantages(rewards);
    rollouts.episode = std::move(episode);
    batches.push_back(std::move(rollouts));
  }
  if (batches.empty()) {
    throw evida::DomainError("no episodes produced");
  }

  evida::export_training_batch(batches, config.weights, config.group_size, config.thresholds(),
                               config.seed, out_path);
  std::cerr << "exported " << batches.size() << " episodes x " << config.group_size
            << " rollouts to " << out_path << "\n";
  return 0;
}

int run_score(const PipelineConfig& config, const std::string& bank_dir,
              const std::string& prediction_path) {
  const EvidenceBank bank = evida::load_bank(bank_dir);
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(evida::read_file(prediction_path));
  } catch (const nlohmann::json::exception& ex) {
    throw evida::InputError("malformed prediction file: " + std::string(ex.what()));
  }
  const evida::PredictionResult prediction = evida::prediction_from_json(body);

  const evida::ItemEvidence* target = bank.find_item(prediction.group, prediction.item_id);
  if (target == nullptr) {
    throw evida::DomainError("no gold evidence for (" + prediction.group.label() + ", " +
                             prediction.item_id + ")");
  }
  evida::Episode episode;
  episode.target_item = target->item;
  episode.group = prediction.group;
  episode.gold_distribution = target->distribution;
  for (const auto& [option, evidence] : target->option_evidence) {
    if (evidence.signature) episode.gold_signatures[option] = *evidence.signature;
  }

  const evida::RewardBreakdown breakdown =
      evida::score_rollout(episode, prediction, config.weights);
  ordered_json out;
  out["r_lmh"] = breakdown.r_lmh;
  out["r_dist"] = breakdown.r_dist;
  out["r_schema_a"] = breakdown.r_schema_a;
  out["r_schema_b"] = breakdown.r_schema_b;
  out["total"] = breakdown.total;
  if (breakdown.lmh_failure) out["lmh_failure"] = *breakdown.lmh_failure;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evidence-based answer distribution prediction"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file")->configurable(false);

  // Shared flag storage; only flags the user actually set override the
  // resolved config (flag > file > environment > default).
  struct Flags {
    double tau1 = 0.0, tau2 = 0.0, tolerance = 0.0;
    int k = 0, retries = 0, group_size = 0, max_in_flight = 0;
    std::int64_t n_min = 0;
    std::uint64_t seed = 0;
    std::string llm_base_url, llm_model, encoder_base_url, encoder_model, cache_dir;
    std::string weights_csv;
    bool mock = false;
    std::string mock_fixture;
    std::string ablation;
  } flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tau1", flags.tau1, "low/medium threshold");
    sub->add_option("--tau2", flags.tau2, "medium/high threshold");
    sub->add_option("--k", flags.k, "retrieval depth");
    sub->add_option("--n-min", flags.n_min, "support floor for evidence");
    sub->add_option("--tolerance", flags.tolerance, "stage B normalization tolerance");
    sub->add_option("--retries", flags.retries, "retries per stage on invalid output");
    sub->add_option("--group-size", flags.group_size, "rollouts per episode");
    sub->add_option("--max-in-flight", flags.max_in_flight, "bounded request concurrency");
    sub->add_option("--seed", flags.seed, "deterministic seed");
    sub->add_option("--llm-base-url", flags.llm_base_url, "chat-completions endpoint");
    sub->add_option("--llm-model", flags.llm_model, "model name");
    sub->add_option("--encoder-base-url", flags.encoder_base_url, "embedding endpoint");
    sub->add_option("--encoder-model", flags.encoder_model, "encoder model name");
    sub->add_option("--cache-dir", flags.cache_dir, "embedding cache directory");
    sub->add_option("--weights", flags.weights_csv, "reward weights lmh,dist,schA,schB");
    sub->add_flag("--mock", flags.mock, "offline deterministic encoder/LLM");
    sub->add_option("--mock-fixture", flags.mock_fixture, "scripted LLM fixture file");
    sub->add_option("--ablation", flags.ablation, "no-evidence or no-welzel");
  };

  // build-bank
  std::string microdata_path, items_path, out_dir, delimiter;
  std::vector<std::string> attribute_columns;
  CLI::App* build = app.add_subcommand("build-bank", "ingest microdata and build the bank");
  build->add_option("--microdata", microdata_path, "respondent-level file (TSV or JSONL)")
      ->required();
  build->add_option("--items", items_path, "survey item definitions (JSONL)")->required();
  build->add_option("--out", out_dir, "bank output directory")->required();
  build->add_option("--delimiter", delimiter, "field delimiter (default tab)");
  build->add_option("--attrs", attribute_columns, "extra group attribute columns");
  add_common(build);

  // inspect-bank
  std::string bank_dir;
  CLI::App* inspect = app.add_subcommand("inspect-bank", "print bank summary");
  inspect->add_option("--bank", bank_dir, "bank directory")->required();

  // retrieve
  std::string question_text, instruction_text, country;
  std::vector<std::string> attributes, exclude_ids;
  CLI::App* retrieve_cmd = app.add_subcommand("retrieve", "rank evidence for a question");
  retrieve_cmd->add_option("--bank", bank_dir, "bank directory")->required();
  retrieve_cmd->add_option("--question", question_text, "question text")->required();
  retrieve_cmd->add_option("--instruction", instruction_text, "optional instruction");
  retrieve_cmd->add_option("--country", country, "target country")->required();
  retrieve_cmd->add_option("--attr", attributes, "group attribute name=value");
  retrieve_cmd->add_option("--exclude", exclude_ids, "item ids to exclude");
  add_common(retrieve_cmd);

  // predict
  std::string question_file, predict_out;
  std::vector<std::string> option_flags;
  CLI::App* predict = app.add_subcommand("predict", "two-stage distribution prediction");
  predict->add_option("--bank", bank_dir, "bank directory")->required();
  predict->add_option("--question-file", question_file, "question JSON file");
  predict->add_option("--question", question_text, "inline question text");
  predict->add_option("--instruction", instruction_text, "optional instruction");
  predict->add_option("--option", option_flags, "inline option id=text (repeatable)");
  predict->add_option("--country", country, "target country")->required();
  predict->add_option("--attr", attributes, "group attribute name=value");
  predict->add_option("--out", predict_out, "output file (default stdout)");
  add_common(predict);

  // evaluate
  std::string benchmark_path, methods = "evida", eval_out = "eval-out", k_sweep;
  int n_samples = 100;
  bool with_lmh_accuracy = false;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "run methods over a benchmark");
  evaluate_cmd->add_option("--bank", bank_dir, "bank directory")->required();
  evaluate_cmd->add_option("--benchmark", benchmark_path, "benchmark JSONL")->required();
  evaluate_cmd->add_option("--methods", methods,
                           "comma list: evida,verbalized,logprob,sampling,uniform");
  evaluate_cmd->add_option("--out", eval_out, "report directory");
  evaluate_cmd->add_option("--n-samples", n_samples, "samples for the sampling baseline");
  evaluate_cmd->add_option("--k-sweep", k_sweep, "comma list of k values to sweep");
  evaluate_cmd->add_flag("--lmh-accuracy", with_lmh_accuracy,
                         "also report signature accuracy vs bank gold");
  add_common(evaluate_cmd);

  // episodes
  std::string groups_csv, episodes_out;
  bool all_groups = false;
  int episode_count = 0;
  CLI::App* episodes_cmd = app.add_subcommand("episodes", "build, roll out, score, export");
  episodes_cmd->add_option("--bank", bank_dir, "bank directory")->required();
  episodes_cmd->add_option("--groups", groups_csv, "comma list of countries");
  episodes_cmd->add_flag("--all-groups", all_groups, "use every group in the bank");
  episodes_cmd->add_option("--count", episode_count, "number of episodes (0 = all eligible)");
  episodes_cmd->add_option("--out", episodes_out, "training batch JSONL")->required();
  add_common(episodes_cmd);

  // score
  std::string prediction_path;
  CLI::App* score_cmd = app.add_subcommand("score", "reward breakdown for a stored prediction");
  score_cmd->add_option("--bank", bank_dir, "bank directory")->required();
  score_cmd->add_option("--prediction", prediction_path, "prediction JSON file")->required();
  add_common(score_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) {
      return app.exit(ex);  // --help
    }
    std::cerr << ex.what() << "\n";
    return 2;
  }

  try {
    PipelineConfig config = evida::load_config(
        config_path.empty() ? std::nullopt
                            : std::optional<std::filesystem::path>(config_path));

    CLI::App* sub = app.get_subcommands().front();
    auto seen = [&](const std::string& name) {
      const CLI::Option* option = sub->get_option_no_throw(name);
      return option != nullptr && option->count() > 0;
    };
    if (seen("--tau1")) config.tau1 = flags.tau1;
    if (seen("--tau2")) config.tau2 = flags.tau2;
    if (seen("--k")) config.k = flags.k;
    if (seen("--n-min")) config.n_min = flags.n_min;
    if (seen("--tolerance")) config.stage_b_tolerance = flags.tolerance;
    if (seen("--retries")) config.retries = flags.retries;
    if (seen("--group-size")) config.group_size = flags.group_size;
    if (seen("--max-in-flight")) config.max_in_flight = flags.max_in_flight;
    if (seen("--seed")) config.seed = flags.seed;
    if (seen("--llm-base-url")) config.llm_base_url = flags.llm_base_url;
    if (seen("--llm-model")) config.llm_model = flags.llm_model;
    if (seen("--encoder-base-url")) config.encoder_base_url = flags.encoder_base_url;
    if (seen("--encoder-model")) config.encoder_model = flags.encoder_model;
    if (seen("--cache-dir")) config.cache_dir = flags.cache_dir;
    if (seen("--mock")) config.mock = true;
    if (seen("--mock-fixture")) {
      config.mock = true;
      config.mock_fixture = flags.mock_fixture;
    }
    if (seen("--weights")) {
      const std::vector<std::string> parts = evida::split(flags.weights_csv, ',');
      if (parts.size() != 4) {
        throw evida::InputError("--weights needs four comma-separated values");
      }
      config.weights.lmh = std::stod(parts[0]);
      config.weights.dist = std::stod(parts[1]);
      config.weights.schema_a = std::stod(parts[2]);
      config.weights.schema_b = std::stod(parts[3]);
    }
    if (seen("--ablation")) {
      if (flags.ablation == "no-evidence") {
        config.no_evidence = true;
      } else if (flags.ablation == "no-welzel") {
        config.no_welzel = true;
      } else {
        throw evida::InputError("--ablation must be no-evidence or no-welzel");
      }
    }
    config.thresholds().validate();
    config.weights.validate();

    if (sub == build) {
      return run_build_bank(config, microdata_path, items_path, out_dir, delimiter,
                            attribute_columns);
    }
    if (sub == inspect) {
      return run_inspect_bank(bank_dir);
    }
    if (sub == retrieve_cmd) {
      return run_retrieve(config, bank_dir, question_text, instruction_text, country,
                          attributes, exclude_ids);
    }
    if (sub == predict) {
      const SurveyItem question =
          question_from_flags(question_file, question_text, instruction_text, option_flags);
      return run_predict(config, bank_dir, question, parse_group(country, attributes),
                         predict_out);
    }
    if (sub == evaluate_cmd) {
      return run_evaluate(config, bank_dir, benchmark_path, methods, eval_out, n_samples,
                          k_sweep, with_lmh_accuracy);
    }
    if (sub == episodes_cmd) {
      return run_episodes(config, bank_dir, groups_csv, all_groups, episode_count,
                          episodes_out);
    }
    if (sub == score_cmd) {
      return run_score(config, bank_dir, prediction_path);
    }
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const evida::Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return ex.exit_code();
  } catch (const std::exception& ex) {
    std::cerr << "unexpected error: " << ex.what() << "\n";
    return 1;
  }
}
