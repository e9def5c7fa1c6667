#include "evida/prompts.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace evida {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kSubIndexBlock =
    "Welzel sub-indexes are 8 dimensions, with discretized values including \"low\", "
    "\"medium\", and \"high\". Sub-index meanings:\n"
    "sub_meanings = {\n"
    "    \"DEFIANCE\": \"Less deference to authority/tradition (higher = more defiant).\",\n"
    "    \"DISBELIEF\": \"Lower religiosity (higher = more disbelief).\",\n"
    "    \"RELATIVISM\": \"Less moral absolutism (higher = more relativist).\",\n"
    "    \"SCEPTICISM\": \"More skepticism toward traditional state institutions.\",\n"
    "    \"AUTONOMY\": \"Preference for independence/imagination over obedience in "
    "child-raising.\",\n"
    "    \"EQUALITY\": \"Support for gender equality.\",\n"
    "    \"CHOICE\": \"Acceptance of private-life choices (e.g., "
    "divorce/abortion/homosexuality).\",\n"
    "    \"VOICE\": \"Support for free speech and people having a say.\",\n"
    "}\n"
    "\n"
    "Sub-index order:\n"
    "WELZEL_SUBINDEX_COLS = [\n"
    "    \"DEFIANCE\", \"DISBELIEF\", \"RELATIVISM\", \"SCEPTICISM\",\n"
    "    \"AUTONOMY\", \"EQUALITY\", \"CHOICE\", \"VOICE\",\n"
    "]\n";

constexpr std::string_view kContextHeaderWithWelzel =
    "You are given similar WVS questions from the SAME demographic group.\n"
    "Each provides:\n"
    "- observed_distribution_over_labels\n"
    "- label_to_subindex_LMH (typical L/M/H pattern among respondents choosing that "
    "label)\n";

constexpr std::string_view kContextHeaderDistributionOnly =
    "You are given similar WVS questions from the SAME demographic group.\n"
    "Each provides:\n"
    "- observed_distribution_over_labels\n";

constexpr std::string_view kDistributionSchemaBlock =
    "Rules:\n"
    "- Return ONLY JSON (no markdown).\n"
    "- Use exactly schema:\n"
    "{\n"
    "    \"predicted_distribution\": {\"A\": 0.25, \"B\": 0.15, \"C\": 0.15, \"D\": 0.45},\n"
    "    \"rationale\": \"<brief>\",\n"
    "}\n";

ordered_json options_json(const SurveyItem& question) {
  ordered_json options = ordered_json::object();
  for (const SurveyOption& option : question.options) {
    options[option.id] = option.text;
  }
  return options;
}

std::string group_line(const GroupKey& group) {
  std::string line = "Demographic group: country=" + group.country;
  for (const auto& [name, value] : group.attributes) {
    line += ", " + name + "=" + value;
  }
  return line;
}

// Question, group, and the one-line options object. The options line is the
// machine-readable anchor shared by every template.
std::string question_block(const SurveyItem& question, const GroupKey& group) {
  std::string block = "Question: " + question.question_text + "\n";
  if (question.instruction && !question.instruction->empty()) {
    block += "Instruction: " + *question.instruction + "\n";
  }
  block += group_line(group) + "\n";
  block += std::string(kAnswerOptionsMarker) + "\n";
  block += options_json(question).dump();
  return block;
}

ordered_json labels_json(const LMHSignature& signature) {
  ordered_json labels = ordered_json::array();
  for (const std::string& label : signature.to_strings()) labels.push_back(label);
  return labels;
}

ordered_json reference_array(const RetrievedEvidence& evidence, bool include_welzel) {
  ordered_json references = ordered_json::array();
  for (const RetrievedEntry& entry : evidence.entries) {
    const ItemEvidence& item_evidence = entry.evidence;
    ordered_json reference;
    reference["question"] = item_evidence.item.question_text;
    if (item_evidence.item.instruction && !item_evidence.item.instruction->empty()) {
      reference["instruction"] = *item_evidence.item.instruction;
    }
    reference["options"] = options_json(item_evidence.item);
    ordered_json distribution = ordered_json::object();
    for (const SurveyOption& option : item_evidence.item.options) {
      auto it = item_evidence.distribution.find(option.id);
      distribution[option.id] = it == item_evidence.distribution.end() ? 0.0 : it->second;
    }
    reference["observed_distribution_over_labels"] = distribution;
    if (include_welzel) {
      ordered_json signatures = ordered_json::object();
      for (const SurveyOption& option : item_evidence.item.options) {
        auto it = item_evidence.option_evidence.find(option.id);
        if (it != item_evidence.option_evidence.end() && it->second.signature) {
          signatures[option.id] = labels_json(*it->second.signature);
        }
      }
      reference["label_to_subindex_LMH"] = signatures;
    }
    references.push_back(std::move(reference));
  }
  return references;
}

std::string reference_block(const RetrievedEvidence& evidence,
                            const std::optional<LMHSignature>& group_profile,
                            bool include_welzel) {
  std::string block;
  if (include_welzel && group_profile) {
    block += std::string(kGroupProfileMarker) + " " + labels_json(*group_profile).dump() +
             "\n\n";
  }
  const ordered_json references = reference_array(evidence, include_welzel);
  block += references.empty() ? "[]" : references.dump(2);
  return block;
}

std::string lettered_options(const SurveyItem& question) {
  std::string block;
  for (std::size_t i = 0; i < question.options.size(); ++i) {
    block += static_cast<char>('A' + i);
    block += ". " + question.options[i].text + "\n";
  }
  return block;
}

}  // namespace

std::string render_stage_a_prompt(const SurveyItem& question, const GroupKey& group,
                                  const std::optional<LMHSignature>& group_profile,
                                  const RetrievedEvidence& evidence) {
  std::ostringstream prompt;
  prompt << kContextHeaderWithWelzel << "\n"
         << kReferenceQuestionsMarker << "\n"
         << reference_block(evidence, group_profile, /*include_welzel=*/true) << "\n\n"
         << "Task:\n"
         << "For the input survey question, " << kStageATaskMarker
         << " (low/medium/high) to each answer option.\n\n"
         << kSubIndexBlock << "\n"
         << "Rules:\n"
         << "- Return ONLY JSON (no markdown).\n"
         << "- Use exactly the schema:\n"
         << "{\n"
         << "    \"subindex_order\": [\n"
         << "        \"DEFIANCE\", \"DISBELIEF\", \"RELATIVISM\", \"SCEPTICISM\",\n"
         << "        \"AUTONOMY\", \"EQUALITY\", \"CHOICE\", \"VOICE\",\n"
         << "    ],\n"
         << "    \"option_profiles\": [\n"
         << "        {\"option\": \"<string>\", \"subindex_LMH\": [\"low|medium|high\", ...]}\n"
         << "    ],\n"
         << "    \"notes\": \"<short string>\",\n"
         << "}\n"
         << "- subindex_LMH entries must be one of: \"low\", \"medium\", \"high\"\n\n"
         << "Input survey question:\n"
         << question_block(question, group) << "\n\n"
         << "Return JSON now.\n";
  return prompt.str();
}

std::string render_stage_b_prompt(const SurveyItem& question, const GroupKey& group,
                                  const std::optional<LMHSignature>& group_profile,
                                  const RetrievedEvidence& evidence,
                                  const PredictedSignatures& predicted_signatures) {
  ordered_json signatures = ordered_json::object();
  for (const auto& [option, labels] : predicted_signatures) {
    signatures[option] = labels;
  }

  std::ostringstream prompt;
  prompt << "Context:\n"
         << kContextHeaderWithWelzel << "\n"
         << kReferenceQuestionsMarker << "\n"
         << reference_block(evidence, group_profile, /*include_welzel=*/true) << "\n\n"
         << kSubIndexBlock << "\n"
         << "Input survey question with Welzel's values:\n"
         << question_block(question, group) << "\n"
         << "Predicted option value signatures:\n"
         << signatures.dump() << "\n\n"
         << "Task:\n"
         << "For the input survey question, return " << kDistributionTaskMarker
         << " over the answer options that:\n"
         << "- Uses all options as keys\n"
         << "- Values are floats >= 0\n"
         << "- Sums to 1 (within rounding)\n"
         << "- Leans toward options whose LMH profiles better match the group target LMH "
            "profile\n"
         << "- Is consistent with patterns in retrieved examples (e.g., if similar LMH "
            "profiles got high probability there, mirror that)\n\n"
         << kDistributionSchemaBlock << "\n"
         << "Return JSON now.\n";
  return prompt.str();
}

std::string render_direct_distribution_prompt(const SurveyItem& question,
                                              const GroupKey& group,
                                              const RetrievedEvidence& evidence) {
  std::ostringstream prompt;
  prompt << "Context:\n"
         << kContextHeaderDistributionOnly << "\n"
         << kReferenceQuestionsMarker << "\n"
         << reference_block(evidence, std::nullopt, /*include_welzel=*/false) << "\n\n"
         << "Input survey question:\n"
         << question_block(question, group) << "\n\n"
         << "Task:\n"
         << "For the input survey question, return " << kDistributionTaskMarker
         << " over the answer options that:\n"
         << "- Uses all options as keys\n"
         << "- Values are floats >= 0\n"
         << "- Sums to 1 (within rounding)\n"
         << "- Is consistent with patterns in retrieved examples\n\n"
         << kDistributionSchemaBlock << "\n"
         << "Return JSON now.\n";
  return prompt.str();
}

std::string render_verbalized_prompt(const SurveyItem& question, const GroupKey& group) {
  std::ostringstream prompt;
  prompt << "You are estimating how people in a demographic group answer a survey "
            "question.\n\n"
         << "Input survey question:\n"
         << question_block(question, group) << "\n\n"
         << "Task:\n"
         << "Return " << kDistributionTaskMarker << " over the answer options that:\n"
         << "- Uses all options as keys\n"
         << "- Values are floats >= 0\n"
         << "- Sums to 1 (within rounding)\n\n"
         << kDistributionSchemaBlock << "\n"
         << "Return JSON now.\n";
  return prompt.str();
}

std::string render_letter_choice_prompt(const SurveyItem& question, const GroupKey& group) {
  std::ostringstream prompt;
  prompt << "Survey question for the demographic group (" << group_line(group) << "):\n"
         << question.question_text << "\n";
  if (question.instruction && !question.instruction->empty()) {
    prompt << *question.instruction << "\n";
  }
  prompt << "\nOptions:\n"
         << lettered_options(question) << "\n"
         << kLetterChoiceMarker << " of the single most likely answer.\n";
  return prompt.str();
}

std::string render_single_choice_prompt(const SurveyItem& question, const GroupKey& group) {
  std::ostringstream prompt;
  prompt << "Survey question for the demographic group (" << group_line(group) << "):\n"
         << question.question_text << "\n";
  if (question.instruction && !question.instruction->empty()) {
    prompt << *question.instruction << "\n";
  }
  prompt << "\nOptions:\n"
         << lettered_options(question) << "\n"
         << "Answer as one randomly sampled respondent of this group would: reply with "
         << kSingleChoiceMarker << ".\n";
  return prompt.str();
}

}  // namespace evida
