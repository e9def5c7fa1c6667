#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evida/retrieval.hpp"
#include "evida/values.hpp"

namespace evida {

// Task phrases the offline model emulator keys on. Templates must keep
// these stable.
inline constexpr std::string_view kStageATaskMarker = "assign Welzel sub-index categories";
inline constexpr std::string_view kDistributionTaskMarker =
    "a plausible probability distribution";
inline constexpr std::string_view kLetterChoiceMarker = "Respond with only the letter";
inline constexpr std::string_view kSingleChoiceMarker = "exactly one option letter";
inline constexpr std::string_view kAnswerOptionsMarker = "Answer options:";
inline constexpr std::string_view kReferenceQuestionsMarker = "Reference questions:";
inline constexpr std::string_view kGroupProfileMarker = "Group target LMH profile:";

// Option id and its eight labels, in question option order.
using PredictedSignatures = std::vector<std::pair<std::string, std::vector<std::string>>>;

// Stage A: option value profiling. Evidence entries appear in retrieval
// order; an empty evidence set renders an empty reference block.
std::string render_stage_a_prompt(const SurveyItem& question, const GroupKey& group,
                                  const std::optional<LMHSignature>& group_profile,
                                  const RetrievedEvidence& evidence);

// Stage B: distribution prediction conditioned on evidence and the Stage A
// signatures.
std::string render_stage_b_prompt(const SurveyItem& question, const GroupKey& group,
                                  const std::optional<LMHSignature>& group_profile,
                                  const RetrievedEvidence& evidence,
                                  const PredictedSignatures& predicted_signatures);

// Single-stage distribution prompt for the no-value-mapping ablation:
// evidence distributions only, no signatures anywhere.
std::string render_direct_distribution_prompt(const SurveyItem& question,
                                              const GroupKey& group,
                                              const RetrievedEvidence& evidence);

// Verbalized-distribution baseline: no evidence, no value mapping.
std::string render_verbalized_prompt(const SurveyItem& question, const GroupKey& group);

// Letter-answer prompt for the first-token log-probability baseline.
// Options are lettered A.. positionally.
std::string render_letter_choice_prompt(const SurveyItem& question, const GroupKey& group);

// Single-choice prompt for the opinion-sampling baseline.
std::string render_single_choice_prompt(const SurveyItem& question, const GroupKey& group);

}  // namespace evida
