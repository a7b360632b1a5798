#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emi/preprocess.hpp"

namespace emi::rater {

struct ChatMessage {
  std::string role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

void to_json(nlohmann::json& j, const ChatMessage& m);

enum class Task { procedural, epistemic };

[[nodiscard]] std::string to_string(Task t);
[[nodiscard]] Task parse_task(std::string_view text);

/// English name of a BCP-47 language tag's primary subtag ("de-AT" ->
/// "German"). Throws std::invalid_argument naming the tag if unsupported.
[[nodiscard]] std::string language_name(std::string_view tag);

/// Raw system templates with a literal "{language}" placeholder.
[[nodiscard]] std::string_view procedural_template();
[[nodiscard]] std::string_view epistemic_template();

/// First sentence of each system template; the mock server keys on these.
inline constexpr std::string_view kProceduralOpening =
    "You are an annotator evaluating how procedural a statement is.";
inline constexpr std::string_view kEpistemicOpening =
    "You are an annotator evaluating how much each statement is evidence-free and how much it is "
    "evidence-based.";
inline constexpr std::string_view kUserPrefix = "Here is the Input Text: ";

/// System + user messages. The language is substituted into the template
/// only; the text goes verbatim into the user message.
[[nodiscard]] std::vector<ChatMessage> build_prompt(Task task, std::string_view language_tag,
                                                    std::string_view text);

[[nodiscard]] std::vector<ChatMessage> build_procedural_prompt(const preprocess::Segment& segment);
[[nodiscard]] std::vector<ChatMessage> build_epistemic_prompt(const preprocess::Segment& segment);

/// SHA-256 over the serialized messages; part of the response-cache key.
[[nodiscard]] std::string prompt_hash(const std::vector<ChatMessage>& messages);

}  // namespace emi::rater
