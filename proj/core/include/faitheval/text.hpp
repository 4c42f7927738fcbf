#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace faitheval {

/// Whitespace-delimited token count. This is the word count used by the
/// refusal rule and the corpus word-count field.
std::size_t word_count(std::string_view text);

/// Rule-based sentence split on [.!?] boundaries followed by whitespace.
/// Good enough for prompts that enumerate sentences; not a linguistic
/// segmenter.
std::vector<std::string> split_sentences(std::string_view text);

std::vector<std::string> split_lines(std::string_view text);

std::string to_lower(std::string_view text);

std::string_view trim(std::string_view text);

/// Replaces every occurrence of `{{key}}` in `tmpl` with `value`.
std::string replace_placeholder(std::string tmpl, std::string_view key,
                                std::string_view value);

}  // namespace faitheval
