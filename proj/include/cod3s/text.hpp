#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cod3s {

/// Tokens separated by ASCII whitespace, untouched otherwise.
std::vector<std::string> split_whitespace(std::string_view text);

/// BLEU/n-gram tokenizer: ASCII-lowercase, split every ASCII punctuation
/// character into its own token, then split on whitespace. Apostrophes stay
/// attached ("didn't" is one token) so contractions are not fragmented.
std::vector<std::string> tokenize(std::string_view text);

std::string_view trim_right(std::string_view text);

}  // namespace cod3s
