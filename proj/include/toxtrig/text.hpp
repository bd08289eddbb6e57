#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace toxtrig {

/// Shared tokenizer settings; the term statistics and the classifier must agree on these.
struct TokenizerConfig {
  bool lowercase = true;
  /// Drop tokens made only of digits (and underscores).
  bool drop_numeric = true;

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

/// Splits UTF-8 text into word tokens.
///
/// Word characters are letters, digits, underscore and any non-ASCII code point outside the
/// punctuation and symbol blocks. An apostrophe (ASCII or U+2019) between two word characters
/// joins them ("don't"). Each CJK ideograph or kana is its own token. Pure punctuation never
/// forms a token; invalid UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

/// ASCII-only lowercase copy.
std::string ascii_lower(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace toxtrig
