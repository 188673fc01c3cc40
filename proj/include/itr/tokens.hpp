#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace itr {

/// Token counting contract. Anything that accepts a TokenCounter can be
/// rewired to a real tokenizer; the default is a deterministic
/// character-based approximation.
using TokenCounter = std::function<std::size_t(std::string_view)>;

/// ceil(character_count / 4); empty text counts as zero tokens.
std::size_t approx_token_count(std::string_view text);

const TokenCounter& default_token_counter();

}  // namespace itr
