#include "itr/tokens.hpp"

namespace itr {

std::size_t approx_token_count(std::string_view text) {
    return (text.size() + 3) / 4;
}

const TokenCounter& default_token_counter() {
    static const TokenCounter counter = [](std::string_view text) {
        return approx_token_count(text);
    };
    return counter;
}

}  // namespace itr
