#include "itr/hash.hpp"

#include <array>

namespace itr {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t state) {
    constexpr std::uint64_t prime = 1099511628211ull;
    for (unsigned char c : data) {
        state ^= c;
        state *= prime;
    }
    return state;
}

std::string hex64(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::array<char, 16> out{};
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return std::string(out.data(), out.size());
}

}  // namespace itr
