#include "tgdfer/tokenizer.hpp"

#include <cctype>
#include <string>

#include "tgdfer/errors.hpp"

namespace tgdfer {

namespace {

std::uint64_t fnv1a(std::string_view word) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : word) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

Tokenizer::Tokenizer(std::size_t vocab_size, std::size_t max_tokens)
    : vocab_size_(vocab_size), max_tokens_(max_tokens) {
    if (vocab_size_ == 0 || max_tokens_ == 0) throw ConfigError("tokenizer needs a non-empty vocabulary and length");
}

TokenSequence Tokenizer::tokenize(std::string_view text) const {
    TokenSequence out;
    std::string word;
    auto flush = [&] {
        if (!word.empty() && out.ids.size() < max_tokens_) {
            out.ids.push_back(static_cast<std::uint32_t>(fnv1a(word) % vocab_size_));
        }
        word.clear();
    };
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            word.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else {
            flush();
        }
    }
    flush();
    if (out.ids.empty()) throw ConfigError("cannot tokenize empty text");
    return out;
}

}  // namespace tgdfer
