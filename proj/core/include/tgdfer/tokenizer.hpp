#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tgdfer {

inline constexpr std::size_t kVocabularySize = 4096;
inline constexpr std::size_t kMaxTokens = 77;

struct TokenSequence {
    std::vector<std::uint32_t> ids;

    std::size_t size() const { return ids.size(); }
    bool operator==(const TokenSequence&) const = default;
};

// Lower-cases, splits on anything that is not a letter or digit, and hashes
// each word into a fixed vocabulary. Stands in for a BPE tokenizer.
class Tokenizer {
public:
    explicit Tokenizer(std::size_t vocab_size = kVocabularySize, std::size_t max_tokens = kMaxTokens);

    TokenSequence tokenize(std::string_view text) const;

    std::size_t vocab_size() const { return vocab_size_; }
    std::size_t max_tokens() const { return max_tokens_; }

private:
    std::size_t vocab_size_;
    std::size_t max_tokens_;
};

}  // namespace tgdfer
