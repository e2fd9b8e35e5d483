#pragma once

#include <cctype>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace incsum {

// Counting interface so budgets stay enforceable without an external
// tokenizer. Counts must be monotone under concatenation.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::size_t count(std::string_view text) const = 0;
};

// Default: ceil(utf-8 bytes / 4), the usual rough bytes-per-token ratio.
class ByteRatioTokenizer final : public Tokenizer {
 public:
  std::size_t count(std::string_view text) const override {
    return (text.size() + 3) / 4;
  }
};

inline const Tokenizer& default_tokenizer() {
  static const ByteRatioTokenizer tokenizer;
  return tokenizer;
}

inline std::size_t count_tokens(const Tokenizer& tokenizer, std::string_view text) {
  return tokenizer.count(text);
}

struct Chunk {
  std::size_t index = 0;
  std::string text;
  std::size_t token_count = 0;
};

// Greedy segmentation: each chunk takes the largest prefix that fits the
// token limit, backed off to a whitespace boundary so words stay intact.
// A single whitespace-free run longer than the limit is split hard. Chunks
// concatenate back to the input byte-for-byte.
inline std::vector<Chunk> chunk_document(const Tokenizer& tokenizer, std::string_view text,
                                         std::size_t limit) {
  std::vector<Chunk> chunks;
  if (limit == 0) limit = 1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::string_view rest = text.substr(pos);
    // Largest prefix length whose count fits the limit. Counts are
    // non-decreasing in prefix length, so binary search applies.
    std::size_t lo = 1, hi = rest.size(), best = 0;
    if (tokenizer.count(rest) <= limit) {
      best = rest.size();
    } else {
      while (lo <= hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (tokenizer.count(rest.substr(0, mid)) <= limit) {
          best = mid;
          lo = mid + 1;
        } else {
          if (mid == 0) break;
          hi = mid - 1;
        }
      }
    }
    if (best == 0) best = 1;  // a single character over the limit cannot be split further
    std::size_t cut = best;
    if (cut < rest.size()) {
      // Back off to just after the last whitespace char within the prefix.
      std::size_t ws = std::string_view::npos;
      for (std::size_t i = cut; i > 0; --i) {
        if (std::isspace(static_cast<unsigned char>(rest[i - 1]))) {
          ws = i;
          break;
        }
      }
      if (ws != std::string_view::npos && ws > 0) cut = ws;
    }
    Chunk chunk;
    chunk.index = chunks.size();
    chunk.text = std::string(rest.substr(0, cut));
    chunk.token_count = tokenizer.count(chunk.text);
    chunks.push_back(std::move(chunk));
    pos += cut;
  }
  return chunks;
}

}  // namespace incsum
