#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wsd/pairgen.hpp"

namespace wsd::nn {

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kBos = 1;
  static constexpr std::int32_t kSep = 2;
  static constexpr std::int32_t kUnk = 3;

  Vocabulary();

  // Tokens kept when seen at least min_count times, ordered by descending
  // frequency then lexicographically; ids are stable across runs.
  static Vocabulary build(std::span<const pairgen::ContextGlossPair> pairs,
                          std::size_t min_count);

  // Content lookup: unknown tokens (and literal reserved markers) map to UNK.
  std::int32_t id_of(std::string_view token) const;
  const std::string& token_of(std::int32_t id) const;
  std::size_t size() const { return tokens_.size(); }

  std::span<const std::string> tokens() const { return tokens_; }
  void append_token(const std::string& token);  // checkpoint loading

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

}  // namespace wsd::nn
