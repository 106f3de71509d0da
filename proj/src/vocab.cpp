#include "wsd/vocab.hpp"

#include <algorithm>
#include <map>

#include "wsd/error.hpp"
#include "wsd/strings.hpp"

namespace wsd::nn {

namespace {
constexpr const char* kReserved[] = {"[PAD]", "[BOS]", "[SEP]", "[UNK]"};
}

Vocabulary::Vocabulary() {
  for (const char* tok : kReserved) append_token(tok);
}

Vocabulary Vocabulary::build(std::span<const pairgen::ContextGlossPair> pairs,
                             std::size_t min_count) {
  std::map<std::string, std::size_t> counts;  // ordered map: lexicographic ties
  auto count_token = [&counts](const std::string& tok) {
    if (!tok.empty()) ++counts[tok];
  };
  for (const pairgen::ContextGlossPair& p : pairs) {
    for (const std::string& tok : p.context) count_token(tok);
    for (const std::string& tok : strings::split_ws(p.gloss)) count_token(tok);
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts)
    if (n >= min_count) kept.emplace_back(tok, n);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  for (auto& [tok, n] : kept) {
    if (!vocab.index_.contains(tok)) vocab.append_token(tok);
  }
  return vocab;
}

std::int32_t Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end() || it->second < 4) return kUnk;
  return it->second;
}

const std::string& Vocabulary::token_of(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    fail(ErrorKind::Precondition, "token id " + std::to_string(id) +
                                      " out of vocabulary range");
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::append_token(const std::string& token) {
  index_.emplace(token, static_cast<std::int32_t>(tokens_.size()));
  tokens_.push_back(token);
}

}  // namespace wsd::nn
