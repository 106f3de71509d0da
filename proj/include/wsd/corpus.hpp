#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wsd::corpus {

enum class Pos : std::uint8_t { Noun, Verb, Adj, Adv, Other };

// Tags outside the four Table-1 classes map to Other instead of erroring.
Pos parse_pos(std::string_view tag);
std::string_view to_string(Pos pos);

struct Token {
  std::string surface;
  std::string lemma;
  Pos pos = Pos::Other;
  std::optional<std::string> instance_id;  // present iff ambiguity target
};

struct Sentence {
  std::string id;
  std::vector<Token> words;

  bool operator==(const Sentence& other) const;
};

bool operator==(const Token& a, const Token& b);

struct WsdInstance {
  std::string instance_id;
  std::string sentence_ref;
  std::size_t target_position = 0;
  std::string lemma;
  Pos pos = Pos::Other;
  std::set<std::string> gold_keys;  // empty until a gold file is applied
};

struct SenseEntry {
  std::string sense_key;
  std::string gloss;
};

// Senses grouped under (lemma, pos), preserving inventory file order;
// that order is the tie-breaking order everywhere downstream.
class SenseInventory {
 public:
  void add(const std::string& lemma, Pos pos, SenseEntry entry);
  std::span<const SenseEntry> senses(std::string_view lemma, Pos pos) const;
  bool contains(std::string_view lemma, Pos pos) const;
  std::size_t num_lemma_pos() const { return entries_.size(); }

 private:
  static std::string key(std::string_view lemma, Pos pos);
  std::unordered_map<std::string, std::vector<SenseEntry>> entries_;
};

struct CorpusStats {
  std::size_t total = 0;
  std::size_t noun = 0;
  std::size_t verb = 0;
  std::size_t adj = 0;
  std::size_t adv = 0;
  std::size_t other = 0;
};

struct ParsedCorpus {
  std::vector<Sentence> sentences;
  std::vector<WsdInstance> instances;
};

// Corpus XML: <corpus> -> <text id> -> <sentence id> with <wf lemma pos>
// and <instance id lemma pos> children. Instances come back with empty
// gold_keys. Unknown attributes are ignored, unknown elements are errors.
ParsedCorpus parse_corpus(std::string_view xml_text);

// Inverse of parse_corpus up to structural equality (text grouping is not
// part of the in-memory model, so everything lands under one <text>).
std::string write_corpus_xml(std::span<const Sentence> sentences);

using GoldKeys = std::map<std::string, std::set<std::string>>;

// One line per instance: `instance_id key1 [key2 ...]`.
GoldKeys parse_gold_keys(std::string_view text);

// Inventory TSV: lemma<TAB>pos<TAB>sense_key<TAB>gloss, `#` comments ignored.
SenseInventory parse_inventory(std::string_view tsv_text);

CorpusStats compute_stats(std::span<const WsdInstance> instances);

// Copies gold keys onto matching instances. Every gold id must name a known
// instance and every instance must receive keys; both mismatches are data
// errors (the gold file is the scoring denominator).
void apply_gold_keys(std::vector<WsdInstance>& instances, const GoldKeys& gold);

struct InventorySplit {
  std::vector<WsdInstance> resolved;
  std::vector<WsdInstance> skipped;  // (lemma, pos) absent from the inventory
};

// Instances the inventory cannot answer are reported, never dropped.
InventorySplit partition_by_inventory(std::span<const WsdInstance> instances,
                                      const SenseInventory& inventory);

using SentenceIndex = std::unordered_map<std::string, const Sentence*>;
SentenceIndex index_sentences(std::span<const Sentence> sentences);

}  // namespace wsd::corpus
