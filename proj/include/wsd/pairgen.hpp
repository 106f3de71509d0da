#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsd/corpus.hpp"
#include "wsd/rng.hpp"

namespace wsd::pairgen {

// One binary classification datapoint: does this gloss fit this context?
struct ContextGlossPair {
  std::string instance_id;
  std::vector<std::string> context;  // sentence surfaces, WS-marked if asked
  std::size_t target_start = 0;      // half-open [start, end) into context
  std::size_t target_end = 0;
  std::string gloss;
  std::string sense_key;
  bool positive = false;
};

enum class SamplingMode { Baseline, Alpha };

struct SamplingConfig {
  SamplingMode mode = SamplingMode::Baseline;
  double alpha = 1.0;           // must be > 0
  std::uint64_t seed = 42;
};

// One pair per sense of (lemma, pos), in inventory order. With gold keys
// present, matching senses are positive; instances without gold keys (eval
// candidates) come back all-negative. When `ws` is set, the target word is
// surrounded by standalone `"` tokens and the gloss gets a `lemma: ` prefix.
std::vector<ContextGlossPair> build_pairs(const corpus::WsdInstance& instance,
                                          const corpus::Sentence& sentence,
                                          const corpus::SenseInventory& inventory,
                                          bool ws);

// Total pairs emitted for one instance under alpha-resampling:
// max(1, ceil(n_senses^alpha)).
std::size_t pair_count(std::size_t n_senses, double alpha);

// pair_count - 1 uniform draws with replacement from the baseline pairs,
// then one copy of the first positive pair appended last.
std::vector<ContextGlossPair> alpha_resample(
    std::span<const ContextGlossPair> pairs, const SamplingConfig& config,
    rng::Engine& stream);

struct TrainingSet {
  std::vector<ContextGlossPair> pairs;
  std::vector<corpus::WsdInstance> skipped;  // no inventory entry
};

// Concatenation over instances in input order; each instance draws from its
// own (seed, instance_id) stream, so output per instance does not depend on
// corpus ordering.
TrainingSet build_training_set(std::span<const corpus::WsdInstance> instances,
                               std::span<const corpus::Sentence> sentences,
                               const corpus::SenseInventory& inventory,
                               const SamplingConfig& config, bool ws);

// TSV with header: instance_id, label, target_start, target_end,
// context (space-joined), gloss, sense_key. Byte-stable.
std::string write_pairs_tsv(std::span<const ContextGlossPair> pairs);
std::vector<ContextGlossPair> read_pairs_tsv(std::string_view text);

}  // namespace wsd::pairgen
