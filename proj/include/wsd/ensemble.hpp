#pragma once

#include <span>
#include <string>
#include <vector>

#include "wsd/checkpoint.hpp"
#include "wsd/corpus.hpp"

namespace wsd::ensemble {

// Members are combined by summing pre-softmax logits and applying one final
// softmax. All members must agree on output dimensionality; a mismatch is a
// hard error, never a silent drop.
struct EnsembleSpec {
  struct Member {
    std::string checkpoint_path;
    nn::HeadKind head = nn::HeadKind::SentCls;
  };
  std::vector<Member> members;
};

// Spec file: one `checkpoint_path<TAB>head_kind` per line.
EnsembleSpec parse_ensemble_spec(std::string_view text);

// Loads every member and validates the declared head against the checkpoint.
std::vector<nn::Model> load_members(const EnsembleSpec& spec);

// softmax(elementwise sum of member logit vectors), max-shifted.
std::vector<double> combine_logits(
    std::span<const std::vector<double>> member_logits);

// Scores each candidate sense with the combined match probability; each
// member sees its own encoding of the same candidates (WS markup only for
// sent-cls-ws members). Ties break to the lowest inventory index.
struct EnsemblePrediction {
  std::string sense_key;
  double match_probability = 0.0;
};

EnsemblePrediction ensemble_disambiguate(std::span<const nn::Model> members,
                                         const corpus::WsdInstance& instance,
                                         const corpus::Sentence& sentence,
                                         const corpus::SenseInventory& inventory);

}  // namespace wsd::ensemble
