#include "wsd/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "wsd/error.hpp"
#include "wsd/pairgen.hpp"
#include "wsd/strings.hpp"

namespace wsd::ensemble {

EnsembleSpec parse_ensemble_spec(std::string_view text) {
  EnsembleSpec spec;
  std::size_t line_no = 0;
  for (const std::string& raw : strings::split(text, '\n')) {
    ++line_no;
    std::string_view line = strings::trim(raw);
    if (line.empty() || strings::starts_with(line, "#")) continue;
    std::vector<std::string> fields = strings::split(line, '\t');
    if (fields.size() != 2)
      fail(ErrorKind::Format,
           "line " + std::to_string(line_no) +
               ": expected checkpoint_path<TAB>head_kind");
    EnsembleSpec::Member member;
    member.checkpoint_path = std::string(strings::trim(fields[0]));
    member.head = nn::parse_head_kind(strings::trim(fields[1]));
    spec.members.push_back(std::move(member));
  }
  if (spec.members.empty())
    fail(ErrorKind::Precondition, "ensemble spec lists no members");
  return spec;
}

std::vector<nn::Model> load_members(const EnsembleSpec& spec) {
  if (spec.members.empty())
    fail(ErrorKind::Precondition, "ensemble needs at least one member");
  std::vector<nn::Model> models;
  models.reserve(spec.members.size());
  for (const EnsembleSpec::Member& member : spec.members) {
    nn::Model model = nn::load_checkpoint(member.checkpoint_path);
    if (model.config.head != member.head)
      fail(ErrorKind::Validation,
           "ensemble spec declares head '" +
               std::string(nn::to_string(member.head)) + "' for '" +
               member.checkpoint_path + "' but the checkpoint was trained as '" +
               std::string(nn::to_string(model.config.head)) + "'");
    models.push_back(std::move(model));
  }
  return models;
}

std::vector<double> combine_logits(
    std::span<const std::vector<double>> member_logits) {
  if (member_logits.empty())
    fail(ErrorKind::Precondition, "combine_logits needs at least one member");
  const std::size_t dim = member_logits.front().size();
  for (const std::vector<double>& logits : member_logits) {
    if (logits.size() != dim)
      fail(ErrorKind::Shape,
           "member logit dimension " + std::to_string(logits.size()) +
               " incompatible with " + std::to_string(dim) +
               "; model excluded rather than silently dropped");
    for (double v : logits)
      if (!std::isfinite(v))
        fail(ErrorKind::Precondition, "non-finite member logit");
  }
  if (dim == 0) fail(ErrorKind::Shape, "member logits are zero-dimensional");

  std::vector<double> sum(dim, 0.0);
  for (const std::vector<double>& logits : member_logits)
    for (std::size_t i = 0; i < dim; ++i) sum[i] += logits[i];

  const double mx = *std::max_element(sum.begin(), sum.end());
  double z = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    sum[i] = std::exp(sum[i] - mx);
    z += sum[i];
  }
  for (double& v : sum) v /= z;
  return sum;
}

EnsemblePrediction ensemble_disambiguate(
    std::span<const nn::Model> members, const corpus::WsdInstance& instance,
    const corpus::Sentence& sentence,
    const corpus::SenseInventory& inventory) {
  if (members.empty())
    fail(ErrorKind::Precondition, "ensemble needs at least one member");
  std::span<const corpus::SenseEntry> senses =
      inventory.senses(instance.lemma, instance.pos);
  if (senses.empty())
    fail(ErrorKind::MissingSense,
         "no inventory entry for (" + instance.lemma + ", " +
             std::string(corpus::to_string(instance.pos)) + ")");

  // Candidate pairs per markup flavor; unlabeled (gold keys ignored here).
  corpus::WsdInstance unlabeled = instance;
  unlabeled.gold_keys.clear();
  std::vector<pairgen::ContextGlossPair> plain_pairs;
  std::vector<pairgen::ContextGlossPair> ws_pairs;

  // member_logits[m][c] = logit pair of member m on candidate c
  std::vector<std::vector<std::array<double, 2>>> member_logits(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    const nn::Model& model = members[m];
    const bool ws = nn::wants_ws_markup(model.config.head);
    std::vector<pairgen::ContextGlossPair>& pairs = ws ? ws_pairs : plain_pairs;
    if (pairs.empty())
      pairs = pairgen::build_pairs(unlabeled, sentence, inventory, ws);
    std::vector<nn::EncodedPair> encoded;
    encoded.reserve(pairs.size());
    for (const auto& p : pairs)
      encoded.push_back(nn::encode_pair(p, model.vocab, model.config));
    std::vector<nn::ClassifierOutput> outputs =
        nn::forward(model.params, encoded, model.config);
    member_logits[m].reserve(outputs.size());
    for (const auto& o : outputs) member_logits[m].push_back(o.logits);
  }

  EnsemblePrediction best;
  double best_prob = -1.0;
  for (std::size_t c = 0; c < senses.size(); ++c) {
    std::vector<std::vector<double>> logits_for_candidate;
    logits_for_candidate.reserve(members.size());
    for (std::size_t m = 0; m < members.size(); ++m)
      logits_for_candidate.push_back(
          {member_logits[m][c][0], member_logits[m][c][1]});
    std::vector<double> probs = combine_logits(logits_for_candidate);
    if (probs[1] > best_prob) {  // strict: ties keep the lowest index
      best_prob = probs[1];
      best.sense_key = senses[c].sense_key;
      best.match_probability = probs[1];
    }
  }
  return best;
}

}  // namespace wsd::ensemble
