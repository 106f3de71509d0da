#include "wsd/pairgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "wsd/error.hpp"
#include "wsd/strings.hpp"

namespace wsd::pairgen {

std::vector<ContextGlossPair> build_pairs(const corpus::WsdInstance& instance,
                                          const corpus::Sentence& sentence,
                                          const corpus::SenseInventory& inventory,
                                          bool ws) {
  std::span<const corpus::SenseEntry> senses =
      inventory.senses(instance.lemma, instance.pos);
  if (senses.empty())
    fail(ErrorKind::MissingSense,
         "no inventory entry for (" + instance.lemma + ", " +
             std::string(corpus::to_string(instance.pos)) + ") needed by '" +
             instance.instance_id + "'");
  if (instance.target_position >= sentence.words.size())
    fail(ErrorKind::Precondition,
         "target position " + std::to_string(instance.target_position) +
             " out of range in sentence '" + sentence.id + "'");

  std::vector<std::string> context;
  context.reserve(sentence.words.size() + (ws ? 2 : 0));
  std::size_t start = instance.target_position;
  for (std::size_t i = 0; i < sentence.words.size(); ++i) {
    if (ws && i == instance.target_position) {
      context.push_back("\"");
      start = context.size();
    }
    context.push_back(sentence.words[i].surface);
    if (ws && i == instance.target_position) context.push_back("\"");
  }
  std::size_t end = start + 1;

  const bool labeled = !instance.gold_keys.empty();
  std::vector<ContextGlossPair> pairs;
  pairs.reserve(senses.size());
  bool any_positive = false;
  for (const corpus::SenseEntry& sense : senses) {
    ContextGlossPair pair;
    pair.instance_id = instance.instance_id;
    pair.context = context;
    pair.target_start = start;
    pair.target_end = end;
    pair.gloss = ws ? instance.lemma + ": " + sense.gloss : sense.gloss;
    pair.sense_key = sense.sense_key;
    pair.positive = labeled && instance.gold_keys.contains(sense.sense_key);
    any_positive = any_positive || pair.positive;
    pairs.push_back(std::move(pair));
  }
  if (labeled && !any_positive)
    fail(ErrorKind::GoldMismatch,
         "none of the " + std::to_string(senses.size()) + " senses of (" +
             instance.lemma + ", " +
             std::string(corpus::to_string(instance.pos)) +
             ") matches a gold key of '" + instance.instance_id + "'");
  return pairs;
}

std::size_t pair_count(std::size_t n_senses, double alpha) {
  if (n_senses == 0) fail(ErrorKind::Precondition, "n_senses must be >= 1");
  if (alpha <= 0.0) fail(ErrorKind::Precondition, "alpha must be > 0");
  double raw = std::pow(static_cast<double>(n_senses), alpha);
  // Snap to the nearest integer when N^alpha is mathematically integral,
  // so e.g. 4^1.5 never ceils to 9.
  double nearest = std::round(raw);
  double count =
      (std::abs(raw - nearest) < 1e-9) ? nearest : std::ceil(raw);
  return std::max<std::size_t>(1, static_cast<std::size_t>(count));
}

std::vector<ContextGlossPair> alpha_resample(
    std::span<const ContextGlossPair> pairs, const SamplingConfig& config,
    rng::Engine& stream) {
  if (pairs.empty())
    fail(ErrorKind::Precondition, "alpha_resample needs a non-empty pair list");
  auto positive = std::find_if(pairs.begin(), pairs.end(),
                               [](const ContextGlossPair& p) { return p.positive; });
  if (positive == pairs.end())
    fail(ErrorKind::GoldMismatch,
         "no positive pair among the " + std::to_string(pairs.size()) +
             " baseline pairs of '" + pairs.front().instance_id + "'");

  std::size_t total = pair_count(pairs.size(), config.alpha);
  std::vector<ContextGlossPair> out;
  out.reserve(total);
  for (std::size_t i = 0; i + 1 < total; ++i)
    out.push_back(pairs[rng::uniform_below(stream, pairs.size())]);
  out.push_back(*positive);  // guaranteed positive, appended last
  return out;
}

TrainingSet build_training_set(std::span<const corpus::WsdInstance> instances,
                               std::span<const corpus::Sentence> sentences,
                               const corpus::SenseInventory& inventory,
                               const SamplingConfig& config, bool ws) {
  if (config.mode == SamplingMode::Alpha && config.alpha <= 0.0)
    fail(ErrorKind::Config, "alpha must be > 0");
  corpus::SentenceIndex index = corpus::index_sentences(sentences);
  TrainingSet set;
  for (const corpus::WsdInstance& inst : instances) {
    if (!inventory.contains(inst.lemma, inst.pos)) {
      set.skipped.push_back(inst);
      continue;
    }
    auto sent = index.find(inst.sentence_ref);
    if (sent == index.end())
      fail(ErrorKind::Validation, "instance '" + inst.instance_id +
                                      "' references unknown sentence '" +
                                      inst.sentence_ref + "'");
    std::vector<ContextGlossPair> pairs =
        build_pairs(inst, *sent->second, inventory, ws);
    if (config.mode == SamplingMode::Alpha) {
      rng::Engine stream = rng::instance_stream(config.seed, inst.instance_id);
      pairs = alpha_resample(pairs, config, stream);
    }
    for (auto& p : pairs) set.pairs.push_back(std::move(p));
  }
  return set;
}

std::string write_pairs_tsv(std::span<const ContextGlossPair> pairs) {
  std::string out =
      "instance_id\tlabel\ttarget_start\ttarget_end\tcontext\tgloss\tsense_key\n";
  for (const ContextGlossPair& p : pairs) {
    out += p.instance_id;
    out += '\t';
    out += p.positive ? '1' : '0';
    out += '\t';
    out += std::to_string(p.target_start);
    out += '\t';
    out += std::to_string(p.target_end);
    out += '\t';
    out += strings::join(p.context, " ");
    out += '\t';
    out += p.gloss;
    out += '\t';
    out += p.sense_key;
    out += '\n';
  }
  return out;
}

std::vector<ContextGlossPair> read_pairs_tsv(std::string_view text) {
  std::vector<ContextGlossPair> pairs;
  std::size_t line_no = 0;
  bool saw_header = false;
  for (const std::string& raw : strings::split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!saw_header) {
      saw_header = true;
      if (!strings::starts_with(line, "instance_id\t"))
        fail(ErrorKind::Format, "line 1: missing training-pair TSV header");
      continue;
    }
    std::vector<std::string> fields = strings::split(line, '\t');
    if (fields.size() != 7)
      fail(ErrorKind::Format, "line " + std::to_string(line_no) +
                                  ": expected 7 fields, got " +
                                  std::to_string(fields.size()));
    ContextGlossPair p;
    p.instance_id = fields[0];
    if (fields[1] != "0" && fields[1] != "1")
      fail(ErrorKind::Format,
           "line " + std::to_string(line_no) + ": label must be 0 or 1");
    p.positive = fields[1] == "1";
    char* endp = nullptr;
    p.target_start = std::strtoull(fields[2].c_str(), &endp, 10);
    p.target_end = std::strtoull(fields[3].c_str(), &endp, 10);
    p.context = strings::split_ws(fields[4]);
    p.gloss = fields[5];
    p.sense_key = fields[6];
    if (p.target_start >= p.target_end || p.target_end > p.context.size())
      fail(ErrorKind::Validation,
           "line " + std::to_string(line_no) + ": target span [" +
               std::to_string(p.target_start) + ", " +
               std::to_string(p.target_end) + ") out of context bounds");
    pairs.push_back(std::move(p));
  }
  if (!saw_header)
    fail(ErrorKind::Format, "empty training-pair file (missing header)");
  return pairs;
}

}  // namespace wsd::pairgen
