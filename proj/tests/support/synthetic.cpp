#include "synthetic.hpp"

#include <array>

#include "wsd/rng.hpp"

namespace wsd::synth {

namespace {

struct Lexeme {
  std::string lemma;
  std::vector<std::string> keys;
  std::vector<std::string> glosses;
  std::vector<std::array<std::string, 2>> markers;  // per sense
};

const char* kFillers[] = {"today", "yesterday", "often", "rarely", "sometimes"};
const char* kVerbs[] = {"was", "seemed", "looked", "stayed"};

}  // namespace

Dataset make_dataset(const Params& params) {
  std::vector<Lexeme> lexicon;
  Dataset data;

  for (std::size_t i = 0; i < params.num_lemmas; ++i) {
    Lexeme lex;
    lex.lemma = "w" + std::to_string(i);
    const std::size_t senses = 2 + i % 3;  // 2..4
    for (std::size_t j = 0; j < senses; ++j) {
      const std::string tag = std::to_string(i) + "x" + std::to_string(j);
      std::array<std::string, 2> marks{"ma" + tag, "mb" + tag};
      std::string gloss =
          marks[0] + " " + marks[1] + " quality of " + lex.lemma;
      std::string key = lex.lemma + "%" + std::to_string(j);
      data.inventory.add(lex.lemma, corpus::Pos::Noun,
                         {key, gloss});
      data.inventory_tsv += lex.lemma + "\tNOUN\t" + key + "\t" + gloss + "\n";
      lex.keys.push_back(key);
      lex.glosses.push_back(gloss);
      lex.markers.push_back(marks);
    }
    lexicon.push_back(std::move(lex));
  }

  rng::Engine eng(rng::mix(params.seed, "synthetic"));
  auto emit = [&](const std::string& prefix, std::size_t count,
                  std::vector<corpus::Sentence>& sentences,
                  std::vector<corpus::WsdInstance>& instances,
                  corpus::GoldKeys& gold, bool label_instances) {
    for (std::size_t n = 0; n < count; ++n) {
      const Lexeme& lex =
          lexicon[rng::uniform_below(eng, lexicon.size())];
      const std::size_t sense = rng::uniform_below(eng, lex.keys.size());
      const char* verb = kVerbs[rng::uniform_below(eng, std::size(kVerbs))];
      const char* filler =
          kFillers[rng::uniform_below(eng, std::size(kFillers))];

      corpus::Sentence s;
      s.id = prefix + ".s" + std::to_string(n);
      const std::string id = s.id + ".t1";
      auto word = [](std::string surface, std::string lemma, corpus::Pos pos) {
        corpus::Token t;
        t.surface = std::move(surface);
        t.lemma = std::move(lemma);
        t.pos = pos;
        return t;
      };
      s.words.push_back(word("the", "the", corpus::Pos::Other));
      corpus::Token target = word(lex.lemma, lex.lemma, corpus::Pos::Noun);
      target.instance_id = id;
      s.words.push_back(target);
      s.words.push_back(word(verb, verb, corpus::Pos::Verb));
      s.words.push_back(word(lex.markers[sense][0], lex.markers[sense][0],
                             corpus::Pos::Adj));
      s.words.push_back(word("and", "and", corpus::Pos::Other));
      s.words.push_back(word(lex.markers[sense][1], lex.markers[sense][1],
                             corpus::Pos::Adj));
      s.words.push_back(word(filler, filler, corpus::Pos::Adv));

      corpus::WsdInstance inst;
      inst.instance_id = id;
      inst.sentence_ref = s.id;
      inst.target_position = 1;
      inst.lemma = lex.lemma;
      inst.pos = corpus::Pos::Noun;
      if (label_instances) inst.gold_keys = {lex.keys[sense]};

      gold[id] = {lex.keys[sense]};
      sentences.push_back(std::move(s));
      instances.push_back(std::move(inst));
    }
  };

  emit("tr", params.num_train, data.train_sentences, data.train_instances,
       data.train_gold, true);
  emit("te", params.num_test, data.test_sentences, data.test_instances,
       data.test_gold, false);

  double acc = 0.0;
  for (const corpus::WsdInstance& inst : data.test_instances) {
    const std::size_t k =
        data.inventory.senses(inst.lemma, inst.pos).size();
    acc += 100.0 / static_cast<double>(k);
  }
  data.random_baseline_pct =
      data.test_instances.empty()
          ? 0.0
          : acc / static_cast<double>(data.test_instances.size());
  return data;
}

}  // namespace wsd::synth
