#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "support/fixtures.hpp"
#include "wsd/disambiguator.hpp"
#include "wsd/error.hpp"
#include "wsd/train.hpp"

using namespace wsd;
using namespace wsd::eval;

namespace {

nn::Model fresh_model(nn::HeadKind head, std::uint64_t seed) {
  corpus::SenseInventory inventory =
      corpus::parse_inventory(testfix::kMiniInventory);
  corpus::ParsedCorpus parsed = corpus::parse_corpus(testfix::kMiniCorpusXml);
  corpus::GoldKeys gold = corpus::parse_gold_keys(testfix::kMiniGold);
  corpus::apply_gold_keys(parsed.instances, gold);
  pairgen::TrainingSet set = pairgen::build_training_set(
      parsed.instances, parsed.sentences, inventory, {},
      nn::wants_ws_markup(head));

  nn::Model model;
  model.vocab = nn::Vocabulary::build(set.pairs, 1);
  model.config = nn::toy_encoder_preset();
  model.config.model_dim = 16;
  model.config.num_heads = 2;
  model.config.feedforward_dim = 32;
  model.config.head = head;
  model.config.vocab_size = model.vocab.size();
  rng::Engine eng(seed);
  model.params = nn::init_parameters(model.config, eng);
  return model;
}

nn::Model memorized_model(nn::HeadKind head) {
  corpus::SenseInventory inventory =
      corpus::parse_inventory(testfix::kMiniInventory);
  corpus::ParsedCorpus parsed = corpus::parse_corpus(testfix::kMiniCorpusXml);
  corpus::GoldKeys gold = corpus::parse_gold_keys(testfix::kMiniGold);
  corpus::apply_gold_keys(parsed.instances, gold);
  pairgen::TrainingSet set = pairgen::build_training_set(
      parsed.instances, parsed.sentences, inventory, {},
      nn::wants_ws_markup(head));

  nn::EncoderConfig enc = nn::toy_encoder_preset();
  enc.head = head;
  nn::TrainConfig tc = nn::toy_train_preset();
  tc.batch_size = 4;
  tc.num_epochs = 120.0;  // five pairs memorize slowly from a zero head
  tc.seed = 5;
  nn::TrainResult result = nn::train(set.pairs, enc, tc);
  return {std::move(result.params), result.encoder_config,
          std::move(result.vocab)};
}

corpus::GoldKeys gold_of(std::initializer_list<std::pair<std::string, std::string>> kv) {
  corpus::GoldKeys gold;
  for (const auto& [id, key] : kv) gold[id] = {key};
  return gold;
}

}  // namespace

TEST_CASE("single-sense instances return that sense regardless of score") {
  corpus::SenseInventory inv = corpus::parse_inventory("x\tNOUN\tx0\tsome gloss\n");
  corpus::Sentence sent;
  sent.id = "s0";
  for (const char* w : {"a", "x", "b"}) {
    corpus::Token t;
    t.surface = w;
    t.lemma = w;
    t.pos = corpus::Pos::Noun;
    sent.words.push_back(t);
  }
  corpus::WsdInstance inst;
  inst.instance_id = "i0";
  inst.sentence_ref = "s0";
  inst.target_position = 1;
  inst.lemma = "x";
  inst.pos = corpus::Pos::Noun;

  nn::Model model = fresh_model(nn::HeadKind::SentCls, 2);
  Prediction p = disambiguate(model, inst, sent, inv);
  CHECK(p.sense_key == "x0");
  CHECK(p.instance_id == "i0");
}

TEST_CASE("exact probability ties break to the inventory-first sense") {
  // zero head -> every candidate scores exactly 0.5
  nn::Model model = fresh_model(nn::HeadKind::SentCls, 3);
  corpus::ParsedCorpus parsed = corpus::parse_corpus(testfix::kMiniCorpusXml);
  corpus::SenseInventory inv = corpus::parse_inventory(testfix::kMiniInventory);
  const corpus::Sentence& s0 = parsed.sentences[0];
  Prediction p = disambiguate(model, parsed.instances[0], s0, inv);
  CHECK(p.sense_key == "bark%1:20:00::");  // first bark sense in file order
  CHECK(p.match_probability == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("memorized model picks the tree sense on the tree sentence") {
  nn::Model model = memorized_model(nn::HeadKind::SentCls);
  corpus::ParsedCorpus parsed = corpus::parse_corpus(testfix::kMiniCorpusXml);
  corpus::SenseInventory inv = corpus::parse_inventory(testfix::kMiniInventory);
  corpus::SentenceIndex sentences = corpus::index_sentences(parsed.sentences);

  const corpus::WsdInstance& tree_bark = parsed.instances[2];  // d0.s1.t2
  const corpus::Sentence& sent = *sentences.at(tree_bark.sentence_ref);
  Prediction p = disambiguate(model, tree_bark, sent, inv);
  CHECK(p.sense_key == "bark%1:20:01::");

  // brute-force oracle: score both candidates directly and compare
  corpus::WsdInstance unlabeled = tree_bark;
  unlabeled.gold_keys.clear();
  auto pairs = pairgen::build_pairs(unlabeled, sent, inv, false);
  double best = -1.0;
  std::string best_key;
  for (const auto& pair : pairs) {
    std::vector<nn::EncodedPair> enc{
        nn::encode_pair(pair, model.vocab, model.config)};
    auto out = nn::forward(model.params, enc, model.config);
    const double match = nn::softmax_pair(out[0].logits)[1];
    if (match > best) {
      best = match;
      best_key = pair.sense_key;
    }
  }
  CHECK(p.sense_key == best_key);
  CHECK(p.match_probability == doctest::Approx(best).epsilon(1e-12));

  // the dog sentence goes the other way
  const corpus::WsdInstance& dog_bark = parsed.instances[0];
  Prediction q = disambiguate(model, dog_bark,
                              *sentences.at(dog_bark.sentence_ref), inv);
  CHECK(q.sense_key == "bark%1:20:00::");
}

TEST_CASE("missing lemma raises a missing-sense error") {
  nn::Model model = fresh_model(nn::HeadKind::SentCls, 4);
  corpus::SenseInventory inv = corpus::parse_inventory(testfix::kMiniInventory);
  corpus::Sentence sent;
  sent.id = "s0";
  corpus::Token t;
  t.surface = "zebra";
  t.lemma = "zebra";
  t.pos = corpus::Pos::Noun;
  sent.words.push_back(t);
  corpus::WsdInstance inst;
  inst.instance_id = "i0";
  inst.sentence_ref = "s0";
  inst.target_position = 0;
  inst.lemma = "zebra";
  inst.pos = corpus::Pos::Noun;
  try {
    disambiguate(model, inst, sent, inv);
    FAIL("expected missing-sense");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingSense);
  }
}

TEST_CASE("score hand-counted fixtures") {
  SUBCASE("all four correct is F1 100.0 exactly") {
    corpus::GoldKeys gold =
        gold_of({{"a", "k"}, {"b", "k"}, {"c", "k"}, {"d", "k"}});
    std::map<std::string, corpus::Pos> pos{{"a", corpus::Pos::Noun},
                                           {"b", corpus::Pos::Noun},
                                           {"c", corpus::Pos::Verb},
                                           {"d", corpus::Pos::Verb}};
    std::vector<Prediction> preds{{"a", "k", 1}, {"b", "k", 1}, {"c", "k", 1},
                                  {"d", "k", 1}};
    EvaluationReport r = score(preds, gold, pos);
    CHECK(r.f1_overall == 100.0);
    CHECK(r.n_instances == 4);
  }

  SUBCASE("three of four is 75.0") {
    corpus::GoldKeys gold =
        gold_of({{"a", "k"}, {"b", "k"}, {"c", "k"}, {"d", "k"}});
    std::map<std::string, corpus::Pos> pos{{"a", corpus::Pos::Noun},
                                           {"b", corpus::Pos::Noun},
                                           {"c", corpus::Pos::Verb},
                                           {"d", corpus::Pos::Verb}};
    std::vector<Prediction> preds{{"a", "k", 1}, {"b", "wrong", 1},
                                  {"c", "k", 1}, {"d", "k", 1}};
    EvaluationReport r = score(preds, gold, pos);
    CHECK(r.f1_overall == 75.0);
  }

  SUBCASE("10 instances: 2 of 6 nouns wrong, verbs 4/4") {
    corpus::GoldKeys gold;
    std::map<std::string, corpus::Pos> pos;
    std::vector<Prediction> preds;
    for (int i = 0; i < 6; ++i) {
      std::string id = "n" + std::to_string(i);
      gold[id] = {"k"};
      pos[id] = corpus::Pos::Noun;
      preds.push_back({id, i < 2 ? "wrong" : "k", 1});
    }
    for (int i = 0; i < 4; ++i) {
      std::string id = "v" + std::to_string(i);
      gold[id] = {"k"};
      pos[id] = corpus::Pos::Verb;
      preds.push_back({id, "k", 1});
    }
    EvaluationReport r = score(preds, gold, pos);
    CHECK(r.f1_overall == 80.0);
    CHECK(round_percent(r.f1_by_pos.at(corpus::Pos::Noun)) == 66.7);
    CHECK(r.f1_by_pos.at(corpus::Pos::Verb) == 100.0);
  }

  SUBCASE("multi-key gold lines accept any listed key") {
    corpus::GoldKeys gold;
    gold["a"] = {"k1", "k2"};
    std::map<std::string, corpus::Pos> pos{{"a", corpus::Pos::Noun}};
    std::vector<Prediction> preds{{"a", "k2", 1}};
    CHECK(score(preds, gold, pos).f1_overall == 100.0);
  }
}

TEST_CASE("score validation errors") {
  corpus::GoldKeys gold = gold_of({{"a", "k"}});
  std::map<std::string, corpus::Pos> pos{{"a", corpus::Pos::Noun}};

  std::vector<Prediction> unknown{{"zzz", "k", 1}};
  CHECK_THROWS_AS(score(unknown, gold, pos), Error);

  std::vector<Prediction> dup{{"a", "k", 1}, {"a", "k", 1}};
  CHECK_THROWS_AS(score(dup, gold, pos), Error);
}

TEST_CASE("score is permutation-invariant and penalizes skips by default") {
  corpus::GoldKeys gold =
      gold_of({{"a", "k"}, {"b", "k"}, {"c", "k"}, {"d", "k"}});
  std::map<std::string, corpus::Pos> pos{{"a", corpus::Pos::Noun},
                                         {"b", corpus::Pos::Noun},
                                         {"c", corpus::Pos::Noun},
                                         {"d", corpus::Pos::Noun}};
  std::vector<Prediction> preds{{"a", "k", 1}, {"b", "k", 1}, {"c", "k", 1}};
  std::vector<Prediction> shuffled{{"c", "k", 1}, {"a", "k", 1}, {"b", "k", 1}};
  std::set<std::string> skipped{"d"};

  EvaluationReport r1 = score(preds, gold, pos, skipped, false);
  EvaluationReport r2 = score(shuffled, gold, pos, skipped, false);
  CHECK(r1.f1_overall == 75.0);  // d counted wrong
  CHECK(r1.f1_overall == r2.f1_overall);
  CHECK(r1.n_skipped == 1);

  EvaluationReport r3 = score(preds, gold, pos, skipped, true);
  CHECK(r3.f1_overall == 100.0);  // d excluded from the denominator
  CHECK(r3.n_instances == 4);     // the gold count is still reported
  CHECK(r3.n_skipped == 1);
}

TEST_CASE("adversarial predictions score zero") {
  corpus::GoldKeys gold;
  std::map<std::string, corpus::Pos> pos;
  std::vector<Prediction> preds;
  for (int i = 0; i < 50; ++i) {
    std::string id = "i" + std::to_string(i);
    gold[id] = {"right"};
    pos[id] = corpus::Pos::Noun;
    preds.push_back({id, "wrong", 1});
  }
  CHECK(score(preds, gold, pos).f1_overall == 0.0);
}

TEST_CASE("random choice over k=4 senses lands near 25 percent") {
  corpus::GoldKeys gold;
  std::map<std::string, corpus::Pos> pos;
  std::vector<Prediction> preds;
  rng::Engine eng(rng::mix(2718, "random-baseline"));
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    std::string id = "i" + std::to_string(i);
    const std::size_t gold_sense = rng::uniform_below(eng, 4);
    gold[id] = {"k" + std::to_string(gold_sense)};
    pos[id] = corpus::Pos::Noun;
    const std::size_t guess = rng::uniform_below(eng, 4);
    preds.push_back({id, "k" + std::to_string(guess), 0.25});
  }
  EvaluationReport r = score(preds, gold, pos);
  CHECK(std::abs(r.f1_overall - 25.0) < 3.0);
}

TEST_CASE("scorer equals an independent one-pass count on random fixtures") {
  rng::Engine eng(rng::mix(314, "scorer-oracle"));
  corpus::GoldKeys gold;
  std::map<std::string, corpus::Pos> pos;
  std::vector<Prediction> preds;
  std::size_t plain_count = 0;
  const corpus::Pos tags[] = {corpus::Pos::Noun, corpus::Pos::Verb,
                              corpus::Pos::Adj, corpus::Pos::Adv};
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    std::string id = "i" + std::to_string(i);
    gold[id] = {"k" + std::to_string(rng::uniform_below(eng, 3))};
    pos[id] = tags[rng::uniform_below(eng, 4)];
    std::string guessed = "k" + std::to_string(rng::uniform_below(eng, 3));
    if (gold[id].contains(guessed)) ++plain_count;
    preds.push_back({id, guessed, 0.5});
  }
  EvaluationReport r = score(preds, gold, pos);
  CHECK(r.f1_overall ==
        100.0 * static_cast<double>(plain_count) / static_cast<double>(n));
}

TEST_CASE("round_percent rounds half up to one decimal") {
  CHECK(round_percent(66.6666666) == 66.7);
  CHECK(round_percent(75.0) == 75.0);
  CHECK(round_percent(0.04) == 0.0);
  CHECK(round_percent(99.95) == 100.0);
}

TEST_CASE("report table layout") {
  SUBCASE("empty input keeps only the header") {
    ReportTable t = report_table({});
    CHECK(t.text == "Data-set  Model\n");
  }

  SUBCASE("two datasets x two models group by dataset") {
    std::vector<EvaluationReport> reports;
    for (const char* d : {"SE2", "SE3"})
      for (const char* m : {"model-a", "model-b"}) {
        EvaluationReport r;
        r.dataset = d;
        r.model = m;
        r.experiment = "Base";
        r.f1_overall = 50.0;
        reports.push_back(r);
      }
    ReportTable t = report_table(reports);
    // header + 4 data rows
    std::size_t lines = 0;
    for (char c : t.text)
      if (c == '\n') ++lines;
    CHECK(lines == 5);
    CHECK(t.text.find("SE2") != std::string::npos);
    CHECK(t.text.find("SE3") != std::string::npos);
  }

  SUBCASE("published-shape fixture renders one row with four columns") {
    std::vector<EvaluationReport> reports;
    const std::pair<const char*, double> cells[] = {
        {"Huang", 75.1}, {"Base", 64.6}, {"a=0.8", 72.3}, {"a=1.2", 72.7}};
    for (const auto& [tag, f1] : cells) {
      EvaluationReport r;
      r.dataset = "SE13";
      r.model = "GlossBERT(Sent-CLS)";
      r.experiment = tag;
      r.f1_overall = f1;
      reports.push_back(r);
    }
    ReportTable t = report_table(reports);
    CHECK(t.text.find("Huang") != std::string::npos);
    CHECK(t.text.find("75.1") != std::string::npos);
    CHECK(t.text.find("64.6") != std::string::npos);
    CHECK(t.text.find("72.3") != std::string::npos);
    CHECK(t.text.find("72.7") != std::string::npos);
    // one data row: dataset+model appear once
    CHECK(t.text.find("SE13") == t.text.rfind("SE13"));
  }
}

TEST_CASE("report csv round trips including escapes") {
  std::vector<EvaluationReport> reports(2);
  reports[0].dataset = "SE2";
  reports[0].model = "model, with comma";
  reports[0].experiment = "Base";
  reports[0].f1_overall = 66.66;
  reports[0].f1_by_pos[corpus::Pos::Noun] = 50.0;
  reports[0].n_instances = 10;
  reports[0].n_skipped = 1;
  reports[1].dataset = "SE3";
  reports[1].model = "quote\"inside";
  reports[1].experiment = "a=0.8";
  reports[1].f1_overall = 10.0;
  reports[1].n_instances = 5;

  std::string csv = write_report_csv(reports);
  std::vector<EvaluationReport> back = read_report_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].dataset == "SE2");
  CHECK(back[0].model == "model, with comma");
  CHECK(back[0].f1_overall == doctest::Approx(66.7));  // rounded at write time
  CHECK(back[0].f1_by_pos.at(corpus::Pos::Noun) == doctest::Approx(50.0));
  CHECK(back[0].n_instances == 10);
  CHECK(back[0].n_skipped == 1);
  CHECK(back[1].model == "quote\"inside");
  CHECK(back[1].experiment == "a=0.8");

  CHECK_THROWS_AS(read_report_csv("no header\n"), Error);
}

TEST_CASE("predictions file uses the gold-key line format") {
  std::vector<Prediction> preds{{"i0", "bark%1:20:00::", 0.9},
                                {"i1", "tree%1:20:00::", 0.8}};
  std::string text = write_predictions(preds);
  CHECK(text == "i0 bark%1:20:00::\ni1 tree%1:20:00::\n");
  corpus::GoldKeys parsed = corpus::parse_gold_keys(text);
  CHECK(parsed.size() == 2);
  CHECK(parsed.at("i0") == std::set<std::string>{"bark%1:20:00::"});
}
