#include "wsd/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "wsd/checkpoint.hpp"
#include "wsd/corpus.hpp"
#include "wsd/disambiguator.hpp"
#include "wsd/ensemble.hpp"
#include "wsd/error.hpp"
#include "wsd/pairgen.hpp"
#include "wsd/strings.hpp"
#include "wsd/train.hpp"

namespace wsd::cli {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::Io, "failed reading '" + path + "'");
  return text;
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorKind::Io, "failed writing '" + path + "'");
}

std::string path_stem(const std::string& path) {
  return fs::path(path).stem().string();
}

// ---------------------------------------------------------------------------
// Flat key-value run configuration. Keys are long option names without the
// dashes; command-line flags take precedence over file values.

std::map<std::string, std::string> parse_flat_config(const std::string& path) {
  std::map<std::string, std::string> kv;
  const std::string text = read_file(path);
  std::size_t line_no = 0;
  for (const std::string& raw : strings::split(text, '\n')) {
    ++line_no;
    std::string_view line = strings::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::Config, "config line " + std::to_string(line_no) +
                                  ": expected key=value");
    std::string key(strings::trim(line.substr(0, eq)));
    std::string value(strings::trim(line.substr(eq + 1)));
    if (key.empty())
      fail(ErrorKind::Config,
           "config line " + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

bool truthy(const std::string& value, const std::string& key) {
  if (value == "1" || value == "true" || value == "yes" || value == "on")
    return true;
  if (value == "0" || value == "false" || value == "no" || value == "off")
    return false;
  fail(ErrorKind::Config,
       "config key '" + key + "' expects a boolean, got '" + value + "'");
}

// Turns config entries into argv tokens placed ahead of the user's flags,
// so explicit flags win under the take-last policy. Keys the subcommand does
// not know are ignored (one config file can serve the whole pipeline).
std::vector<std::string> apply_config_file(const CLI::App& app,
                                           std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (strings::starts_with(args[i], "--config="))
      config_path = args[i].substr(9);
  }
  if (config_path.empty() || args.empty() ||
      strings::starts_with(args.front(), "-"))
    return args;
  const CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (sub == nullptr) return args;

  std::vector<std::string> injected;
  for (const auto& [key, value] : parse_flat_config(config_path)) {
    if (key == "config") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || !opt->nonpositional()) continue;
    if (opt->get_expected() == 0) {  // flag
      if (truthy(value, key)) injected.push_back("--" + key);
    } else {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

// Options shared by train-style commands; sentinel values mean "preset".
struct ModelOptions {
  std::string preset = "paper";
  std::string head = "sent-cls";
  double alpha = -1.0;  // <= 0 means baseline mode
  std::uint64_t seed = 42;
  long max_seq_length = -1;
  long model_dim = -1;
  long num_layers = -1;
  long num_heads = -1;
  long ffn_dim = -1;
  double dropout = -1.0;
  long batch_size = -1;
  double learning_rate = -1.0;
  double num_epochs = -1.0;
  long grad_accum_steps = -1;
  long vocab_min_count = -1;
};

void add_sampling_options(CLI::App* cmd, ModelOptions& opts) {
  cmd->add_option("--alpha", opts.alpha,
                  "resampling exponent; omit for the baseline N-pair scheme");
  cmd->add_option("--seed", opts.seed, "master seed for all randomness");
}

void add_model_options(CLI::App* cmd, ModelOptions& opts) {
  cmd->add_option("--preset", opts.preset, "config preset: paper or toy")
      ->check(CLI::IsMember({"paper", "toy"}));
  cmd->add_option("--head", opts.head,
                  "classifier head: token-cls, sent-cls, or sent-cls-ws");
  cmd->add_option("--max-seq-length", opts.max_seq_length, "sequence budget");
  cmd->add_option("--model-dim", opts.model_dim, "encoder width");
  cmd->add_option("--num-layers", opts.num_layers, "encoder depth");
  cmd->add_option("--num-heads", opts.num_heads, "attention heads");
  cmd->add_option("--ffn-dim", opts.ffn_dim, "feed-forward width");
  cmd->add_option("--dropout", opts.dropout, "dropout rate");
  cmd->add_option("--batch-size", opts.batch_size, "micro-batch size");
  cmd->add_option("--learning-rate", opts.learning_rate, "Adam learning rate");
  cmd->add_option("--num-epochs", opts.num_epochs, "training epochs (real)");
  cmd->add_option("--grad-accum-steps", opts.grad_accum_steps,
                  "micro-batches per optimizer update");
  cmd->add_option("--vocab-min-count", opts.vocab_min_count,
                  "minimum token frequency kept in the vocabulary");
}

nn::EncoderConfig resolve_encoder_config(const ModelOptions& opts) {
  nn::EncoderConfig cfg = opts.preset == "toy" ? nn::toy_encoder_preset()
                                               : nn::paper_encoder_preset();
  cfg.head = nn::parse_head_kind(opts.head);
  if (opts.max_seq_length > 0)
    cfg.max_seq_length = static_cast<std::size_t>(opts.max_seq_length);
  if (opts.model_dim > 0) cfg.model_dim = static_cast<std::size_t>(opts.model_dim);
  if (opts.num_layers > 0)
    cfg.num_layers = static_cast<std::size_t>(opts.num_layers);
  if (opts.num_heads > 0) cfg.num_heads = static_cast<std::size_t>(opts.num_heads);
  if (opts.ffn_dim > 0)
    cfg.feedforward_dim = static_cast<std::size_t>(opts.ffn_dim);
  if (opts.dropout >= 0.0) cfg.dropout_rate = opts.dropout;
  return cfg;
}

nn::TrainConfig resolve_train_config(const ModelOptions& opts) {
  nn::TrainConfig cfg = opts.preset == "toy" ? nn::toy_train_preset()
                                             : nn::paper_train_preset();
  cfg.seed = opts.seed;
  if (opts.batch_size > 0) cfg.batch_size = static_cast<std::size_t>(opts.batch_size);
  if (opts.learning_rate > 0.0) cfg.learning_rate = opts.learning_rate;
  if (opts.num_epochs >= 0.0) cfg.num_epochs = opts.num_epochs;
  if (opts.grad_accum_steps > 0)
    cfg.grad_accum_steps = static_cast<std::size_t>(opts.grad_accum_steps);
  if (opts.vocab_min_count > 0)
    cfg.vocab_min_count = static_cast<std::size_t>(opts.vocab_min_count);
  return cfg;
}

pairgen::SamplingConfig resolve_sampling_config(const ModelOptions& opts) {
  pairgen::SamplingConfig cfg;
  cfg.seed = opts.seed;
  if (opts.alpha > 0.0) {
    cfg.mode = pairgen::SamplingMode::Alpha;
    cfg.alpha = opts.alpha;
  }
  return cfg;
}

struct LoadedDataset {
  corpus::ParsedCorpus parsed;
  corpus::GoldKeys gold;
  corpus::SenseInventory inventory;
};

LoadedDataset load_dataset(const std::string& corpus_path,
                           const std::string& gold_path,
                           const std::string& inventory_path) {
  LoadedDataset data;
  data.parsed = corpus::parse_corpus(read_file(corpus_path));
  data.gold = corpus::parse_gold_keys(read_file(gold_path));
  data.inventory = corpus::parse_inventory(read_file(inventory_path));
  return data;
}

void report_skipped(std::span<const corpus::WsdInstance> skipped) {
  for (const corpus::WsdInstance& inst : skipped)
    std::cerr << "skipped instance " << inst.instance_id
              << ": no inventory entry for (" << inst.lemma << ", "
              << corpus::to_string(inst.pos) << ")\n";
}

// ---------------------------------------------------------------------------

int cmd_stats(const std::string& corpus_path) {
  corpus::ParsedCorpus parsed = corpus::parse_corpus(read_file(corpus_path));
  corpus::CorpusStats s = corpus::compute_stats(parsed.instances);
  std::printf("%8s %8s %8s %8s %8s %8s\n", "total", "noun", "verb", "adj",
              "adv", "other");
  std::printf("%8zu %8zu %8zu %8zu %8zu %8zu\n", s.total, s.noun, s.verb,
              s.adj, s.adv, s.other);
  return 0;
}

int cmd_build_pairs(const std::string& corpus_path, const std::string& gold_path,
                    const std::string& inventory_path, const std::string& out_path,
                    bool ws, const ModelOptions& opts) {
  LoadedDataset data = load_dataset(corpus_path, gold_path, inventory_path);
  corpus::apply_gold_keys(data.parsed.instances, data.gold);
  pairgen::TrainingSet set =
      pairgen::build_training_set(data.parsed.instances, data.parsed.sentences,
                                  data.inventory, resolve_sampling_config(opts),
                                  ws);
  report_skipped(set.skipped);
  write_file(out_path, pairgen::write_pairs_tsv(set.pairs));
  std::cout << "wrote " << set.pairs.size() << " pairs ("
            << set.skipped.size() << " instances skipped) to " << out_path
            << "\n";
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& gold_path,
              const std::string& inventory_path, const std::string& pairs_path,
              const std::string& out_dir, const ModelOptions& opts) {
  nn::EncoderConfig encoder_config = resolve_encoder_config(opts);
  nn::TrainConfig train_config = resolve_train_config(opts);

  std::vector<pairgen::ContextGlossPair> pairs;
  if (!pairs_path.empty()) {
    pairs = pairgen::read_pairs_tsv(read_file(pairs_path));
  } else {
    if (corpus_path.empty() || gold_path.empty() || inventory_path.empty())
      fail(ErrorKind::Config,
           "train needs either --pairs or --corpus, --gold and --inventory");
    LoadedDataset data = load_dataset(corpus_path, gold_path, inventory_path);
    corpus::apply_gold_keys(data.parsed.instances, data.gold);
    pairgen::TrainingSet set = pairgen::build_training_set(
        data.parsed.instances, data.parsed.sentences, data.inventory,
        resolve_sampling_config(opts), nn::wants_ws_markup(encoder_config.head));
    report_skipped(set.skipped);
    pairs = std::move(set.pairs);
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + out_dir + "'");

  nn::TrainResult result = nn::train(pairs, encoder_config, train_config);
  const std::string ckpt_path = (fs::path(out_dir) / "model.ckpt").string();
  const std::string loss_path = (fs::path(out_dir) / "loss.csv").string();
  nn::save_checkpoint(ckpt_path, result.params, result.encoder_config,
                      result.vocab);
  write_file(loss_path, nn::write_loss_log_csv(result.loss_log));

  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e)
    std::printf("epoch %zu loss %.6f\n", e + 1, result.epoch_losses[e]);
  std::cout << "wrote " << ckpt_path << " and " << loss_path << "\n";
  return 0;
}

struct EvalArgs {
  std::string corpus_path, gold_path, inventory_path;
  std::string out_path = "predictions.txt";
  std::string report_path;
  std::string dataset, model_name, experiment = "Base";
  bool skip_missing = false;
};

int run_eval(const EvalArgs& args, std::span<const nn::Model> members,
             const std::string& default_model_name) {
  LoadedDataset data =
      load_dataset(args.corpus_path, args.gold_path, args.inventory_path);

  std::unordered_map<std::string, const corpus::WsdInstance*> by_id;
  for (const corpus::WsdInstance& inst : data.parsed.instances)
    by_id.emplace(inst.instance_id, &inst);
  for (const auto& [id, keys] : data.gold)
    if (!by_id.contains(id))
      fail(ErrorKind::Validation,
           "gold key for unknown instance id '" + id + "'");

  corpus::SentenceIndex sentences =
      corpus::index_sentences(data.parsed.sentences);
  std::vector<eval::Prediction> predictions;
  std::set<std::string> skipped_ids;
  std::map<std::string, corpus::Pos> pos_index;
  std::vector<corpus::WsdInstance> skipped_list;

  for (const corpus::WsdInstance& inst : data.parsed.instances) {
    pos_index[inst.instance_id] = inst.pos;
    if (!data.inventory.contains(inst.lemma, inst.pos)) {
      skipped_ids.insert(inst.instance_id);
      skipped_list.push_back(inst);
      continue;
    }
    auto sent = sentences.find(inst.sentence_ref);
    if (sent == sentences.end())
      fail(ErrorKind::Validation, "instance '" + inst.instance_id +
                                      "' references unknown sentence '" +
                                      inst.sentence_ref + "'");
    if (members.size() == 1) {
      predictions.push_back(eval::disambiguate(members.front(), inst,
                                               *sent->second, data.inventory));
    } else {
      ensemble::EnsemblePrediction p = ensemble::ensemble_disambiguate(
          members, inst, *sent->second, data.inventory);
      predictions.push_back(
          {inst.instance_id, p.sense_key, p.match_probability});
    }
  }
  report_skipped(skipped_list);

  eval::EvaluationReport report = eval::score(predictions, data.gold, pos_index,
                                              skipped_ids, args.skip_missing);
  report.dataset =
      args.dataset.empty() ? path_stem(args.corpus_path) : args.dataset;
  report.model = args.model_name.empty() ? default_model_name : args.model_name;
  report.experiment = args.experiment;

  write_file(args.out_path, eval::write_predictions(predictions));
  const std::vector<eval::EvaluationReport> reports{report};
  if (!args.report_path.empty())
    write_file(args.report_path, eval::write_report_csv(reports));

  std::printf("%s %s %s: F1 %.1f (n=%zu, skipped=%zu)\n",
              report.dataset.c_str(), report.model.c_str(),
              report.experiment.c_str(), eval::round_percent(report.f1_overall),
              report.n_instances, report.n_skipped);
  return 0;
}

int cmd_report(const std::vector<std::string>& csv_paths,
               const std::string& out_path) {
  std::vector<eval::EvaluationReport> merged;
  for (const std::string& path : csv_paths)
    for (eval::EvaluationReport& r : eval::read_report_csv(read_file(path)))
      merged.push_back(std::move(r));
  eval::ReportTable table = eval::report_table(merged);
  std::cout << table.text;
  if (!out_path.empty()) write_file(out_path, table.csv);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"word sense disambiguation toolkit"};
  app.require_subcommand(1);
  std::string config_path_opt;  // consumed by apply_config_file

  // stats ---------------------------------------------------------------
  std::string stats_corpus;
  CLI::App* stats = app.add_subcommand(
      "stats", "print part-of-speech instance counts for a corpus");
  stats->add_option("--config", config_path_opt, "flat key=value run configuration");
  stats->add_option("--corpus", stats_corpus, "corpus XML")->required();

  // build-pairs ----------------------------------------------------------
  std::string bp_corpus, bp_gold, bp_inventory, bp_out = "pairs.tsv";
  bool bp_ws = false;
  ModelOptions bp_opts;
  CLI::App* build_pairs = app.add_subcommand(
      "build-pairs", "write the context-gloss training-pair TSV");
  build_pairs->add_option("--config", config_path_opt, "flat key=value run configuration");
  build_pairs->add_option("--corpus", bp_corpus, "corpus XML")->required();
  build_pairs->add_option("--gold", bp_gold, "gold key file")->required();
  build_pairs->add_option("--inventory", bp_inventory, "sense inventory TSV")
      ->required();
  build_pairs->add_option("--out", bp_out, "output TSV path");
  build_pairs->add_flag("--ws", bp_ws, "apply weak-supervision markup");
  add_sampling_options(build_pairs, bp_opts);

  // train ------------------------------------------------------------------
  std::string tr_corpus, tr_gold, tr_inventory, tr_pairs, tr_out = "run";
  ModelOptions tr_opts;
  CLI::App* train = app.add_subcommand(
      "train", "train a match classifier; writes model.ckpt and loss.csv");
  train->add_option("--config", config_path_opt, "flat key=value run configuration");
  train->add_option("--corpus", tr_corpus, "corpus XML");
  train->add_option("--gold", tr_gold, "gold key file");
  train->add_option("--inventory", tr_inventory, "sense inventory TSV");
  train->add_option("--pairs", tr_pairs, "pre-built training-pair TSV");
  train->add_option("--out", tr_out, "output directory");
  add_sampling_options(train, tr_opts);
  add_model_options(train, tr_opts);

  // eval ---------------------------------------------------------------
  EvalArgs ev;
  std::string ev_checkpoint;
  CLI::App* evalc = app.add_subcommand(
      "eval", "predict senses with one checkpoint and score against gold");
  evalc->add_option("--config", config_path_opt, "flat key=value run configuration");
  evalc->add_option("--checkpoint", ev_checkpoint, "model checkpoint")
      ->required();
  evalc->add_option("--corpus", ev.corpus_path, "corpus XML")->required();
  evalc->add_option("--gold", ev.gold_path, "gold key file")->required();
  evalc->add_option("--inventory", ev.inventory_path, "sense inventory TSV")
      ->required();
  evalc->add_option("--out", ev.out_path, "predictions file");
  evalc->add_option("--report", ev.report_path, "report CSV path");
  evalc->add_option("--dataset", ev.dataset, "dataset tag for the report");
  evalc->add_option("--model-name", ev.model_name, "model tag for the report");
  evalc->add_option("--experiment", ev.experiment, "experiment tag");
  evalc->add_flag("--skip-missing", ev.skip_missing,
                  "exclude inventory-missing instances from the denominator");

  // ensemble-eval -----------------------------------------------------------
  EvalArgs ens;
  std::string ens_members, ens_spec;
  CLI::App* ensemble_eval = app.add_subcommand(
      "ensemble-eval", "logit-sum ensemble prediction and scoring");
  ensemble_eval->add_option("--config", config_path_opt, "flat key=value run configuration");
  ensemble_eval->add_option("--members", ens_members,
                            "comma-separated checkpoint paths");
  ensemble_eval->add_option("--spec", ens_spec,
                            "ensemble spec file (path<TAB>head per line)");
  ensemble_eval->add_option("--corpus", ens.corpus_path, "corpus XML")
      ->required();
  ensemble_eval->add_option("--gold", ens.gold_path, "gold key file")
      ->required();
  ensemble_eval
      ->add_option("--inventory", ens.inventory_path, "sense inventory TSV")
      ->required();
  ensemble_eval->add_option("--out", ens.out_path, "predictions file");
  ensemble_eval->add_option("--report", ens.report_path, "report CSV path");
  ensemble_eval->add_option("--dataset", ens.dataset, "dataset tag");
  ensemble_eval->add_option("--model-name", ens.model_name, "model tag");
  ensemble_eval->add_option("--experiment", ens.experiment, "experiment tag");
  ensemble_eval->add_flag("--skip-missing", ens.skip_missing,
                          "exclude inventory-missing instances");

  // report --------------------------------------------------------------
  std::vector<std::string> rp_csvs;
  std::string rp_out;
  CLI::App* report = app.add_subcommand(
      "report", "merge report CSVs into one comparison table");
  report->add_option("csvs", rp_csvs, "report CSV files")->required();
  report->add_option("--out", rp_out, "write the merged CSV here");

  // duplicate options resolve to the last occurrence: the user's flags come
  // after any config-file injection and therefore win
  for (CLI::App* sub : {stats, build_pairs, train, evalc, ensemble_eval}) {
    for (CLI::Option* opt : sub->get_options()) {
      if (opt->nonpositional() && opt->get_expected() > 0)
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_file(app, std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 wants reversed args
    app.parse(args);

    if (stats->parsed()) return cmd_stats(stats_corpus);
    if (build_pairs->parsed())
      return cmd_build_pairs(bp_corpus, bp_gold, bp_inventory, bp_out, bp_ws,
                             bp_opts);
    if (train->parsed())
      return cmd_train(tr_corpus, tr_gold, tr_inventory, tr_pairs, tr_out,
                       tr_opts);
    if (evalc->parsed()) {
      std::vector<nn::Model> members;
      members.push_back(nn::load_checkpoint(ev_checkpoint));
      return run_eval(ev, members,
                      std::string(nn::to_string(members.front().config.head)));
    }
    if (ensemble_eval->parsed()) {
      std::vector<nn::Model> members;
      if (!ens_spec.empty()) {
        members = ensemble::load_members(
            ensemble::parse_ensemble_spec(read_file(ens_spec)));
      } else if (!ens_members.empty()) {
        // bare --members: each checkpoint declares its own head
        for (const std::string& path : strings::split(ens_members, ',')) {
          std::string trimmed(strings::trim(path));
          if (!trimmed.empty())
            members.push_back(nn::load_checkpoint(trimmed));
        }
      }
      if (members.empty())
        fail(ErrorKind::Config, "ensemble-eval needs --members or --spec");
      return run_eval(ens, members, "Ensemble");
    }
    if (report->parsed()) return cmd_report(rp_csvs, rp_out);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << e.machine_line() << "\n";
    return e.kind() == ErrorKind::Io ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace wsd::cli
