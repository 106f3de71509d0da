#include "wsd/disambiguator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <unordered_set>

#include "wsd/error.hpp"
#include "wsd/pairgen.hpp"
#include "wsd/strings.hpp"

namespace wsd::eval {

Prediction disambiguate(const nn::Model& model,
                        const corpus::WsdInstance& instance,
                        const corpus::Sentence& sentence,
                        const corpus::SenseInventory& inventory) {
  std::span<const corpus::SenseEntry> senses =
      inventory.senses(instance.lemma, instance.pos);
  if (senses.empty())
    fail(ErrorKind::MissingSense,
         "no inventory entry for (" + instance.lemma + ", " +
             std::string(corpus::to_string(instance.pos)) + ") needed by '" +
             instance.instance_id + "'");

  corpus::WsdInstance unlabeled = instance;
  unlabeled.gold_keys.clear();
  const bool ws = nn::wants_ws_markup(model.config.head);
  std::vector<pairgen::ContextGlossPair> pairs =
      pairgen::build_pairs(unlabeled, sentence, inventory, ws);

  std::vector<nn::EncodedPair> encoded;
  encoded.reserve(pairs.size());
  for (const auto& p : pairs)
    encoded.push_back(nn::encode_pair(p, model.vocab, model.config));
  std::vector<nn::ClassifierOutput> outputs =
      nn::forward(model.params, encoded, model.config);

  Prediction best;
  best.instance_id = instance.instance_id;
  double best_prob = -1.0;
  for (std::size_t c = 0; c < outputs.size(); ++c) {
    const double match = nn::softmax_pair(outputs[c].logits)[1];
    if (match > best_prob) {  // strict: exact ties keep the lowest index
      best_prob = match;
      best.sense_key = senses[c].sense_key;
      best.match_probability = match;
    }
  }
  return best;
}

double round_percent(double value) {
  return std::floor(value * 10.0 + 0.5) / 10.0;
}

EvaluationReport score(std::span<const Prediction> predictions,
                       const corpus::GoldKeys& gold,
                       const std::map<std::string, corpus::Pos>& pos_index,
                       const std::set<std::string>& skipped,
                       bool skip_missing) {
  std::unordered_set<std::string> seen;
  for (const Prediction& p : predictions) {
    if (!gold.contains(p.instance_id))
      fail(ErrorKind::Validation,
           "prediction for unknown instance id '" + p.instance_id + "'");
    if (!seen.insert(p.instance_id).second)
      fail(ErrorKind::Validation,
           "duplicate prediction for instance id '" + p.instance_id + "'");
  }

  std::size_t n_skipped = 0;
  for (const std::string& id : skipped)
    if (gold.contains(id)) ++n_skipped;

  struct Bucket {
    std::size_t total = 0;
    std::size_t correct = 0;
  };
  Bucket overall;
  std::map<corpus::Pos, Bucket> by_pos;

  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions) by_id[p.instance_id] = &p;

  for (const auto& [id, keys] : gold) {
    if (skip_missing && skipped.contains(id)) continue;
    auto pos_it = pos_index.find(id);
    if (pos_it == pos_index.end())
      fail(ErrorKind::Validation,
           "gold instance '" + id + "' missing from the POS index");
    Bucket& bucket = by_pos[pos_it->second];
    ++overall.total;
    ++bucket.total;
    auto pred = by_id.find(id);
    const bool correct =
        pred != by_id.end() && keys.contains(pred->second->sense_key);
    if (correct) {
      ++overall.correct;
      ++bucket.correct;
    }
  }

  EvaluationReport report;
  report.n_instances = gold.size();
  report.n_skipped = n_skipped;
  report.f1_overall =
      overall.total == 0
          ? 0.0
          : 100.0 * static_cast<double>(overall.correct) /
                static_cast<double>(overall.total);
  for (const auto& [pos, bucket] : by_pos)
    report.f1_by_pos[pos] =
        bucket.total == 0 ? 0.0
                          : 100.0 * static_cast<double>(bucket.correct) /
                                static_cast<double>(bucket.total);
  return report;
}

// ---------------------------------------------------------------------------
// Report emission

namespace {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::vector<std::string> csv_parse_line(std::string_view line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted)
    fail(ErrorKind::Format,
         "line " + std::to_string(line_no) + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string format_pct(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", round_percent(value));
  return buf;
}

double pos_pct(const EvaluationReport& r, corpus::Pos pos) {
  auto it = r.f1_by_pos.find(pos);
  return it == r.f1_by_pos.end() ? 0.0 : it->second;
}

}  // namespace

std::string write_report_csv(std::span<const EvaluationReport> reports) {
  std::string out =
      "dataset,model,experiment,f1_overall,f1_noun,f1_verb,f1_adj,f1_adv,n,"
      "skipped\n";
  for (const EvaluationReport& r : reports) {
    out += csv_escape(r.dataset) + "," + csv_escape(r.model) + "," +
           csv_escape(r.experiment) + "," + format_pct(r.f1_overall) + "," +
           format_pct(pos_pct(r, corpus::Pos::Noun)) + "," +
           format_pct(pos_pct(r, corpus::Pos::Verb)) + "," +
           format_pct(pos_pct(r, corpus::Pos::Adj)) + "," +
           format_pct(pos_pct(r, corpus::Pos::Adv)) + "," +
           std::to_string(r.n_instances) + "," + std::to_string(r.n_skipped) +
           "\n";
  }
  return out;
}

std::vector<EvaluationReport> read_report_csv(std::string_view text) {
  std::vector<EvaluationReport> reports;
  std::size_t line_no = 0;
  bool saw_header = false;
  for (const std::string& raw : strings::split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!saw_header) {
      saw_header = true;
      if (!strings::starts_with(line, "dataset,"))
        fail(ErrorKind::Format, "line 1: missing report CSV header");
      continue;
    }
    std::vector<std::string> f = csv_parse_line(line, line_no);
    if (f.size() != 10)
      fail(ErrorKind::Format, "line " + std::to_string(line_no) +
                                  ": expected 10 columns, got " +
                                  std::to_string(f.size()));
    EvaluationReport r;
    r.dataset = f[0];
    r.model = f[1];
    r.experiment = f[2];
    r.f1_overall = std::strtod(f[3].c_str(), nullptr);
    r.f1_by_pos[corpus::Pos::Noun] = std::strtod(f[4].c_str(), nullptr);
    r.f1_by_pos[corpus::Pos::Verb] = std::strtod(f[5].c_str(), nullptr);
    r.f1_by_pos[corpus::Pos::Adj] = std::strtod(f[6].c_str(), nullptr);
    r.f1_by_pos[corpus::Pos::Adv] = std::strtod(f[7].c_str(), nullptr);
    r.n_instances = std::strtoull(f[8].c_str(), nullptr, 10);
    r.n_skipped = std::strtoull(f[9].c_str(), nullptr, 10);
    reports.push_back(std::move(r));
  }
  if (!saw_header)
    fail(ErrorKind::Format, "empty report CSV (missing header)");
  return reports;
}

ReportTable report_table(std::span<const EvaluationReport> reports) {
  // Column tags in first-seen order; rows grouped by dataset, then model.
  std::vector<std::string> experiments;
  std::vector<std::string> datasets;
  std::vector<std::string> models_in_order;
  auto remember = [](std::vector<std::string>& seen, const std::string& v) {
    if (std::find(seen.begin(), seen.end(), v) == seen.end())
      seen.push_back(v);
  };
  for (const EvaluationReport& r : reports) {
    remember(experiments, r.experiment);
    remember(datasets, r.dataset);
    remember(models_in_order, r.model);
  }

  auto cell = [&reports](const std::string& dataset, const std::string& model,
                         const std::string& experiment) -> std::string {
    for (const EvaluationReport& r : reports)
      if (r.dataset == dataset && r.model == model &&
          r.experiment == experiment)
        return format_pct(r.f1_overall);
    return "-";
  };

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Data-set", "Model"});
  for (const std::string& e : experiments) rows.back().push_back(e);
  for (const std::string& d : datasets) {
    bool first_in_group = true;
    for (const std::string& m : models_in_order) {
      bool present = std::any_of(reports.begin(), reports.end(),
                                 [&](const EvaluationReport& r) {
                                   return r.dataset == d && r.model == m;
                                 });
      if (!present) continue;
      std::vector<std::string> row{first_in_group ? d : "", m};
      for (const std::string& e : experiments) row.push_back(cell(d, m, e));
      rows.push_back(std::move(row));
      first_in_group = false;
    }
  }

  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      widths[i] = std::max(widths[i], row[i].size());

  ReportTable table;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "  ";
      line += row[i];
      line.append(widths[i] - row[i].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    table.text += line + "\n";
  }
  table.csv = write_report_csv(reports);
  return table;
}

std::string write_predictions(std::span<const Prediction> predictions) {
  std::string out;
  for (const Prediction& p : predictions)
    out += p.instance_id + " " + p.sense_key + "\n";
  return out;
}

}  // namespace wsd::eval
