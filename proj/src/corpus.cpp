#include "wsd/corpus.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "wsd/error.hpp"
#include "wsd/strings.hpp"

namespace wsd::corpus {

Pos parse_pos(std::string_view tag) {
  if (tag == "NOUN") return Pos::Noun;
  if (tag == "VERB") return Pos::Verb;
  if (tag == "ADJ") return Pos::Adj;
  if (tag == "ADV") return Pos::Adv;
  return Pos::Other;
}

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Verb: return "VERB";
    case Pos::Adj: return "ADJ";
    case Pos::Adv: return "ADV";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

bool operator==(const Token& a, const Token& b) {
  return a.surface == b.surface && a.lemma == b.lemma && a.pos == b.pos &&
         a.instance_id == b.instance_id;
}

bool Sentence::operator==(const Sentence& other) const {
  return id == other.id && words == other.words;
}

// ---------------------------------------------------------------------------
// SenseInventory

std::string SenseInventory::key(std::string_view lemma, Pos pos) {
  std::string k(lemma);
  k.push_back('\t');
  k.append(to_string(pos));
  return k;
}

void SenseInventory::add(const std::string& lemma, Pos pos, SenseEntry entry) {
  entries_[key(lemma, pos)].push_back(std::move(entry));
}

std::span<const SenseEntry> SenseInventory::senses(std::string_view lemma,
                                                   Pos pos) const {
  auto it = entries_.find(key(lemma, pos));
  if (it == entries_.end()) return {};
  return it->second;
}

bool SenseInventory::contains(std::string_view lemma, Pos pos) const {
  return entries_.contains(key(lemma, pos));
}

// ---------------------------------------------------------------------------
// Minimal XML reader for the fixed corpus schema, with line tracking.

namespace {

struct XmlAttr {
  std::string name;
  std::string value;
};

struct XmlTag {
  enum class Kind { Open, Close, SelfClose };
  Kind kind = Kind::Open;
  std::string name;
  std::vector<XmlAttr> attrs;
  std::size_t line = 0;

  const std::string* attr(std::string_view name_) const {
    for (const auto& a : attrs)
      if (a.name == name_) return &a.value;
    return nullptr;
  }
};

class XmlScanner {
 public:
  explicit XmlScanner(std::string_view text) : text_(text) {}

  std::size_t line() const { return line_; }
  bool eof() const { return pos_ >= text_.size(); }

  [[noreturn]] void error(const std::string& message) const {
    fail(ErrorKind::Parse, "line " + std::to_string(line_) + ": " + message);
  }

  // Advances over whitespace, comments, and <?...?> declarations.
  void skip_inter_element() {
    for (;;) {
      while (!eof() && is_space(cur())) advance();
      if (remaining_starts_with("<!--")) {
        std::size_t end = text_.find("-->", pos_);
        if (end == std::string_view::npos) error("unterminated comment");
        advance_to(end + 3);
      } else if (remaining_starts_with("<?")) {
        std::size_t end = text_.find("?>", pos_);
        if (end == std::string_view::npos) error("unterminated declaration");
        advance_to(end + 2);
      } else {
        return;
      }
    }
  }

  bool at_tag() const { return !eof() && cur() == '<'; }

  XmlTag read_tag() {
    if (eof() || cur() != '<') error("expected '<'");
    XmlTag tag;
    tag.line = line_;
    advance();  // '<'
    if (!eof() && cur() == '/') {
      tag.kind = XmlTag::Kind::Close;
      advance();
    }
    tag.name = read_name();
    for (;;) {
      skip_space_in_tag();
      if (eof()) error("unterminated tag <" + tag.name);
      if (cur() == '>') {
        advance();
        return tag;
      }
      if (cur() == '/') {
        advance();
        if (eof() || cur() != '>') error("expected '>' after '/'");
        advance();
        if (tag.kind == XmlTag::Kind::Close) error("malformed closing tag");
        tag.kind = XmlTag::Kind::SelfClose;
        return tag;
      }
      if (tag.kind == XmlTag::Kind::Close)
        error("attributes not allowed in closing tag");
      XmlAttr attr;
      attr.name = read_name();
      skip_space_in_tag();
      if (eof() || cur() != '=') error("expected '=' after attribute name");
      advance();
      skip_space_in_tag();
      if (eof() || (cur() != '"' && cur() != '\'')) {
        error("expected quoted attribute value");
      }
      char quote = cur();
      advance();
      std::string raw;
      while (!eof() && cur() != quote) {
        raw.push_back(cur());
        advance();
      }
      if (eof()) error("unterminated attribute value");
      advance();  // closing quote
      attr.value = unescape(raw);
      tag.attrs.push_back(std::move(attr));
    }
  }

  // Character data up to the next '<'.
  std::string read_text() {
    std::string raw;
    while (!eof() && cur() != '<') {
      raw.push_back(cur());
      advance();
    }
    return unescape(raw);
  }

 private:
  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  }
  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '-' || c == '.' || c == ':';
  }

  char cur() const { return text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }
  void advance_to(std::size_t target) {
    while (pos_ < target) advance();
  }
  bool remaining_starts_with(std::string_view prefix) const {
    return text_.substr(pos_).substr(0, prefix.size()) == prefix;
  }
  void skip_space_in_tag() {
    while (!eof() && is_space(cur())) advance();
  }
  std::string read_name() {
    std::string name;
    while (!eof() && is_name_char(cur())) {
      name.push_back(cur());
      advance();
    }
    if (name.empty()) error("expected a name");
    return name;
  }

  std::string unescape(std::string_view raw) const {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos)
        fail(ErrorKind::Parse,
             "line " + std::to_string(line_) + ": unterminated entity");
      std::string_view entity = raw.substr(i + 1, semi - i - 1);
      if (entity == "amp") out.push_back('&');
      else if (entity == "lt") out.push_back('<');
      else if (entity == "gt") out.push_back('>');
      else if (entity == "quot") out.push_back('"');
      else if (entity == "apos") out.push_back('\'');
      else
        fail(ErrorKind::Parse, "line " + std::to_string(line_) +
                                   ": unknown entity &" + std::string(entity) +
                                   ";");
      i = semi;
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

[[noreturn]] void validation_at(std::size_t line, const std::string& message) {
  fail(ErrorKind::Validation, "line " + std::to_string(line) + ": " + message);
}

}  // namespace

ParsedCorpus parse_corpus(std::string_view xml_text) {
  XmlScanner scan(xml_text);
  ParsedCorpus out;
  std::unordered_set<std::string> seen_instance_ids;
  std::unordered_set<std::string> seen_sentence_ids;

  scan.skip_inter_element();
  if (scan.eof()) scan.error("empty document, expected <corpus>");
  XmlTag root = scan.read_tag();
  if (root.name != "corpus" || root.kind == XmlTag::Kind::Close)
    scan.error("expected <corpus> root element, got <" + root.name + ">");
  if (root.kind == XmlTag::Kind::SelfClose) return out;

  for (;;) {  // <text> elements
    scan.skip_inter_element();
    XmlTag text_tag = scan.read_tag();
    if (text_tag.kind == XmlTag::Kind::Close) {
      if (text_tag.name != "corpus")
        scan.error("expected </corpus>, got </" + text_tag.name + ">");
      break;
    }
    if (text_tag.name != "text")
      scan.error("expected <text> inside <corpus>, got <" + text_tag.name +
                 ">");
    if (text_tag.kind == XmlTag::Kind::SelfClose) continue;

    for (;;) {  // <sentence> elements
      scan.skip_inter_element();
      XmlTag sent_tag = scan.read_tag();
      if (sent_tag.kind == XmlTag::Kind::Close) {
        if (sent_tag.name != "text")
          scan.error("expected </text>, got </" + sent_tag.name + ">");
        break;
      }
      if (sent_tag.name != "sentence")
        scan.error("expected <sentence> inside <text>, got <" + sent_tag.name +
                   ">");
      const std::string* sent_id = sent_tag.attr("id");
      if (!sent_id)
        validation_at(sent_tag.line, "<sentence> missing id attribute");
      if (!seen_sentence_ids.insert(*sent_id).second)
        validation_at(sent_tag.line, "duplicate sentence id '" + *sent_id + "'");
      Sentence sentence;
      sentence.id = *sent_id;
      if (sent_tag.kind == XmlTag::Kind::SelfClose) continue;  // empty: drop

      std::vector<WsdInstance> sentence_instances;
      for (;;) {  // <wf> / <instance> tokens
        scan.skip_inter_element();
        XmlTag tok_tag = scan.read_tag();
        if (tok_tag.kind == XmlTag::Kind::Close) {
          if (tok_tag.name != "sentence")
            scan.error("expected </sentence>, got </" + tok_tag.name + ">");
          break;
        }
        if (tok_tag.name != "wf" && tok_tag.name != "instance")
          scan.error("expected <wf> or <instance> inside <sentence>, got <" +
                     tok_tag.name + ">");

        std::string surface;
        if (tok_tag.kind != XmlTag::Kind::SelfClose) {
          surface = std::string(strings::trim(scan.read_text()));
          XmlTag close = scan.read_tag();
          if (close.kind != XmlTag::Kind::Close || close.name != tok_tag.name)
            scan.error("expected </" + tok_tag.name + ">");
        }

        Token token;
        token.surface = surface;
        const std::string* lemma = tok_tag.attr("lemma");
        const std::string* pos = tok_tag.attr("pos");
        if (tok_tag.name == "instance") {
          const std::string* id = tok_tag.attr("id");
          if (!id)
            validation_at(tok_tag.line, "<instance> missing id attribute");
          if (!lemma)
            validation_at(tok_tag.line,
                          "<instance> '" + *id + "' missing lemma attribute");
          if (!pos)
            validation_at(tok_tag.line,
                          "<instance> '" + *id + "' missing pos attribute");
          if (!seen_instance_ids.insert(*id).second)
            validation_at(tok_tag.line, "duplicate instance id '" + *id + "'");
          token.instance_id = *id;
          token.lemma = strings::trim(*lemma);
          token.pos = parse_pos(strings::trim(*pos));

          WsdInstance inst;
          inst.instance_id = *id;
          inst.sentence_ref = sentence.id;
          inst.target_position = sentence.words.size();
          inst.lemma = token.lemma;
          inst.pos = token.pos;
          sentence_instances.push_back(std::move(inst));
        } else {
          // <wf> is lenient: lemma defaults to the surface, pos to OTHER
          token.lemma = lemma ? std::string(strings::trim(*lemma)) : surface;
          token.pos = pos ? parse_pos(strings::trim(*pos)) : Pos::Other;
        }
        sentence.words.push_back(std::move(token));
      }

      if (sentence.words.empty()) continue;  // retain only non-empty sentences
      out.sentences.push_back(std::move(sentence));
      for (auto& inst : sentence_instances)
        out.instances.push_back(std::move(inst));
    }
  }

  scan.skip_inter_element();
  if (!scan.eof()) scan.error("trailing content after </corpus>");
  return out;
}

namespace {

std::string escape_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string write_corpus_xml(std::span<const Sentence> sentences) {
  std::string out = "<corpus>\n<text id=\"t\">\n";
  for (const Sentence& s : sentences) {
    out += "<sentence id=\"" + escape_text(s.id) + "\">\n";
    for (const Token& t : s.words) {
      if (t.instance_id) {
        out += "<instance id=\"" + escape_text(*t.instance_id) + "\" lemma=\"" +
               escape_text(t.lemma) + "\" pos=\"" +
               std::string(to_string(t.pos)) + "\">" + escape_text(t.surface) +
               "</instance>\n";
      } else {
        out += "<wf lemma=\"" + escape_text(t.lemma) + "\" pos=\"" +
               std::string(to_string(t.pos)) + "\">" + escape_text(t.surface) +
               "</wf>\n";
      }
    }
    out += "</sentence>\n";
  }
  out += "</text>\n</corpus>\n";
  return out;
}

GoldKeys parse_gold_keys(std::string_view text) {
  GoldKeys out;
  std::size_t line_no = 0;
  for (const std::string& raw : strings::split(text, '\n')) {
    ++line_no;
    std::string_view line = strings::trim(raw);
    if (line.empty()) continue;
    std::vector<std::string> fields = strings::split_ws(line);
    if (fields.size() < 2)
      fail(ErrorKind::Format,
           "line " + std::to_string(line_no) +
               ": expected `instance_id key...`, got " +
               std::to_string(fields.size()) + " field(s)");
    std::set<std::string> keys(fields.begin() + 1, fields.end());
    auto [it, inserted] = out.emplace(fields[0], std::move(keys));
    if (!inserted)
      fail(ErrorKind::Validation, "line " + std::to_string(line_no) +
                                      ": duplicate instance id '" + fields[0] +
                                      "'");
  }
  return out;
}

SenseInventory parse_inventory(std::string_view tsv_text) {
  SenseInventory inventory;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const std::string& raw : strings::split(tsv_text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (strings::trim(line).empty() || strings::starts_with(line, "#"))
      continue;
    std::vector<std::string> fields = strings::split(line, '\t');
    if (fields.size() != 4)
      fail(ErrorKind::Format,
           "line " + std::to_string(line_no) +
               ": expected lemma<TAB>pos<TAB>sense_key<TAB>gloss, got " +
               std::to_string(fields.size()) + " field(s)");
    std::string lemma(strings::trim(fields[0]));
    Pos pos = parse_pos(strings::trim(fields[1]));
    std::string sense_key(strings::trim(fields[2]));
    std::string gloss(strings::trim(fields[3]));
    std::string dup_key = lemma + "\t" + std::string(to_string(pos)) + "\t" +
                          sense_key;
    if (!seen.insert(dup_key).second)
      fail(ErrorKind::Validation, "line " + std::to_string(line_no) +
                                      ": duplicate sense key '" + sense_key +
                                      "' for (" + lemma + ", " +
                                      std::string(to_string(pos)) + ")");
    inventory.add(lemma, pos, SenseEntry{std::move(sense_key), std::move(gloss)});
  }
  return inventory;
}

CorpusStats compute_stats(std::span<const WsdInstance> instances) {
  CorpusStats stats;
  for (const WsdInstance& inst : instances) {
    ++stats.total;
    switch (inst.pos) {
      case Pos::Noun: ++stats.noun; break;
      case Pos::Verb: ++stats.verb; break;
      case Pos::Adj: ++stats.adj; break;
      case Pos::Adv: ++stats.adv; break;
      case Pos::Other: ++stats.other; break;
    }
  }
  return stats;
}

void apply_gold_keys(std::vector<WsdInstance>& instances,
                     const GoldKeys& gold) {
  std::unordered_map<std::string, WsdInstance*> by_id;
  for (WsdInstance& inst : instances) by_id[inst.instance_id] = &inst;
  for (const auto& [id, keys] : gold) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      fail(ErrorKind::Validation,
           "gold key for unknown instance id '" + id + "'");
    it->second->gold_keys = keys;
  }
  for (const WsdInstance& inst : instances) {
    if (inst.gold_keys.empty())
      fail(ErrorKind::Validation,
           "instance '" + inst.instance_id + "' has no gold key entry");
  }
}

InventorySplit partition_by_inventory(std::span<const WsdInstance> instances,
                                      const SenseInventory& inventory) {
  InventorySplit split;
  for (const WsdInstance& inst : instances) {
    if (inventory.contains(inst.lemma, inst.pos))
      split.resolved.push_back(inst);
    else
      split.skipped.push_back(inst);
  }
  return split;
}

SentenceIndex index_sentences(std::span<const Sentence> sentences) {
  SentenceIndex index;
  for (const Sentence& s : sentences) index.emplace(s.id, &s);
  return index;
}

}  // namespace wsd::corpus
