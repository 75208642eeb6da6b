#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "cogsimp/core.hpp"
#include "cogsimp/text.hpp"

namespace cogsimp {

using json = nlohmann::json;

namespace detail {

inline bool getline_crlf(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline json parse_json_line(const std::string& line, std::size_t line_no, const char* what) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string(what) + " line " + std::to_string(line_no) +
                             ": malformed JSON: " + e.what());
  }
}

}  // namespace detail

// Phrase -> paraphrase-set lookup table. Keys and values are lowercased,
// whitespace-normalized phrases of at most max_phrase_len tokens on the
// source side.
class ParaphraseDB {
 public:
  explicit ParaphraseDB(std::size_t max_phrase_len = 4) : max_phrase_len_(max_phrase_len) {}

  std::size_t max_phrase_len() const { return max_phrase_len_; }
  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }

  /// Throws on empty phrases or a source phrase longer than max_phrase_len.
  void add_rule(std::string_view source, std::string_view target) {
    std::string src = normalize_whitespace(lowercase(source));
    std::string tgt = normalize_whitespace(lowercase(target));
    if (src.empty() || tgt.empty()) throw std::runtime_error("paraphrase rule with empty phrase");
    if (whitespace_tokens(src).size() > max_phrase_len_)
      throw std::runtime_error("paraphrase source phrase exceeds max length: " + src);
    rules_[src].insert(tgt);
  }

  /// Case-insensitive lookup; nullptr when the phrase has no rules.
  const std::set<std::string>* lookup(std::string_view phrase) const {
    auto it = rules_.find(normalize_whitespace(lowercase(phrase)));
    return it == rules_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<std::string, std::set<std::string>> rules_;
  std::size_t max_phrase_len_;
};

struct ParaphraseLoadResult {
  ParaphraseDB db;
  std::size_t skipped_lines = 0;
};

/// TSV loader: `source<TAB>target[<TAB>score]`. Lines with fewer than two
/// columns, empty phrases, over-long source phrases, or a score below
/// `min_score` are skipped and counted. Lines without a score pass any cutoff.
inline ParaphraseLoadResult load_paraphrase_db(std::istream& in, std::size_t max_phrase_len = 4,
                                               std::optional<double> min_score = std::nullopt) {
  ParaphraseLoadResult out{ParaphraseDB(max_phrase_len), 0};
  std::string line;
  while (detail::getline_crlf(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(pos));
        break;
      }
      cols.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (cols.size() < 2) {
      ++out.skipped_lines;
      continue;
    }
    if (min_score && cols.size() >= 3) {
      try {
        if (std::stod(cols[2]) < *min_score) {
          ++out.skipped_lines;
          continue;
        }
      } catch (const std::exception&) {
        ++out.skipped_lines;
        continue;
      }
    }
    std::string src = normalize_whitespace(lowercase(cols[0]));
    std::string tgt = normalize_whitespace(lowercase(cols[1]));
    if (src.empty() || tgt.empty() || whitespace_tokens(src).size() > max_phrase_len) {
      ++out.skipped_lines;
      continue;
    }
    out.db.add_rule(src, tgt);
  }
  return out;
}

enum class MentionSide : std::uint8_t { Source, Target };

// One coreference mention: a token span [start, end] (inclusive, 0-based)
// within sentence `sentence` of the given side.
struct CorefMention {
  MentionSide side = MentionSide::Source;
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  bool is_pronoun = false;
};

struct CorefChain {
  std::vector<CorefMention> mentions;
};

struct CorefLayer {
  std::vector<CorefChain> chains;
};

/// JSONL loader: `{"id", "chains": [[{side,sent,start,end,is_pronoun},...],...]}`.
inline std::map<std::string, CorefLayer> load_coref(std::istream& in) {
  std::map<std::string, CorefLayer> out;
  std::string line;
  std::size_t line_no = 0;
  while (detail::getline_crlf(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = detail::parse_json_line(line, line_no, "coref");
    std::string id;
    try {
      id = j.at("id").get<std::string>();
      CorefLayer layer;
      for (const json& jchain : j.at("chains")) {
        CorefChain chain;
        for (const json& jm : jchain) {
          CorefMention m;
          std::string side = jm.at("side").get<std::string>();
          if (side == "source")
            m.side = MentionSide::Source;
          else if (side == "target")
            m.side = MentionSide::Target;
          else
            throw std::runtime_error("mention side must be 'source' or 'target'");
          m.sentence = jm.at("sent").get<std::size_t>();
          m.start = jm.at("start").get<std::size_t>();
          m.end = jm.at("end").get<std::size_t>();
          m.is_pronoun = jm.at("is_pronoun").get<bool>();
          if (m.end < m.start) throw std::runtime_error("mention span end before start");
          chain.mentions.push_back(m);
        }
        if (chain.mentions.size() < 2)
          throw std::runtime_error("coreference chain with fewer than two mentions");
        layer.chains.push_back(std::move(chain));
      }
      if (!out.emplace(id, std::move(layer)).second)
        throw std::runtime_error("duplicate id '" + id + "'");
    } catch (const json::exception& e) {
      throw std::runtime_error("coref line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("coref line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// Word -> frequency rank (1 = most frequent). Unknown words resolve to
// one rank past the rarest known word, so lookups are total.
class FrequencyTable {
 public:
  void set(std::string_view word, std::size_t rank) {
    if (rank == 0) throw std::runtime_error("frequency rank must be positive");
    ranks_.emplace(lowercase(word), rank);  // first entry wins
    if (rank > max_rank_) max_rank_ = rank;
  }

  std::size_t rank(std::string_view word) const {
    auto it = ranks_.find(lowercase(word));
    return it == ranks_.end() ? default_rank() : it->second;
  }

  std::size_t default_rank() const { return max_rank_ + 1; }
  std::size_t size() const { return ranks_.size(); }
  bool empty() const { return ranks_.empty(); }

 private:
  std::unordered_map<std::string, std::size_t> ranks_;
  std::size_t max_rank_ = 0;
};

/// Accepts either one word per line (rank = line order) or `word<TAB>rank`.
inline FrequencyTable load_frequency_table(std::istream& in) {
  FrequencyTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t next_rank = 1;
  while (detail::getline_crlf(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      table.set(trim(line), next_rank++);
    } else {
      std::string word = trim(line.substr(0, tab));
      long long rank;
      try {
        rank = std::stoll(line.substr(tab + 1));
      } catch (const std::exception&) {
        throw std::runtime_error("frequency line " + std::to_string(line_no) + ": bad rank");
      }
      if (rank <= 0)
        throw std::runtime_error("frequency line " + std::to_string(line_no) +
                                 ": rank must be positive");
      table.set(word, static_cast<std::size_t>(rank));
      next_rank = std::max(next_rank, static_cast<std::size_t>(rank) + 1);
    }
  }
  return table;
}

/// Corpus JSONL loader. Each record:
///   {"id": str, "source_sentences": [str], "target_sentences": [str],
///    "references": [[str]]?}
/// Alignment is derived from the sentence counts. With `filter_degenerate`
/// set, full-deletion (M-to-0) and full-addition (0-to-N) instances are
/// dropped, matching the training-emission convention.
inline std::vector<SimplificationInstance> load_corpus(std::istream& in, bool filter_degenerate) {
  std::vector<SimplificationInstance> out;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (detail::getline_crlf(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = detail::parse_json_line(line, line_no, "corpus");
    SimplificationInstance si;
    try {
      si.id = j.at("id").get<std::string>();
      si.source_sentences = j.at("source_sentences").get<std::vector<std::string>>();
      si.target_sentences = j.at("target_sentences").get<std::vector<std::string>>();
      if (j.contains("references") && !j["references"].is_null()) {
        auto refs = j["references"].get<std::vector<std::vector<std::string>>>();
        if (!refs.empty()) si.references = std::move(refs);
      }
    } catch (const json::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    if (si.source_sentences.empty() && si.target_sentences.empty())
      throw std::runtime_error("corpus line " + std::to_string(line_no) + ": instance '" +
                               si.id + "' has both sides empty");
    if (!seen_ids.insert(si.id).second)
      throw std::runtime_error("corpus line " + std::to_string(line_no) + ": duplicate id '" +
                               si.id + "'");
    si.alignment = derive_alignment(si.source_sentences.size(), si.target_sentences.size());
    si.validate();
    if (filter_degenerate && si.alignment.degenerate()) continue;
    out.push_back(std::move(si));
  }
  return out;
}

/// JSONL loader for operation labels: `{"id": str, "ops": [token names]}`.
inline std::map<std::string, OperationSet> load_gold_labels(std::istream& in) {
  std::map<std::string, OperationSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (detail::getline_crlf(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = detail::parse_json_line(line, line_no, "labels");
    try {
      std::string id = j.at("id").get<std::string>();
      OperationSet ops;
      for (const json& jop : j.at("ops")) {
        std::string name = jop.get<std::string>();
        auto op = operation_from_name(name);
        if (!op) throw std::runtime_error("unknown operation name '" + name + "'");
        ops.insert(*op);
      }
      if (!out.emplace(id, ops).second)
        throw std::runtime_error("duplicate id '" + id + "'");
    } catch (const json::exception& e) {
      throw std::runtime_error("labels line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("labels line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

/// CoNLL-U reader. Sentences are blank-line separated blocks of 10-column
/// lines; `# sent_id = ...` comments carry ids. Multiword-token ranges
/// ("3-4") and empty nodes ("5.1") are skipped. `_` marks an absent value.
inline std::vector<ParsedSentence> parse_conllu(std::istream& in) {
  std::vector<ParsedSentence> out;
  ParsedSentence cur;
  bool saw_content = false;
  std::size_t ordinal = 1;

  auto sentence_label = [&]() {
    return cur.id.empty() ? "#" + std::to_string(ordinal) : cur.id;
  };

  auto flush = [&]() {
    if (!saw_content) return;
    if (cur.tokens.empty())
      throw std::runtime_error("conllu sentence '" + sentence_label() + "': no tokens");
    cur.validate();
    out.push_back(std::move(cur));
    cur = ParsedSentence{};
    saw_content = false;
    ++ordinal;
  };

  std::string line;
  while (detail::getline_crlf(in, line)) {
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      saw_content = true;
      std::string body = trim(line.substr(1));
      constexpr std::string_view kSentId = "sent_id";
      if (body.rfind(kSentId, 0) == 0) {
        std::size_t eq = body.find('=');
        if (eq != std::string::npos) cur.id = trim(body.substr(eq + 1));
      }
      continue;
    }
    saw_content = true;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      std::size_t tab = line.find('\t', pos);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(pos));
        break;
      }
      cols.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    if (cols.size() != 10)
      throw std::runtime_error("conllu sentence '" + sentence_label() + "': expected 10 columns, got " +
                               std::to_string(cols.size()));
    const std::string& id_col = cols[0];
    if (id_col.find('-') != std::string::npos || id_col.find('.') != std::string::npos)
      continue;  // multiword range or empty node
    ParseToken tok;
    try {
      tok.index = static_cast<std::size_t>(std::stoull(id_col));
    } catch (const std::exception&) {
      throw std::runtime_error("conllu sentence '" + sentence_label() + "': bad token id '" +
                               id_col + "'");
    }
    tok.surface = cols[1];
    tok.lemma = cols[2] == "_" ? "" : cols[2];
    tok.upos = cols[3] == "_" ? "" : cols[3];
    if (cols[5] != "_" && !cols[5].empty()) {
      std::size_t fpos = 0;
      const std::string& feats = cols[5];
      while (fpos < feats.size()) {
        std::size_t bar = feats.find('|', fpos);
        if (bar == std::string::npos) bar = feats.size();
        std::string pair = feats.substr(fpos, bar - fpos);
        std::size_t eq = pair.find('=');
        if (eq != std::string::npos)
          tok.feats[pair.substr(0, eq)] = pair.substr(eq + 1);
        fpos = bar + 1;
      }
    }
    const std::string& head_col = cols[6];
    try {
      if (head_col.empty() || head_col.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument(head_col);
      tok.head = static_cast<std::size_t>(std::stoull(head_col));
    } catch (const std::exception&) {
      throw std::runtime_error("conllu sentence '" + sentence_label() + "': non-integer head '" +
                               head_col + "'");
    }
    tok.deprel = cols[7] == "_" ? "" : cols[7];
    cur.tokens.push_back(std::move(tok));
  }
  flush();
  return out;
}

}  // namespace cogsimp
