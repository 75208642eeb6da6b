#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cogsimp/core.hpp"
#include "cogsimp/ingest.hpp"
#include "cogsimp/text.hpp"

namespace cogsimp {

struct TaggerConfig {
  double del_ratio_threshold = 1.2;   // source/target token ratio that alone marks deletion
  double del_pct_threshold = 0.30;    // deleted-token fraction for the secondary deletion rule
  double add_ratio_threshold = 1.0;   // addition requires the target to be the longer side
  double clause_match_jaccard = 0.3;  // minimum lemma overlap to pair clauses across sides
  std::size_t max_phrase_len = 4;     // longest source phrase probed against the paraphrase table

  void validate() const {
    if (del_ratio_threshold <= 0.0 || add_ratio_threshold <= 0.0)
      throw std::runtime_error("tagger config: ratio thresholds must be positive");
    if (del_pct_threshold <= 0.0 || del_pct_threshold > 1.0)
      throw std::runtime_error("tagger config: deletion percentage must lie in (0, 1]");
    if (clause_match_jaccard <= 0.0 || clause_match_jaccard > 1.0)
      throw std::runtime_error("tagger config: clause jaccard must lie in (0, 1]");
    if (max_phrase_len == 0)
      throw std::runtime_error("tagger config: max phrase length must be positive");
  }
};

inline std::vector<std::string> default_example_cues() {
  return {"for example", "e.g.", "such as", "for instance", "like"};
}

struct TaggerResources {
  ParaphraseDB paraphrase_db;
  std::optional<std::map<std::string, CorefLayer>> coref;
  std::vector<std::string> example_cues = default_example_cues();
  TaggerConfig config;

  void validate() const {
    if (example_cues.empty()) throw std::runtime_error("tagger resources: no example cues");
    config.validate();
  }
};

/// Source-over-target length ratio in whitespace tokens, summed across the
/// sentences of each side. Throws when either side tokenizes to nothing.
inline double token_length_ratio(const SimplificationInstance& si) {
  std::size_t s = 0, t = 0;
  for (const std::string& sent : si.source_sentences) s += whitespace_tokens(sent).size();
  for (const std::string& sent : si.target_sentences) t += whitespace_tokens(sent).size();
  if (s == 0 || t == 0)
    throw std::runtime_error("instance '" + si.id + "': token ratio undefined for an empty side");
  return static_cast<double>(s) / static_cast<double>(t);
}

namespace tagdetail {

// Flattened token view of one side of an instance. Tokens come from the
// dependency parses when present, otherwise from the punctuation-splitting
// tokenizer; `parsed` records which.
struct SideView {
  bool parsed = false;
  std::vector<std::string> surface;
  std::vector<std::string> lower;
  std::vector<std::string> lemma;    // lowercased; falls back to the surface form
  std::vector<std::string> upos;     // empty strings when not parsed
  std::vector<std::size_t> head;     // global index + 1, 0 = clause/sentence root
  std::vector<std::string> deprel;
  std::vector<std::string> person;   // morphological Person value, "" if none
  std::vector<std::string> tense;    // morphological Tense value, "" if none
  std::vector<bool> passive_feat;    // Voice=Pass on the token itself
  std::vector<std::size_t> sentence;        // sentence index per token
  std::vector<std::size_t> sentence_begin;  // global index of each sentence's first token
  std::vector<std::size_t> sentence_size;

  std::size_t size() const { return surface.size(); }
};

inline SideView make_view(const std::vector<std::string>& sentences,
                          const std::optional<std::vector<ParsedSentence>>& parses) {
  SideView v;
  v.parsed = parses.has_value();
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    v.sentence_begin.push_back(v.surface.size());
    if (v.parsed) {
      const ParsedSentence& p = (*parses)[s];
      const std::size_t base = v.surface.size();
      for (const ParseToken& t : p.tokens) {
        v.surface.push_back(t.surface);
        v.lower.push_back(lowercase(t.surface));
        v.lemma.push_back(t.lemma.empty() ? lowercase(t.surface) : lowercase(t.lemma));
        v.upos.push_back(t.upos);
        v.head.push_back(t.head == 0 ? 0 : base + t.head);
        v.deprel.push_back(t.deprel);
        auto feat = [&](const char* key) {
          auto it = t.feats.find(key);
          return it == t.feats.end() ? std::string() : it->second;
        };
        v.person.push_back(feat("Person"));
        v.tense.push_back(feat("Tense"));
        v.passive_feat.push_back(feat("Voice") == "Pass");
        v.sentence.push_back(s);
      }
    } else {
      for (const std::string& tok : simple_tokens(sentences[s])) {
        v.surface.push_back(tok);
        v.lower.push_back(lowercase(tok));
        v.lemma.push_back(lowercase(tok));
        v.upos.emplace_back();
        v.head.push_back(0);
        v.deprel.emplace_back();
        v.person.emplace_back();
        v.tense.emplace_back();
        v.passive_feat.push_back(false);
        v.sentence.push_back(s);
      }
    }
    v.sentence_size.push_back(v.surface.size() - v.sentence_begin.back());
  }
  return v;
}

inline bool is_content(const SideView& v, std::size_t i) {
  return v.parsed ? !is_function_upos(v.upos[i]) : !is_function_surface(v.lower[i]);
}

inline bool is_noun_like(const SideView& v, std::size_t i) {
  if (v.parsed) return v.upos[i] == "NOUN" || v.upos[i] == "PROPN";
  return is_content(v, i);
}

inline std::string base_deprel(const std::string& deprel) {
  const std::size_t colon = deprel.find(':');
  return colon == std::string::npos ? deprel : deprel.substr(0, colon);
}

inline std::unordered_set<std::string> lower_set(const SideView& v) {
  return {v.lower.begin(), v.lower.end()};
}

inline std::string format_ratio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", r);
  return buf;
}

inline std::string format_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
  return buf;
}

// A source verb is passive when it carries Voice=Pass or governs a
// passive-marked dependent (nsubj:pass / aux:pass / csubj:pass).
inline bool is_passive_verb(const SideView& v, std::size_t i) {
  if (v.passive_feat[i]) return true;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v.head[j] != i + 1) continue;
    const std::string& rel = v.deprel[j];
    if (rel == "nsubj:pass" || rel == "aux:pass" || rel == "csubj:pass") return true;
  }
  return false;
}

struct ProxResult {
  bool fired = false;
  bool skipped = false;
  std::vector<std::string> evidence;
  std::vector<std::size_t> consumed_source;  // voice-matched verb tokens
  std::vector<std::size_t> consumed_target;
};

// Point-of-view, tense, and voice checks. Requires parses on both sides.
inline ProxResult detect_prox(const SideView& src, const SideView& tgt) {
  ProxResult out;
  if (!src.parsed || !tgt.parsed) {
    out.skipped = true;
    return out;
  }

  // (a) person point of view moves toward the reader: 3->2, 3->1 or 2->1.
  struct PersonInfo {
    std::array<std::size_t, 4> count{};
    std::array<std::size_t, 4> first{};
    PersonInfo() { first.fill(static_cast<std::size_t>(-1)); }
  };
  auto person_info = [](const SideView& v) {
    PersonInfo info;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string& p = v.person[i];
      if (p != "1" && p != "2" && p != "3") continue;
      const std::size_t value = static_cast<std::size_t>(p[0] - '0');
      if (info.count[value] == 0) info.first[value] = i;
      ++info.count[value];
    }
    return info;
  };
  const PersonInfo sp = person_info(src);
  const PersonInfo tp = person_info(tgt);
  const std::array<std::pair<std::size_t, std::size_t>, 3> shifts = {{{3, 2}, {3, 1}, {2, 1}}};
  for (const auto& [from, to] : shifts) {
    if (sp.count[from] > tp.count[from] && tp.count[to] > sp.count[to]) {
      out.fired = true;
      out.evidence.push_back("person shift " + std::to_string(from) + "->" + std::to_string(to) +
                             ": '" + src.surface[sp.first[from]] + "' -> '" +
                             tgt.surface[tp.first[to]] + "'");
      break;
    }
  }
  if (!out.fired && sp.count[1] + sp.count[2] == 0 && tp.count[1] + tp.count[2] > 0) {
    const std::size_t hit = tp.count[1] > 0 ? tp.first[1] : tp.first[2];
    out.fired = true;
    out.evidence.push_back("person marking moves toward the reader: target '" +
                           tgt.surface[hit] + "'");
  }

  // (b) a lemma-matched verb pair whose tenses differ.
  auto verb_tenses = [](const SideView& v) {
    std::map<std::string, std::set<std::string>> tenses;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v.upos[i] == "VERB" && !v.tense[i].empty()) tenses[v.lemma[i]].insert(v.tense[i]);
    return tenses;
  };
  const auto src_tenses = verb_tenses(src);
  const auto tgt_tenses = verb_tenses(tgt);
  for (const auto& [lemma, stenses] : src_tenses) {
    auto it = tgt_tenses.find(lemma);
    if (it == tgt_tenses.end() || it->second == stenses) continue;
    out.fired = true;
    const std::vector<std::string> from(stenses.begin(), stenses.end());
    const std::vector<std::string> to(it->second.begin(), it->second.end());
    out.evidence.push_back("tense change for verb '" + lemma + "': " + join(from, "/") + " -> " +
                           join(to, "/"));
    break;
  }

  // (c) a passive source verb with an active same-lemma verb in the target.
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src.upos[i] != "VERB" || !is_passive_verb(src, i)) continue;
    for (std::size_t j = 0; j < tgt.size(); ++j) {
      if (tgt.upos[j] != "VERB" || tgt.lemma[j] != src.lemma[i]) continue;
      if (is_passive_verb(tgt, j)) continue;
      out.fired = true;
      out.evidence.push_back("passive '" + src.surface[i] + "' -> active '" + tgt.surface[j] + "'");
      out.consumed_source.push_back(i);
      out.consumed_target.push_back(j);
      break;
    }
  }
  return out;
}

struct RephraseResult {
  bool fired = false;
  std::vector<std::string> evidence;
  std::vector<bool> consumed_source;
  std::vector<bool> consumed_target;
};

// Paraphrase-table matches: every source word or phrase (up to the table's
// phrase cap) whose tokens are not all present in the target is probed; a
// match fires when one of its paraphrases occurs contiguously in the target.
inline RephraseResult detect_rephrase(const SideView& src, const SideView& tgt,
                                      const ParaphraseDB& db, std::size_t max_phrase_len) {
  RephraseResult out;
  out.consumed_source.assign(src.size(), false);
  out.consumed_target.assign(tgt.size(), false);
  if (db.empty()) return out;
  const std::unordered_set<std::string> tgt_words = lower_set(tgt);

  auto find_subsequence = [&](const std::vector<std::string>& needle) -> std::optional<std::size_t> {
    if (needle.empty() || needle.size() > tgt.size()) return std::nullopt;
    for (std::size_t j = 0; j + needle.size() <= tgt.size(); ++j) {
      bool match = true;
      for (std::size_t k = 0; k < needle.size(); ++k)
        if (tgt.lower[j + k] != needle[k]) {
          match = false;
          break;
        }
      if (match) return j;
    }
    return std::nullopt;
  };

  const std::size_t cap = std::min(max_phrase_len, db.max_phrase_len());
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t len = 1; len <= cap && i + len <= src.size(); ++len) {
      if (src.sentence[i + len - 1] != src.sentence[i]) break;  // phrases stay in-sentence
      bool all_in_target = true;
      for (std::size_t k = i; k < i + len; ++k)
        if (!tgt_words.count(src.lower[k])) {
          all_in_target = false;
          break;
        }
      if (all_in_target) continue;
      std::string phrase = src.lower[i];
      for (std::size_t k = i + 1; k < i + len; ++k) phrase += ' ' + src.lower[k];
      const std::set<std::string>* paraphrases = db.lookup(phrase);
      if (!paraphrases) continue;
      for (const std::string& pp : *paraphrases) {
        const std::vector<std::string> pp_tokens = whitespace_tokens(pp);
        const auto at = find_subsequence(pp_tokens);
        if (!at) continue;
        out.fired = true;
        out.evidence.push_back("'" + phrase + "' -> '" + pp + "'");
        for (std::size_t k = i; k < i + len; ++k) out.consumed_source[k] = true;
        for (std::size_t k = *at; k < *at + pp_tokens.size(); ++k) out.consumed_target[k] = true;
        break;
      }
    }
  }
  return out;
}

enum class DeletionKind : std::uint8_t { Removal, Summarization, Unspecified };

struct DeletionResult {
  bool fired = false;
  DeletionKind kind = DeletionKind::Unspecified;
  std::vector<std::string> evidence;
};

// Length-ratio rule plus the secondary deleted-fraction rule; tokens already
// matched by rephrase or voice substitutions do not count as deleted.
inline DeletionResult detect_deletion(const SimplificationInstance& si, const SideView& src,
                                      const SideView& tgt, const std::vector<bool>& consumed_source,
                                      double ratio, const TaggerConfig& config) {
  DeletionResult out;
  if (si.alignment.kind == AlignmentKind::MToOne)
    out.kind = DeletionKind::Summarization;

  if (ratio >= config.del_ratio_threshold) {
    out.fired = true;
    out.evidence.push_back("token ratio " + format_ratio(ratio) + " >= " +
                           format_ratio(config.del_ratio_threshold));
  } else if (ratio > 1.0) {
    const std::unordered_set<std::string> tgt_words = lower_set(tgt);
    std::size_t deleted = 0;
    std::vector<std::string> samples;
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (consumed_source[i] || tgt_words.count(src.lower[i])) continue;
      ++deleted;
      if (samples.size() < 3) samples.push_back(src.surface[i]);
    }
    const double fraction = static_cast<double>(deleted) / static_cast<double>(src.size());
    if (fraction > config.del_pct_threshold) {
      out.fired = true;
      out.evidence.push_back(format_pct(fraction) + " of source tokens deleted (" +
                             join(samples, ", ") + ") with token ratio " + format_ratio(ratio) +
                             " > 1");
    }
  }
  if (out.fired && out.kind == DeletionKind::Summarization)
    out.evidence.push_back("M-to-1 alignment: summarization");
  return out;
}

/// Target tokens introducing new content: absent from the source by lowercased
/// surface, not consumed by rephrase or voice matches, and not function words.
inline std::vector<std::size_t> new_content_words(const SideView& src, const SideView& tgt,
                                                  const std::vector<bool>& consumed_target) {
  const std::unordered_set<std::string> src_words = lower_set(src);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    if (consumed_target[j] || src_words.count(tgt.lower[j])) continue;
    if (!is_content(tgt, j)) continue;
    out.push_back(j);
  }
  return out;
}

struct AdditionResult {
  bool add = false;
  bool example = false;
  bool explain = false;
  bool explain_skipped = false;  // new words present but no target parse
  std::vector<std::string> add_evidence;
  std::vector<std::string> example_evidence;
  std::vector<std::string> explain_evidence;
};

// Classifies new target content: example clauses introduced by cue phrases,
// explanations tied to source nouns, and otherwise plain addition when the
// target is the longer side.
inline AdditionResult detect_addition(const SideView& src, const SideView& tgt,
                                      const std::vector<std::size_t>& new_words,
                                      const std::vector<std::string>& cues, double ratio,
                                      const TaggerConfig& config) {
  AdditionResult out;
  if (new_words.empty()) return out;

  std::vector<bool> classified(tgt.size(), false);

  // Example clauses: from a cue phrase to the next clause-final punctuation.
  std::vector<std::pair<std::size_t, std::size_t>> clause_spans;  // [begin, end)
  std::vector<std::string> clause_cues;
  for (const std::string& cue : cues) {
    const std::vector<std::string> cue_tokens = lowercase_all(simple_tokens(cue));
    if (cue_tokens.empty()) continue;
    for (std::size_t j = 0; j + cue_tokens.size() <= tgt.size(); ++j) {
      bool match = tgt.sentence[j] == tgt.sentence[j + cue_tokens.size() - 1];
      for (std::size_t k = 0; match && k < cue_tokens.size(); ++k)
        if (tgt.lower[j + k] != cue_tokens[k]) match = false;
      if (!match) continue;
      std::size_t end = j + cue_tokens.size();
      while (end < tgt.size() && tgt.sentence[end] == tgt.sentence[j] &&
             tgt.lower[end] != "." && tgt.lower[end] != ";" && tgt.lower[end] != "!" &&
             tgt.lower[end] != "?")
        ++end;
      clause_spans.emplace_back(j, end);
      clause_cues.push_back(cue);
    }
  }
  for (std::size_t w : new_words) {
    for (std::size_t c = 0; c < clause_spans.size(); ++c) {
      if (w < clause_spans[c].first || w >= clause_spans[c].second) continue;
      classified[w] = true;
      if (!out.example) {
        out.example = true;
        out.example_evidence.push_back("new word '" + tgt.surface[w] + "' in clause cued by '" +
                                       clause_cues[c] + "'");
      }
      break;
    }
  }

  // Explanations: the new material hangs off (or sits next to) a noun the
  // source already mentions. Noun identification needs a parsed target; the
  // rule stays silent without one.
  std::unordered_set<std::string> src_lemmas(src.lemma.begin(), src.lemma.end());
  const std::unordered_set<std::size_t> new_set(new_words.begin(), new_words.end());
  if (!tgt.parsed) out.explain_skipped = true;
  for (std::size_t w : tgt.parsed ? new_words : std::vector<std::size_t>{}) {
    if (classified[w]) continue;
    std::optional<std::size_t> anchor;
    {
      // climb out of the new-word region to its attachment point
      std::size_t cur = w;
      for (std::size_t steps = 0; steps <= tgt.size(); ++steps) {
        const std::size_t h = tgt.head[cur];
        if (h == 0) break;
        const std::size_t parent = h - 1;
        if (!new_set.count(parent)) {
          anchor = parent;
          break;
        }
        cur = parent;
      }
    }
    bool hit = false;
    std::string note;
    if (anchor && is_noun_like(tgt, *anchor) && src_lemmas.count(tgt.lemma[*anchor])) {
      hit = true;
      note = "'" + tgt.surface[w] + "' attaches to source noun '" + tgt.surface[*anchor] + "'";
    } else {
      for (std::size_t d = 1; d <= 2 && !hit; ++d) {
        for (const long dir : {-1L, 1L}) {
          const long pos = static_cast<long>(w) + dir * static_cast<long>(d);
          if (pos < 0 || pos >= static_cast<long>(tgt.size())) continue;
          const std::size_t u = static_cast<std::size_t>(pos);
          if (tgt.sentence[u] != tgt.sentence[w] || new_set.count(u)) continue;
          if (is_noun_like(tgt, u) && src_lemmas.count(tgt.lemma[u])) {
            hit = true;
            note = "'" + tgt.surface[w] + "' adjacent to source noun '" + tgt.surface[u] + "'";
            break;
          }
        }
      }
    }
    if (hit) {
      // the whole chain of new words hanging below this one is explained too
      classified[w] = true;
      if (tgt.parsed)
        for (std::size_t j : new_words) {
          std::size_t cur = j;
          for (std::size_t steps = 0; steps <= tgt.size() && !classified[j]; ++steps) {
            if (cur == w) classified[j] = true;
            const std::size_t h = tgt.head[cur];
            if (h == 0 || !new_set.count(h - 1)) break;
            cur = h - 1;
          }
        }
      if (!out.explain) out.explain = true;
      out.explain_evidence.push_back(note);
    }
  }

  std::vector<std::string> leftovers;
  for (std::size_t w : new_words)
    if (!classified[w]) leftovers.push_back(tgt.surface[w]);
  if (!leftovers.empty() && ratio < config.add_ratio_threshold) {
    out.add = true;
    out.add_evidence.push_back("unclassified new words (" + join(leftovers, ", ") +
                               ") with token ratio " + format_ratio(ratio) + " < " +
                               format_ratio(config.add_ratio_threshold));
  }
  return out;
}

struct ExplicitResult {
  bool fired = false;
  std::vector<std::string> evidence;
};

// Pronoun explicitation. With a coreference layer: a chain holding a source
// pronoun and a non-pronoun target mention. Without one: fewer third-person
// pronouns in the target combined with a noun repeated more often there.
inline ExplicitResult detect_explicit(const SimplificationInstance& si, const SideView& src,
                                      const SideView& tgt, const CorefLayer* layer) {
  ExplicitResult out;
  if (layer) {
    auto mention_text = [&](const CorefMention& m) -> std::string {
      const SideView& v = m.side == MentionSide::Source ? src : tgt;
      if (m.sentence >= v.sentence_begin.size() || m.end >= v.sentence_size[m.sentence])
        throw std::runtime_error("instance '" + si.id + "': coreference mention out of bounds");
      std::string text;
      for (std::size_t k = m.start; k <= m.end; ++k) {
        if (!text.empty()) text += ' ';
        text += v.surface[v.sentence_begin[m.sentence] + k];
      }
      return text;
    };
    for (const CorefChain& chain : layer->chains) {
      const CorefMention* pron = nullptr;
      const CorefMention* expl = nullptr;
      for (const CorefMention& m : chain.mentions) {
        if (m.side == MentionSide::Source && m.is_pronoun && !pron) pron = &m;
        if (m.side == MentionSide::Target && !m.is_pronoun && !expl) expl = &m;
      }
      if (pron && expl) {
        out.fired = true;
        out.evidence.push_back("chain links source pronoun '" + mention_text(*pron) +
                               "' to target '" + mention_text(*expl) + "'");
        return out;
      }
    }
    return out;
  }

  auto third_person_count = [](const SideView& v) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (third_person_pronouns().count(v.lower[i])) ++n;
    return n;
  };
  const std::size_t src_pron = third_person_count(src);
  const std::size_t tgt_pron = third_person_count(tgt);
  if (src_pron <= tgt_pron) return out;

  std::map<std::string, long> noun_balance;  // target count minus source count
  for (std::size_t j = 0; j < tgt.size(); ++j)
    if (is_noun_like(tgt, j) && !third_person_pronouns().count(tgt.lower[j]))
      ++noun_balance[tgt.lemma[j]];
  for (std::size_t i = 0; i < src.size(); ++i)
    if (is_noun_like(src, i) && !third_person_pronouns().count(src.lower[i]))
      --noun_balance[src.lemma[i]];
  for (const auto& [lemma, balance] : noun_balance) {
    if (balance > 0) {
      out.fired = true;
      out.evidence.push_back("third-person pronouns " + std::to_string(src_pron) + " -> " +
                             std::to_string(tgt_pron) + "; noun '" + lemma +
                             "' mentioned more often in the target");
      break;
    }
  }
  return out;
}

struct ReorderResult {
  bool fired = false;
  bool skipped = false;
  std::vector<std::string> evidence;
};

// Clause-order and subject/verb/object-order changes. Requires parses.
inline ReorderResult detect_intra_reorder(const SideView& src, const SideView& tgt,
                                          const TaggerConfig& config) {
  ReorderResult out;
  if (!src.parsed || !tgt.parsed) {
    out.skipped = true;
    return out;
  }

  static const std::set<std::string> kClauseRels = {"root",  "conj", "advcl", "ccomp",
                                                    "xcomp", "acl",  "parataxis"};
  struct Clause {
    std::size_t head;
    std::set<std::string> content;  // lemmas of non-function members
  };
  auto clauses_of = [&](const SideView& v) {
    std::vector<std::size_t> heads;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v.head[i] == 0 || kClauseRels.count(base_deprel(v.deprel[i]))) heads.push_back(i);
    std::set<std::size_t> head_set(heads.begin(), heads.end());
    std::vector<Clause> clauses;
    for (std::size_t h : heads) clauses.push_back({h, {}});
    for (std::size_t i = 0; i < v.size(); ++i) {
      // walk up to the nearest clause head
      std::size_t cur = i;
      for (std::size_t steps = 0; steps <= v.size(); ++steps) {
        if (head_set.count(cur)) break;
        const std::size_t h = v.head[cur];
        if (h == 0) break;
        cur = h - 1;
      }
      if (!head_set.count(cur)) continue;
      if (!is_content(v, i)) continue;
      const std::size_t slot =
          static_cast<std::size_t>(std::find(heads.begin(), heads.end(), cur) - heads.begin());
      clauses[slot].content.insert(v.lemma[i]);
    }
    return clauses;
  };

  const std::vector<Clause> src_clauses = clauses_of(src);
  const std::vector<Clause> tgt_clauses = clauses_of(tgt);

  auto jaccard = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const std::string& x : a) inter += b.count(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
  };

  std::vector<bool> used(src_clauses.size(), false);
  std::vector<std::size_t> matched_order;
  for (const Clause& tc : tgt_clauses) {
    double best = 0.0;
    std::optional<std::size_t> best_idx;
    for (std::size_t i = 0; i < src_clauses.size(); ++i) {
      if (used[i]) continue;
      const double j = jaccard(tc.content, src_clauses[i].content);
      if (j >= config.clause_match_jaccard && j > best) {
        best = j;
        best_idx = i;
      }
    }
    if (best_idx) {
      used[*best_idx] = true;
      matched_order.push_back(*best_idx);
    }
  }
  for (std::size_t k = 1; k < matched_order.size(); ++k)
    if (matched_order[k] < matched_order[k - 1]) {
      out.fired = true;
      std::vector<std::string> order;
      for (std::size_t idx : matched_order) order.push_back(std::to_string(idx + 1));
      out.evidence.push_back("clause order changed: target follows source clauses [" +
                             join(order, ", ") + "]");
      break;
    }

  // subject/verb/object linear order per verb lemma present on both sides
  struct Svo {
    std::size_t verb;
    std::optional<std::size_t> subj;
    std::optional<std::size_t> obj;
  };
  auto svo_of = [&](const SideView& v) {
    std::map<std::string, Svo> out_map;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v.upos[i] != "VERB") continue;
      if (out_map.count(v.lemma[i])) continue;  // first verb of each lemma
      Svo svo{i, std::nullopt, std::nullopt};
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v.head[j] != i + 1) continue;
        const std::string rel = base_deprel(v.deprel[j]);
        if ((rel == "nsubj" || rel == "csubj") && !svo.subj) svo.subj = j;
        if ((rel == "obj" || rel == "dobj" || rel == "iobj") && !svo.obj) svo.obj = j;
      }
      out_map.emplace(v.lemma[i], svo);
    }
    return out_map;
  };
  auto pattern = [](const Svo& svo, bool with_subj, bool with_obj) {
    std::vector<std::pair<std::size_t, char>> parts;
    parts.emplace_back(svo.verb, 'V');
    if (with_subj) parts.emplace_back(*svo.subj, 'S');
    if (with_obj) parts.emplace_back(*svo.obj, 'O');
    std::sort(parts.begin(), parts.end());
    std::string p;
    for (const auto& [pos, c] : parts) p += c;
    return p;
  };
  const auto src_svo = svo_of(src);
  const auto tgt_svo = svo_of(tgt);
  for (const auto& [lemma, s] : src_svo) {
    auto it = tgt_svo.find(lemma);
    if (it == tgt_svo.end()) continue;
    const Svo& t = it->second;
    const bool with_subj = s.subj && t.subj;
    const bool with_obj = s.obj && t.obj;
    if (!with_subj && !with_obj) continue;  // only the verb in common
    const std::string sp = pattern(s, with_subj, with_obj);
    const std::string tp = pattern(t, with_subj, with_obj);
    if (sp != tp) {
      out.fired = true;
      out.evidence.push_back("verb '" + lemma + "' order changed: " + sp + " -> " + tp);
      break;
    }
  }
  return out;
}

}  // namespace tagdetail

/// Positions (1-based) of sentences that moved, given the permutation mapping
/// target order to original source positions. Elements outside one longest
/// increasing subsequence are flagged; among maximum-length subsequences the
/// lexicographically smallest index sequence is kept.
inline std::set<std::size_t> detect_sentence_reorder(const std::vector<std::size_t>& permutation) {
  const std::size_t n = permutation.size();
  std::vector<bool> seen(n + 1, false);
  for (std::size_t v : permutation) {
    if (v < 1 || v > n || seen[v])
      throw std::runtime_error("detect_sentence_reorder: input is not a permutation of 1..n");
    seen[v] = true;
  }
  if (n == 0) return {};

  // length of the longest increasing run starting at each position
  std::vector<std::size_t> best_from(n, 1);
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = i + 1; j < n; ++j)
      if (permutation[j] > permutation[i])
        best_from[i] = std::max(best_from[i], best_from[j] + 1);
  const std::size_t lis = *std::max_element(best_from.begin(), best_from.end());

  std::set<std::size_t> in_lis;
  std::size_t prev_value = 0, start = 0;
  for (std::size_t need = lis; need >= 1; --need) {
    for (std::size_t i = start; i < n; ++i) {
      if (best_from[i] == need && permutation[i] > prev_value) {
        in_lis.insert(i);
        prev_value = permutation[i];
        start = i + 1;
        break;
      }
    }
  }

  std::set<std::size_t> flagged;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_lis.count(i)) flagged.insert(i + 1);
  return flagged;
}

/// Runs every operation detector on one instance. Degenerate alignments
/// short-circuit: full deletions tag DEL, full additions tag ADD. Rules that
/// need missing resources leave a "skipped: ..." note in the evidence map.
inline TaggedInstance tag(const SimplificationInstance& si, const TaggerResources& resources) {
  resources.validate();
  si.validate();
  TaggedInstance out;
  out.instance = si;

  if (si.alignment.kind == AlignmentKind::MToZero) {
    out.ops.insert(OperationToken::Del);
    out.evidence[OperationToken::Del].push_back("full sentence deletion (" +
                                                std::string(name_of(si.alignment.kind)) +
                                                " alignment): removal");
    return out;
  }
  if (si.alignment.kind == AlignmentKind::ZeroToN) {
    out.ops.insert(OperationToken::Add);
    out.evidence[OperationToken::Add].push_back("full sentence addition (" +
                                                std::string(name_of(si.alignment.kind)) +
                                                " alignment)");
    return out;
  }

  const tagdetail::SideView src = tagdetail::make_view(si.source_sentences, si.source_parses);
  const tagdetail::SideView tgt = tagdetail::make_view(si.target_sentences, si.target_parses);
  const double ratio = token_length_ratio(si);
  const TaggerConfig& config = resources.config;

  // proximation
  const tagdetail::ProxResult prox = tagdetail::detect_prox(src, tgt);
  if (prox.skipped) {
    out.evidence[OperationToken::Prox].push_back("skipped: no parses");
  } else if (prox.fired) {
    out.ops.insert(OperationToken::Prox);
    for (const std::string& e : prox.evidence) out.evidence[OperationToken::Prox].push_back(e);
  }

  // rephrasing, with consumed spans feeding the later rules
  tagdetail::RephraseResult rephrase =
      tagdetail::detect_rephrase(src, tgt, resources.paraphrase_db, config.max_phrase_len);
  for (std::size_t i : prox.consumed_source) rephrase.consumed_source[i] = true;
  for (std::size_t j : prox.consumed_target) rephrase.consumed_target[j] = true;
  if (rephrase.fired) {
    out.ops.insert(OperationToken::Rephrase);
    for (const std::string& e : rephrase.evidence)
      out.evidence[OperationToken::Rephrase].push_back(e);
  }

  // deletion
  const tagdetail::DeletionResult del =
      tagdetail::detect_deletion(si, src, tgt, rephrase.consumed_source, ratio, config);
  if (del.fired) {
    out.ops.insert(OperationToken::Del);
    for (const std::string& e : del.evidence) out.evidence[OperationToken::Del].push_back(e);
  }

  // addition family
  const std::vector<std::size_t> new_words =
      tagdetail::new_content_words(src, tgt, rephrase.consumed_target);
  const tagdetail::AdditionResult add = tagdetail::detect_addition(
      src, tgt, new_words, resources.example_cues, ratio, config);
  if (add.example) {
    out.ops.insert(OperationToken::Example);
    for (const std::string& e : add.example_evidence)
      out.evidence[OperationToken::Example].push_back(e);
  }
  if (add.explain) {
    out.ops.insert(OperationToken::Explain);
    for (const std::string& e : add.explain_evidence)
      out.evidence[OperationToken::Explain].push_back(e);
  } else if (add.explain_skipped) {
    out.evidence[OperationToken::Explain].push_back("skipped: no parses");
  }
  if (add.add) {
    out.ops.insert(OperationToken::Add);
    for (const std::string& e : add.add_evidence) out.evidence[OperationToken::Add].push_back(e);
  }

  // explicitation
  const CorefLayer* layer = nullptr;
  if (resources.coref) {
    auto it = resources.coref->find(si.id);
    if (it != resources.coref->end()) layer = &it->second;
  }
  const tagdetail::ExplicitResult expl = tagdetail::detect_explicit(si, src, tgt, layer);
  if (expl.fired) {
    out.ops.insert(OperationToken::Explicit);
    for (const std::string& e : expl.evidence) out.evidence[OperationToken::Explicit].push_back(e);
  }

  // intra-sentence rearrangement
  const tagdetail::ReorderResult reorder = tagdetail::detect_intra_reorder(src, tgt, config);
  if (reorder.skipped) {
    out.evidence[OperationToken::Reorder].push_back("skipped: no parses");
  } else if (reorder.fired) {
    out.ops.insert(OperationToken::Reorder);
    for (const std::string& e : reorder.evidence)
      out.evidence[OperationToken::Reorder].push_back(e);
  }

  // sentence splitting
  if (si.alignment.kind == AlignmentKind::OneToN) {
    out.ops.insert(OperationToken::Split);
    out.evidence[OperationToken::Split].push_back(
        "1-to-" + std::to_string(si.alignment.target_count) + " alignment");
  }

  out.validate();
  return out;
}

/// True when any rule left a "skipped: ..." note (missing parses or similar).
inline bool has_skipped_rules(const TaggedInstance& tagged) {
  for (const auto& [op, notes] : tagged.evidence)
    for (const std::string& note : notes)
      if (note.rfind("skipped:", 0) == 0) return true;
  return false;
}

struct MultiReferenceResult {
  OperationSet ops;
  std::array<std::size_t, kOperationCount> fire_counts{};
  std::size_t n_references = 0;
};

/// Tags the source against each reference and keeps the operations that fire
/// in strictly more than `threshold` of them.
inline MultiReferenceResult tag_multi_reference_counts(const SimplificationInstance& si,
                                                       const TaggerResources& resources,
                                                       double threshold = 0.5) {
  if (!si.references || si.references->empty())
    throw std::runtime_error("instance '" + si.id + "': no references to tag against");
  MultiReferenceResult out;
  out.n_references = si.references->size();
  for (const std::vector<std::string>& ref : *si.references) {
    SimplificationInstance variant;
    variant.id = si.id;
    variant.source_sentences = si.source_sentences;
    variant.target_sentences = ref;
    variant.alignment = derive_alignment(variant.source_sentences.size(), ref.size());
    variant.source_parses = si.source_parses;
    const TaggedInstance tagged = tag(variant, resources);
    for (std::size_t i = 0; i < kOperationCount; ++i)
      if (tagged.ops.contains(kAllOperations[i])) ++out.fire_counts[i];
  }
  const double k = static_cast<double>(out.n_references);
  for (std::size_t i = 0; i < kOperationCount; ++i)
    if (static_cast<double>(out.fire_counts[i]) > threshold * k)
      out.ops.insert(kAllOperations[i]);
  return out;
}

inline OperationSet tag_multi_reference(const SimplificationInstance& si,
                                        const TaggerResources& resources,
                                        double threshold = 0.5) {
  return tag_multi_reference_counts(si, resources, threshold).ops;
}

}  // namespace cogsimp
