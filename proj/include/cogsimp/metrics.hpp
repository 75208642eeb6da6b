#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
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

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

/// Fixed tokenization for the n-gram metrics: lowercase, punctuation split
/// off, whitespace separated.
inline std::vector<std::string> metric_tokens(std::string_view text) {
  return lowercase_all(simple_tokens(text));
}

namespace detail {

using NgramCounts = std::unordered_map<std::string, double>;

inline NgramCounts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += '\x1e';
      key += tokens[i + k];
    }
    out[key] += 1.0;
  }
  return out;
}

inline double count_of(const NgramCounts& counts, const std::string& key) {
  auto it = counts.find(key);
  return it == counts.end() ? 0.0 : it->second;
}

// Precision/recall with the empty-side convention: both sides empty -> 1,
// exactly one side empty -> 0.
inline double safe_ratio(double hits, double denom, double other_denom) {
  if (denom > 0.0) return hits / denom;
  return other_denom > 0.0 ? 0.0 : 1.0;
}

inline double f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace detail

// Simplification score with its three token-operation components, all on a
// 0..100 scale. The overall score is always the mean of the components.
struct SariScore {
  double sari = 0.0;
  double f1_add = 0.0;
  double f1_keep = 0.0;
  double p_delete = 0.0;
  std::vector<SariScore> per_sentence;  // populated for corpus-level scores on request
};

/// Scores one output sentence against its source and references over 1..4-gram
/// multisets. ADD uses set semantics over n-grams introduced by the output;
/// KEEP and DELETE use multiset counts with reference mass averaged across the
/// references. Per n-gram size the component is an F1 (ADD, KEEP) or a
/// precision (DELETE); component scores average the four sizes.
inline SariScore sari_sentence(const std::string& source, const std::string& output,
                               const std::vector<std::string>& references) {
  if (references.empty()) throw std::runtime_error("sari: instance without references");
  const std::vector<std::string> src_tok = metric_tokens(source);
  const std::vector<std::string> out_tok = metric_tokens(output);
  std::vector<std::vector<std::string>> ref_toks;
  ref_toks.reserve(references.size());
  for (const std::string& r : references) ref_toks.push_back(metric_tokens(r));
  const double nref = static_cast<double>(references.size());

  double add_sum = 0.0, keep_sum = 0.0, del_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const detail::NgramCounts src = detail::ngram_counts(src_tok, n);
    const detail::NgramCounts out = detail::ngram_counts(out_tok, n);
    std::vector<detail::NgramCounts> refs;
    refs.reserve(ref_toks.size());
    for (const auto& rt : ref_toks) refs.push_back(detail::ngram_counts(rt, n));

    // ADD: n-grams of the output that are not in the source, against n-grams
    // any reference introduced.
    double add_cand = 0.0, add_ref = 0.0, add_hits = 0.0;
    for (const auto& [g, c] : out)
      if (detail::count_of(src, g) == 0.0) {
        add_cand += 1.0;
        bool in_ref = false;
        for (const auto& r : refs)
          if (detail::count_of(r, g) > 0.0) {
            in_ref = true;
            break;
          }
        if (in_ref) add_hits += 1.0;
      }
    {
      std::unordered_set<std::string> seen;
      for (const auto& r : refs)
        for (const auto& [g, c] : r)
          if (detail::count_of(src, g) == 0.0 && seen.insert(g).second) add_ref += 1.0;
    }
    const double add_p = detail::safe_ratio(add_hits, add_cand, add_ref);
    const double add_r = detail::safe_ratio(add_hits, add_ref, add_cand);
    add_sum += (add_cand == 0.0 && add_ref == 0.0) ? 1.0 : detail::f1(add_p, add_r);

    // KEEP: n-grams retained by the output vs the average retention across
    // references.
    double keep_cand_total = 0.0, keep_ref_total = 0.0, keep_hits = 0.0;
    for (const auto& [g, sc] : src) {
      const double kept_by_out = std::min(sc, detail::count_of(out, g));
      double kept_by_ref = 0.0;
      for (const auto& r : refs) kept_by_ref += std::min(sc, detail::count_of(r, g));
      kept_by_ref /= nref;
      keep_cand_total += kept_by_out;
      keep_ref_total += kept_by_ref;
      keep_hits += std::min(kept_by_out, kept_by_ref);
    }
    const double keep_p = detail::safe_ratio(keep_hits, keep_cand_total, keep_ref_total);
    const double keep_r = detail::safe_ratio(keep_hits, keep_ref_total, keep_cand_total);
    keep_sum += (keep_cand_total == 0.0 && keep_ref_total == 0.0) ? 1.0
                                                                  : detail::f1(keep_p, keep_r);

    // DELETE: n-grams dropped by the output vs the average drop across
    // references; precision only.
    double del_cand_total = 0.0, del_ref_total = 0.0, del_hits = 0.0;
    for (const auto& [g, sc] : src) {
      const double del_by_out = std::max(0.0, sc - detail::count_of(out, g));
      double del_by_ref = 0.0;
      for (const auto& r : refs) del_by_ref += std::max(0.0, sc - detail::count_of(r, g));
      del_by_ref /= nref;
      del_cand_total += del_by_out;
      del_ref_total += del_by_ref;
      del_hits += std::min(del_by_out, del_by_ref);
    }
    del_sum += (del_cand_total == 0.0 && del_ref_total == 0.0)
                   ? 1.0
                   : detail::safe_ratio(del_hits, del_cand_total, del_ref_total);
  }

  SariScore s;
  s.f1_add = 100.0 * add_sum / 4.0;
  s.f1_keep = 100.0 * keep_sum / 4.0;
  s.p_delete = 100.0 * del_sum / 4.0;
  s.sari = (s.f1_add + s.f1_keep + s.p_delete) / 3.0;
  return s;
}

/// Corpus-level score: the arithmetic mean of per-sentence scores (components
/// averaged the same way, preserving the mean-of-components identity).
inline SariScore sari(const std::vector<std::string>& sources,
                      const std::vector<std::string>& outputs,
                      const std::vector<std::vector<std::string>>& reference_lists,
                      bool keep_per_sentence = false) {
  if (sources.size() != outputs.size() || sources.size() != reference_lists.size())
    throw std::runtime_error("sari: input lengths differ (" + std::to_string(sources.size()) +
                             "/" + std::to_string(outputs.size()) + "/" +
                             std::to_string(reference_lists.size()) + ")");
  if (sources.empty()) throw std::runtime_error("sari: empty corpus");
  SariScore total;
  std::vector<SariScore> per;
  per.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i)
    per.push_back(sari_sentence(sources[i], outputs[i], reference_lists[i]));
  for (const SariScore& s : per) {
    total.sari += s.sari;
    total.f1_add += s.f1_add;
    total.f1_keep += s.f1_keep;
    total.p_delete += s.p_delete;
  }
  const double n = static_cast<double>(per.size());
  total.sari /= n;
  total.f1_add /= n;
  total.f1_keep /= n;
  total.p_delete /= n;
  if (keep_per_sentence) total.per_sentence = std::move(per);
  return total;
}

/// Corpus BLEU over 1..4-grams with brevity penalty. Zero match counts for
/// n >= 2 fall back to add-one smoothing; a zero unigram match yields 0.
inline double bleu(const std::vector<std::string>& outputs,
                   const std::vector<std::vector<std::string>>& reference_lists) {
  if (outputs.size() != reference_lists.size())
    throw std::runtime_error("bleu: input lengths differ");
  if (outputs.empty()) throw std::runtime_error("bleu: empty corpus");

  std::array<double, 4> matches{}, totals{};
  double out_len = 0.0, ref_len = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (reference_lists[i].empty()) throw std::runtime_error("bleu: instance without references");
    const std::vector<std::string> out_tok = metric_tokens(outputs[i]);
    std::vector<std::vector<std::string>> ref_toks;
    for (const std::string& r : reference_lists[i]) ref_toks.push_back(metric_tokens(r));

    out_len += static_cast<double>(out_tok.size());
    // closest reference length; ties resolved toward the shorter one
    std::size_t best = ref_toks[0].size();
    for (const auto& rt : ref_toks) {
      const auto diff = [&](std::size_t len) {
        return len > out_tok.size() ? len - out_tok.size() : out_tok.size() - len;
      };
      if (diff(rt.size()) < diff(best) || (diff(rt.size()) == diff(best) && rt.size() < best))
        best = rt.size();
    }
    ref_len += static_cast<double>(best);

    for (std::size_t n = 1; n <= 4; ++n) {
      const detail::NgramCounts out_n = detail::ngram_counts(out_tok, n);
      detail::NgramCounts clip;
      for (const auto& rt : ref_toks)
        for (const auto& [g, c] : detail::ngram_counts(rt, n)) {
          double& m = clip[g];
          m = std::max(m, c);
        }
      for (const auto& [g, c] : out_n) {
        totals[n - 1] += c;
        matches[n - 1] += std::min(c, detail::count_of(clip, g));
      }
    }
  }

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    double m = matches[n - 1], t = totals[n - 1];
    if (n >= 2 && m == 0.0) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  const double bp = out_len < ref_len ? std::exp(1.0 - ref_len / out_len) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

/// Percentage of outputs that equal their source after whitespace
/// normalization.
inline double identical_pct(const std::vector<std::string>& sources,
                            const std::vector<std::string>& outputs) {
  if (sources.size() != outputs.size())
    throw std::runtime_error("identical_pct: input lengths differ");
  if (sources.empty()) return 0.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < sources.size(); ++i)
    if (normalize_whitespace(sources[i]) == normalize_whitespace(outputs[i])) ++same;
  return 100.0 * static_cast<double>(same) / static_cast<double>(sources.size());
}

struct OpAgreement {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::size_t support = 0;  // instances carrying the op in the gold labels
};

struct MicroScores {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

// Label-agreement report between a predicted and a gold labeling: per-op
// precision/recall/F1 (absent when undefined), pooled micro scores, and
// per-op Cohen's kappa (absent when the marginals leave it undefined).
struct AgreementReport {
  std::map<OperationToken, OpAgreement> per_op;
  MicroScores micro;
  std::map<OperationToken, std::optional<double>> kappa_per_op;
  std::size_t n_shared = 0;
};

/// Scores `pred` against `gold` over the ids present in both, treating each
/// (id, op) pair as one binary decision.
inline AgreementReport agreement(const std::map<std::string, OperationSet>& pred,
                                 const std::map<std::string, OperationSet>& gold) {
  std::vector<std::pair<OperationSet, OperationSet>> pairs;
  for (const auto& [id, p] : pred) {
    auto it = gold.find(id);
    if (it != gold.end()) pairs.emplace_back(p, it->second);
  }
  if (pairs.empty()) throw std::runtime_error("agreement: no shared ids between label files");

  AgreementReport report;
  report.n_shared = pairs.size();
  const double n = static_cast<double>(pairs.size());
  double micro_tp = 0.0, micro_fp = 0.0, micro_fn = 0.0;

  for (OperationToken op : kAllOperations) {
    double tp = 0.0, fp = 0.0, fn = 0.0, tn = 0.0;
    for (const auto& [p, g] : pairs) {
      const bool in_p = p.contains(op), in_g = g.contains(op);
      tp += (in_p && in_g) ? 1.0 : 0.0;
      fp += (in_p && !in_g) ? 1.0 : 0.0;
      fn += (!in_p && in_g) ? 1.0 : 0.0;
      tn += (!in_p && !in_g) ? 1.0 : 0.0;
    }
    micro_tp += tp;
    micro_fp += fp;
    micro_fn += fn;

    OpAgreement a;
    a.support = static_cast<std::size_t>(tp + fn);
    if (tp + fp > 0.0) a.precision = tp / (tp + fp);
    if (tp + fn > 0.0) a.recall = tp / (tp + fn);
    if (a.precision && a.recall)
      a.f1 = *a.precision + *a.recall > 0.0
                 ? 2.0 * *a.precision * *a.recall / (*a.precision + *a.recall)
                 : 0.0;
    report.per_op[op] = a;

    const double po = (tp + tn) / n;
    const double pe = ((tp + fp) / n) * ((tp + fn) / n) + ((tn + fn) / n) * ((tn + fp) / n);
    if (std::abs(1.0 - pe) > 1e-12)
      report.kappa_per_op[op] = (po - pe) / (1.0 - pe);
    else
      report.kappa_per_op[op] = std::nullopt;
  }

  report.micro.precision = micro_tp + micro_fp > 0.0 ? micro_tp / (micro_tp + micro_fp) : 1.0;
  report.micro.recall = micro_tp + micro_fn > 0.0 ? micro_tp / (micro_tp + micro_fn) : 1.0;
  report.micro.f1 = detail::f1(report.micro.precision, report.micro.recall);
  if (micro_tp + micro_fp == 0.0 && micro_tp + micro_fn == 0.0) report.micro.f1 = 1.0;
  return report;
}

struct WilcoxonResult {
  double statistic = 0.0;  // W = min(W+, W-)
  double p_value = 1.0;    // two-sided
  std::size_t n_nonzero = 0;
  bool exact = false;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

/// Paired signed-rank test. Zero differences are dropped; ranks of |d| use
/// average ranks on ties. For n <= exact_threshold the two-sided p-value is
/// computed from the exact null distribution of the rank sum (identical to
/// enumerating all 2^n sign assignments); larger n uses the normal
/// approximation with tie and continuity corrections.
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& xs,
                                           const std::vector<double>& ys,
                                           std::size_t exact_threshold = 25) {
  if (xs.size() != ys.size()) throw std::runtime_error("wilcoxon: input lengths differ");
  if (xs.empty()) throw std::runtime_error("wilcoxon: empty input");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - ys[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw std::runtime_error("wilcoxon: no nonzero differences");

  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

  std::vector<double> rank(n, 0.0);
  std::vector<std::size_t> tie_sizes;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg;
    tie_sizes.push_back(j - i);
    i = j;
  }

  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    (diffs[i] > 0.0 ? w_plus : w_minus) += rank[i];
  const double w = std::min(w_plus, w_minus);

  WilcoxonResult result;
  result.statistic = w;
  result.n_nonzero = n;

  if (n <= exact_threshold) {
    result.exact = true;
    // Ranks are multiples of 1/2; double them to run an integer subset-sum
    // count over the null distribution of W+.
    std::vector<std::uint64_t> scaled(n);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = static_cast<std::uint64_t>(std::llround(2.0 * rank[i]));
      total += scaled[i];
    }
    std::vector<std::uint64_t> counts(total + 1, 0);
    counts[0] = 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t s = total + 1; s-- > scaled[i];)
        counts[s] += counts[s - scaled[i]];
    const std::uint64_t w_scaled = static_cast<std::uint64_t>(std::llround(2.0 * w));
    std::uint64_t at_most = 0;
    for (std::size_t s = 0; s <= std::min<std::uint64_t>(w_scaled, total); ++s) at_most += counts[s];
    const double denom = std::pow(2.0, static_cast<double>(n));
    result.p_value = std::min(1.0, 2.0 * static_cast<double>(at_most) / denom);
  } else {
    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
    for (std::size_t t : tie_sizes) {
      const double td = static_cast<double>(t);
      var -= (td * td * td - td) / 48.0;
    }
    const double z = (w - mean + 0.5) / std::sqrt(var);
    result.p_value = std::min(1.0, std::max(0.0, 2.0 * detail::normal_cdf(z)));
  }
  return result;
}

/// Character-level edit distance.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Depth of the deepest token (root depth = 1). Throws on head cycles.
inline std::size_t parse_depth(const ParsedSentence& sentence) {
  std::size_t deepest = 0;
  for (const ParseToken& t : sentence.tokens) {
    std::size_t depth = 1;
    std::size_t head = t.head;
    while (head != 0) {
      if (++depth > sentence.tokens.size())
        throw std::runtime_error("parsed sentence '" + sentence.id + "': head cycle");
      head = sentence.tokens[head - 1].head;
    }
    deepest = std::max(deepest, depth);
  }
  return deepest;
}

// Per-instance surface statistics. Fields that need an unavailable resource
// (parses, frequency table) are left unset rather than zeroed.
struct InstanceStats {
  std::optional<double> token_length_ratio;      // target tokens / source tokens
  std::optional<double> nbchars_ratio;           // target chars / source chars
  std::optional<double> levenshtein_similarity;  // 0..100
  std::optional<double> wordrank_ratio;          // mean log rank, target / source
  std::optional<double> deptree_depth_ratio;     // max depth, target / source
};

inline InstanceStats instance_stats(const SimplificationInstance& si,
                                    const FrequencyTable* freq = nullptr,
                                    const Tokenizer& tokenizer = simple_tokens) {
  InstanceStats stats;
  const std::string src_text = join(si.source_sentences);
  const std::string tgt_text = join(si.target_sentences);
  const std::vector<std::string> src_tok = tokenizer(src_text);
  const std::vector<std::string> tgt_tok = tokenizer(tgt_text);

  if (!src_tok.empty() && !tgt_tok.empty())
    stats.token_length_ratio =
        static_cast<double>(tgt_tok.size()) / static_cast<double>(src_tok.size());
  if (!src_text.empty() && !tgt_text.empty())
    stats.nbchars_ratio =
        static_cast<double>(tgt_text.size()) / static_cast<double>(src_text.size());
  if (!src_text.empty() || !tgt_text.empty()) {
    const double dist = static_cast<double>(levenshtein(src_text, tgt_text));
    const double longest = static_cast<double>(std::max(src_text.size(), tgt_text.size()));
    stats.levenshtein_similarity = longest == 0.0 ? 100.0 : 100.0 * (1.0 - dist / longest);
  }

  if (freq && !freq->empty()) {
    auto mean_log_rank = [&](const std::vector<ParsedSentence>* parses,
                             const std::vector<std::string>& fallback) -> std::optional<double> {
      double sum = 0.0;
      std::size_t count = 0;
      if (parses) {
        for (const ParsedSentence& s : *parses)
          for (const ParseToken& t : s.tokens)
            if (!is_function_upos(t.upos)) {
              sum += std::log(static_cast<double>(freq->rank(t.surface)));
              ++count;
            }
      } else {
        for (const std::string& t : fallback) {
          const std::string low = lowercase(t);
          if (!is_function_surface(low)) {
            sum += std::log(static_cast<double>(freq->rank(low)));
            ++count;
          }
        }
      }
      if (count == 0) return std::nullopt;
      return sum / static_cast<double>(count);
    };
    const auto src_mean =
        mean_log_rank(si.source_parses ? &*si.source_parses : nullptr, src_tok);
    const auto tgt_mean =
        mean_log_rank(si.target_parses ? &*si.target_parses : nullptr, tgt_tok);
    if (src_mean && tgt_mean && *src_mean != 0.0)
      stats.wordrank_ratio = *tgt_mean / *src_mean;
  }

  if (si.source_parses && si.target_parses && !si.source_parses->empty() &&
      !si.target_parses->empty()) {
    std::size_t src_depth = 0, tgt_depth = 0;
    for (const ParsedSentence& s : *si.source_parses) src_depth = std::max(src_depth, parse_depth(s));
    for (const ParsedSentence& s : *si.target_parses) tgt_depth = std::max(tgt_depth, parse_depth(s));
    if (src_depth > 0)
      stats.deptree_depth_ratio =
          static_cast<double>(tgt_depth) / static_cast<double>(src_depth);
  }
  return stats;
}

}  // namespace cogsimp
