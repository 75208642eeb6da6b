// Acceptance suite: runs every contract criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cogsimp/annotator.hpp"
#include "cogsimp/commands.hpp"
#include "cogsimp/compare.hpp"
#include "cogsimp/metrics.hpp"
#include "cogsimp/tagger.hpp"

#include "oracles.hpp"

using namespace cogsimp;
namespace fs = std::filesystem;

namespace {

const std::string kData = COGSIMP_TEST_DATA_DIR;

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("%s  %2d. %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  if (!ok) ++failures;
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2fs", s);
  return buf;
}

// --- 1: the Bernoulli Jensen-Shannon anchor value --------------------------
void criterion_1() {
  const double d = jsd_bernoulli(0.557, 0.5);
  const bool ok = std::abs(d - 0.0403) <= 0.0002;
  std::ostringstream os;
  os << "bernoulli jsd anchor: jsd(0.557, 0.5) = " << d << ", expected 0.0403 +/- 0.0002";
  report(1, ok, os.str());
}

// --- 2: per-sentence scores match the brute-force oracle -------------------
void criterion_2() {
  Timer timer;
  std::mt19937 rng(20240311);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g", "h"};
  std::uniform_int_distribution<std::size_t> len(1, 8);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<std::size_t> nref(1, 10);
  auto sentence = [&] {
    std::string out;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ' ';
      out += vocab[pick(rng)];
    }
    return out;
  };

  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 200 && ok; ++trial) {
    const std::string source = sentence();
    const std::string output = sentence();
    std::vector<std::string> refs;
    const std::size_t k = nref(rng);
    for (std::size_t i = 0; i < k; ++i) refs.push_back(sentence());
    const SariScore got = sari_sentence(source, output, refs);
    const oracles::SariParts want = oracles::sari_sentence(source, output, refs);
    const double diff = std::max({std::abs(got.sari - want.sari), std::abs(got.f1_add - want.add),
                                  std::abs(got.f1_keep - want.keep),
                                  std::abs(got.p_delete - want.del)});
    worst = std::max(worst, diff);
    if (diff > 1e-9) ok = false;
    const double identity =
        std::abs(got.sari - (got.f1_add + got.f1_keep + got.p_delete) / 3.0);
    if (identity > 1e-12) ok = false;
  }
  const double elapsed = timer.seconds();
  std::ostringstream os;
  os << "sari matches the brute-force oracle on 200 random instances (max diff " << worst
     << " <= 1e-9, components identity exact) in " << format_seconds(elapsed);
  report(2, ok && elapsed < 5.0, os.str());
}

// --- 3: byte-exact annotated strings for the running example ---------------
void criterion_3() {
  const std::string source =
      "Now, normally during Disability Pride Month, we're showcasing our disability pride "
      "through various parades and events throughout the country.";
  const std::string target =
      "Most years, during Disability Pride Month we have parades and events all over the "
      "United States to show how proud we are.";

  const fs::path dir = fs::temp_directory_path() / "cogsimp-acceptance-annotate";
  fs::create_directories(dir);
  {
    std::ofstream corpus(dir / "corpus.jsonl");
    ojson j;
    j["id"] = "pride";
    j["source_sentences"] = {source};
    j["target_sentences"] = {target};
    corpus << j.dump() << "\n";
    std::ofstream tagged(dir / "tagged.jsonl");
    tagged << R"({"id":"pride","ops":["REPHRASE","DEL","REORDER"]})" << "\n";
  }

  auto run = [&](AnnotationStyle style, const char* name) {
    RunConfig config;
    config.corpus_path = (dir / "corpus.jsonl").string();
    config.tagged_path = (dir / "tagged.jsonl").string();
    config.out_path = (dir / (std::string(name) + ".tsv")).string();
    config.style = style;
    cmd_annotate(config);
    std::ifstream in(config.out_path);
    std::string line;
    std::getline(in, line);
    return line;
  };

  const std::string bart = run(AnnotationStyle::BARTStyle, "bart");
  const std::string t5 = run(AnnotationStyle::T5Style, "t5");
  const bool ok =
      bart == "<mask> " + source + "\t<REPHRASE> <DEL> <REORDER> " + target &&
      t5 == "<mask_1> " + source + "\t<mask_1> <REPHRASE> <DEL> <REORDER> <mask_2> " + target;
  report(3, ok, "annotated source/target strings reproduce the running example byte-for-byte "
                "in both styles");
  fs::remove_all(dir);
}

// --- 4: the checked-in rule fixture suite ----------------------------------
void criterion_4() {
  Timer timer;
  const fs::path dir = fs::temp_directory_path() / "cogsimp-acceptance-rules";
  fs::create_directories(dir);
  RunConfig config;
  config.corpus_path = kData + "/rules_corpus.jsonl";
  config.ppdb_path = kData + "/rules_ppdb.tsv";
  config.parses_path = kData + "/rules_parses.conllu";
  config.coref_path = kData + "/rules_coref.jsonl";
  config.keep_degenerate = true;
  config.out_path = (dir / "tagged.jsonl").string();
  cmd_tag(config);

  std::ifstream expected_in(kData + "/rules_expected.jsonl");
  const auto expected = load_gold_labels(expected_in);
  std::ifstream got_in(config.out_path);
  const auto got = load_gold_labels(got_in);

  std::size_t matched = 0;
  std::string first_diff;
  for (const auto& [id, ops] : expected) {
    const auto it = got.find(id);
    if (it != got.end() && it->second == ops) {
      ++matched;
    } else if (first_diff.empty()) {
      first_diff = id;
    }
  }
  const double elapsed = timer.seconds();
  const bool ok = matched == expected.size() && got.size() == expected.size() && elapsed < 1.0;
  std::ostringstream os;
  os << "tagger rule fixtures: " << matched << "/" << expected.size()
     << " hand-derived operation sets reproduced";
  if (!first_diff.empty()) os << " (first mismatch: " << first_diff << ")";
  os << " in " << format_seconds(elapsed);
  report(4, ok, os.str());
  fs::remove_all(dir);
}

// --- 5: flagged positions complement a maximum increasing subsequence ------
void criterion_5() {
  Timer timer;
  bool ok = true;
  std::size_t checked = 0;
  for (std::size_t n = 2; n <= 8 && ok; ++n) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i + 1;
    do {
      const auto flagged = detect_sentence_reorder(perm);
      const std::size_t lis = oracles::lis_length(perm);
      ++checked;
      if (flagged.size() != n - lis) {
        ok = false;
        break;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  const double elapsed = timer.seconds();
  std::ostringstream os;
  os << "sentence-reorder flags equal n minus the brute-force LIS length on all " << checked
     << " permutations of lengths 2..8 in " << format_seconds(elapsed);
  report(5, ok && elapsed < 10.0, os.str());
}

// --- 6: signed-rank test exactness and approximation agreement -------------
void criterion_6() {
  Timer timer;
  std::mt19937 rng(60606);
  std::uniform_real_distribution<double> value(-4.0, 4.0);
  std::uniform_int_distribution<std::size_t> size(1, 10);

  bool exact_ok = true;
  double worst_exact = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = size(rng);
    std::vector<double> xs(n), ys(n);
    bool nonzero = false;
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = value(rng);
      ys[i] = value(rng);
      if (xs[i] != ys[i]) nonzero = true;
    }
    if (!nonzero) {
      --trial;
      continue;
    }
    const double got = wilcoxon_signed_rank(xs, ys).p_value;
    const double want = oracles::wilcoxon_enumerated_p(xs, ys);
    worst_exact = std::max(worst_exact, std::abs(got - want));
    if (std::abs(got - want) > 1e-12) exact_ok = false;
  }

  bool approx_ok = true;
  double worst_approx = 0.0;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t n = 20; n <= 25; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> xs(n), ys(n);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = noise(rng);
        ys[i] = noise(rng) + 0.25;
      }
      const double exact = wilcoxon_signed_rank(xs, ys, 25).p_value;
      const double approx = wilcoxon_signed_rank(xs, ys, 0).p_value;
      worst_approx = std::max(worst_approx, std::abs(exact - approx));
      if (std::abs(exact - approx) > 0.01) approx_ok = false;
    }
  }
  const double elapsed = timer.seconds();
  std::ostringstream os;
  os << "signed-rank exactness: max |exact - enumeration| = " << worst_exact
     << " (<= 1e-12) over 100 samples with n <= 10; max |exact - normal| = " << worst_approx
     << " (<= 0.01) for n in [20, 25]; " << format_seconds(elapsed);
  report(6, exact_ok && approx_ok && elapsed < 30.0, os.str());
}

// --- 7: strict majority across references ----------------------------------
void criterion_7() {
  TaggerResources resources;
  resources.paraphrase_db.add_rule("principal", "main");

  auto with_refs = [&](std::size_t firing) {
    SimplificationInstance si;
    si.id = "majority";
    si.source_sentences = {"The principal reason is clear."};
    si.target_sentences = {"The main reason is clear."};
    si.alignment = derive_alignment(1, 1);
    std::vector<std::vector<std::string>> refs;
    for (std::size_t i = 0; i < 10; ++i)
      refs.push_back({i < firing ? "The main reason is clear."
                                 : "The principal reason is clear."});
    si.references = refs;
    return si;
  };

  const OperationSet six = tag_multi_reference(with_refs(6), resources);
  const OperationSet five = tag_multi_reference(with_refs(5), resources);
  const bool ok = six.contains(OperationToken::Rephrase) && five.empty();
  report(7, ok, "majority rule: an op firing in 6 of 10 references is kept, in exactly 5 it is "
                "dropped");
}

// --- 8: distance-matrix contracts -------------------------------------------
void criterion_8() {
  std::mt19937 rng(88888);

  // three synthetic tagged subsets
  auto synthetic_subset = [&](double base, std::string name) {
    std::vector<TaggedInstance> tagged;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      TaggedInstance t;
      t.instance.id = name + std::to_string(i);
      t.instance.source_sentences = {"s"};
      t.instance.target_sentences = {"t"};
      t.instance.alignment = derive_alignment(1, 1);
      for (std::size_t k = 0; k < kOperationCount; ++k)
        if (unit(rng) < base + 0.05 * static_cast<double>(k)) {
          t.ops.insert(kAllOperations[k]);
          t.evidence[kAllOperations[k]].push_back("synthetic");
        }
      tagged.push_back(std::move(t));
    }
    return build_profile(tagged, std::move(name));
  };
  const std::vector<OperationProfile> profiles = {
      synthetic_subset(0.2, "one"), synthetic_subset(0.4, "two"), synthetic_subset(0.6, "three")};

  bool ok = true;
  for (ProfileMetric metric : {ProfileMetric::MeanJsd, ProfileMetric::L2}) {
    const DistanceMatrix m = pairwise_distances(profiles, metric);
    for (std::size_t i = 0; i < 3; ++i) {
      if (m.values[i][i] != 0.0) ok = false;
      for (std::size_t j = 0; j < 3; ++j) {
        if (m.values[i][j] != m.values[j][i]) ok = false;
        if (m.values[i][j] < 0.0) ok = false;
      }
    }
  }

  // l2 of a profile with itself
  if (l2_matrix_distance(profiles[0], profiles[0]) != 0.0) ok = false;

  // triangle inequality of the mean Jensen-Shannon distance
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_profile = [&] {
    OperationProfile p;
    for (double& f : p.freqs) f = unit(rng);
    return p;
  };
  double worst_violation = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const OperationProfile a = random_profile(), b = random_profile(), c = random_profile();
    const double violation = mean_jsd(a, c) - (mean_jsd(a, b) + mean_jsd(b, c));
    worst_violation = std::max(worst_violation, violation);
    if (violation > 1e-12) ok = false;
  }

  // separated frequency vectors keep same-source subsets closer than shifted ones
  auto exact_profile = [&](std::array<double, kOperationCount> freqs, std::string name) {
    OperationProfile p;
    p.subset_name = std::move(name);
    p.n_instances = 1000;
    p.freqs = freqs;
    return p;
  };
  std::array<double, kOperationCount> base{};
  base.fill(0.35);
  std::array<double, kOperationCount> jittered = base;
  jittered[2] += 0.02;
  std::array<double, kOperationCount> shifted = base;
  shifted[0] += 0.15;
  shifted[4] += 0.15;
  shifted[6] += 0.15;
  const double close = mean_jsd(exact_profile(base, "a"), exact_profile(jittered, "b"));
  const double far = mean_jsd(exact_profile(base, "a"), exact_profile(shifted, "c"));
  if (!(close < far)) ok = false;

  std::ostringstream os;
  os << "distance contracts: symmetry and zero diagonals on 3 synthetic subsets, mean-jsd "
        "triangle inequality on 1000 random triples (max violation "
     << worst_violation << "), l2 self-distance 0, and 0.15-shifted profiles separate ("
     << close << " < " << far << ")";
  report(8, ok, os.str());
}

// --- 9: annotation round trip ------------------------------------------------
void criterion_9() {
  std::mt19937 rng(99999);
  const std::vector<std::string> words = {"river", "stone", "quiet", "maps", "seven",
                                          "lantern", "walks", "home", "early", "blue"};
  std::uniform_int_distribution<std::size_t> len(1, 9);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);

  bool ok = true;
  for (int trial = 0; trial < 50 && ok; ++trial) {
    std::string text;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (i) text += ' ';
      text += words[pick(rng)];
    }
    SimplificationInstance si;
    si.id = "rt";
    si.source_sentences = {"source text"};
    si.target_sentences = {text};
    si.alignment = derive_alignment(1, 1);
    for (std::uint16_t bits = 0; bits < 512 && ok; ++bits) {
      const OperationSet ops = OperationSet::from_bits(bits);
      for (AnnotationStyle style : {AnnotationStyle::T5Style, AnnotationStyle::BARTStyle}) {
        const AnnotatedPair pair = emit(si, ops, style);
        const auto [ops2, text2] = parse_annotated(pair.target, style);
        if (ops2 != ops || text2 != text) {
          ok = false;
          break;
        }
      }
    }
  }
  report(9, ok, "parse(emit(.)) is the identity over all 512 op sets x both styles x 50 random "
                "texts");
}

// --- 10: declared out of desk-scale reach ------------------------------------
void criterion_10() {
  report(10, true,
         "declared not reproducible at desk scale: published fine-tuned-model scores, "
         "SentencePiece-based token counts, the 50-instance human-annotation agreement, and the "
         "printed cross-corpus distances; covered instead by criteria 1-9 and the module "
         "invariant suites");
}

// --- 11: throughput and thread invariance ------------------------------------
void criterion_11() {
  std::mt19937 rng(111111);
  const fs::path dir = fs::temp_directory_path() / "cogsimp-acceptance-throughput";
  fs::create_directories(dir);

  // a 10k-rule paraphrase table over a synthetic lexicon
  {
    std::ofstream ppdb(dir / "ppdb.tsv");
    for (int i = 0; i < 10000; ++i)
      ppdb << "w" << i << "\tv" << i << "\n";
  }

  // 10,000 instances with chain-tree parses on both sides
  std::uniform_int_distribution<std::size_t> sent_len(8, 20);
  std::uniform_int_distribution<int> word(0, 11999);
  std::uniform_int_distribution<int> coin(0, 1);
  {
    std::ofstream corpus(dir / "corpus.jsonl");
    std::ofstream conllu(dir / "parses.conllu");
    for (int i = 0; i < 10000; ++i) {
      const std::string id = "si" + std::to_string(i);
      auto make_tokens = [&](std::size_t n) {
        std::vector<std::string> tokens;
        for (std::size_t k = 0; k < n; ++k) tokens.push_back("w" + std::to_string(word(rng)));
        return tokens;
      };
      const std::vector<std::string> src = make_tokens(sent_len(rng));
      std::vector<std::string> tgt = src;
      if (coin(rng)) tgt.erase(tgt.begin());  // drop a token half the time
      if (coin(rng)) tgt.push_back("v" + std::to_string(word(rng) % 10000));

      ojson j;
      j["id"] = id;
      j["source_sentences"] = {join(src)};
      j["target_sentences"] = {join(tgt)};
      corpus << j.dump() << "\n";

      auto emit_parse = [&](const std::vector<std::string>& tokens, const char* side) {
        conllu << "# sent_id = " << id << ":" << side << ":0\n";
        for (std::size_t k = 0; k < tokens.size(); ++k) {
          const char* upos = k % 4 == 0 ? "NOUN" : (k % 4 == 1 ? "VERB" : "ADJ");
          const char* rel = k == 0 ? "root" : (k % 5 == 2 ? "conj" : "dep");
          conllu << (k + 1) << '\t' << tokens[k] << '\t' << tokens[k] << '\t' << upos
                 << "\t_\t" << (k % 4 == 1 ? "Tense=Pres" : "_") << '\t' << (k == 0 ? 0 : k)
                 << '\t' << rel << "\t_\t_\n";
        }
        conllu << "\n";
      };
      emit_parse(src, "source");
      emit_parse(tgt, "target");
    }
  }

  RunConfig config;
  config.corpus_path = (dir / "corpus.jsonl").string();
  config.ppdb_path = (dir / "ppdb.tsv").string();
  config.parses_path = (dir / "parses.conllu").string();
  config.out_path = (dir / "tagged-single.jsonl").string();
  config.threads = 1;

  Timer timer;
  cmd_tag(config);
  const double elapsed = timer.seconds();

  RunConfig threaded = config;
  threaded.threads = 4;
  threaded.out_path = (dir / "tagged-multi.jsonl").string();
  cmd_tag(threaded);

  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const bool identical = slurp(config.out_path) == slurp(threaded.out_path);
  const bool ok = elapsed < 60.0 && identical;
  std::ostringstream os;
  os << "throughput: 10,000 parsed instances against a 10,000-rule table tagged in "
     << format_seconds(elapsed) << " single-threaded (< 60s); 4-thread output byte-identical: "
     << (identical ? "yes" : "no");
  report(11, ok, os.str());
  fs::remove_all(dir);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria failed\n", failures);
  return 1;
}
