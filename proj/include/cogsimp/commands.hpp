#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cogsimp/annotator.hpp"
#include "cogsimp/compare.hpp"
#include "cogsimp/core.hpp"
#include "cogsimp/ingest.hpp"
#include "cogsimp/metrics.hpp"
#include "cogsimp/tagger.hpp"
#include "cogsimp/text.hpp"

namespace cogsimp {

using ojson = nlohmann::ordered_json;

enum class LogLevel : int { Debug = 0, Info = 1, Warn = 2, Error = 3 };

/// Threshold read once from COGSIMP_LOG (debug|info|warn|error); default warn.
inline LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("COGSIMP_LOG");
    if (!env) return LogLevel::Warn;
    const std::string v = lowercase(env);
    if (v == "debug" || v == "0") return LogLevel::Debug;
    if (v == "info" || v == "1") return LogLevel::Info;
    if (v == "warn" || v == "2") return LogLevel::Warn;
    if (v == "error" || v == "3") return LogLevel::Error;
    return LogLevel::Warn;
  }();
  return level;
}

inline void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) < static_cast<int>(log_threshold())) return;
  std::cerr << "[cogsimp] " << message << "\n";
}

enum class TokenizerKind : std::uint8_t { Simple, Whitespace };

inline Tokenizer tokenizer_for(TokenizerKind kind) {
  return kind == TokenizerKind::Whitespace ? Tokenizer(whitespace_tokens)
                                           : Tokenizer(simple_tokens);
}

// All subcommand inputs in one bag; each command reads the fields it needs
// and validates them up front.
struct RunConfig {
  std::string corpus_path;
  std::string parses_path;  // .conllu file or a directory of them
  std::string ppdb_path;
  std::string coref_path;
  std::string gold_path;
  std::string pred_path;
  std::string freq_path;
  std::string tagged_path;
  std::vector<std::string> tagged_inputs;
  std::string sources_path;
  std::string outputs_path;
  std::string outputs2_path;
  std::vector<std::string> refs_paths;
  std::string out_path;

  AnnotationStyle style = AnnotationStyle::BARTStyle;
  std::string annotate_format = "tsv";  // tsv | jsonl
  bool keep_degenerate = false;
  bool per_sentence = false;
  TaggerConfig tagger;
  std::optional<double> min_score;
  TokenizerKind tokenizer = TokenizerKind::Simple;
  std::size_t threads = 1;
  std::uint64_t seed = 0;  // reserved for future sampling paths
};

namespace cmddetail {

inline std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string(what) + ": cannot open '" + path + "'");
  return in;
}

inline std::vector<std::string> read_lines(const std::string& path, const char* what) {
  std::ifstream in = open_input(path, what);
  std::vector<std::string> lines;
  std::string line;
  while (detail::getline_crlf(in, line)) lines.push_back(line);
  return lines;
}

inline void write_text(const std::string& path, const std::string& content, const char* what) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(std::string(what) + ": cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error(std::string(what) + ": short write to '" + path + "'");
}

/// Index-preserving parallel map; worker exceptions are rethrown.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, std::size_t threads, Fn fn)
    -> std::vector<decltype(fn(items.front()))> {
  using Out = decltype(fn(items.front()));
  std::vector<Out> results(items.size());
  if (items.empty()) return results;
  threads = std::max<std::size_t>(1, std::min(threads, items.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) results[i] = fn(items[i]);
    return results;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < items.size(); i += threads) results[i] = fn(items[i]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

// Sidecar ids follow `<instance id>:<source|target>:<sentence index>`; the
// instance id may itself contain colons, so split from the right.
struct SidecarKey {
  std::string instance_id;
  bool is_source = true;
  std::size_t sentence = 0;
};

inline SidecarKey parse_sidecar_id(const std::string& sent_id) {
  const std::size_t last = sent_id.rfind(':');
  if (last == std::string::npos || last == 0)
    throw std::runtime_error("parse sidecar: malformed sent_id '" + sent_id + "'");
  const std::size_t mid = sent_id.rfind(':', last - 1);
  if (mid == std::string::npos)
    throw std::runtime_error("parse sidecar: malformed sent_id '" + sent_id + "'");
  SidecarKey key;
  key.instance_id = sent_id.substr(0, mid);
  const std::string side = sent_id.substr(mid + 1, last - mid - 1);
  if (side == "source")
    key.is_source = true;
  else if (side == "target")
    key.is_source = false;
  else
    throw std::runtime_error("parse sidecar: side must be source or target in '" + sent_id + "'");
  try {
    key.sentence = static_cast<std::size_t>(std::stoull(sent_id.substr(last + 1)));
  } catch (const std::exception&) {
    throw std::runtime_error("parse sidecar: bad sentence index in '" + sent_id + "'");
  }
  return key;
}

/// Loads one .conllu file or every *.conllu under a directory and attaches
/// the sentences to the matching instances. A side with any sidecar sentence
/// must be completely covered.
inline void attach_parses(std::vector<SimplificationInstance>& corpus,
                          const std::string& parses_path) {
  std::vector<std::string> files;
  const std::filesystem::path p(parses_path);
  if (std::filesystem::is_directory(p)) {
    for (const auto& entry : std::filesystem::directory_iterator(p))
      if (entry.path().extension() == ".conllu") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(parses_path);
  }

  std::map<std::string, std::map<std::size_t, ParsedSentence>> source_map, target_map;
  for (const std::string& file : files) {
    std::ifstream in = open_input(file, "parses");
    for (ParsedSentence& sentence : parse_conllu(in)) {
      const std::string sent_id = sentence.id;
      const SidecarKey key = parse_sidecar_id(sent_id);
      auto& side = key.is_source ? source_map : target_map;
      if (!side[key.instance_id].emplace(key.sentence, std::move(sentence)).second)
        throw std::runtime_error("parses: duplicate sidecar sentence '" + sent_id + "'");
    }
  }

  auto attach_side = [](SimplificationInstance& si,
                        std::map<std::size_t, ParsedSentence>& sentences, bool is_source) {
    const std::size_t expected =
        is_source ? si.source_sentences.size() : si.target_sentences.size();
    if (sentences.size() != expected)
      throw std::runtime_error("parses: instance '" + si.id + "' has " +
                               std::to_string(sentences.size()) + " " +
                               (is_source ? "source" : "target") + " sidecar sentences, expected " +
                               std::to_string(expected));
    std::vector<ParsedSentence> ordered;
    for (std::size_t k = 0; k < expected; ++k) {
      auto it = sentences.find(k);
      if (it == sentences.end())
        throw std::runtime_error("parses: instance '" + si.id + "' is missing sidecar sentence " +
                                 std::to_string(k));
      ordered.push_back(std::move(it->second));
    }
    if (is_source)
      si.source_parses = std::move(ordered);
    else
      si.target_parses = std::move(ordered);
  };

  for (SimplificationInstance& si : corpus) {
    auto s = source_map.find(si.id);
    if (s != source_map.end()) attach_side(si, s->second, true);
    auto t = target_map.find(si.id);
    if (t != target_map.end()) attach_side(si, t->second, false);
  }
}

/// Reads tagged JSONL (`{"id", "ops", "evidence"?}`) into minimal tagged
/// instances for profile building.
inline std::vector<TaggedInstance> load_tagged(const std::string& path) {
  std::ifstream in = open_input(path, "tagged");
  std::vector<TaggedInstance> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (detail::getline_crlf(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const json j = detail::parse_json_line(line, line_no, "tagged");
    TaggedInstance t;
    try {
      t.instance.id = j.at("id").get<std::string>();
      for (const json& jop : j.at("ops")) {
        const std::string name = jop.get<std::string>();
        const auto op = operation_from_name(name);
        if (!op) throw std::runtime_error("unknown operation name '" + name + "'");
        t.ops.insert(*op);
        t.evidence[*op].push_back("loaded");
      }
    } catch (const json::exception& e) {
      throw std::runtime_error("tagged line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(t.instance.id).second)
      throw std::runtime_error("tagged line " + std::to_string(line_no) + ": duplicate id '" +
                               t.instance.id + "'");
    out.push_back(std::move(t));
  }
  return out;
}

inline std::string subset_name_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

inline ojson stats_to_json(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

}  // namespace cmddetail

struct TagSummary {
  std::size_t n_instances = 0;
  std::array<std::size_t, kOperationCount> op_counts{};
  double skipped_fraction = 0.0;
};

/// Tags a corpus and writes the results (sorted by id) as JSONL. Instances
/// carrying multiple references are decided by strict majority across them.
inline TagSummary cmd_tag(const RunConfig& config) {
  if (config.corpus_path.empty()) throw std::runtime_error("tag: --corpus is required");
  if (config.ppdb_path.empty()) throw std::runtime_error("tag: --ppdb is required");
  if (config.out_path.empty()) throw std::runtime_error("tag: --out is required");

  std::ifstream corpus_in = cmddetail::open_input(config.corpus_path, "corpus");
  std::vector<SimplificationInstance> corpus = load_corpus(corpus_in, !config.keep_degenerate);
  if (corpus.empty()) throw std::runtime_error("tag: corpus is empty");
  if (!config.parses_path.empty()) cmddetail::attach_parses(corpus, config.parses_path);

  TaggerResources resources;
  {
    std::ifstream ppdb_in = cmddetail::open_input(config.ppdb_path, "ppdb");
    ParaphraseLoadResult loaded =
        load_paraphrase_db(ppdb_in, config.tagger.max_phrase_len, config.min_score);
    if (loaded.skipped_lines)
      log_message(LogLevel::Warn, "ppdb: skipped " + std::to_string(loaded.skipped_lines) +
                                      " malformed or filtered lines");
    resources.paraphrase_db = std::move(loaded.db);
  }
  if (!config.coref_path.empty()) {
    std::ifstream coref_in = cmddetail::open_input(config.coref_path, "coref");
    resources.coref = load_coref(coref_in);
  }
  resources.config = config.tagger;
  resources.validate();

  std::sort(corpus.begin(), corpus.end(),
            [](const SimplificationInstance& a, const SimplificationInstance& b) {
              return a.id < b.id;
            });

  struct Row {
    std::string id;
    OperationSet ops;
    std::map<OperationToken, std::vector<std::string>> evidence;
    bool skipped = false;
  };
  const std::vector<Row> rows = cmddetail::parallel_map(
      corpus, config.threads, [&](const SimplificationInstance& si) -> Row {
        Row row;
        row.id = si.id;
        if (si.references && !si.references->empty()) {
          const MultiReferenceResult mr = tag_multi_reference_counts(si, resources);
          row.ops = mr.ops;
          for (std::size_t i = 0; i < kOperationCount; ++i)
            if (mr.ops.contains(kAllOperations[i]))
              row.evidence[kAllOperations[i]].push_back(
                  "majority: fired in " + std::to_string(mr.fire_counts[i]) + " of " +
                  std::to_string(mr.n_references) + " references");
        } else {
          TaggedInstance tagged = tag(si, resources);
          row.ops = tagged.ops;
          row.skipped = has_skipped_rules(tagged);
          row.evidence = std::move(tagged.evidence);
        }
        return row;
      });

  TagSummary summary;
  summary.n_instances = rows.size();
  std::size_t skipped = 0;
  std::string out_text;
  for (const Row& row : rows) {
    if (row.skipped) ++skipped;
    for (std::size_t i = 0; i < kOperationCount; ++i)
      if (row.ops.contains(kAllOperations[i])) ++summary.op_counts[i];
    ojson j;
    j["id"] = row.id;
    ojson ops = ojson::array();
    for (OperationToken op : canonical_order(row.ops)) ops.push_back(std::string(name_of(op)));
    j["ops"] = std::move(ops);
    ojson evidence = ojson::object();
    for (const auto& [op, notes] : row.evidence) evidence[std::string(name_of(op))] = notes;
    j["evidence"] = std::move(evidence);
    out_text += j.dump();
    out_text += '\n';
  }
  summary.skipped_fraction =
      rows.empty() ? 0.0 : static_cast<double>(skipped) / static_cast<double>(rows.size());
  cmddetail::write_text(config.out_path, out_text, "tag");
  return summary;
}

struct AnnotateSummary {
  std::size_t written = 0;
  std::size_t excluded_degenerate = 0;
};

/// Joins a tagged file with its corpus and writes the annotated training
/// pairs. Degenerate instances are excluded and counted.
inline AnnotateSummary cmd_annotate(const RunConfig& config) {
  if (config.corpus_path.empty()) throw std::runtime_error("annotate: --corpus is required");
  if (config.tagged_path.empty()) throw std::runtime_error("annotate: --tagged is required");
  if (config.out_path.empty()) throw std::runtime_error("annotate: --out is required");
  if (config.annotate_format != "tsv" && config.annotate_format != "jsonl")
    throw std::runtime_error("annotate: format must be tsv or jsonl");

  std::ifstream corpus_in = cmddetail::open_input(config.corpus_path, "corpus");
  std::vector<SimplificationInstance> corpus = load_corpus(corpus_in, false);
  std::ifstream tagged_in = cmddetail::open_input(config.tagged_path, "tagged");
  const std::map<std::string, OperationSet> labels = load_gold_labels(tagged_in);

  std::set<std::string> corpus_ids, label_ids;
  AnnotateSummary summary;
  for (const SimplificationInstance& si : corpus)
    if (si.alignment.degenerate())
      ++summary.excluded_degenerate;
    else
      corpus_ids.insert(si.id);
  for (const auto& [id, ops] : labels) label_ids.insert(id);

  std::vector<std::string> only_corpus, only_labels;
  std::set_difference(corpus_ids.begin(), corpus_ids.end(), label_ids.begin(), label_ids.end(),
                      std::back_inserter(only_corpus));
  std::set_difference(label_ids.begin(), label_ids.end(), corpus_ids.begin(), corpus_ids.end(),
                      std::back_inserter(only_labels));
  // labels for degenerate rows are legal; they are skipped with the count
  std::set<std::string> all_corpus_ids;
  for (const SimplificationInstance& si : corpus) all_corpus_ids.insert(si.id);
  only_labels.erase(std::remove_if(
                        only_labels.begin(), only_labels.end(),
                        [&](const std::string& id) { return all_corpus_ids.count(id) > 0; }),
                    only_labels.end());
  if (!only_corpus.empty() || !only_labels.empty()) {
    std::string message = "annotate: id mismatch between corpus and tagged file;";
    if (!only_corpus.empty())
      message += " missing labels for: " + join(only_corpus, ", ") + ";";
    if (!only_labels.empty()) message += " labels without corpus rows: " + join(only_labels, ", ");
    throw std::runtime_error(message);
  }

  std::sort(corpus.begin(), corpus.end(),
            [](const SimplificationInstance& a, const SimplificationInstance& b) {
              return a.id < b.id;
            });
  std::string out_text;
  for (const SimplificationInstance& si : corpus) {
    if (si.alignment.degenerate()) continue;
    const AnnotatedPair pair = emit(si, labels.at(si.id), config.style);
    if (config.annotate_format == "tsv") {
      out_text += pair.source;
      out_text += '\t';
      out_text += pair.target;
      out_text += '\n';
    } else {
      ojson j;
      j["id"] = si.id;
      j["modified_source"] = pair.source;
      j["modified_target"] = pair.target;
      out_text += j.dump();
      out_text += '\n';
    }
    ++summary.written;
  }
  cmddetail::write_text(config.out_path, out_text, "annotate");
  return summary;
}

/// Scores output sentences against sources and references; optionally runs a
/// paired significance test against a second output file.
inline ojson cmd_score(const RunConfig& config) {
  if (config.sources_path.empty()) throw std::runtime_error("score: --sources is required");
  if (config.outputs_path.empty()) throw std::runtime_error("score: --outputs is required");
  if (config.refs_paths.empty()) throw std::runtime_error("score: at least one --refs file is required");

  const std::vector<std::string> sources = cmddetail::read_lines(config.sources_path, "sources");
  const std::vector<std::string> outputs = cmddetail::read_lines(config.outputs_path, "outputs");
  if (sources.size() != outputs.size())
    throw std::runtime_error("score: line counts differ: sources " +
                             std::to_string(sources.size()) + " vs outputs " +
                             std::to_string(outputs.size()));
  std::vector<std::vector<std::string>> references(sources.size());
  for (const std::string& path : config.refs_paths) {
    const std::vector<std::string> lines = cmddetail::read_lines(path, "refs");
    if (lines.size() != sources.size())
      throw std::runtime_error("score: line counts differ: sources " +
                               std::to_string(sources.size()) + " vs refs '" + path + "' " +
                               std::to_string(lines.size()));
    for (std::size_t i = 0; i < lines.size(); ++i) references[i].push_back(lines[i]);
  }

  const bool want_per_sentence = config.per_sentence || !config.outputs2_path.empty();
  const SariScore score = sari(sources, outputs, references, want_per_sentence);

  ojson report;
  report["n"] = sources.size();
  report["sari"] = score.sari;
  report["sari_add"] = score.f1_add;
  report["sari_keep"] = score.f1_keep;
  report["sari_delete"] = score.p_delete;
  report["bleu"] = bleu(outputs, references);
  report["identical_pct"] = identical_pct(sources, outputs);
  if (config.per_sentence) {
    ojson per = ojson::array();
    for (const SariScore& s : score.per_sentence) {
      ojson row;
      row["sari"] = s.sari;
      row["add"] = s.f1_add;
      row["keep"] = s.f1_keep;
      row["delete"] = s.p_delete;
      per.push_back(std::move(row));
    }
    report["per_sentence"] = std::move(per);
  }

  if (!config.outputs2_path.empty()) {
    const std::vector<std::string> outputs2 =
        cmddetail::read_lines(config.outputs2_path, "outputs2");
    if (outputs2.size() != sources.size())
      throw std::runtime_error("score: line counts differ: sources " +
                               std::to_string(sources.size()) + " vs outputs2 " +
                               std::to_string(outputs2.size()));
    const SariScore second = sari(sources, outputs2, references, true);
    std::vector<double> a, b;
    for (const SariScore& s : score.per_sentence) a.push_back(s.sari);
    for (const SariScore& s : second.per_sentence) b.push_back(s.sari);
    const WilcoxonResult w = wilcoxon_signed_rank(a, b);
    report["wilcoxon"] = ojson{{"statistic", w.statistic},
                               {"p_value", w.p_value},
                               {"n_nonzero", w.n_nonzero},
                               {"exact", w.exact},
                               {"second_sari", second.sari}};
  }

  if (!config.out_path.empty())
    cmddetail::write_text(config.out_path, report.dump(2) + "\n", "score");
  return report;
}

/// Agreement report between a predicted and a gold label file.
inline ojson cmd_agree(const RunConfig& config) {
  if (config.pred_path.empty()) throw std::runtime_error("agree: --pred is required");
  if (config.gold_path.empty()) throw std::runtime_error("agree: --gold is required");
  std::ifstream pred_in = cmddetail::open_input(config.pred_path, "pred");
  const auto pred = load_gold_labels(pred_in);
  std::ifstream gold_in = cmddetail::open_input(config.gold_path, "gold");
  const auto gold = load_gold_labels(gold_in);
  const AgreementReport report = agreement(pred, gold);

  ojson j;
  j["n_shared"] = report.n_shared;
  j["micro"] = ojson{{"precision", report.micro.precision},
                     {"recall", report.micro.recall},
                     {"f1", report.micro.f1}};
  ojson per = ojson::object();
  for (OperationToken op : kAllOperations) {
    const OpAgreement& a = report.per_op.at(op);
    ojson row;
    row["precision"] = cmddetail::stats_to_json(a.precision);
    row["recall"] = cmddetail::stats_to_json(a.recall);
    row["f1"] = cmddetail::stats_to_json(a.f1);
    row["support"] = a.support;
    row["kappa"] = cmddetail::stats_to_json(report.kappa_per_op.at(op));
    per[std::string(name_of(op))] = std::move(row);
  }
  j["per_op"] = std::move(per);
  if (!config.out_path.empty())
    cmddetail::write_text(config.out_path, j.dump(2) + "\n", "agree");
  return j;
}

struct CompareSummary {
  std::vector<OperationProfile> profiles;
  DistanceMatrix jsd;
  DistanceMatrix l2;
};

/// Builds per-file operation profiles and emits the distance matrices,
/// profile dump, and per-subset histograms under the output directory.
inline CompareSummary cmd_compare(const RunConfig& config) {
  if (config.tagged_inputs.size() < 2)
    throw std::runtime_error("compare: need at least two tagged files");
  if (config.out_path.empty()) throw std::runtime_error("compare: --out is required");

  CompareSummary summary;
  std::vector<std::map<std::size_t, std::size_t>> histograms;
  for (const std::string& path : config.tagged_inputs) {
    const std::vector<TaggedInstance> tagged = cmddetail::load_tagged(path);
    summary.profiles.push_back(build_profile(tagged, cmddetail::subset_name_of(path)));
    histograms.push_back(ops_histogram(tagged));
  }
  summary.jsd = pairwise_distances(summary.profiles, ProfileMetric::MeanJsd);
  summary.l2 = pairwise_distances(summary.profiles, ProfileMetric::L2);

  const std::filesystem::path out_dir(config.out_path);
  std::filesystem::create_directories(out_dir);
  cmddetail::write_text((out_dir / "distances_jsd.csv").string(), to_csv(summary.jsd), "compare");
  cmddetail::write_text((out_dir / "distances_l2.csv").string(), to_csv(summary.l2), "compare");

  ojson profiles = ojson::array();
  for (std::size_t p = 0; p < summary.profiles.size(); ++p) {
    const OperationProfile& profile = summary.profiles[p];
    ojson j;
    j["subset_name"] = profile.subset_name;
    j["n_instances"] = profile.n_instances;
    ojson freqs = ojson::object();
    for (std::size_t i = 0; i < kOperationCount; ++i)
      freqs[std::string(name_of(kAllOperations[i]))] = profile.freqs[i];
    j["freqs"] = std::move(freqs);
    ojson corr = ojson::array();
    for (const auto& row : profile.corr) corr.push_back(std::vector<double>(row.begin(), row.end()));
    j["corr"] = std::move(corr);
    ojson degenerate = ojson::array();
    for (OperationToken op : canonical_order(profile.degenerate_ops))
      degenerate.push_back(std::string(name_of(op)));
    j["degenerate_ops"] = std::move(degenerate);
    ojson hist = ojson::object();
    for (const auto& [size, count] : histograms[p]) hist[std::to_string(size)] = count;
    j["ops_histogram"] = std::move(hist);
    profiles.push_back(std::move(j));
  }
  cmddetail::write_text((out_dir / "profiles.json").string(),
                        ojson{{"profiles", profiles}}.dump(2) + "\n", "compare");

  std::ostringstream hist_csv;
  hist_csv << "subset";
  for (std::size_t b = 0; b <= kOperationCount; ++b) hist_csv << ',' << b;
  hist_csv << '\n';
  for (std::size_t p = 0; p < summary.profiles.size(); ++p) {
    hist_csv << summary.profiles[p].subset_name;
    for (std::size_t b = 0; b <= kOperationCount; ++b) {
      const auto it = histograms[p].find(b);
      hist_csv << ',' << (it == histograms[p].end() ? 0 : it->second);
    }
    hist_csv << '\n';
  }
  cmddetail::write_text((out_dir / "histograms.csv").string(), hist_csv.str(), "compare");
  return summary;
}

/// Corpus-level surface statistics plus unique-token counts.
inline ojson cmd_stats(const RunConfig& config) {
  if (config.corpus_path.empty()) throw std::runtime_error("stats: --corpus is required");
  std::ifstream corpus_in = cmddetail::open_input(config.corpus_path, "corpus");
  std::vector<SimplificationInstance> corpus = load_corpus(corpus_in, false);
  if (!config.parses_path.empty()) cmddetail::attach_parses(corpus, config.parses_path);

  std::optional<FrequencyTable> freq;
  if (!config.freq_path.empty()) {
    std::ifstream freq_in = cmddetail::open_input(config.freq_path, "freq");
    freq = load_frequency_table(freq_in);
  }
  const Tokenizer tokenize = tokenizer_for(config.tokenizer);

  struct Mean {
    double sum = 0.0;
    std::size_t n = 0;
    void add(const std::optional<double>& v) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    ojson to_json() const {
      if (n == 0) return ojson(nullptr);
      return ojson(sum / static_cast<double>(n));
    }
  };
  Mean token_ratio, nbchars, lev, wordrank, depth;
  std::set<std::string> source_tokens, target_tokens;
  std::size_t degenerate = 0;

  for (const SimplificationInstance& si : corpus) {
    for (const std::string& sent : si.source_sentences)
      for (const std::string& tok : tokenize(sent)) source_tokens.insert(tok);
    for (const std::string& sent : si.target_sentences)
      for (const std::string& tok : tokenize(sent)) target_tokens.insert(tok);
    if (si.alignment.degenerate()) {
      ++degenerate;
      continue;
    }
    const InstanceStats stats = instance_stats(si, freq ? &*freq : nullptr, tokenize);
    token_ratio.add(stats.token_length_ratio);
    nbchars.add(stats.nbchars_ratio);
    lev.add(stats.levenshtein_similarity);
    wordrank.add(stats.wordrank_ratio);
    depth.add(stats.deptree_depth_ratio);
  }

  std::size_t shared = 0;
  for (const std::string& tok : source_tokens) shared += target_tokens.count(tok);

  ojson j;
  j["n_instances"] = corpus.size();
  j["n_degenerate"] = degenerate;
  j["token_length_ratio"] = token_ratio.to_json();
  j["nbchars_ratio"] = nbchars.to_json();
  j["levenshtein_similarity"] = lev.to_json();
  j["wordrank_ratio"] = wordrank.to_json();
  j["deptree_depth_ratio"] = depth.to_json();
  j["unique_tokens"] = ojson{{"source", source_tokens.size()},
                             {"target", target_tokens.size()},
                             {"shared", shared}};
  if (!config.out_path.empty())
    cmddetail::write_text(config.out_path, j.dump(2) + "\n", "stats");
  return j;
}

}  // namespace cogsimp
