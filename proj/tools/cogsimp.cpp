// Command-line front end: wires corpus ingestion, operation tagging,
// training-file annotation, scoring, agreement, and dataset comparison.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cogsimp/commands.hpp"

namespace {

using namespace cogsimp;

void add_tagger_flags(CLI::App* cmd, RunConfig& config) {
  cmd->add_option("--del-ratio", config.tagger.del_ratio_threshold,
                  "Source/target token ratio that marks a deletion")
      ->capture_default_str();
  cmd->add_option("--del-pct", config.tagger.del_pct_threshold,
                  "Deleted-token fraction for the secondary deletion rule")
      ->capture_default_str();
  cmd->add_option("--add-ratio", config.tagger.add_ratio_threshold,
                  "Token ratio below which unclassified new words count as additions")
      ->capture_default_str();
  cmd->add_option("--clause-jaccard", config.tagger.clause_match_jaccard,
                  "Minimum lemma overlap to pair clauses across sides")
      ->capture_default_str();
  cmd->add_option("--max-phrase-len", config.tagger.max_phrase_len,
                  "Longest source phrase probed against the paraphrase table")
      ->capture_default_str();
}

std::string tokenizer_help = "Tokenizer for surface statistics (simple|whitespace)";

void add_tokenizer_flag(CLI::App* cmd, RunConfig& config) {
  cmd->add_option_function<std::string>(
         "--tokenizer",
         [&config](const std::string& value) {
           if (value == "simple")
             config.tokenizer = TokenizerKind::Simple;
           else if (value == "whitespace")
             config.tokenizer = TokenizerKind::Whitespace;
           else
             throw CLI::ValidationError("--tokenizer must be simple or whitespace");
         },
         tokenizer_help)
      ->default_str("simple");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simplification-operation corpus toolkit"};
  app.require_subcommand(1);

  RunConfig config;
  std::string style_name = "bart";

  CLI::App* tag = app.add_subcommand("tag", "Assign operation tokens to a corpus");
  tag->add_option("--corpus", config.corpus_path, "Corpus JSONL")->required();
  tag->add_option("--ppdb", config.ppdb_path, "Paraphrase TSV")->required();
  tag->add_option("--parses", config.parses_path, "CoNLL-U sidecar file or directory");
  tag->add_option("--coref", config.coref_path, "Coreference JSONL");
  tag->add_option("--out", config.out_path, "Tagged JSONL output")->required();
  tag->add_option("--min-score", config.min_score, "Minimum paraphrase rule score");
  tag->add_option("--threads", config.threads, "Worker threads")->capture_default_str();
  tag->add_option("--seed", config.seed, "Reserved; deterministic paths ignore it");
  tag->add_flag("--keep-degenerate", config.keep_degenerate,
                "Keep full-deletion and full-addition instances");
  add_tagger_flags(tag, config);

  CLI::App* annotate = app.add_subcommand("annotate", "Emit operation-annotated training pairs");
  annotate->add_option("--corpus", config.corpus_path, "Corpus JSONL")->required();
  annotate->add_option("--tagged", config.tagged_path, "Tagged JSONL from 'tag'")->required();
  annotate->add_option("--out", config.out_path, "Output file")->required();
  annotate
      ->add_option_function<std::string>(
          "--style",
          [&](const std::string& value) {
            const auto style = style_from_name(value);
            if (!style) throw CLI::ValidationError("--style must be t5 or bart");
            config.style = *style;
          },
          "Annotation style (t5|bart)")
      ->required();
  annotate->add_option("--format", config.annotate_format, "Output carrier (tsv|jsonl)")
      ->capture_default_str();

  CLI::App* score = app.add_subcommand("score", "Score simplification outputs");
  score->add_option("--sources", config.sources_path, "Source sentences, one per line")
      ->required();
  score->add_option("--outputs", config.outputs_path, "System outputs, one per line")->required();
  score->add_option("--refs", config.refs_paths, "Reference file (repeat for multi-reference)")
      ->required();
  score->add_option("--outputs2", config.outputs2_path,
                    "Second system for the paired signed-rank test");
  score->add_option("--out", config.out_path, "JSON report path");
  score->add_flag("--per-sentence", config.per_sentence, "Include per-sentence scores");

  CLI::App* agree = app.add_subcommand("agree", "Compare two operation labelings");
  agree->add_option("--pred", config.pred_path, "Predicted labels JSONL")->required();
  agree->add_option("--gold", config.gold_path, "Gold labels JSONL")->required();
  agree->add_option("--out", config.out_path, "JSON report path");

  CLI::App* compare = app.add_subcommand("compare", "Compare tagged datasets");
  compare->add_option("inputs", config.tagged_inputs, "Tagged JSONL files (>= 2)")
      ->required()
      ->expected(-2);
  compare->add_option("--out", config.out_path, "Output directory")->required();

  CLI::App* stats = app.add_subcommand("stats", "Corpus surface statistics");
  stats->add_option("--corpus", config.corpus_path, "Corpus JSONL")->required();
  stats->add_option("--parses", config.parses_path, "CoNLL-U sidecar file or directory");
  stats->add_option("--freq", config.freq_path, "Word frequency table");
  stats->add_option("--out", config.out_path, "JSON report path");
  add_tokenizer_flag(stats, config);

  CLI11_PARSE(app, argc, argv);

  try {
    if (tag->parsed()) {
      const TagSummary summary = cmd_tag(config);
      std::printf("tagged %zu instances -> %s\n", summary.n_instances, config.out_path.c_str());
      for (std::size_t i = 0; i < kOperationCount; ++i)
        std::printf("  %-8s %zu\n", std::string(name_of(kAllOperations[i])).c_str(),
                    summary.op_counts[i]);
      std::printf("  parse-dependent rules skipped on %.1f%% of instances\n",
                  100.0 * summary.skipped_fraction);
    } else if (annotate->parsed()) {
      const AnnotateSummary summary = cmd_annotate(config);
      std::printf("wrote %zu pairs -> %s (%zu degenerate instances excluded)\n", summary.written,
                  config.out_path.c_str(), summary.excluded_degenerate);
    } else if (score->parsed()) {
      const ojson report = cmd_score(config);
      if (config.out_path.empty())
        std::cout << report.dump(2) << "\n";
      else
        std::printf("sari %.2f | bleu %.3f | identical %.2f%% -> %s\n",
                    report["sari"].get<double>(), report["bleu"].get<double>(),
                    report["identical_pct"].get<double>(), config.out_path.c_str());
    } else if (agree->parsed()) {
      const ojson report = cmd_agree(config);
      std::printf("%-10s %10s %10s %10s %8s %8s\n", "op", "precision", "recall", "f1", "support",
                  "kappa");
      for (OperationToken op : kAllOperations) {
        const ojson& row = report["per_op"][std::string(name_of(op))];
        auto cell = [&](const char* key) {
          return row[key].is_null() ? std::string("n/a")
                                    : std::to_string(row[key].get<double>()).substr(0, 6);
        };
        std::printf("%-10s %10s %10s %10s %8zu %8s\n", std::string(name_of(op)).c_str(),
                    cell("precision").c_str(), cell("recall").c_str(), cell("f1").c_str(),
                    row["support"].get<std::size_t>(), cell("kappa").c_str());
      }
      std::printf("micro precision %.4f | recall %.4f | f1 %.4f over %zu shared ids\n",
                  report["micro"]["precision"].get<double>(),
                  report["micro"]["recall"].get<double>(), report["micro"]["f1"].get<double>(),
                  report["n_shared"].get<std::size_t>());
    } else if (compare->parsed()) {
      const CompareSummary summary = cmd_compare(config);
      std::printf("compared %zu subsets -> %s\n", summary.profiles.size(),
                  config.out_path.c_str());
    } else if (stats->parsed()) {
      const ojson report = cmd_stats(config);
      if (config.out_path.empty())
        std::cout << report.dump(2) << "\n";
      else
        std::printf("stats over %zu instances -> %s\n",
                    report["n_instances"].get<std::size_t>(), config.out_path.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
