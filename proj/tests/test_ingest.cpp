#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cogsimp/ingest.hpp"

using namespace cogsimp;

TEST_CASE("load_corpus derives alignment and applies the degenerate filter") {
  const std::string lines =
      R"({"id":"a","source_sentences":["One source."],"target_sentences":["First target.","Second target."]})"
      "\n"
      R"({"id":"b","source_sentences":["Gone."],"target_sentences":[]})"
      "\n"
      R"({"id":"c","source_sentences":[],"target_sentences":["Fresh."]})"
      "\n";

  std::istringstream with_filter(lines);
  const auto filtered = load_corpus(with_filter, true);
  REQUIRE(filtered.size() == 1);
  CHECK(filtered[0].id == "a");
  CHECK(filtered[0].alignment.kind == AlignmentKind::OneToN);
  CHECK(filtered[0].alignment.target_count == 2);

  std::istringstream without_filter(lines);
  const auto full = load_corpus(without_filter, false);
  REQUIRE(full.size() == 3);
  CHECK(full[1].alignment.kind == AlignmentKind::MToZero);
  CHECK(full[2].alignment.kind == AlignmentKind::ZeroToN);

  // filter-on output is a subset; the difference is exactly the degenerate rows
  for (const auto& si : filtered) {
    const bool found = std::any_of(full.begin(), full.end(),
                                   [&](const SimplificationInstance& f) { return f.id == si.id; });
    CHECK(found);
  }
  std::size_t degenerate = 0;
  for (const auto& si : full)
    if (si.alignment.degenerate()) ++degenerate;
  CHECK(full.size() - filtered.size() == degenerate);
}

TEST_CASE("load_corpus reports malformed rows with their line number") {
  std::istringstream bad("{\"id\":\"a\",\"source_sentences\":[\"x\"],\"target_sentences\":[\"y\"]}\nnot json\n");
  CHECK_THROWS_WITH(load_corpus(bad, false), Catch::Matchers::ContainsSubstring("line 2"));

  std::istringstream empty_both(R"({"id":"a","source_sentences":[],"target_sentences":[]})");
  CHECK_THROWS_WITH(load_corpus(empty_both, false),
                    Catch::Matchers::ContainsSubstring("both sides empty"));

  std::istringstream dup(
      R"({"id":"a","source_sentences":["x"],"target_sentences":["y"]})"
      "\n"
      R"({"id":"a","source_sentences":["x"],"target_sentences":["y"]})"
      "\n");
  CHECK_THROWS_WITH(load_corpus(dup, false), Catch::Matchers::ContainsSubstring("duplicate id"));
}

TEST_CASE("load_corpus keeps reference lists") {
  std::istringstream in(
      R"({"id":"a","source_sentences":["s"],"target_sentences":["t"],"references":[["r one"],["r two","r three"]]})");
  const auto corpus = load_corpus(in, false);
  REQUIRE(corpus.size() == 1);
  REQUIRE(corpus[0].references.has_value());
  REQUIRE(corpus[0].references->size() == 2);
  CHECK((*corpus[0].references)[1].size() == 2);
}

TEST_CASE("parse_conllu reads minimal trees") {
  std::istringstream in(
      "# sent_id = demo:source:0\n"
      "1\tHe\the\tPRON\t_\tPerson=3\t2\tnsubj\t_\t_\n"
      "2\truns\trun\tVERB\t_\tPerson=3|Tense=Pres\t0\troot\t_\t_\n");
  const auto sentences = parse_conllu(in);
  REQUIRE(sentences.size() == 1);
  CHECK(sentences[0].id == "demo:source:0");
  REQUIRE(sentences[0].tokens.size() == 2);
  CHECK(sentences[0].tokens[0].head == 2);
  CHECK(sentences[0].tokens[1].head == 0);
  CHECK(sentences[0].tokens[1].feats.at("Tense") == "Pres");
  CHECK(sentences[0].tokens[1].feats.at("Person") == "3");
  CHECK(sentences[0].tokens[0].feats.size() == 1);
}

TEST_CASE("parse_conllu skips multiword ranges and empty nodes") {
  std::istringstream in(
      "# sent_id = s\n"
      "1\tvamonos\tvamonos\tVERB\t_\t_\t0\troot\t_\t_\n"
      "2-3\tal\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "2\ta\ta\tADP\t_\t_\t1\tcase\t_\t_\n"
      "3\tel\tel\tDET\t_\t_\t4\tdet\t_\t_\n"
      "3.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "4\tmar\tmar\tNOUN\t_\t_\t1\tobl\t_\t_\n");
  const auto sentences = parse_conllu(in);
  REQUIRE(sentences.size() == 1);
  CHECK(sentences[0].tokens.size() == 4);
}

TEST_CASE("parse_conllu rejects malformed blocks by sentence id") {
  std::istringstream bad_head(
      "# sent_id = broken\n"
      "1\ta\ta\tDET\t_\t_\tX\tdet\t_\t_\n");
  CHECK_THROWS_WITH(parse_conllu(bad_head), Catch::Matchers::ContainsSubstring("broken"));

  std::istringstream out_of_range(
      "# sent_id = far\n"
      "1\ta\ta\tDET\t_\t_\t9\tdet\t_\t_\n");
  CHECK_THROWS_WITH(parse_conllu(out_of_range), Catch::Matchers::ContainsSubstring("far"));

  std::istringstream no_tokens("# sent_id = hollow\n\n");
  CHECK_THROWS_WITH(parse_conllu(no_tokens), Catch::Matchers::ContainsSubstring("hollow"));
}

TEST_CASE("parse_conllu round-trips token counts and head structure") {
  const std::string block =
      "# sent_id = rt\n"
      "1\tBig\tbig\tADJ\t_\tDegree=Pos\t2\tamod\t_\t_\n"
      "2\tdogs\tdog\tNOUN\t_\tNumber=Plur\t3\tnsubj\t_\t_\n"
      "3\tbark\tbark\tVERB\t_\tTense=Pres\t0\troot\t_\t_\n";
  std::istringstream in(block);
  const auto first = parse_conllu(in);
  REQUIRE(first.size() == 1);

  // serialize back to the 10-column format and re-parse
  std::ostringstream os;
  os << "# sent_id = " << first[0].id << "\n";
  for (const ParseToken& t : first[0].tokens) {
    os << t.index << '\t' << t.surface << '\t' << (t.lemma.empty() ? "_" : t.lemma) << '\t'
       << (t.upos.empty() ? "_" : t.upos) << "\t_\t";
    if (t.feats.empty()) {
      os << '_';
    } else {
      bool sep = false;
      for (const auto& [k, v] : t.feats) {
        if (sep) os << '|';
        os << k << '=' << v;
        sep = true;
      }
    }
    os << '\t' << t.head << '\t' << (t.deprel.empty() ? "_" : t.deprel) << "\t_\t_\n";
  }
  std::istringstream in2(os.str());
  const auto second = parse_conllu(in2);
  REQUIRE(second.size() == 1);
  CHECK(second[0] == first[0]);
}

TEST_CASE("paraphrase db loads, lowercases, merges and skips bad lines") {
  std::istringstream in(
      "principal\tmain\n"
      "principal\tmain\n"             // duplicate collapses
      "In Comparison\tfrom\n"         // mixed case phrase rule
      "one two three four five\tx\n"  // source side too long
      "lonely-column\n"               // malformed
      "assist\tgive help to\n");
  const auto result = load_paraphrase_db(in, 4);
  CHECK(result.skipped_lines == 2);
  CHECK(result.db.size() == 3);
  REQUIRE(result.db.lookup("principal"));
  CHECK(result.db.lookup("principal")->count("main") == 1);
  CHECK(result.db.lookup("principal")->size() == 1);
  REQUIRE(result.db.lookup("in comparison"));
  CHECK(result.db.lookup("IN COMPARISON") == result.db.lookup("in comparison"));
  CHECK(result.db.lookup("absent") == nullptr);

  std::istringstream empty("");
  CHECK(load_paraphrase_db(empty, 4).db.empty());
}

TEST_CASE("paraphrase db honors a minimum score when given") {
  std::istringstream in(
      "principal\tmain\t4.5\n"
      "principal\tchief\t1.2\n"
      "big\tlarge\n");  // unscored lines pass any cutoff
  const auto result = load_paraphrase_db(in, 4, 2.0);
  REQUIRE(result.db.lookup("principal"));
  CHECK(result.db.lookup("principal")->size() == 1);
  CHECK(result.db.lookup("big") != nullptr);
  CHECK(result.skipped_lines == 1);
}

TEST_CASE("gold labels load with a closed vocabulary") {
  std::istringstream in(
      R"({"id":"a","ops":["REPHRASE","DEL"]})"
      "\n"
      R"({"id":"b","ops":[]})"
      "\n");
  const auto labels = load_gold_labels(in);
  REQUIRE(labels.size() == 2);
  CHECK(labels.at("a") == OperationSet{OperationToken::Rephrase, OperationToken::Del});
  CHECK(labels.at("b").empty());

  std::istringstream unknown(R"({"id":"c","ops":["FOO"]})");
  CHECK_THROWS_WITH(load_gold_labels(unknown), Catch::Matchers::ContainsSubstring("FOO"));

  std::istringstream dup(
      R"({"id":"a","ops":[]})"
      "\n"
      R"({"id":"a","ops":[]})"
      "\n");
  CHECK_THROWS_WITH(load_gold_labels(dup), Catch::Matchers::ContainsSubstring("duplicate"));
}

TEST_CASE("coref layers load and validate chain shape") {
  std::istringstream in(
      R"({"id":"a","chains":[[{"side":"source","sent":0,"start":0,"end":0,"is_pronoun":true},{"side":"target","sent":0,"start":0,"end":1,"is_pronoun":false}]]})");
  const auto layers = load_coref(in);
  REQUIRE(layers.count("a") == 1);
  REQUIRE(layers.at("a").chains.size() == 1);
  CHECK(layers.at("a").chains[0].mentions.size() == 2);
  CHECK(layers.at("a").chains[0].mentions[0].is_pronoun);

  std::istringstream empty_chains(R"({"id":"b","chains":[]})");
  CHECK(load_coref(empty_chains).at("b").chains.empty());

  std::istringstream short_chain(
      R"({"id":"c","chains":[[{"side":"source","sent":0,"start":0,"end":0,"is_pronoun":true}]]})");
  CHECK_THROWS_WITH(load_coref(short_chain),
                    Catch::Matchers::ContainsSubstring("fewer than two"));

  std::istringstream bad_span(
      R"({"id":"d","chains":[[{"side":"source","sent":0,"start":3,"end":1,"is_pronoun":true},{"side":"target","sent":0,"start":0,"end":0,"is_pronoun":false}]]})");
  CHECK_THROWS_WITH(load_coref(bad_span), Catch::Matchers::ContainsSubstring("span"));
}

TEST_CASE("frequency table supports both carrier formats") {
  std::istringstream ordered("the\nof\n");
  const auto t1 = load_frequency_table(ordered);
  CHECK(t1.rank("the") == 1);
  CHECK(t1.rank("of") == 2);
  CHECK(t1.rank("zyzzyva") == 3);  // unknown words rank just past the table

  std::istringstream pairs("cat\t512\n");
  const auto t2 = load_frequency_table(pairs);
  CHECK(t2.rank("cat") == 512);
  CHECK(t2.rank("CAT") == 512);
  CHECK(t2.rank("dog") == 513);

  std::istringstream bad("cat\t0\n");
  CHECK_THROWS(load_frequency_table(bad));
}
