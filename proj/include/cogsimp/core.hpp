#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cogsimp {

// The nine simplification-operation tokens. Enumerator order is the canonical
// order used everywhere a set of operations is listed or serialized.
enum class OperationToken : std::uint8_t {
  Prox = 0,
  Rephrase,
  Del,
  Add,
  Example,
  Explain,
  Explicit,
  Reorder,
  Split,
};

inline constexpr std::size_t kOperationCount = 9;

inline constexpr std::array<OperationToken, kOperationCount> kAllOperations = {
    OperationToken::Prox,     OperationToken::Rephrase, OperationToken::Del,
    OperationToken::Add,      OperationToken::Example,  OperationToken::Explain,
    OperationToken::Explicit, OperationToken::Reorder,  OperationToken::Split,
};

constexpr std::string_view name_of(OperationToken op) {
  switch (op) {
    case OperationToken::Prox: return "PROX";
    case OperationToken::Rephrase: return "REPHRASE";
    case OperationToken::Del: return "DEL";
    case OperationToken::Add: return "ADD";
    case OperationToken::Example: return "EXAMPLE";
    case OperationToken::Explain: return "EXPLAIN";
    case OperationToken::Explicit: return "EXPLICIT";
    case OperationToken::Reorder: return "REORDER";
    case OperationToken::Split: return "SPLIT";
  }
  return "";
}

/// Surface form used in annotated text, e.g. "<REPHRASE>".
inline std::string token_text(OperationToken op) {
  return "<" + std::string(name_of(op)) + ">";
}

inline std::optional<OperationToken> operation_from_name(std::string_view s) {
  for (OperationToken op : kAllOperations)
    if (name_of(op) == s) return op;
  return std::nullopt;
}

/// Accepts the bracketed surface form, e.g. "<DEL>".
inline std::optional<OperationToken> operation_from_token(std::string_view s) {
  if (s.size() < 3 || s.front() != '<' || s.back() != '>') return std::nullopt;
  return operation_from_name(s.substr(1, s.size() - 2));
}

// A subset of the nine operation tokens. Iteration and serialization always
// follow canonical token order, independent of insertion order.
class OperationSet {
 public:
  constexpr OperationSet() = default;
  OperationSet(std::initializer_list<OperationToken> ops) {
    for (OperationToken op : ops) insert(op);
  }

  void insert(OperationToken op) { bits_ |= bit(op); }
  void erase(OperationToken op) { bits_ &= static_cast<std::uint16_t>(~bit(op)); }
  bool contains(OperationToken op) const { return (bits_ & bit(op)) != 0; }
  bool empty() const { return bits_ == 0; }

  std::size_t size() const {
    std::size_t n = 0;
    for (OperationToken op : kAllOperations) n += contains(op) ? 1 : 0;
    return n;
  }

  friend bool operator==(const OperationSet&, const OperationSet&) = default;

  std::uint16_t bits() const { return bits_; }
  static OperationSet from_bits(std::uint16_t bits) {
    OperationSet s;
    s.bits_ = static_cast<std::uint16_t>(bits & 0x1ff);
    return s;
  }

 private:
  static constexpr std::uint16_t bit(OperationToken op) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(op));
  }
  std::uint16_t bits_ = 0;
};

/// Members of `ops` in canonical token order.
inline std::vector<OperationToken> canonical_order(const OperationSet& ops) {
  std::vector<OperationToken> out;
  out.reserve(ops.size());
  for (OperationToken op : kAllOperations)
    if (ops.contains(op)) out.push_back(op);
  return out;
}

/// Space-joined bracketed tokens in canonical order; empty set gives "".
inline std::string serialize(const OperationSet& ops) {
  std::string out;
  for (OperationToken op : canonical_order(ops)) {
    if (!out.empty()) out += ' ';
    out += token_text(op);
  }
  return out;
}

/// Inverse of serialize(). Throws on any token outside the vocabulary.
inline OperationSet parse_operation_set(std::string_view text) {
  OperationSet out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(' ', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view piece = text.substr(pos, end - pos);
    if (!piece.empty()) {
      auto op = operation_from_token(piece);
      if (!op) throw std::runtime_error("unknown operation token: " + std::string(piece));
      out.insert(*op);
    }
    pos = end + 1;
  }
  return out;
}

enum class AlignmentKind : std::uint8_t {
  OneToOne,
  OneToN,
  MToOne,
  MToN,
  MToZero,
  ZeroToN,
};

constexpr std::string_view name_of(AlignmentKind k) {
  switch (k) {
    case AlignmentKind::OneToOne: return "1-1";
    case AlignmentKind::OneToN: return "1-N";
    case AlignmentKind::MToOne: return "M-1";
    case AlignmentKind::MToN: return "M-N";
    case AlignmentKind::MToZero: return "M-0";
    case AlignmentKind::ZeroToN: return "0-N";
  }
  return "";
}

// Shape of an aligned instance: how many source sentences map to how many
// target sentences.
struct AlignmentType {
  AlignmentKind kind = AlignmentKind::OneToOne;
  std::size_t source_count = 1;
  std::size_t target_count = 1;

  // Full deletion or full addition of sentences.
  bool degenerate() const {
    return kind == AlignmentKind::MToZero || kind == AlignmentKind::ZeroToN;
  }

  friend bool operator==(const AlignmentType&, const AlignmentType&) = default;
};

/// Pure function of the two sentence counts. Throws when both are zero.
inline AlignmentType derive_alignment(std::size_t sources, std::size_t targets) {
  AlignmentType a;
  a.source_count = sources;
  a.target_count = targets;
  if (sources == 0 && targets == 0)
    throw std::runtime_error("alignment undefined: both sides empty");
  if (targets == 0)
    a.kind = AlignmentKind::MToZero;
  else if (sources == 0)
    a.kind = AlignmentKind::ZeroToN;
  else if (sources == 1)
    a.kind = targets == 1 ? AlignmentKind::OneToOne : AlignmentKind::OneToN;
  else
    a.kind = targets == 1 ? AlignmentKind::MToOne : AlignmentKind::MToN;
  return a;
}

// One word of a dependency parse. `head` is 0 for the root, otherwise the
// 1-based index of the governing token.
struct ParseToken {
  std::size_t index = 0;  // 1-based position within the sentence
  std::string surface;
  std::string lemma;
  std::string upos;
  std::map<std::string, std::string> feats;
  std::size_t head = 0;
  std::string deprel;

  friend bool operator==(const ParseToken&, const ParseToken&) = default;
};

struct ParsedSentence {
  std::string id;
  std::vector<ParseToken> tokens;

  friend bool operator==(const ParsedSentence&, const ParsedSentence&) = default;

  /// Enforces: non-empty, heads in range and acyclic-at-the-root level,
  /// exactly one root. Throws with the sentence id on violation.
  void validate() const {
    if (tokens.empty())
      throw std::runtime_error("parsed sentence '" + id + "': no tokens");
    std::size_t roots = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const ParseToken& t = tokens[i];
      if (t.index != i + 1)
        throw std::runtime_error("parsed sentence '" + id + "': token index " +
                                 std::to_string(t.index) + " out of sequence");
      if (t.head > tokens.size())
        throw std::runtime_error("parsed sentence '" + id + "': head " +
                                 std::to_string(t.head) + " out of range");
      if (t.head == t.index)
        throw std::runtime_error("parsed sentence '" + id + "': token " +
                                 std::to_string(t.index) + " is its own head");
      if (t.head == 0) ++roots;
    }
    if (roots != 1)
      throw std::runtime_error("parsed sentence '" + id + "': expected one root, found " +
                               std::to_string(roots));
  }
};

// One aligned source -> target unit, optionally with dependency parses per
// sentence and alternative reference simplifications.
struct SimplificationInstance {
  std::string id;
  std::vector<std::string> source_sentences;
  std::vector<std::string> target_sentences;
  AlignmentType alignment;
  std::optional<std::vector<ParsedSentence>> source_parses;
  std::optional<std::vector<ParsedSentence>> target_parses;
  std::optional<std::vector<std::vector<std::string>>> references;

  void validate() const {
    if (source_sentences.empty() && target_sentences.empty())
      throw std::runtime_error("instance '" + id + "': both sides empty");
    if (alignment.source_count != source_sentences.size() ||
        alignment.target_count != target_sentences.size())
      throw std::runtime_error("instance '" + id + "': alignment counts disagree with sentences");
    if (source_parses && source_parses->size() != source_sentences.size())
      throw std::runtime_error("instance '" + id + "': source parse count mismatch");
    if (target_parses && target_parses->size() != target_sentences.size())
      throw std::runtime_error("instance '" + id + "': target parse count mismatch");
    if (source_parses)
      for (const ParsedSentence& p : *source_parses) p.validate();
    if (target_parses)
      for (const ParsedSentence& p : *target_parses) p.validate();
  }
};

// Tagging result for one instance: which operations fired, and for each one
// the human-readable trace of the rule firings. The evidence map may also
// carry "skipped: ..." notes for rules that could not run.
struct TaggedInstance {
  SimplificationInstance instance;
  OperationSet ops;
  std::map<OperationToken, std::vector<std::string>> evidence;

  void validate() const {
    for (OperationToken op : canonical_order(ops)) {
      auto it = evidence.find(op);
      if (it == evidence.end() || it->second.empty())
        throw std::runtime_error("instance '" + instance.id + "': op " +
                                 std::string(name_of(op)) + " lacks evidence");
    }
  }
};

// Per-subset summary used for dataset comparison: how often each operation
// occurs, plus the Pearson correlation matrix of operation co-occurrence.
// Operations whose occurrence vector has zero variance are listed in
// `degenerate_ops`; their correlation entries are zeroed (diagonal kept at 1).
struct OperationProfile {
  std::string subset_name;
  std::size_t n_instances = 0;
  std::array<double, kOperationCount> freqs{};
  std::array<std::array<double, kOperationCount>, kOperationCount> corr{};
  OperationSet degenerate_ops;
};

}  // namespace cogsimp
