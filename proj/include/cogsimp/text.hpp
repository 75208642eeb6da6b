#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cogsimp {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Collapses runs of whitespace to single spaces and trims the ends.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // swallow leading space
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out += ' ';
      in_space = false;
      out += c;
    }
  }
  return out;
}

/// Split on runs of whitespace; punctuation stays attached to words.
inline std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u);
}

/// Split on whitespace with every ASCII punctuation character emitted as its
/// own token: "we're fine." -> {"we", "'", "re", "fine", "."}.
inline std::vector<std::string> simple_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

inline std::vector<std::string> lowercase_all(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(lowercase(t));
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Surface stop list used when no parse is available to supply POS tags.
// Covers determiners, adpositions, auxiliaries, conjunctions, particles and
// pronouns -- the classes excluded from content-word analyses.
inline const std::unordered_set<std::string>& function_word_list() {
  static const std::unordered_set<std::string> words = {
      // determiners / articles
      "the", "a", "an", "this", "that", "these", "those", "some", "any", "no",
      "every", "each", "all", "both", "either", "neither", "much", "many",
      // adpositions
      "of", "in", "on", "at", "by", "for", "with", "about", "against",
      "between", "into", "through", "during", "before", "after", "above",
      "below", "to", "from", "up", "down", "out", "off", "over", "under",
      "near", "upon", "within", "without", "throughout", "toward", "towards",
      // auxiliaries and copulas
      "be", "am", "is", "are", "was", "were", "been", "being", "have", "has",
      "had", "having", "do", "does", "did", "will", "would", "shall",
      "should", "may", "might", "must", "can", "could",
      // conjunctions and particles
      "and", "or", "but", "nor", "so", "yet", "if", "because", "although",
      "though", "while", "whereas", "unless", "since", "until", "when",
      "whenever", "where", "wherever", "than", "whether", "as", "not",
      // pronouns
      "i", "me", "my", "mine", "myself", "we", "us", "our", "ours",
      "ourselves", "you", "your", "yours", "yourself", "yourselves", "he",
      "him", "his", "himself", "she", "her", "hers", "herself", "it", "its",
      "itself", "they", "them", "their", "theirs", "themselves", "who",
      "whom", "whose", "which", "what", "there",
  };
  return words;
}

inline const std::unordered_set<std::string>& third_person_pronouns() {
  static const std::unordered_set<std::string> words = {
      "he",  "him", "his", "himself", "she",   "her",   "hers", "herself",
      "it",  "its", "itself", "they", "them",  "their", "theirs",
      "themselves",
  };
  return words;
}

/// UPOS classes excluded from content-word analyses.
inline bool is_function_upos(std::string_view upos) {
  return upos == "DET" || upos == "ADP" || upos == "AUX" || upos == "CCONJ" ||
         upos == "SCONJ" || upos == "PART" || upos == "PRON" || upos == "PUNCT";
}

inline bool is_function_surface(const std::string& lowercased) {
  return (lowercased.size() == 1 && is_ascii_punct(lowercased[0])) ||
         function_word_list().count(lowercased) > 0;
}

}  // namespace cogsimp
