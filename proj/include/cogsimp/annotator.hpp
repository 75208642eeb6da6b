#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "cogsimp/core.hpp"
#include "cogsimp/text.hpp"

namespace cogsimp {

// How operation tokens are woven into a training pair. T5Style binds the
// tokens to a mask span; BARTStyle prepends them to the target.
enum class AnnotationStyle : std::uint8_t { T5Style, BARTStyle };

inline std::optional<AnnotationStyle> style_from_name(std::string_view s) {
  if (s == "t5") return AnnotationStyle::T5Style;
  if (s == "bart") return AnnotationStyle::BARTStyle;
  return std::nullopt;
}

struct AnnotatedPair {
  std::string source;
  std::string target;
};

/// Builds the operation-annotated training pair for one instance. Sentences
/// on each side are joined with single spaces. Layouts:
///   T5Style:   source = "<mask_1> " + S
///              target = "<mask_1> " [+ ops + " "] + "<mask_2> " + T
///   BARTStyle: source = "<mask> " + S
///              target = [ops + " "] + T
/// Throws on degenerate (M-to-0 / 0-to-N) instances, which carry no
/// trainable pair.
inline AnnotatedPair emit(const SimplificationInstance& si, const OperationSet& ops,
                          AnnotationStyle style) {
  if (si.alignment.degenerate())
    throw std::runtime_error("instance '" + si.id + "': cannot annotate a " +
                             std::string(name_of(si.alignment.kind)) + " instance");
  const std::string source_text = join(si.source_sentences);
  const std::string target_text = join(si.target_sentences);
  std::string op_text = serialize(ops);
  if (!op_text.empty()) op_text += ' ';

  AnnotatedPair out;
  if (style == AnnotationStyle::T5Style) {
    out.source = "<mask_1> " + source_text;
    out.target = "<mask_1> " + op_text + "<mask_2> " + target_text;
  } else {
    out.source = "<mask> " + source_text;
    out.target = op_text + target_text;
  }
  return out;
}

namespace detail {

// An angle-bracketed chunk with no internal whitespace, e.g. "<DEL>".
inline std::optional<std::string_view> leading_angle_chunk(std::string_view s) {
  if (s.empty() || s.front() != '<') return std::nullopt;
  std::size_t gt = s.find('>');
  if (gt == std::string_view::npos) return std::nullopt;
  std::string_view chunk = s.substr(0, gt + 1);
  if (chunk.find(' ') != std::string_view::npos) return std::nullopt;
  return chunk;
}

}  // namespace detail

/// Decodes a target line produced by emit() (or a model imitating it) back
/// into its operation set and residual text. Throws on scaffolding that does
/// not match the declared style or on unknown operation tokens.
inline std::pair<OperationSet, std::string> parse_annotated(std::string_view line,
                                                            AnnotationStyle style) {
  OperationSet ops;
  std::string_view rest = line;

  auto consume = [&](std::string_view prefix) {
    if (rest.substr(0, prefix.size()) != prefix)
      throw std::runtime_error("malformed annotated line: expected '" + std::string(prefix) +
                               "' in '" + std::string(line) + "'");
    rest.remove_prefix(prefix.size());
  };

  if (style == AnnotationStyle::T5Style) {
    consume("<mask_1> ");
    while (true) {
      auto chunk = detail::leading_angle_chunk(rest);
      if (!chunk)
        throw std::runtime_error("malformed annotated line: missing <mask_2> in '" +
                                 std::string(line) + "'");
      if (*chunk == "<mask_2>") {
        rest.remove_prefix(chunk->size());
        if (!rest.empty()) consume(" ");
        return {ops, std::string(rest)};
      }
      auto op = operation_from_token(*chunk);
      if (!op)
        throw std::runtime_error("unknown operation token '" + std::string(*chunk) + "'");
      ops.insert(*op);
      rest.remove_prefix(chunk->size());
      consume(" ");
    }
  }

  // BARTStyle: a maximal run of leading angle tokens, then the text.
  while (true) {
    auto chunk = detail::leading_angle_chunk(rest);
    if (!chunk) break;
    auto op = operation_from_token(*chunk);
    if (!op) throw std::runtime_error("unknown operation token '" + std::string(*chunk) + "'");
    ops.insert(*op);
    rest.remove_prefix(chunk->size());
    if (!rest.empty()) consume(" ");
  }
  return {ops, std::string(rest)};
}

}  // namespace cogsimp
