// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/spl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace pgir::spl {

std::string_view to_string(StageKind k) {
  return k == StageKind::Filtering ? "filtering" : "non_filtering";
}

std::string_view to_string(DetectionStatus s) {
  switch (s) {
    case DetectionStatus::Ok:
      return "ok";
    case DetectionStatus::ParseFailure:
      return "parse_failure";
    case DetectionStatus::EmptyDetection:
      return "empty_detection";
  }
  return "?";
}

namespace {

constexpr std::array<std::string_view, 5> kFilteringCommands{"search", "where", "regex", "tstats",
                                                             "datamodel"};
constexpr std::array<std::string_view, 12> kNonFilteringCommands{
    "stats", "rename", "convert", "table", "fields", "eval",
    "transaction", "fillnull", "lookup", "sort", "head", "dedup"};

bool contains(auto const& list, std::string_view word) {
  return std::find(list.begin(), list.end(), word) != list.end();
}

/// Leading command word of a stage, or empty if the stage starts with a
/// field comparison, a quoted term or a macro.
std::string command_word(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() &&
         (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
    ++i;
  }
  if (i == 0) return {};
  std::size_t j = i;
  while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
  if (j < text.size() && (text[j] == '=' || text[j] == '!' || text[j] == '<' || text[j] == '>')) {
    return {};
  }
  if (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) return {};
  return to_lower(text.substr(0, i));
}

StageKind classify(std::size_t index, const std::string& command, bool empty) {
  if (empty) return StageKind::NonFiltering;
  if (contains(kFilteringCommands, command)) return StageKind::Filtering;
  if (index == 0 && !contains(kNonFilteringCommands, command)) {
    // leading bare search
    return StageKind::Filtering;
  }
  return StageKind::NonFiltering;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Word, Quoted, Macro, LParen, RParen, Comma, Op, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
};

enum class Mode { Search, Where };

bool is_word_break(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '(' || c == ')' ||
         c == ',' || c == '=' || c == '!' || c == '<' || c == '>' || c == '[' || c == ']' ||
         c == '`';
}

std::vector<Token> lex(std::string_view text, Mode mode) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '"' || (c == '\'' && mode == Mode::Where)) {
      char quote = c;
      std::string value;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        char d = text[i];
        if (d == '\\' && i + 1 < text.size() && (text[i + 1] == quote || text[i + 1] == '\\')) {
          value.push_back(text[i + 1]);
          i += 2;
          continue;
        }
        if (d == quote) {
          closed = true;
          ++i;
          break;
        }
        value.push_back(d);
        ++i;
      }
      if (!closed) throw ParseFailure("unterminated quoted string");
      out.push_back({Tok::Quoted, std::move(value)});
      continue;
    }
    if (c == '`') {
      std::size_t close = text.find('`', i + 1);
      if (close == std::string_view::npos) throw ParseFailure("unterminated macro reference");
      out.push_back({Tok::Macro, collapse_whitespace(text.substr(i + 1, close - i - 1))});
      i = close + 1;
      continue;
    }
    if (c == '[' || c == ']') throw ParseFailure("subsearches are not supported");
    if (c == '(') {
      out.push_back({Tok::LParen, "("});
      ++i;
      continue;
    }
    if (c == ')') {
      out.push_back({Tok::RParen, ")"});
      ++i;
      continue;
    }
    if (c == ',') {
      out.push_back({Tok::Comma, ","});
      ++i;
      continue;
    }
    if (c == '=' || c == '!' || c == '<' || c == '>') {
      std::size_t j = i;
      while (j < text.size() && (text[j] == '=' || text[j] == '!' || text[j] == '<' ||
                                 text[j] == '>' || text[j] == '~')) {
        ++j;
      }
      out.push_back({Tok::Op, std::string(text.substr(i, j - i))});
      i = j;
      continue;
    }
    std::string word;
    while (i < text.size() && !is_word_break(text[i])) {
      if (text[i] == '\\' && i + 1 < text.size() && text[i + 1] == '\\') {
        word.push_back('\\');
        i += 2;
        continue;
      }
      word.push_back(text[i]);
      ++i;
    }
    out.push_back({Tok::Word, std::move(word)});
  }
  out.push_back({Tok::End, {}});
  return out;
}

std::optional<Comparator> comparator_token(std::string_view op) {
  if (op == "=" || op == "==") return Comparator::Eq;
  if (op == "!=") return Comparator::Neq;
  if (op == "<") return Comparator::Lt;
  if (op == "<=") return Comparator::Le;
  if (op == ">") return Comparator::Gt;
  if (op == ">=") return Comparator::Ge;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser over a token range.

class FilterParser {
 public:
  FilterParser(std::vector<Token> tokens, Mode mode) : tokens_(std::move(tokens)), mode_(mode) {}

  RawExpr parse_all() {
    if (peek().type == Tok::End) throw ParseFailure("empty filter expression");
    RawExpr e = parse_or();
    if (peek().type != Tok::End) {
      throw ParseFailure("unexpected token '" + peek().text + "'");
    }
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  Token next() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  bool is_keyword(const Token& t, std::string_view kw) const {
    if (t.type != Tok::Word) return false;
    return mode_ == Mode::Where ? equals_icase(t.text, kw) : t.text == kw;
  }

  bool starts_term(const Token& t) const {
    switch (t.type) {
      case Tok::Word:
        return !is_keyword(t, "OR") && !is_keyword(t, "AND");
      case Tok::Quoted:
      case Tok::Macro:
      case Tok::LParen:
        return true;
      default:
        return false;
    }
  }

  RawExpr parse_or() {
    std::vector<RawExpr> terms;
    terms.push_back(parse_and());
    while (is_keyword(peek(), "OR")) {
      next();
      terms.push_back(parse_and());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return RawExpr::op(RawExpr::Kind::Or, std::move(terms));
  }

  RawExpr parse_and() {
    std::vector<RawExpr> terms;
    terms.push_back(parse_not());
    while (true) {
      if (is_keyword(peek(), "AND")) {
        next();
        terms.push_back(parse_not());
        continue;
      }
      if (starts_term(peek())) {
        terms.push_back(parse_not());
        continue;
      }
      break;
    }
    if (terms.size() == 1) return std::move(terms.front());
    return RawExpr::op(RawExpr::Kind::And, std::move(terms));
  }

  RawExpr parse_not() {
    if (is_keyword(peek(), "NOT")) {
      next();
      return RawExpr::negate(parse_not());
    }
    return parse_primary();
  }

  RawExpr parse_primary() {
    const Token& t = peek();
    if (t.type == Tok::LParen) {
      next();
      RawExpr inner = parse_or();
      if (peek().type != Tok::RParen) throw ParseFailure("missing closing parenthesis");
      next();
      return inner;
    }
    if (t.type == Tok::Macro) {
      Token m = next();
      return RawExpr::leaf(
          {"_macro", Comparator::Eq, ValuePayload::scalar(ValueKind::String, m.text)});
    }
    if (t.type != Tok::Word && t.type != Tok::Quoted) {
      throw ParseFailure("unexpected token '" + t.text + "'");
    }
    if (mode_ == Mode::Where && t.type == Tok::Word && peek(1).type == Tok::LParen &&
        !is_keyword(t, "IN")) {
      return parse_function();
    }
    const Token& after = peek(1);
    if (after.type == Tok::Op) {
      return parse_comparison();
    }
    if (is_keyword_icase(after, "IN") && peek(2).type == Tok::LParen) {
      Token field = next();
      next();
      return RawExpr::leaf({field.text, Comparator::In, parse_list()});
    }
    if (mode_ == Mode::Where && is_keyword(after, "NOT") && is_keyword(peek(2), "IN") &&
        peek(3).type == Tok::LParen) {
      Token field = next();
      next();
      next();
      return RawExpr::leaf({field.text, Comparator::NotIn, parse_list()});
    }
    if (mode_ == Mode::Where && is_keyword(after, "LIKE")) {
      Token field = next();
      next();
      Token pattern = next();
      if (pattern.type != Tok::Quoted) throw ParseFailure("LIKE expects a quoted pattern");
      return RawExpr::leaf({field.text, Comparator::Eq, like_pattern(pattern.text)});
    }
    Token term = next();
    return RawExpr::leaf({std::string(kRawField), Comparator::Contains,
                          ValuePayload::literal(term.text, term.type == Tok::Quoted)});
  }

  static bool is_keyword_icase(const Token& t, std::string_view kw) {
    return t.type == Tok::Word && equals_icase(t.text, kw);
  }

  RawExpr parse_comparison() {
    Token field = next();
    Token op = next();
    auto cmp = comparator_token(op.text);
    if (!cmp) throw ParseFailure("unknown comparator '" + op.text + "'");
    const Token& v = peek();
    if (v.type != Tok::Word && v.type != Tok::Quoted) {
      throw ParseFailure("comparison on '" + field.text + "' is missing a value");
    }
    if (mode_ == Mode::Where && v.type == Tok::Word && peek(1).type == Tok::LParen) {
      throw ParseFailure("function-valued comparison on '" + field.text + "'");
    }
    Token value = next();
    return RawExpr::leaf(
        {field.text, *cmp, ValuePayload::literal(value.text, value.type == Tok::Quoted)});
  }

  ValuePayload parse_list() {
    if (next().type != Tok::LParen) throw ParseFailure("expected '(' after IN");
    std::vector<ValuePayload> members;
    while (peek().type != Tok::RParen) {
      Token v = next();
      if (v.type == Tok::Comma) continue;
      if (v.type != Tok::Word && v.type != Tok::Quoted) {
        throw ParseFailure("malformed IN list");
      }
      members.push_back(ValuePayload::literal(v.text, v.type == Tok::Quoted));
    }
    next();
    if (members.empty()) throw ParseFailure("empty IN list");
    return ValuePayload::list(std::move(members));
  }

  static ValuePayload like_pattern(std::string_view pattern) {
    std::string text(pattern);
    std::replace(text.begin(), text.end(), '%', '*');
    std::replace(text.begin(), text.end(), '_', '?');
    return ValuePayload::literal(std::move(text), true);
  }

  /// where-clause functions with a direct predicate reading.
  RawExpr parse_function() {
    Token name = next();
    next();  // (
    std::vector<Token> args;
    while (peek().type != Tok::RParen) {
      Token a = next();
      if (a.type == Tok::End) throw ParseFailure("unterminated function call");
      if (a.type == Tok::Comma) continue;
      if (a.type != Tok::Word && a.type != Tok::Quoted) {
        throw ParseFailure("unsupported argument in " + name.text + "()");
      }
      args.push_back(std::move(a));
    }
    next();
    std::string fn = to_lower(name.text);
    if (fn == "like" && args.size() == 2) {
      return RawExpr::leaf({args[0].text, Comparator::Eq, like_pattern(args[1].text)});
    }
    if (fn == "match" && args.size() == 2) {
      return RawExpr::leaf(
          {args[0].text, Comparator::Regex, ValuePayload::scalar(ValueKind::Regex, args[1].text)});
    }
    if (fn == "in" && args.size() >= 2) {
      std::vector<ValuePayload> members;
      for (std::size_t i = 1; i < args.size(); ++i) {
        members.push_back(ValuePayload::literal(args[i].text, args[i].type == Tok::Quoted));
      }
      return RawExpr::leaf({args[0].text, Comparator::In, ValuePayload::list(std::move(members))});
    }
    throw ParseFailure("unsupported function '" + name.text + "'");
  }

  std::vector<Token> tokens_;
  Mode mode_;
  std::size_t pos_ = 0;
};

std::string_view after_command(std::string_view text, std::string_view command) {
  return trim(text.substr(command.size()));
}

std::optional<RawExpr> parse_tstats_where(std::string_view body) {
  std::vector<Token> tokens = lex(body, Mode::Search);
  int depth = 0;
  std::size_t where = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].type == Tok::LParen) ++depth;
    if (tokens[i].type == Tok::RParen) --depth;
    if (depth == 0 && tokens[i].type == Tok::Word && equals_icase(tokens[i].text, "where")) {
      where = i;
      break;
    }
  }
  if (where == tokens.size()) return std::nullopt;
  std::vector<Token> clause;
  depth = 0;
  for (std::size_t i = where + 1; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.type == Tok::End) break;
    if (t.type == Tok::LParen) ++depth;
    if (t.type == Tok::RParen) --depth;
    if (depth == 0 && t.type == Tok::Word && equals_icase(t.text, "by")) break;
    clause.push_back(t);
  }
  clause.push_back({Tok::End, {}});
  return FilterParser(std::move(clause), Mode::Search).parse_all();
}

RawExpr parse_regex_stage(std::string_view body) {
  std::vector<Token> tokens = lex(body, Mode::Search);
  if (tokens.size() == 2 && tokens[0].type == Tok::Quoted) {
    return RawExpr::leaf({std::string(kRawField), Comparator::Regex,
                          ValuePayload::scalar(ValueKind::Regex, tokens[0].text)});
  }
  if (tokens.size() == 4 && (tokens[0].type == Tok::Word || tokens[0].type == Tok::Quoted) &&
      tokens[1].type == Tok::Op && (tokens[2].type == Tok::Quoted || tokens[2].type == Tok::Word)) {
    RawExpr leaf = RawExpr::leaf({tokens[0].text, Comparator::Regex,
                                  ValuePayload::scalar(ValueKind::Regex, tokens[2].text)});
    if (tokens[1].text == "=") return leaf;
    if (tokens[1].text == "!=") return RawExpr::negate(std::move(leaf));
    throw ParseFailure("unknown comparator '" + tokens[1].text + "' in regex stage");
  }
  throw ParseFailure("unsupported regex stage");
}

}  // namespace

std::vector<Stage> split_stages(std::string_view spl_text) {
  std::vector<Stage> stages;
  std::vector<std::string> pieces;
  std::string current;
  bool in_quote = false;
  bool in_macro = false;
  int paren = 0;
  int bracket = 0;
  for (std::size_t i = 0; i < spl_text.size(); ++i) {
    char c = spl_text[i];
    if (in_quote) {
      current.push_back(c);
      if (c == '\\' && i + 1 < spl_text.size()) {
        current.push_back(spl_text[++i]);
      } else if (c == '"') {
        in_quote = false;
      }
      continue;
    }
    if (in_macro) {
      current.push_back(c);
      if (c == '`') in_macro = false;
      continue;
    }
    switch (c) {
      case '"':
        in_quote = true;
        break;
      case '`':
        in_macro = true;
        break;
      case '(':
        ++paren;
        break;
      case ')':
        if (--paren < 0) throw ParseFailure("unbalanced ')'");
        break;
      case '[':
        ++bracket;
        break;
      case ']':
        if (--bracket < 0) throw ParseFailure("unbalanced ']'");
        break;
      case '|':
        if (paren == 0 && bracket == 0) {
          pieces.push_back(std::move(current));
          current.clear();
          continue;
        }
        break;
      default:
        break;
    }
    current.push_back(c);
  }
  if (in_quote) throw ParseFailure("unterminated quoted string");
  if (in_macro) throw ParseFailure("unterminated macro reference");
  if (paren != 0) throw ParseFailure("unbalanced parentheses");
  if (bracket != 0) throw ParseFailure("unbalanced brackets");
  pieces.push_back(std::move(current));

  stages.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Stage s;
    s.index = i;
    s.text = std::string(trim(pieces[i]));
    s.command = command_word(s.text);
    s.kind = classify(i, s.command, s.text.empty());
    stages.push_back(std::move(s));
  }
  return stages;
}

std::optional<RawExpr> parse_filter(const Stage& stage) {
  if (stage.kind != StageKind::Filtering) {
    throw ParseFailure("stage " + std::to_string(stage.index) + " is not a filtering stage");
  }
  const std::string& cmd = stage.command;
  if (cmd.empty() || !contains(kFilteringCommands, cmd)) {
    return FilterParser(lex(stage.text, Mode::Search), Mode::Search).parse_all();
  }
  std::string_view body = after_command(stage.text, cmd);
  if (cmd == "search") {
    return FilterParser(lex(body, Mode::Search), Mode::Search).parse_all();
  }
  if (cmd == "where") {
    return FilterParser(lex(body, Mode::Where), Mode::Where).parse_all();
  }
  if (cmd == "regex") {
    return parse_regex_stage(body);
  }
  // tstats / datamodel: only the where-clause restricts events.
  return parse_tstats_where(body);
}

Detection extract_detection(std::string_view spl_text) {
  Detection out;
  try {
    std::vector<Stage> stages = split_stages(spl_text);
    std::vector<RawExpr> parts;
    for (const Stage& s : stages) {
      if (s.text.find('[') != std::string::npos) {
        // brackets survived split_stages only outside quotes and macros if
        // lex() sees them; let lex() decide.
        lex(s.text, Mode::Search);
      }
      if (s.kind != StageKind::Filtering) continue;
      if (auto e = parse_filter(s)) parts.push_back(std::move(*e));
    }
    if (parts.empty()) {
      out.status = DetectionStatus::EmptyDetection;
      out.error = "no filtering stage";
      return out;
    }
    out.status = DetectionStatus::Ok;
    if (parts.size() == 1) {
      out.expr = std::move(parts.front());
    } else {
      out.expr = RawExpr::op(RawExpr::Kind::And, std::move(parts));
    }
  } catch (const ParseFailure& e) {
    out.status = DetectionStatus::ParseFailure;
    out.expr.reset();
    out.error = e.what();
  }
  return out;
}

}  // namespace pgir::spl
