// Copyright 2026 The pgir Authors
// SPDX-License-Identifier: Apache-2.0

#include "pgir/text_format.hpp"

#include <cctype>
#include <utility>
#include <vector>

#include "pgir/util.hpp"

namespace pgir {

namespace {

void append_quoted(std::string& out, std::string_view text) {
  out.push_back('"');
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

bool needs_quotes(std::string_view field) {
  if (field.empty()) return true;
  for (char c : field) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '(' || c == ')' ||
        c == '"' || c == '=' || c == '\\' || c == '[' || c == ']') {
      return true;
    }
  }
  return false;
}

void append_scalar(std::string& out, const ValuePayload& v) {
  out.append(to_string(v.kind));
  out.push_back('(');
  if (v.kind == ValueKind::Number) {
    out.append(v.text);
  } else {
    append_quoted(out, v.text);
  }
  out.push_back(')');
}

void write_expr(const RawExpr& e, std::size_t indent, std::string& out) {
  std::string pad(indent, ' ');
  if (!e.is_leaf()) {
    std::string_view op = e.kind == RawExpr::Kind::And ? "AND"
                          : e.kind == RawExpr::Kind::Or ? "OR"
                                                        : "NOT";
    out += pad + "EXPR(op=" + std::string(op) + ")\n";
    for (const auto& c : e.children) write_expr(c, indent + 2, out);
    return;
  }
  std::string cont(indent + 5, ' ');
  const AtomicPredicate& p = e.predicate;
  out += pad + "PRED(field=";
  if (needs_quotes(p.field)) {
    append_quoted(out, p.field);
  } else {
    out += p.field;
  }
  out += ",\n" + cont + "operator=" + std::string(to_string(p.comparator)) + ",\n" + cont +
         "value=";
  if (p.value.is_list()) {
    std::string member_pad(indent + 5 + 7, ' ');
    out.push_back('[');
    for (std::size_t i = 0; i < p.value.members.size(); ++i) {
      if (i > 0) out += ",\n" + member_pad;
      append_scalar(out, p.value.members[i]);
    }
    out.push_back(']');
  } else {
    append_scalar(out, p.value);
  }
  if (e.polarity == Polarity::Negative) out += ",\n" + cont + "polarity=neg";
  out += ")\n";
}

// ---------------------------------------------------------------------------

class BodyReader {
 public:
  explicit BodyReader(std::string_view text, int first_line = 1)
      : text_(text), line_(first_line) {}

  RawExpr read() {
    std::vector<std::pair<int, RawExpr>> items;
    while (skip_blank()) {
      int col = column();
      if (col % 2 != 0) fail("indentation must be a multiple of two");
      items.emplace_back(col / 2, read_item());
      skip_inline_space();
      if (pos_ < text_.size() && text_[pos_] != '\n') fail("trailing characters after item");
    }
    if (items.empty()) fail("empty predicate graph");
    std::size_t next = 0;
    RawExpr root = build(items, next, 0);
    if (next != items.size()) fail("more than one root item");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("line " + std::to_string(line_) + ": " + msg);
  }

  RawExpr build(std::vector<std::pair<int, RawExpr>>& items, std::size_t& next, int depth) {
    if (items[next].first != depth) {
      throw InputError("malformed nesting at item " + std::to_string(next + 1));
    }
    RawExpr node = std::move(items[next].second);
    ++next;
    if (!node.is_leaf()) {
      while (next < items.size() && items[next].first == depth + 1) {
        node.children.push_back(build(items, next, depth + 1));
      }
      if (next < items.size() && items[next].first > depth + 1) {
        throw InputError("malformed nesting at item " + std::to_string(next + 1));
      }
      if (node.children.empty()) throw InputError("operator without operands");
      if (node.kind == RawExpr::Kind::Not && node.children.size() != 1) {
        throw InputError("NOT must have exactly one operand");
      }
    }
    return node;
  }

  /// Skips blank lines; returns false at end of input.
  bool skip_blank() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
        line_start_ = pos_;
      } else if (c == ' ' || c == '\r' || c == '\t') {
        ++pos_;
      } else {
        return true;
      }
    }
    return false;
  }

  void skip_inline_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\r')) ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
      }
      ++pos_;
    }
  }

  int column() const { return static_cast<int>(pos_ - line_start_); }

  bool consume(std::string_view lit) {
    if (text_.substr(pos_, lit.size()) == lit) {
      pos_ += lit.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view lit) {
    if (!consume(lit)) fail("expected '" + std::string(lit) + "'");
  }

  std::string read_quoted() {
    expect("\"");
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) break;
        out.push_back(text_[pos_++]);
        continue;
      }
      if (c == '"') return out;
      if (c == '\n') ++line_;
      out.push_back(c);
    }
    fail("unterminated string");
  }

  std::string read_bare(std::string_view stops) {
    std::size_t start = pos_;
    while (pos_ < text_.size() && stops.find(text_[pos_]) == std::string_view::npos &&
           text_[pos_] != '\n') {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  ValuePayload read_scalar() {
    std::string kind_name = read_bare("(");
    auto kind = value_kind_from_string(kind_name);
    if (!kind || *kind == ValueKind::List) fail("unknown value kind '" + kind_name + "'");
    expect("(");
    ValuePayload v;
    v.kind = *kind;
    if (*kind == ValueKind::Number) {
      v.text = read_bare(")");
      if (!parse_number(v.text)) fail("invalid number '" + v.text + "'");
    } else {
      v.text = read_quoted();
    }
    expect(")");
    return v;
  }

  RawExpr read_item() {
    if (consume("EXPR(op=")) {
      std::string op = read_bare(")");
      expect(")");
      RawExpr e;
      if (op == "AND") {
        e.kind = RawExpr::Kind::And;
      } else if (op == "OR") {
        e.kind = RawExpr::Kind::Or;
      } else if (op == "NOT") {
        e.kind = RawExpr::Kind::Not;
      } else {
        fail("unknown operator '" + op + "'");
      }
      return e;
    }
    if (!consume("PRED(field=")) fail("expected EXPR( or PRED(");
    AtomicPredicate p;
    if (pos_ < text_.size() && text_[pos_] == '"') {
      p.field = read_quoted();
    } else {
      p.field = read_bare(",");
    }
    if (p.field.empty()) fail("empty field name");
    expect(",");
    skip_ws();
    expect("operator=");
    std::string cmp_name = read_bare(",");
    auto cmp = comparator_from_string(cmp_name);
    if (!cmp) fail("unknown comparator '" + cmp_name + "'");
    p.comparator = *cmp;
    expect(",");
    skip_ws();
    expect("value=");
    if (consume("[")) {
      std::vector<ValuePayload> members;
      do {
        skip_ws();
        members.push_back(read_scalar());
        skip_ws();
      } while (consume(","));
      expect("]");
      if (members.empty()) fail("empty list");
      p.value = ValuePayload::list(std::move(members));
    } else {
      p.value = read_scalar();
    }
    Polarity pol = Polarity::Positive;
    if (consume(",")) {
      skip_ws();
      expect("polarity=");
      std::string v = read_bare(")");
      if (v == "neg") {
        pol = Polarity::Negative;
      } else if (v != "pos") {
        fail("unknown polarity '" + v + "'");
      }
    }
    expect(")");
    bool is_list_cmp = p.comparator == Comparator::In || p.comparator == Comparator::NotIn;
    if (is_list_cmp != p.value.is_list()) fail("list payload must go with IN/NOT_IN");
    return RawExpr::leaf(std::move(p), pol);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_;
};

std::string header_line(std::string_view key, std::string_view value) {
  std::string out(key);
  out.push_back(':');
  if (!value.empty()) {
    out.push_back(' ');
    out.append(value);
  }
  out.push_back('\n');
  return out;
}

}  // namespace

std::string serialize_expr(const RawExpr& expr) {
  std::string out;
  write_expr(expr, 0, out);
  return out;
}

RawExpr parse_expr(std::string_view body) { return BodyReader(body).read(); }

std::string serialize_body(const PredicateGraph& g) {
  if (g.empty()) return {};
  return serialize_expr(g.to_expr());
}

std::string serialize(const PredicateGraph& g) {
  std::string out;
  out += header_line("Rule", g.meta.rule);
  out += header_line("Repo", g.meta.repo);
  out += header_line("Version", g.meta.version);
  out += header_line("Commit", g.meta.commit);
  out += header_line("Predicate count", std::to_string(g.predicate_count()));
  out += "\nPredicate graph:\n";
  out += serialize_body(g);
  return out;
}

PredicateGraph parse_canonical(std::string_view text) {
  GraphMeta meta;
  std::optional<std::size_t> declared_count;
  std::size_t pos = 0;
  int line_no = 0;
  bool found_body = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (line == "Predicate graph:") {
      found_body = true;
      break;
    }
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw InputError("line " + std::to_string(line_no) + ": expected a header line");
    }
    std::string_view key = line.substr(0, colon);
    std::string value(trim(line.substr(colon + 1)));
    if (key == "Rule") {
      meta.rule = value;
    } else if (key == "Repo") {
      meta.repo = value;
    } else if (key == "Version") {
      meta.version = value;
    } else if (key == "Commit") {
      meta.commit = value;
    } else if (key == "Predicate count") {
      auto n = parse_number(value);
      if (!n || *n < 0) {
        throw InputError("line " + std::to_string(line_no) + ": bad predicate count");
      }
      declared_count = static_cast<std::size_t>(*n);
    } else {
      throw InputError("line " + std::to_string(line_no) + ": unknown header '" +
                       std::string(key) + "'");
    }
  }
  if (!found_body) throw InputError("missing 'Predicate graph:' section");
  std::string_view body = pos < text.size() ? text.substr(pos) : std::string_view{};
  RawExpr expr = BodyReader(body, line_no + 1).read();
  PredicateGraph g = PredicateGraph::from_expr_verbatim(expr);
  g.meta = meta;
  PredicateGraph canon = canonicalize(expr, meta);
  if (!g.same_logic(canon)) throw InputError("predicate graph is not in canonical form");
  if (declared_count && *declared_count != g.predicate_count()) {
    throw InputError("predicate count does not match the graph");
  }
  return g;
}

}  // namespace pgir
