#include "increvise/sexpr.hpp"

#include <cctype>

namespace increvise {

const Sexpr& Sexpr::at(size_t i) const {
  if (i >= items.size()) {
    throw ParseError("expected at least " + std::to_string(i + 1) + " elements", line);
  }
  return items[i];
}

const std::string& Sexpr::atom_at(size_t i, const char* context) const {
  const Sexpr& child = at(i);
  if (!child.is_atom()) {
    throw ParseError(std::string("expected an atom for ") + context, child.line);
  }
  return child.text;
}

namespace {

struct Cursor {
  const std::string& src;
  size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= src.size(); }
  char peek() const { return src[pos]; }
  char take() {
    char c = src[pos++];
    if (c == '\n') ++line;
    return c;
  }

  void skip_ws_and_comments() {
    while (!done()) {
      char c = peek();
      if (c == ';') {
        while (!done() && peek() != '\n') take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        return;
      }
    }
  }
};

bool atom_char(char c) {
  if (std::isspace(static_cast<unsigned char>(c))) return false;
  return c != '(' && c != ')' && c != '"' && c != ';';
}

Sexpr read_expr(Cursor& cur);

Sexpr read_list(Cursor& cur) {
  Sexpr node;
  node.kind = Sexpr::Kind::List;
  node.line = cur.line;
  cur.take();  // '('
  while (true) {
    cur.skip_ws_and_comments();
    if (cur.done()) throw ParseError("unterminated list", node.line);
    if (cur.peek() == ')') {
      cur.take();
      return node;
    }
    node.items.push_back(read_expr(cur));
  }
}

Sexpr read_expr(Cursor& cur) {
  cur.skip_ws_and_comments();
  if (cur.done()) throw ParseError("unexpected end of input", cur.line);
  char c = cur.peek();
  if (c == '(') return read_list(cur);
  if (c == ')') throw ParseError("unexpected ')'", cur.line);
  Sexpr node;
  node.line = cur.line;
  if (c == '"') {
    node.kind = Sexpr::Kind::String;
    cur.take();
    while (true) {
      if (cur.done()) throw ParseError("unterminated string", node.line);
      char s = cur.take();
      if (s == '"') break;
      if (s == '\\' && !cur.done()) s = cur.take();
      node.text.push_back(s);
    }
    return node;
  }
  node.kind = Sexpr::Kind::Atom;
  while (!cur.done() && atom_char(cur.peek())) node.text.push_back(cur.take());
  if (node.text.empty()) throw ParseError("empty atom", node.line);
  return node;
}

}  // namespace

std::vector<Sexpr> parse_sexprs(const std::string& src) {
  Cursor cur{src};
  std::vector<Sexpr> out;
  while (true) {
    cur.skip_ws_and_comments();
    if (cur.done()) return out;
    out.push_back(read_expr(cur));
  }
}

}  // namespace increvise
