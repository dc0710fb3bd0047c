#pragma once

#include <string>
#include <vector>

#include "increvise/types.hpp"

namespace increvise {

// Minimal s-expression reader shared by the scenario, lexicon and rule file
// parsers. Atoms keep their spelling; quoted strings keep their contents.
struct Sexpr {
  enum class Kind { List, Atom, String };
  Kind kind = Kind::List;
  std::string text;
  std::vector<Sexpr> items;
  int line = 0;

  bool is_list() const { return kind == Kind::List; }
  bool is_atom() const { return kind == Kind::Atom; }
  bool is_string() const { return kind == Kind::String; }
  size_t size() const { return items.size(); }
  const Sexpr& at(size_t i) const;

  // Atom text of child i, or a ParseError naming the context.
  const std::string& atom_at(size_t i, const char* context) const;
};

// Parses a whole file. Lines starting with ';' (after whitespace) are
// comments; ';' inside a quoted string is literal.
std::vector<Sexpr> parse_sexprs(const std::string& src);

}  // namespace increvise
