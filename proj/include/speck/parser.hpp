#pragma once

// Recursive-descent parser from tokens to raw specification files. The first
// parse error aborts the file.

#include <string>
#include <vector>

#include "speck/lexer.hpp"
#include "speck/syntax.hpp"

namespace speck {

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  RawSpecFile file() {
    RawSpecFile out;
    while (!at_end()) out.defs.push_back(definition());
    return out;
  }

  // A standalone expression covering the whole token stream.
  RawExpr standalone_expression() {
    RawExpr e = expression();
    if (!at_end()) err("end of input");
    return e;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_end() const { return cur().kind == TokKind::End; }
  const Token& advance() { return toks_[pos_++]; }

  [[noreturn]] void err(const std::string& expected) const {
    std::string got = at_end() ? "end of input" : "'" + cur().text + "'";
    fail("parse-error", "expected " + expected + ", got " + got, cur().span);
  }

  void expect_sym(const char* s) {
    if (!cur().is_sym(s)) err(std::string("'") + s + "'");
    advance();
  }
  void expect_kw(const char* k) {
    if (!cur().is_kw(k)) err(std::string("'") + k + "'");
    advance();
  }
  std::string expect_ident() {
    if (cur().kind != TokKind::Ident) err("identifier");
    return advance().text;
  }

  RawSpecDef definition() {
    RawSpecDef def;
    def.span = cur().span;
    if (cur().is_kw("class")) {
      def.is_class = true;
      advance();
    }
    def.name = expect_ident();
    if (cur().is_kw("inherit")) {
      advance();
      def.inherit = expect_ident();
    }
    expect_sym("=");
    expect_sym("{");
    while (!cur().is_sym("}")) {
      if (at_end()) err("'}'");
      def.items.push_back(item());
    }
    advance();
    return def;
  }

  RawItem item() {
    if (cur().is_kw("sort")) return sort_decl();
    if (cur().is_kw("data")) return data_decl();
    if (cur().is_kw("axioms")) return axiom_block();
    if (cur().is_kw("enrich")) return enrich_item();
    if (cur().kind == TokKind::Ident && peek().is_kw("generated")) return generated_clause();
    return fun_sig();
  }

  RawSortDecl sort_decl() {
    RawSortDecl d;
    d.span = cur().span;
    expect_kw("sort");
    d.names.push_back(expect_ident());
    while (cur().is_sym(",")) {
      advance();
      d.names.push_back(expect_ident());
    }
    expect_sym(";");
    return d;
  }

  RawGenerated generated_clause() {
    RawGenerated g;
    g.span = cur().span;
    g.sort = expect_ident();
    expect_kw("generated");
    expect_kw("by");
    g.ctors.push_back(operator_name());
    while (cur().is_sym(",")) {
      advance();
      g.ctors.push_back(operator_name());
    }
    expect_sym(";");
    return g;
  }

  RawDataDecl data_decl() {
    RawDataDecl d;
    d.span = cur().span;
    expect_kw("data");
    d.sort = expect_ident();
    expect_sym("=");
    d.alts.push_back(data_alt());
    while (cur().is_sym("|")) {
      advance();
      d.alts.push_back(data_alt());
    }
    expect_sym(";");
    return d;
  }

  RawDataAlt data_alt() {
    RawDataAlt alt;
    alt.ctor = operator_name();
    if (cur().is_sym("(")) {
      advance();
      for (;;) {
        std::string sel = expect_ident();
        expect_sym(":");
        alt.selectors.push_back({sel, expect_ident()});
        if (cur().is_sym(",")) {
          advance();
          continue;
        }
        break;
      }
      expect_sym(")");
    }
    return alt;
  }

  // One declared name: an identifier, a number-named constant, or an
  // operator form assembled from a run of symbol tokens (".+.", ".[.,.]",
  // "<.>"). The run ends at a top-level ',' or ':'.
  std::string operator_name() {
    if (cur().kind == TokKind::Ident &&
        !(peek().is_sym(".") || peek().is_sym("["))) {
      return advance().text;
    }
    if (cur().kind == TokKind::Number) return advance().text;
    std::string name;
    int depth = 0;
    while (!at_end()) {
      if (depth == 0 && (cur().is_sym(",") || cur().is_sym(":") || cur().is_sym(";") ||
                         cur().is_sym("|") || cur().is_sym("(") || cur().is_sym(")")))
        break;
      if (cur().is_sym("[") || cur().is_sym("<")) ++depth;
      if (cur().is_sym("]") || cur().is_sym(">")) --depth;
      if (cur().kind == TokKind::Sym && cur().text == "<>") {
        name += "<>";
        advance();
        continue;
      }
      if (cur().kind != TokKind::Sym && cur().kind != TokKind::Ident &&
          cur().kind != TokKind::Number)
        err("operator name");
      name += advance().text;
    }
    if (name.empty()) err("declared name");
    return name;
  }

  RawFunSig fun_sig() {
    RawFunSig sig;
    sig.span = cur().span;
    if (cur().is_kw("hidden")) {
      sig.hidden = true;
      advance();
    }
    if (cur().is_kw("op")) {
      sig.spec_only = true;
      advance();
    }
    sig.names.push_back(operator_name());
    while (cur().is_sym(",")) {
      advance();
      sig.names.push_back(operator_name());
    }
    expect_sym(":");

    std::vector<std::string> sorts;
    bool to_result = false, arrow_total = false, have_arrow = false;
    for (;;) {
      sorts.push_back(expect_ident());
      if (cur().is_sym("!")) {
        advance();
        if (sig.receiver >= 0) fail("multiple-receivers", "more than one receiver marker", cur().span);
        sig.receiver = static_cast<int>(sorts.size()) - 1;
      }
      if (cur().is_sym("#")) {
        advance();
        continue;
      }
      break;
    }
    if (cur().is_sym("->") || cur().is_sym("->>") || cur().is_kw("to")) {
      have_arrow = true;
      arrow_total = cur().is_sym("->>");
      to_result = cur().is_kw("to");
      advance();
      sig.result_sort = expect_ident();
      if (cur().is_sym("!")) {
        advance();
        fail("multiple-receivers", "receiver marker on a result sort", cur().span);
      }
    }
    sig.strict_total_arrow = arrow_total;
    if (to_result && !sig.spec_only) sig.spec_only = true;

    if (have_arrow) {
      sig.arg_sorts = std::move(sorts);
    } else if (sig.receiver >= 0) {
      sig.arg_sorts = std::move(sorts);
    } else if (sorts.size() == 1) {
      sig.result_sort = sorts[0];  // constant declaration
    } else {
      err("'->' or a receiver marker");
    }

    while (!cur().is_sym(";")) {
      if (cur().is_kw("strict")) {
        sig.strict_kw = true;
        advance();
      } else if (cur().is_kw("partial")) {
        sig.partial_kw = true;
        advance();
      } else if (cur().is_kw("prio")) {
        advance();
        if (cur().kind != TokKind::Number) err("priority number");
        sig.priority = std::stoi(advance().text);
        if (cur().is_sym(":")) {
          advance();
          if (cur().is_kw("left")) {
            sig.assoc = Assoc::Left;
            advance();
          } else if (cur().is_kw("right")) {
            sig.assoc = Assoc::Right;
            advance();
          } else {
            err("'left' or 'right'");
          }
        }
      } else {
        err("';'");
      }
    }
    advance();
    return sig;
  }

  RawEnrich enrich_item() {
    RawEnrich e;
    e.span = cur().span;
    expect_kw("enrich");
    e.expr = spec_expr();
    expect_sym(";");
    return e;
  }

  RawSpecExpr spec_expr() {
    RawSpecExpr first = spec_atom();
    if (!cur().is_sym("+")) return first;
    RawSpecExpr sum;
    sum.kind = RawSpecExpr::Kind::Sum;
    sum.span = first.span;
    sum.parts.push_back(std::move(first));
    while (cur().is_sym("+")) {
      advance();
      sum.parts.push_back(spec_atom());
    }
    return sum;
  }

  RawSpecExpr spec_atom() {
    RawSpecExpr e;
    e.span = cur().span;
    if (cur().is_sym("(")) {
      advance();
      e = spec_expr();
      expect_sym(")");
      return e;
    }
    if (cur().is_kw("rename")) {
      advance();
      e.kind = RawSpecExpr::Kind::Rename;
      expect_sym("[");
      for (;;) {
        std::string from = rename_name();
        expect_kw("to");
        std::string to = rename_name();
        for (const auto& [f, t] : e.renames) {
          if (t == to)
            fail("parse-error", "rename maps two names to '" + to + "'", cur().span);
          if (f == from)
            fail("parse-error", "rename maps '" + from + "' twice", cur().span);
        }
        e.renames.push_back({from, to});
        if (cur().is_sym(",")) {
          advance();
          continue;
        }
        break;
      }
      expect_sym("]");
      expect_kw("in");
      e.parts.push_back(spec_atom());
      return e;
    }
    e.kind = RawSpecExpr::Kind::Ref;
    e.name = expect_ident();
    return e;
  }

  std::string rename_name() {
    if (cur().kind == TokKind::Ident && !peek().is_sym(".")) return advance().text;
    // Operator names may be renamed as well.
    std::string name;
    while (!at_end() && !cur().is_kw("to") && !cur().is_sym(",") && !cur().is_sym("]")) {
      name += advance().text;
    }
    if (name.empty()) err("name");
    return name;
  }

  RawAxiomBlock axiom_block() {
    RawAxiomBlock block;
    block.span = cur().span;
    expect_kw("axioms");
    expect_kw("forall");
    block.binders = binder_groups();
    expect_kw("in");
    while (!cur().is_kw("endaxioms")) {
      if (at_end()) err("'endaxioms'");
      block.formulas.push_back(expression());
      expect_sym(";");
    }
    advance();
    if (cur().is_sym(";")) advance();
    return block;
  }

  std::vector<std::pair<std::vector<std::string>, std::string>> binder_groups() {
    std::vector<std::pair<std::vector<std::string>, std::string>> out;
    for (;;) {
      std::vector<std::string> names;
      names.push_back(expect_ident());
      while (cur().is_sym(",")) {
        advance();
        names.push_back(expect_ident());
      }
      expect_sym(":");
      out.push_back({std::move(names), expect_ident()});
      if (cur().is_sym(";")) {
        advance();
        continue;
      }
      break;
    }
    return out;
  }

  // Expressions stop at ';' or at the closing delimiter of the group.
  RawExpr expression() {
    RawExpr e;
    e.span = cur().span;
    for (;;) {
      if (at_end() || cur().is_sym(";") || cur().is_sym(")") || cur().is_sym("]") ||
          cur().is_sym(">") || cur().is_sym(",") || cur().is_sym("}") || cur().is_kw("endaxioms"))
        break;
      e.atoms.push_back(expr_atom());
    }
    if (e.atoms.empty()) err("expression");
    return e;
  }

  RawAtom expr_atom() {
    RawAtom a;
    a.span = cur().span;
    const Token& t = cur();
    if (t.kind == TokKind::Ident) {
      a.kind = RawAtom::Kind::Name;
      a.text = advance().text;
      return a;
    }
    if (t.kind == TokKind::Number) {
      a.kind = RawAtom::Kind::Number;
      a.text = advance().text;
      return a;
    }
    if (t.is_kw("def")) {
      advance();
      a.kind = RawAtom::Kind::Def;
      return a;
    }
    if (t.is_kw("undef")) {
      advance();
      a.kind = RawAtom::Kind::Undef;
      return a;
    }
    if (t.is_kw("forall")) {
      advance();
      a.kind = RawAtom::Kind::Forall;
      a.binders = binder_groups();
      expect_kw("in");
      a.groups.push_back(expression());
      return a;
    }
    if (t.is_sym("(")) {
      advance();
      a.kind = RawAtom::Kind::Paren;
      a.groups.push_back(expression());
      while (cur().is_sym(",")) {
        advance();
        a.groups.push_back(expression());
      }
      expect_sym(")");
      return a;
    }
    if (t.is_sym("[")) {
      advance();
      a.kind = RawAtom::Kind::Bracket;
      a.groups.push_back(expression());
      while (cur().is_sym(",")) {
        advance();
        a.groups.push_back(expression());
      }
      expect_sym("]");
      return a;
    }
    if (t.is_sym("<>")) {
      advance();
      a.kind = RawAtom::Kind::Angle;
      return a;
    }
    if (t.is_sym("<")) {
      advance();
      a.kind = RawAtom::Kind::Angle;
      a.groups.push_back(expression());
      expect_sym(">");
      return a;
    }
    if (t.kind == TokKind::Sym) {
      static const char* ops[] = {"+", "^", "<=", "=", "~=", "=>", "<=>", "/\\", "\\/", "~"};
      for (const char* op : ops) {
        if (t.text == op) {
          a.kind = RawAtom::Kind::Op;
          a.text = advance().text;
          return a;
        }
      }
    }
    err("expression");
  }
};

inline RawSpecFile parse_spec_file(std::vector<Token> tokens) {
  return Parser(std::move(tokens)).file();
}

inline RawSpecFile parse_source(const std::string& source) {
  return parse_spec_file(tokenize(source));
}

inline RawExpr parse_expression_source(const std::string& source) {
  return Parser(tokenize(source)).standalone_expression();
}

}  // namespace speck
