#pragma once

// Raw (pre-elaboration) syntax trees. Expressions are kept as flat
// juxtaposition lists: infix and mixfix structure needs declared priorities,
// which may come from enriched modules, so it is resolved by the elaborator.

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "speck/diag.hpp"
#include "speck/kernel.hpp"

namespace speck {

struct RawExpr;

struct RawAtom {
  enum class Kind {
    Name,     // identifier or number-named constant in expression position
    Number,
    Op,       // connective or operator token: + ^ <= = ~= => <=> /\ \/ ~
    Paren,    // ( e1, ..., ek )
    Angle,    // < e > or <>
    Bracket,  // [ e1 ] or [ e1, e2 ], a postfix selection on the previous atom
    Def,      // definedness predicate, applies to the following atom
    Undef,    // the undefined element
    Forall,   // nested quantifier; body extends to the end of the group
  };
  Kind kind = Kind::Name;
  std::string text;
  std::vector<RawExpr> groups;
  // Forall payload:
  std::vector<std::pair<std::vector<std::string>, std::string>> binders;
  Span span;
};

struct RawExpr {
  std::vector<RawAtom> atoms;
  Span span;
};

struct RawSortDecl {
  std::vector<std::string> names;
  Span span;
};

struct RawFunSig {
  std::vector<std::string> names;  // canonical dot-placeholder forms
  std::vector<std::string> arg_sorts;
  int receiver = -1;        // index of the `!`-marked argument, -1 if none
  std::string result_sort;  // empty when only a receiver determines it
  bool strict_total_arrow = false;
  bool strict_kw = false;
  bool partial_kw = false;
  bool hidden = false;
  bool spec_only = false;
  int priority = -1;
  Assoc assoc = Assoc::None;
  Span span;
};

struct RawDataAlt {
  std::string ctor;
  std::vector<std::pair<std::string, std::string>> selectors;  // (name, sort)
};

struct RawDataDecl {
  std::string sort;
  std::vector<RawDataAlt> alts;
  Span span;
};

struct RawGenerated {
  std::string sort;
  std::vector<std::string> ctors;
  Span span;
};

struct RawAxiomBlock {
  std::vector<std::pair<std::vector<std::string>, std::string>> binders;
  std::vector<RawExpr> formulas;
  Span span;
};

struct RawSpecExpr {
  enum class Kind { Ref, Sum, Rename };
  Kind kind = Kind::Ref;
  std::string name;                 // Ref
  std::vector<RawSpecExpr> parts;   // Sum operands; Rename body at [0]
  std::vector<std::pair<std::string, std::string>> renames;
  Span span;
};

struct RawEnrich {
  RawSpecExpr expr;
  Span span;
};

using RawItem = std::variant<RawSortDecl, RawFunSig, RawDataDecl, RawGenerated, RawAxiomBlock, RawEnrich>;

struct RawSpecDef {
  std::string name;
  bool is_class = false;
  std::string inherit;  // empty if none
  std::vector<RawItem> items;
  Span span;
};

struct RawSpecFile {
  std::vector<RawSpecDef> defs;
};

}  // namespace speck
