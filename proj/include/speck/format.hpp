#pragma once

// Deterministic pretty-printer for raw specification files. Output uses the
// canonical ASCII spellings; parse(format(x)) is structurally equal to x.

#include <sstream>
#include <string>

#include "speck/syntax.hpp"

namespace speck {

namespace detail {

inline void format_expr(const RawExpr& e, std::string& out);

inline void format_atom(const RawAtom& a, std::string& out) {
  switch (a.kind) {
    case RawAtom::Kind::Name:
    case RawAtom::Kind::Number:
    case RawAtom::Kind::Op:
      out += a.text;
      break;
    case RawAtom::Kind::Def:
      out += "def";
      break;
    case RawAtom::Kind::Undef:
      out += "undef";
      break;
    case RawAtom::Kind::Paren:
    case RawAtom::Kind::Bracket: {
      out += a.kind == RawAtom::Kind::Paren ? "(" : "[";
      for (size_t i = 0; i < a.groups.size(); ++i) {
        if (i) out += ", ";
        format_expr(a.groups[i], out);
      }
      out += a.kind == RawAtom::Kind::Paren ? ")" : "]";
      break;
    }
    case RawAtom::Kind::Angle: {
      if (a.groups.empty()) {
        out += "<>";
      } else {
        out += "<";
        format_expr(a.groups[0], out);
        out += ">";
      }
      break;
    }
    case RawAtom::Kind::Forall: {
      out += "forall ";
      for (size_t g = 0; g < a.binders.size(); ++g) {
        if (g) out += "; ";
        for (size_t i = 0; i < a.binders[g].first.size(); ++i) {
          if (i) out += ",";
          out += a.binders[g].first[i];
        }
        out += ": " + a.binders[g].second;
      }
      out += " in ";
      format_expr(a.groups[0], out);
      break;
    }
  }
}

inline void format_expr(const RawExpr& e, std::string& out) {
  for (size_t i = 0; i < e.atoms.size(); ++i) {
    const RawAtom& a = e.atoms[i];
    bool tight = i > 0 && (a.kind == RawAtom::Kind::Paren || a.kind == RawAtom::Kind::Bracket);
    if (i && !tight) out += " ";
    format_atom(a, out);
  }
}

inline void format_spec_expr(const RawSpecExpr& e, std::string& out) {
  switch (e.kind) {
    case RawSpecExpr::Kind::Ref:
      out += e.name;
      break;
    case RawSpecExpr::Kind::Sum:
      for (size_t i = 0; i < e.parts.size(); ++i) {
        if (i) out += " + ";
        bool paren = e.parts[i].kind == RawSpecExpr::Kind::Rename;
        if (paren) out += "(";
        format_spec_expr(e.parts[i], out);
        if (paren) out += ")";
      }
      break;
    case RawSpecExpr::Kind::Rename:
      out += "rename [ ";
      for (size_t i = 0; i < e.renames.size(); ++i) {
        if (i) out += ", ";
        out += e.renames[i].first + " to " + e.renames[i].second;
      }
      out += " ] in ";
      if (e.parts[0].kind == RawSpecExpr::Kind::Sum) {
        out += "(";
        format_spec_expr(e.parts[0], out);
        out += ")";
      } else {
        format_spec_expr(e.parts[0], out);
      }
      break;
  }
}

struct ItemFormatter {
  std::string& out;

  void operator()(const RawSortDecl& d) const {
    out += "  sort ";
    for (size_t i = 0; i < d.names.size(); ++i) out += (i ? ", " : "") + d.names[i];
    out += ";\n";
  }

  void operator()(const RawFunSig& s) const {
    out += "  ";
    if (s.hidden) out += "hidden ";
    if (s.spec_only) out += "op ";
    for (size_t i = 0; i < s.names.size(); ++i) out += (i ? ", " : "") + s.names[i];
    out += " :";
    for (size_t i = 0; i < s.arg_sorts.size(); ++i) {
      out += (i ? " # " : " ") + s.arg_sorts[i];
      if (static_cast<int>(i) == s.receiver) out += "!";
    }
    if (!s.result_sort.empty()) {
      if (s.arg_sorts.empty()) {
        out += " " + s.result_sort;
      } else if (s.spec_only) {
        out += " to " + s.result_sort;
      } else {
        out += s.strict_total_arrow ? " ->> " : " -> ";
        out += s.result_sort;
      }
    }
    if (s.strict_kw) out += " strict";
    if (s.partial_kw) out += " partial";
    if (s.priority >= 0) {
      out += " prio " + std::to_string(s.priority);
      if (s.assoc == Assoc::Left) out += ": left";
      if (s.assoc == Assoc::Right) out += ": right";
    }
    out += ";\n";
  }

  void operator()(const RawDataDecl& d) const {
    out += "  data " + d.sort + " = ";
    for (size_t i = 0; i < d.alts.size(); ++i) {
      if (i) out += " | ";
      out += d.alts[i].ctor;
      if (!d.alts[i].selectors.empty()) {
        out += "( ";
        for (size_t j = 0; j < d.alts[i].selectors.size(); ++j) {
          if (j) out += ", ";
          out += d.alts[i].selectors[j].first + ": " + d.alts[i].selectors[j].second;
        }
        out += " )";
      }
    }
    out += ";\n";
  }

  void operator()(const RawGenerated& g) const {
    out += "  " + g.sort + " generated by ";
    for (size_t i = 0; i < g.ctors.size(); ++i) out += (i ? ", " : "") + g.ctors[i];
    out += ";\n";
  }

  void operator()(const RawAxiomBlock& b) const {
    out += "  axioms forall ";
    for (size_t g = 0; g < b.binders.size(); ++g) {
      if (g) out += "; ";
      for (size_t i = 0; i < b.binders[g].first.size(); ++i) {
        if (i) out += ",";
        out += b.binders[g].first[i];
      }
      out += ": " + b.binders[g].second;
    }
    out += " in\n";
    for (const auto& f : b.formulas) {
      out += "    ";
      format_expr(f, out);
      out += ";\n";
    }
    out += "  endaxioms\n";
  }

  void operator()(const RawEnrich& e) const {
    out += "  enrich ";
    format_spec_expr(e.expr, out);
    out += ";\n";
  }
};

}  // namespace detail

inline std::string format_spec(const RawSpecFile& file) {
  std::string out;
  for (const auto& def : file.defs) {
    if (!out.empty()) out += "\n";
    if (def.is_class) out += "class ";
    out += def.name;
    if (!def.inherit.empty()) out += " inherit " + def.inherit;
    out += " = {\n";
    for (const auto& item : def.items) std::visit(detail::ItemFormatter{out}, item);
    out += "}\n";
  }
  return out;
}

}  // namespace speck
