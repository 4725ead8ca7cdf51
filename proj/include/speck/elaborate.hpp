#pragma once

// Elaboration: evaluates specification-in-the-large expressions (enrich, +,
// rename, class, inherit, hidden), desugars data declarations and receiver
// markers, resolves infix/mixfix expressions against declared priorities,
// resolves overloading by argument sorts with subsort coercion, and
// type-checks the axioms, producing a FlatSpec.

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "speck/format.hpp"
#include "speck/kernel.hpp"
#include "speck/parser.hpp"
#include "speck/syntax.hpp"

namespace speck {

struct FlatAxiom {
  std::string id;             // assigned at the end of resolution
  std::string origin_module;  // module whose source stated the axiom
  int origin_index = 0;       // 1-based position within that module
  Formula formula;
  Span span;
};

struct FlatSpec {
  std::string name;
  Signature sig;
  std::vector<FlatAxiom> axioms;
  std::vector<int> exported;  // indices of client-visible declarations

  std::string dump() const;
};

// Sorts that correspond to classes the source text leaves opaque; they are
// auto-declared when referenced.
inline const std::set<std::string>& builtin_opaque_sorts() {
  static const std::set<std::string> sorts = {"Id",   "Token", "Command", "Point",  "VObject",
                                              "Class", "Object", "Menu",  "MenuCmd", "Clipper",
                                              "Int",  "Void",  "bool"};
  return sorts;
}

inline const std::vector<std::string>& class_constant_names() {
  static const std::vector<std::string> names = {"Object", "EvtHandler", "VObject",    "Manager",
                                                 "Window", "Button",     "Application", "Document"};
  return names;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string render_term(const Signature& sig, const Term& t);

inline std::string render_args(const Signature& sig, const std::vector<Term>& args) {
  std::string out = "(";
  for (size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + render_term(sig, args[i]);
  return out + ")";
}

inline std::string render_term(const Signature& sig, const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var:
      return t.var;
    case Term::Kind::Bottom:
      return "undef:" + t.sort;
    case Term::Kind::App: {
      const FunDecl& d = sig.funs[t.decl];
      if (d.fixity == Fixity::Infix) {
        return "(" + render_term(sig, t.args[0]) + " " + infix_surface(d.name) + " " +
               render_term(sig, t.args[1]) + ")";
      }
      if (d.name == "<.>") return "<" + render_term(sig, t.args[0]) + ">";
      if (d.name == ".[.]")
        return render_term(sig, t.args[0]) + "[" + render_term(sig, t.args[1]) + "]";
      if (d.name == ".[.,.]")
        return render_term(sig, t.args[0]) + "[" + render_term(sig, t.args[1]) + ", " +
               render_term(sig, t.args[2]) + "]";
      if (t.args.empty()) return d.name;
      return d.name + render_args(sig, t.args);
    }
  }
  return "?";
}

inline std::string render_formula(const Signature& sig, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Eq:
      return render_term(sig, f.lhs) + " = " + render_term(sig, f.rhs);
    case Formula::Kind::Defined:
      return "def(" + render_term(sig, f.lhs) + ")";
    case Formula::Kind::Not:
      return "~(" + render_formula(sig, f.sub[0]) + ")";
    case Formula::Kind::And:
      return "(" + render_formula(sig, f.sub[0]) + " /\\ " + render_formula(sig, f.sub[1]) + ")";
    case Formula::Kind::Or:
      return "(" + render_formula(sig, f.sub[0]) + " \\/ " + render_formula(sig, f.sub[1]) + ")";
    case Formula::Kind::Implies:
      return "(" + render_formula(sig, f.sub[0]) + " => " + render_formula(sig, f.sub[1]) + ")";
    case Formula::Kind::Iff:
      return "(" + render_formula(sig, f.sub[0]) + " <=> " + render_formula(sig, f.sub[1]) + ")";
    case Formula::Kind::Forall:
      return "forall " + f.var + ": " + f.var_sort + " in (" + render_formula(sig, f.sub[0]) + ")";
  }
  return "?";
}

inline void remap_term(Term& t, const std::vector<int>& remap) {
  if (t.kind == Term::Kind::App) t.decl = remap[t.decl];
  for (auto& a : t.args) remap_term(a, remap);
}

inline void remap_formula(Formula& f, const std::vector<int>& remap) {
  if (f.kind == Formula::Kind::Eq || f.kind == Formula::Kind::Defined) {
    remap_term(f.lhs, remap);
    if (f.kind == Formula::Kind::Eq) remap_term(f.rhs, remap);
  }
  for (auto& s : f.sub) remap_formula(s, remap);
}

inline void rename_term_sorts(Term& t, const std::map<std::string, std::string>& m) {
  if (t.kind != Term::Kind::App) {
    auto it = m.find(t.sort);
    if (it != m.end()) t.sort = it->second;
  }
  for (auto& a : t.args) rename_term_sorts(a, m);
}

inline void rename_formula_sorts(Formula& f, const std::map<std::string, std::string>& m) {
  if (f.kind == Formula::Kind::Eq || f.kind == Formula::Kind::Defined) {
    rename_term_sorts(f.lhs, m);
    if (f.kind == Formula::Kind::Eq) rename_term_sorts(f.rhs, m);
  }
  if (f.kind == Formula::Kind::Forall) {
    auto it = m.find(f.var_sort);
    if (it != m.end()) f.var_sort = it->second;
  }
  for (auto& s : f.sub) rename_formula_sorts(s, m);
}

}  // namespace detail

// ---------------------------------------------------------------------------

class Elaborator {
 public:
  void add_file(const RawSpecFile& file) {
    for (const auto& def : file.defs) {
      if (registry_.count(def.name))
        fail("duplicate-definition", "specification '" + def.name + "' defined twice", def.span);
      registry_[def.name] = &def;
    }
  }

  bool has_module(const std::string& name) const { return registry_.count(name) > 0; }

  std::vector<std::string> module_names() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : registry_) out.push_back(k);
    return out;
  }

  FlatSpec resolve(const std::string& root) {
    FlatSpec out = visit(root);
    out.name = root;
    finalize(out);
    return out;
  }

 private:
  std::map<std::string, const RawSpecDef*> registry_;
  std::map<std::string, FlatSpec> memo_;
  std::set<std::string> visiting_;

  // ---- module flattening ----

  const FlatSpec& visit(const std::string& name) {
    auto it = memo_.find(name);
    if (it != memo_.end()) return it->second;
    if (visiting_.count(name)) fail("cyclic-import", "import cycle through '" + name + "'");
    visiting_.insert(name);
    FlatSpec flat;
    auto reg = registry_.find(name);
    if (reg != registry_.end()) {
      flat = build(*reg->second);
    } else if (builtin_opaque_sorts().count(name)) {
      flat = builtin_module(name);
    } else {
      fail("unknown-module", "no specification named '" + name + "'");
    }
    visiting_.erase(name);
    return memo_[name] = std::move(flat);
  }

  static void ensure_bool(FlatSpec& flat) {
    if (flat.sig.has_sort("bool")) return;
    flat.sig.sorts.insert("bool");
    FunDecl td;
    td.name = "true";
    td.result_sort = "bool";
    td.totality = Totality::Total;
    td.is_constructor = true;
    td.origin = "bool";
    FunDecl fd = td;
    fd.name = "false";
    flat.sig.funs.push_back(td);
    flat.sig.funs.push_back(fd);
    flat.sig.generated_by["bool"] = {"true", "false"};
  }

  FlatSpec builtin_module(const std::string& name) {
    FlatSpec flat;
    flat.name = name;
    ensure_bool(flat);
    flat.sig.sorts.insert(name);
    if (name == "Object") {
      flat.sig.sorts.insert("Class");
      FunDecl isa;
      isa.name = ".isA.";
      isa.arg_sorts = {"Object", "Class"};
      isa.result_sort = "bool";
      isa.fixity = Fixity::Infix;
      isa.priority = 5;
      isa.origin = "Object";
      add_decl(flat, isa);
    }
    if (name == "Class") {
      for (const auto& cls : class_constant_names()) {
        FunDecl c;
        c.name = cls;
        c.result_sort = "Class";
        c.origin = "Class";
        add_decl(flat, c);
      }
    }
    if (name == "VObject") {
      // containsPoint properly belongs to this class; consumers redeclare it
      // at their own receiver sort when they need it.
      flat.sig.sorts.insert("Point");
    }
    return flat;
  }

  // Adds a declaration, identifying it with a structurally identical one.
  static int add_decl(FlatSpec& flat, const FunDecl& d) {
    for (size_t i = 0; i < flat.sig.funs.size(); ++i) {
      FunDecl& ex = flat.sig.funs[i];
      if (ex.name == d.name && ex.arg_sorts == d.arg_sorts && ex.result_sort == d.result_sort) {
        if (!ex.same_shape(d))
          fail("conflicting-decl", "conflicting declarations of '" + d.name + "'");
        ex.imported_hidden = ex.imported_hidden && d.imported_hidden;
        ex.is_constructor = ex.is_constructor || d.is_constructor;
        return static_cast<int>(i);
      }
    }
    flat.sig.funs.push_back(d);
    return static_cast<int>(flat.sig.funs.size()) - 1;
  }

  // Union-import `other` into `flat`: shared names are identified, hidden
  // symbols of the import become invisible to the importer's own axioms.
  static void import_into(FlatSpec& flat, const FlatSpec& other) {
    flat.sig.sorts.insert(other.sig.sorts.begin(), other.sig.sorts.end());
    flat.sig.subsorts.insert(other.sig.subsorts.begin(), other.sig.subsorts.end());
    std::vector<int> remap(other.sig.funs.size());
    for (size_t i = 0; i < other.sig.funs.size(); ++i) {
      FunDecl d = other.sig.funs[i];
      d.imported_hidden = d.imported_hidden || d.hidden;
      remap[i] = add_decl(flat, d);
    }
    for (const auto& [sort, ctors] : other.sig.generated_by) {
      auto& dst = flat.sig.generated_by[sort];
      for (const auto& c : ctors) {
        if (std::find(dst.begin(), dst.end(), c) == dst.end()) dst.push_back(c);
      }
    }
    for (const auto& ax : other.axioms) {
      FlatAxiom copy = ax;
      detail::remap_formula(copy.formula, remap);
      bool dup = false;
      for (const auto& ex : flat.axioms) {
        if (ex.origin_module == copy.origin_module && ex.origin_index == copy.origin_index &&
            ex.formula == copy.formula) {
          dup = true;
          break;
        }
      }
      if (!dup) flat.axioms.push_back(std::move(copy));
    }
  }

  FlatSpec eval_spec_expr(const RawSpecExpr& e) {
    switch (e.kind) {
      case RawSpecExpr::Kind::Ref:
        return visit(e.name);
      case RawSpecExpr::Kind::Sum: {
        FlatSpec out;
        ensure_bool(out);
        for (const auto& p : e.parts) import_into(out, eval_spec_expr(p));
        return out;
      }
      case RawSpecExpr::Kind::Rename:
        return apply_rename(eval_spec_expr(e.parts[0]), e.renames, e.span);
    }
    fail("internal", "unreachable spec expression kind");
  }

  // A rename is a signature morphism on names. Declarations made equal by
  // the renaming are identified; clashing unequal ones are an error.
  static FlatSpec apply_rename(FlatSpec base,
                               const std::vector<std::pair<std::string, std::string>>& pairs,
                               Span span) {
    std::map<std::string, std::string> sort_map, fun_map;
    for (const auto& [from, to] : pairs) {
      bool is_sort = base.sig.has_sort(from);
      bool is_fun = false;
      for (const auto& f : base.sig.funs) is_fun = is_fun || f.name == from;
      if (is_sort) sort_map[from] = to;
      if (is_fun) fun_map[from] = to;
      if (!is_sort && !is_fun)
        fail("rename-target-clash", "rename source '" + from + "' not present in the specification", span);
    }
    auto rs = [&](const std::string& s) {
      auto it = sort_map.find(s);
      return it == sort_map.end() ? s : it->second;
    };
    auto rf = [&](const std::string& s) {
      auto it = fun_map.find(s);
      return it == fun_map.end() ? s : it->second;
    };

    FlatSpec renamed;
    renamed.name = base.name;
    for (const auto& s : base.sig.sorts) renamed.sig.sorts.insert(rs(s));
    for (const auto& [a, b] : base.sig.subsorts) renamed.sig.subsorts.insert({rs(a), rs(b)});
    for (FunDecl d : base.sig.funs) {
      d.name = rf(d.name);
      for (auto& a : d.arg_sorts) a = rs(a);
      d.result_sort = rs(d.result_sort);
      renamed.sig.funs.push_back(std::move(d));
    }
    for (const auto& [sort, ctors] : base.sig.generated_by) {
      auto& dst = renamed.sig.generated_by[rs(sort)];
      for (const auto& c : ctors) {
        std::string rc = rf(c);
        if (std::find(dst.begin(), dst.end(), rc) == dst.end()) dst.push_back(rc);
      }
    }
    renamed.axioms = std::move(base.axioms);
    for (auto& ax : renamed.axioms) detail::rename_formula_sorts(ax.formula, sort_map);

    // Re-import into a fresh spec so decls that became identical merge and
    // unequal collisions are reported.
    FlatSpec out;
    out.name = renamed.name;
    try {
      import_into(out, renamed);
    } catch (const SpecError& e) {
      if (e.diag.code == "conflicting-decl")
        fail("rename-target-clash", e.diag.message, span);
      throw;
    }
    return out;
  }

  // ---- building one module ----

  struct PendingBlock {
    const RawAxiomBlock* block;
    int first_index;  // 1-based axiom index reserved for the block's formulas
  };

  FlatSpec build(const RawSpecDef& def);

  void collect_expr_sorts(const RawExpr& e, std::set<std::string>& out) {
    for (const auto& a : e.atoms) {
      for (const auto& [names, sort] : a.binders) out.insert(sort);
      for (const auto& g : a.groups) collect_expr_sorts(g, out);
    }
  }

  void finalize(FlatSpec& flat) {
    auto diags = wf_signature(flat.sig);
    if (!diags.empty()) {
      std::string msg;
      for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + d.render();
      fail(diags[0].code, msg);
    }
    std::map<std::string, int> seen;
    for (auto& ax : flat.axioms) {
      std::string base = ax.origin_module + ".ax" + std::to_string(ax.origin_index);
      int n = ++seen[base];
      ax.id = n == 1 ? base : base + "#" + std::to_string(n);
    }
    flat.exported.clear();
    for (size_t i = 0; i < flat.sig.funs.size(); ++i) {
      const FunDecl& d = flat.sig.funs[i];
      if (!d.hidden && !d.imported_hidden) flat.exported.push_back(static_cast<int>(i));
    }
  }

  friend class Typechecker;
};

// ---------------------------------------------------------------------------
// Expression resolution: formula structure first (connectives have fixed
// levels), then terms by declared priority and associativity, then overload
// resolution by argument sorts with subsort coercion.

class Typechecker {
 public:
  Typechecker(const Signature& sig, bool allow_hidden_imports = false)
      : sig_(sig), allow_hidden_(allow_hidden_imports) {}

  Formula formula(const RawExpr& e, std::map<std::string, SortName> env) {
    Cursor cur{&e.atoms, 0};
    Formula f = parse_formula(cur, env, 1);
    if (cur.pos != cur.atoms->size())
      fail("parse-error", "trailing material in formula", e.span);
    return f;
  }

  Term term_of(const RawExpr& e, std::map<std::string, SortName> env,
               const std::optional<SortName>& expected) {
    Cursor cur{&e.atoms, 0};
    UTerm u = parse_term(cur, env, 1);
    if (cur.pos != cur.atoms->size()) fail("parse-error", "trailing material in term", e.span);
    return resolve_term(u, env, expected);
  }

 private:
  const Signature& sig_;
  bool allow_hidden_;

  struct Cursor {
    const std::vector<RawAtom>* atoms;
    size_t pos;
    const RawAtom* peek() const { return pos < atoms->size() ? &(*atoms)[pos] : nullptr; }
    const RawAtom& next() { return (*atoms)[pos++]; }
  };

  // Unresolved term tree; overloads are picked once sorts are known.
  struct UTerm {
    enum class Kind { Leaf, App, Bottom };
    Kind kind = Kind::Leaf;
    std::string name;  // Leaf: identifier; App: declared function name
    std::vector<UTerm> args;
    Span span;
  };

  bool visible(const FunDecl& d) const { return allow_hidden_ || !d.imported_hidden; }

  std::vector<int> decls_named(const std::string& name, int arity) const {
    std::vector<int> out;
    for (size_t i = 0; i < sig_.funs.size(); ++i) {
      if (sig_.funs[i].name == name && sig_.funs[i].arity() == arity) out.push_back(static_cast<int>(i));
    }
    return out;
  }

  // Infix lookup by surface text; all overloads must agree on priority and
  // associativity.
  struct InfixInfo {
    bool found = false;
    int priority = 9;
    Assoc assoc = Assoc::None;
  };

  InfixInfo infix_info(const std::string& surface) const {
    InfixInfo info;
    std::string name = "." + surface + ".";
    for (const auto& d : sig_.funs) {
      if (d.name != name || d.fixity != Fixity::Infix) continue;
      int prio = d.priority >= 0 ? d.priority : 9;
      if (info.found && (info.priority != prio || info.assoc != d.assoc))
        fail("fixity-error", "overloads of '" + surface + "' disagree on priority/associativity");
      info.found = true;
      info.priority = prio;
      info.assoc = d.assoc;
    }
    return info;
  }

  static bool is_connective(const RawAtom& a, const char* text) {
    return a.kind == RawAtom::Kind::Op && a.text == text;
  }

  // Formula connective levels: <=> (1), => (2, right), \/ (3, left),
  // /\ (4, left), ~ (prefix). Below that, term comparisons and bool terms.
  Formula parse_formula(Cursor& cur, std::map<std::string, SortName>& env, int level) {
    if (level > 4) return parse_formula_atom(cur, env);
    Formula lhs = parse_formula(cur, env, level + 1);
    for (;;) {
      const RawAtom* a = cur.peek();
      if (!a) break;
      if (level == 1 && is_connective(*a, "<=>")) {
        cur.next();
        Formula rhs = parse_formula(cur, env, level + 1);
        if (cur.peek() && is_connective(*cur.peek(), "<=>"))
          fail("fixity-error", "chained '<=>' needs parentheses", a->span);
        return Formula::con(Formula::Kind::Iff, {std::move(lhs), std::move(rhs)});
      }
      if (level == 2 && is_connective(*a, "=>")) {
        cur.next();
        Formula rhs = parse_formula(cur, env, level);  // right-assoc
        return Formula::con(Formula::Kind::Implies, {std::move(lhs), std::move(rhs)});
      }
      if (level == 3 && is_connective(*a, "\\/")) {
        cur.next();
        lhs = Formula::con(Formula::Kind::Or, {std::move(lhs), parse_formula(cur, env, level + 1)});
        continue;
      }
      if (level == 4 && is_connective(*a, "/\\")) {
        cur.next();
        lhs = Formula::con(Formula::Kind::And, {std::move(lhs), parse_formula(cur, env, level + 1)});
        continue;
      }
      break;
    }
    return lhs;
  }

  Formula parse_formula_atom(Cursor& cur, std::map<std::string, SortName>& env) {
    const RawAtom* a = cur.peek();
    if (!a) fail("parse-error", "expected formula");
    if (is_connective(*a, "~")) {
      cur.next();
      return Formula::negate(parse_formula_atom(cur, env));
    }
    if (a->kind == RawAtom::Kind::Def) {
      cur.next();
      UTerm u = parse_application(cur, env);
      return Formula::defined(resolve_term(u, env, std::nullopt));
    }
    if (a->kind == RawAtom::Kind::Forall) {
      const RawAtom& fa = cur.next();
      std::map<std::string, SortName> inner = env;
      Formula body = [&] {
        Typechecker sub(sig_, allow_hidden_);
        for (const auto& [names, sort] : fa.binders) {
          check_sort(sort, fa.span);
          for (const auto& n : names) inner[n] = sort;
        }
        return sub.formula(fa.groups[0], inner);
      }();
      for (auto g = fa.binders.rbegin(); g != fa.binders.rend(); ++g) {
        for (auto n = g->first.rbegin(); n != g->first.rend(); ++n) {
          body = Formula::forall(*n, g->second, std::move(body));
        }
      }
      return body;
    }
    // A parenthesized group containing a single expression may be a nested
    // formula; treat it as one if it contains formula structure.
    if (a->kind == RawAtom::Kind::Paren && a->groups.size() == 1 && group_is_formula(*a)) {
      const RawAtom& pa = cur.next();
      Typechecker sub(sig_, allow_hidden_);
      return sub.formula(pa.groups[0], env);
    }

    // Otherwise: term [= | ~=] term, or a bool-valued term.
    UTerm lhs = parse_term_cursor(cur, env);
    const RawAtom* op = cur.peek();
    if (op && (is_connective(*op, "=") || is_connective(*op, "~="))) {
      bool neg = op->text == "~=";
      cur.next();
      UTerm rhs = parse_term_cursor(cur, env);
      const RawAtom* more = cur.peek();
      if (more && (is_connective(*more, "=") || is_connective(*more, "~=")))
        fail("fixity-error", "chained equality needs parentheses", more->span);
      Formula eq = resolve_eq(lhs, rhs, env);
      return neg ? Formula::negate(std::move(eq)) : std::move(eq);
    }
    Term t = resolve_term(lhs, env, SortName("bool"));
    return Formula::eq(std::move(t), true_term());
  }

  bool group_is_formula(const RawAtom& paren) const {
    for (const auto& at : paren.groups[0].atoms) {
      if (at.kind == RawAtom::Kind::Op &&
          (at.text == "=" || at.text == "~=" || at.text == "=>" || at.text == "<=>" ||
           at.text == "/\\" || at.text == "\\/" || at.text == "~"))
        return true;
      if (at.kind == RawAtom::Kind::Def || at.kind == RawAtom::Kind::Forall) return true;
    }
    return false;
  }

  Term true_term() const {
    for (size_t i = 0; i < sig_.funs.size(); ++i) {
      if (sig_.funs[i].name == "true" && sig_.funs[i].result_sort == "bool")
        return Term::make_app(static_cast<int>(i), {});
    }
    fail("internal", "builtin 'true' missing");
  }

  void check_sort(const SortName& s, Span span) const {
    if (!sig_.has_sort(s)) fail("unresolved-name", "unknown sort '" + s + "'", span);
  }

  // ---- term layer ----

  UTerm parse_term_cursor(Cursor& cur, std::map<std::string, SortName>& env) {
    return parse_term(cur, env, 1);
  }

  bool atom_is_infix(const RawAtom& a) const {
    if (a.kind == RawAtom::Kind::Op && (a.text == "+" || a.text == "^" || a.text == "<="))
      return true;
    if (a.kind == RawAtom::Kind::Name) return infix_info(a.text).found;
    return false;
  }

  UTerm parse_term(Cursor& cur, std::map<std::string, SortName>& env, int min_prio) {
    UTerm lhs = parse_application(cur, env);
    bool nonassoc_used = false;
    for (;;) {
      const RawAtom* a = cur.peek();
      if (!a || !atom_is_infix(*a)) break;
      std::string surface = a->text;
      InfixInfo info = infix_info(surface);
      if (!info.found)
        fail("fixity-error", "'" + surface + "' used infix but not declared", a->span);
      if (info.priority < min_prio) break;
      if (info.assoc == Assoc::None) {
        if (nonassoc_used && info.priority == min_prio)
          fail("fixity-error", "non-associative '" + surface + "' chained", a->span);
        nonassoc_used = true;
      }
      cur.next();
      int next_min = info.assoc == Assoc::Right ? info.priority : info.priority + 1;
      UTerm rhs = parse_term(cur, env, next_min);
      UTerm app;
      app.kind = UTerm::Kind::App;
      app.name = "." + surface + ".";
      app.span = a->span;
      app.args.push_back(std::move(lhs));
      app.args.push_back(std::move(rhs));
      lhs = std::move(app);
    }
    return lhs;
  }

  bool atom_starts_primary(const RawAtom& a) const {
    switch (a.kind) {
      case RawAtom::Kind::Name:
        return !infix_info(a.text).found;
      case RawAtom::Kind::Number:
      case RawAtom::Kind::Angle:
      case RawAtom::Kind::Undef:
        return true;
      case RawAtom::Kind::Paren:
        return true;
      default:
        return false;
    }
  }

  UTerm parse_application(Cursor& cur, std::map<std::string, SortName>& env) {
    const RawAtom* a = cur.peek();
    if (!a) fail("parse-error", "expected term");
    UTerm base;

    if (a->kind == RawAtom::Kind::Name && !infix_info(a->text).found) {
      const RawAtom& head = cur.next();
      base.kind = UTerm::Kind::Leaf;
      base.name = head.text;
      base.span = head.span;
      const RawAtom* nxt = cur.peek();
      if (nxt && nxt->kind == RawAtom::Kind::Paren && !env.count(head.text)) {
        const RawAtom& args = cur.next();
        UTerm app;
        app.kind = UTerm::Kind::App;
        app.name = head.text;
        app.span = head.span;
        for (const auto& g : args.groups) {
          Typechecker sub(sig_, allow_hidden_);
          Cursor c{&g.atoms, 0};
          app.args.push_back(sub.parse_term(c, env, 1));
          if (c.pos != g.atoms.size()) fail("parse-error", "trailing material in argument", head.span);
        }
        base = std::move(app);
      } else if (nxt && atom_starts_primary(*nxt) && !env.count(head.text)) {
        // Application by juxtaposition: `pred 0`, `value ehs`, `first <>`.
        UTerm app;
        app.kind = UTerm::Kind::App;
        app.name = head.text;
        app.span = head.span;
        app.args.push_back(parse_primary(cur, env));
        base = std::move(app);
      }
    } else {
      base = parse_primary(cur, env);
    }

    // Postfix selection brackets bind at application level.
    for (;;) {
      const RawAtom* nxt = cur.peek();
      if (!nxt || nxt->kind != RawAtom::Kind::Bracket) break;
      const RawAtom& br = cur.next();
      UTerm app;
      app.kind = UTerm::Kind::App;
      app.name = br.groups.size() == 1 ? ".[.]" : ".[.,.]";
      app.span = br.span;
      app.args.push_back(std::move(base));
      for (const auto& g : br.groups) {
        Typechecker sub(sig_, allow_hidden_);
        Cursor c{&g.atoms, 0};
        app.args.push_back(sub.parse_term(c, env, 1));
        if (c.pos != g.atoms.size()) fail("parse-error", "trailing material in selector", br.span);
      }
      base = std::move(app);
    }
    return base;
  }

  UTerm parse_primary(Cursor& cur, std::map<std::string, SortName>& env) {
    const RawAtom* a = cur.peek();
    if (!a) fail("parse-error", "expected term");
    UTerm u;
    u.span = a->span;
    switch (a->kind) {
      case RawAtom::Kind::Name: {
        if (infix_info(a->text).found)
          fail("fixity-error", "infix '" + a->text + "' used without a left operand", a->span);
        u.kind = UTerm::Kind::Leaf;
        u.name = cur.next().text;
        return u;
      }
      case RawAtom::Kind::Number:
        u.kind = UTerm::Kind::Leaf;
        u.name = cur.next().text;
        return u;
      case RawAtom::Kind::Undef:
        cur.next();
        u.kind = UTerm::Kind::Bottom;
        return u;
      case RawAtom::Kind::Angle: {
        const RawAtom& ang = cur.next();
        u.kind = UTerm::Kind::App;
        u.name = ang.groups.empty() ? "<>" : "<.>";
        if (!ang.groups.empty()) {
          Typechecker sub(sig_, allow_hidden_);
          Cursor c{&ang.groups[0].atoms, 0};
          u.args.push_back(sub.parse_term(c, env, 1));
          if (c.pos != ang.groups[0].atoms.size())
            fail("parse-error", "trailing material in sequence literal", ang.span);
        }
        return u;
      }
      case RawAtom::Kind::Paren: {
        const RawAtom& par = cur.next();
        if (par.groups.size() != 1)
          fail("parse-error", "tuple outside of an argument list", par.span);
        Typechecker sub(sig_, allow_hidden_);
        Cursor c{&par.groups[0].atoms, 0};
        UTerm inner = sub.parse_term(c, env, 1);
        if (c.pos != par.groups[0].atoms.size())
          fail("parse-error", "trailing material in parenthesized term", par.span);
        return inner;
      }
      default:
        fail("parse-error", "unexpected token in term position", a->span);
    }
  }

  // ---- overload resolution ----

  std::set<SortName> possible_sorts(const UTerm& u, const std::map<std::string, SortName>& env) {
    std::set<SortName> out;
    switch (u.kind) {
      case UTerm::Kind::Bottom:
        for (const auto& s : sig_.sorts) out.insert(s);  // constrained by context
        return out;
      case UTerm::Kind::Leaf: {
        auto v = env.find(u.name);
        if (v != env.end()) return {v->second};
        for (int i : decls_named(u.name, 0)) {
          if (visible(sig_.funs[i])) out.insert(sig_.funs[i].result_sort);
        }
        if (out.empty()) report_unresolved(u);
        return out;
      }
      case UTerm::Kind::App: {
        std::vector<std::set<SortName>> arg_sorts;
        for (const auto& a : u.args) arg_sorts.push_back(possible_sorts(a, env));
        for (int i : decls_named(u.name, static_cast<int>(u.args.size()))) {
          const FunDecl& d = sig_.funs[i];
          if (!visible(d)) continue;
          bool ok = true;
          for (size_t k = 0; k < u.args.size() && ok; ++k) {
            ok = fits_any(arg_sorts[k], d.arg_sorts[k]);
          }
          if (ok) out.insert(d.result_sort);
        }
        if (out.empty()) report_unresolved(u);
        return out;
      }
    }
    return out;
  }

  bool fits_any(const std::set<SortName>& have, const SortName& want) const {
    for (const auto& s : have) {
      if (sig_.sort_leq(s, want)) return true;
    }
    return false;
  }

  [[noreturn]] void report_unresolved(const UTerm& u) {
    int arity = u.kind == UTerm::Kind::App ? static_cast<int>(u.args.size()) : 0;
    for (int i : decls_named(u.name, arity)) {
      if (!visible(sig_.funs[i]))
        fail("hidden-access", "'" + u.name + "' is hidden in the module it comes from", u.span);
    }
    if (!decls_named(u.name, arity).empty())
      fail("sort-mismatch", "no overload of '" + u.name + "' fits these argument sorts", u.span);
    fail("unresolved-name", "unknown name '" + u.name + "'", u.span);
  }

  Term resolve_term(const UTerm& u, const std::map<std::string, SortName>& env,
                    const std::optional<SortName>& expected) {
    switch (u.kind) {
      case UTerm::Kind::Bottom: {
        if (!expected) fail("sort-mismatch", "cannot infer the sort of 'undef'", u.span);
        return Term::make_bottom(*expected);
      }
      case UTerm::Kind::Leaf: {
        auto v = env.find(u.name);
        if (v != env.end()) {
          if (expected && !sig_.sort_leq(v->second, *expected))
            fail("sort-mismatch", "variable '" + u.name + "' has sort " + v->second, u.span);
          return Term::make_var(u.name, v->second);
        }
        std::vector<int> cands;
        for (int i : decls_named(u.name, 0)) {
          const FunDecl& d = sig_.funs[i];
          if (visible(d) && (!expected || sig_.sort_leq(d.result_sort, *expected)))
            cands.push_back(i);
        }
        if (cands.empty()) report_unresolved(u);
        if (cands.size() > 1)
          fail("ambiguous-overload", "constant '" + u.name + "' is ambiguous here", u.span);
        return Term::make_app(cands[0], {});
      }
      case UTerm::Kind::App: {
        std::vector<std::set<SortName>> arg_sorts;
        for (const auto& a : u.args) arg_sorts.push_back(possible_sorts(a, env));
        std::vector<int> cands;
        for (int i : decls_named(u.name, static_cast<int>(u.args.size()))) {
          const FunDecl& d = sig_.funs[i];
          if (!visible(d)) continue;
          if (expected && !sig_.sort_leq(d.result_sort, *expected)) continue;
          bool ok = true;
          for (size_t k = 0; k < u.args.size() && ok; ++k) ok = fits_any(arg_sorts[k], d.arg_sorts[k]);
          if (ok) cands.push_back(i);
        }
        if (cands.empty()) report_unresolved(u);
        if (cands.size() > 1)
          fail("ambiguous-overload",
               "call of '" + u.name + "' matches " + std::to_string(cands.size()) + " declarations",
               u.span);
        const FunDecl& d = sig_.funs[cands[0]];
        std::vector<Term> args;
        for (size_t k = 0; k < u.args.size(); ++k)
          args.push_back(resolve_term(u.args[k], env, d.arg_sorts[k]));
        return Term::make_app(cands[0], std::move(args));
      }
    }
    fail("internal", "unreachable term kind");
  }

  Formula resolve_eq(const UTerm& l, const UTerm& r, const std::map<std::string, SortName>& env) {
    std::set<SortName> ls = possible_sorts(l, env);
    std::set<SortName> rs = possible_sorts(r, env);
    std::set<SortName> viable_l, viable_r;
    for (const auto& a : ls) {
      for (const auto& b : rs) {
        if (sig_.common_supersort(a, b)) {
          viable_l.insert(a);
          viable_r.insert(b);
        }
      }
    }
    if (viable_l.empty())
      fail("sort-mismatch", "equation sides have no common supersort", l.span);
    Term lt = resolve_with_sorts(l, env, viable_l);
    Term rt = resolve_with_sorts(r, env, viable_r);
    if (!sig_.common_supersort(lt.sort_in(sig_), rt.sort_in(sig_)))
      fail("sort-mismatch", "equation sides have no common supersort", l.span);
    return Formula::eq(std::move(lt), std::move(rt));
  }

  Term resolve_with_sorts(const UTerm& u, const std::map<std::string, SortName>& env,
                          const std::set<SortName>& viable) {
    if (u.kind == UTerm::Kind::Bottom && viable.size() == 1)
      return Term::make_bottom(*viable.begin());
    if (viable.size() == 1) return resolve_term(u, env, *viable.begin());
    return resolve_term(u, env, std::nullopt);
  }
};

// ---------------------------------------------------------------------------
// Module body construction (out of line: needs Typechecker).

inline FlatSpec Elaborator::build(const RawSpecDef& def) {
  FlatSpec flat;
  flat.name = def.name;
  ensure_bool(flat);

  if (!def.inherit.empty() && !def.is_class)
    fail("parse-error", "'inherit' requires a class specification", def.span);
  if (def.is_class) flat.sig.sorts.insert(def.name);
  if (!def.inherit.empty()) {
    import_into(flat, visit(def.inherit));
    if (!flat.sig.has_sort(def.inherit))
      fail("unknown-module", "inherited specification '" + def.inherit + "' declares no such sort",
           def.span);
    flat.sig.subsorts.insert({def.name, def.inherit});
  }

  int axiom_counter = 0;
  std::vector<PendingBlock> pending;
  std::set<std::string> referenced_sorts;

  for (const auto& item : def.items) {
    if (const auto* enr = std::get_if<RawEnrich>(&item)) {
      import_into(flat, eval_spec_expr(enr->expr));
    } else if (const auto* sd = std::get_if<RawSortDecl>(&item)) {
      for (const auto& s : sd->names) flat.sig.sorts.insert(s);
    } else if (const auto* fs = std::get_if<RawFunSig>(&item)) {
      for (const auto& name : fs->names) {
        FunDecl d;
        d.name = name;
        d.arg_sorts = fs->arg_sorts;
        d.result_sort = fs->result_sort;
        if (fs->receiver >= 0) {
          if (!d.result_sort.empty())
            fail("multiple-receivers", "receiver marker plus explicit result sort", fs->span);
          d.result_sort = d.arg_sorts[fs->receiver];
        }
        if (d.result_sort.empty()) fail("parse-error", "declaration has no result sort", fs->span);
        if (fs->strict_kw) {
          d.totality = Totality::StrictPartial;
        } else if (fs->strict_total_arrow) {
          d.totality = Totality::StrictTotal;
        } else {
          d.totality = Totality::Unspecified;
        }
        d.hidden = fs->hidden;
        d.spec_only = fs->spec_only;
        d.priority = fs->priority;
        d.assoc = fs->assoc;
        if (is_infix_name(name)) {
          d.fixity = Fixity::Infix;
        } else if (is_operator_name(name)) {
          d.fixity = Fixity::Mixfix;
        } else {
          d.fixity = Fixity::Prefix;
        }
        d.origin = def.name;
        for (const auto& s : d.arg_sorts) referenced_sorts.insert(s);
        referenced_sorts.insert(d.result_sort);
        add_decl(flat, d);
      }
    } else if (const auto* dd = std::get_if<RawDataDecl>(&item)) {
      flat.sig.sorts.insert(dd->sort);
      std::set<std::string> ctor_names, sel_names;
      auto& gen = flat.sig.generated_by[dd->sort];
      for (const auto& alt : dd->alts) {
        if (!ctor_names.insert(alt.ctor).second)
          fail("duplicate-constructor", "constructor '" + alt.ctor + "' repeated", dd->span);
        FunDecl c;
        c.name = alt.ctor;
        for (const auto& [sel, sort] : alt.selectors) {
          c.arg_sorts.push_back(sort);
          referenced_sorts.insert(sort);
        }
        c.result_sort = dd->sort;
        c.totality = Totality::Total;
        c.is_constructor = true;
        c.origin = def.name;
        add_decl(flat, c);
        gen.push_back(alt.ctor);
        for (const auto& [sel, sort] : alt.selectors) {
          if (!sel_names.insert(sel).second)
            fail("duplicate-selector", "selector '" + sel + "' repeated", dd->span);
          FunDecl s;
          s.name = sel;
          s.arg_sorts = {dd->sort};
          s.result_sort = sort;
          s.totality = Totality::StrictPartial;
          s.origin = def.name;
          add_decl(flat, s);
        }
      }
      // Selector axioms in the standard expansion: sel_i(c(a1..an)) = a_i,
      // and ~(def(sel_i(c'(..)))) for every other constructor c'.
      auto ctor_term = [&](const RawDataAlt& alt, const std::string& var_prefix,
                           std::vector<Term>* vars_out) {
        std::vector<Term> args;
        for (size_t k = 0; k < alt.selectors.size(); ++k) {
          Term v = Term::make_var(var_prefix + std::to_string(k + 1), alt.selectors[k].second);
          if (vars_out) vars_out->push_back(v);
          args.push_back(std::move(v));
        }
        const FunDecl* cd = flat.sig.find(alt.ctor, dd->sort);
        return Term::make_app(flat.sig.decl_index(cd), std::move(args));
      };
      for (const auto& alt : dd->alts) {
        for (size_t i = 0; i < alt.selectors.size(); ++i) {
          const FunDecl* sd2 = nullptr;
          for (const auto& f : flat.sig.funs) {
            if (f.name == alt.selectors[i].first && f.arg_sorts == std::vector<SortName>{dd->sort})
              sd2 = &f;
          }
          int sel_idx = flat.sig.decl_index(sd2);
          for (const auto& other : dd->alts) {
            FlatAxiom ax;
            ax.origin_module = def.name;
            ax.span = dd->span;
            std::vector<Term> vars;
            Term inner = ctor_term(other, "a", &vars);
            Term sel_app = Term::make_app(sel_idx, {std::move(inner)});
            Formula body = (&other == &alt)
                               ? Formula::eq(std::move(sel_app), vars[i])
                               : Formula::negate(Formula::defined(std::move(sel_app)));
            for (size_t k = other.selectors.size(); k-- > 0;) {
              body = Formula::forall("a" + std::to_string(k + 1), other.selectors[k].second,
                                     std::move(body));
            }
            ax.formula = std::move(body);
            ax.origin_index = ++axiom_counter;
            flat.axioms.push_back(std::move(ax));
          }
        }
      }
    } else if (const auto* gb = std::get_if<RawGenerated>(&item)) {
      auto& gen = flat.sig.generated_by[gb->sort];
      for (const auto& c : gb->ctors) {
        if (std::find(gen.begin(), gen.end(), c) == gen.end()) gen.push_back(c);
      }
      referenced_sorts.insert(gb->sort);
    } else if (const auto* ab = std::get_if<RawAxiomBlock>(&item)) {
      pending.push_back({ab, axiom_counter + 1});
      axiom_counter += static_cast<int>(ab->formulas.size());
      for (const auto& [names, sort] : ab->binders) referenced_sorts.insert(sort);
      for (const auto& f : ab->formulas) collect_expr_sorts(f, referenced_sorts);
    }
  }

  // Opaque builtin sorts may be referenced without declaration.
  for (const auto& s : referenced_sorts) {
    if (!flat.sig.has_sort(s) && builtin_opaque_sorts().count(s)) flat.sig.sorts.insert(s);
  }

  // Constructors listed in generated-by clauses are marked as such now that
  // every declaration is present.
  for (const auto& [sort, ctors] : flat.sig.generated_by) {
    for (const auto& c : ctors) {
      for (auto& f : flat.sig.funs) {
        if (f.name == c && f.result_sort == sort) f.is_constructor = true;
      }
    }
  }

  for (const auto& pb : pending) {
    Typechecker tc(flat.sig);
    std::map<std::string, SortName> env;
    for (const auto& [names, sort] : pb.block->binders) {
      if (!flat.sig.has_sort(sort))
        fail("unresolved-name", "unknown sort '" + sort + "'", pb.block->span);
      for (const auto& n : names) env[n] = sort;
    }
    int index = pb.first_index;
    for (const auto& raw : pb.block->formulas) {
      FlatAxiom ax;
      ax.origin_module = def.name;
      ax.origin_index = index++;
      ax.span = raw.span;
      Formula body = tc.formula(raw, env);
      // Close over the block binders that actually occur.
      std::set<std::string> used = body.free_vars();
      for (auto g = pb.block->binders.rbegin(); g != pb.block->binders.rend(); ++g) {
        for (auto n = g->first.rbegin(); n != g->first.rend(); ++n) {
          if (used.count(*n)) body = Formula::forall(*n, g->second, std::move(body));
        }
      }
      ax.formula = std::move(body);
      flat.axioms.push_back(std::move(ax));
    }
  }

  auto diags = wf_signature(flat.sig);
  if (!diags.empty()) fail(diags[0].code, diags[0].render() + " in " + def.name);
  return flat;
}

// ---------------------------------------------------------------------------

inline std::string FlatSpec::dump() const {
  std::string out = "spec " + name + "\n";
  out += "sorts:";
  for (const auto& s : sig.sorts) out += " " + s;
  out += "\nsubsorts:";
  auto closed = sig.subsort_closure();
  for (const auto& [a, b] : closed) out += " (" + a + "," + b + ")";
  out += "\nfuns:\n";
  std::vector<const FunDecl*> order;
  for (const auto& f : sig.funs) order.push_back(&f);
  std::sort(order.begin(), order.end(), [](const FunDecl* a, const FunDecl* b) {
    if (a->name != b->name) return a->name < b->name;
    if (a->arg_sorts != b->arg_sorts) return a->arg_sorts < b->arg_sorts;
    return a->result_sort < b->result_sort;
  });
  for (const FunDecl* f : order) {
    out += "  " + f->display();
    if (f->totality == Totality::StrictTotal) out += " strict-total";
    if (f->totality == Totality::StrictPartial) out += " strict";
    if (f->is_constructor) out += " ctor";
    if (f->hidden || f->imported_hidden) out += " hidden";
    if (f->spec_only) out += " spec-only";
    if (f->priority >= 0) {
      out += " prio " + std::to_string(f->priority);
      if (f->assoc == Assoc::Left) out += " left";
      if (f->assoc == Assoc::Right) out += " right";
    }
    out += "\n";
  }
  out += "generated:\n";
  for (const auto& [sort, ctors] : sig.generated_by) {
    out += "  " + sort + ":";
    for (const auto& c : ctors) out += " " + c;
    out += "\n";
  }
  out += "axioms: " + std::to_string(axioms.size()) + "\n";
  for (const auto& ax : axioms) {
    out += "  " + ax.id + ": " + detail::render_formula(sig, ax.formula) + "\n";
  }
  return out;
}

}  // namespace speck
