#pragma once

// Shared domain types: sorts, function declarations, signatures with a
// subsort order, typed terms and formulas, and ground values in
// constructor normal form. No parsing or evaluation logic lives here.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "speck/diag.hpp"

namespace speck {

using SortName = std::string;

inline bool is_valid_sort_name(const std::string& name) {
  if (name.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(name[0]))) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

enum class Totality { Total, StrictTotal, StrictPartial, Unspecified };
enum class Fixity { Prefix, Infix, Mixfix };
enum class Assoc { Left, Right, None };

inline bool is_strict(Totality t) {
  return t == Totality::StrictTotal || t == Totality::StrictPartial;
}

// Operator names are stored in canonical dot-placeholder form (".+.",
// ".[.,.]", "<.>"); each dot is one argument position. Alphanumeric names
// are ordinary prefix functions.
inline int placeholder_count(const std::string& name) {
  return static_cast<int>(std::count(name.begin(), name.end(), '.'));
}

inline bool is_operator_name(const std::string& name) {
  return name.find('.') != std::string::npos;
}

// Infix operators look like ".SEG." with a single undotted segment.
inline bool is_infix_name(const std::string& name) {
  if (name.size() < 3 || name.front() != '.' || name.back() != '.') return false;
  const std::string seg = name.substr(1, name.size() - 2);
  return !seg.empty() && seg.find('.') == std::string::npos &&
         seg.find('[') == std::string::npos;
}

// The surface token of an infix operator: ".+." is written "+".
inline std::string infix_surface(const std::string& name) {
  return name.substr(1, name.size() - 2);
}

struct FunDecl {
  std::string name;
  std::vector<SortName> arg_sorts;
  SortName result_sort;
  Totality totality = Totality::Unspecified;
  Fixity fixity = Fixity::Prefix;
  int priority = -1;  // -1: undeclared (binds tightest among operators)
  Assoc assoc = Assoc::None;
  bool hidden = false;
  bool spec_only = false;       // declared with `op ... to ...`
  bool is_constructor = false;  // listed in a generated-by / data clause
  std::string origin;           // module the declaration came from
  bool imported_hidden = false; // hidden symbol of an imported module

  int arity() const { return static_cast<int>(arg_sorts.size()); }

  bool same_shape(const FunDecl& o) const {
    return name == o.name && arg_sorts == o.arg_sorts && result_sort == o.result_sort &&
           totality == o.totality && fixity == o.fixity && priority == o.priority &&
           assoc == o.assoc && hidden == o.hidden && spec_only == o.spec_only;
  }

  std::string display() const {
    std::string s = name + " :";
    for (size_t i = 0; i < arg_sorts.size(); ++i) s += (i ? " # " : " ") + arg_sorts[i];
    s += (arg_sorts.empty() ? " " : " -> ") + result_sort;
    return s;
  }
};

struct Signature {
  std::set<SortName> sorts;
  std::set<std::pair<SortName, SortName>> subsorts;  // (sub, super)
  std::vector<FunDecl> funs;
  std::map<SortName, std::vector<std::string>> generated_by;

  bool has_sort(const SortName& s) const { return sorts.count(s) > 0; }

  // Reflexive-transitive subsort order.
  bool sort_leq(const SortName& sub, const SortName& super) const {
    if (sub == super) return true;
    std::vector<SortName> work{sub};
    std::set<SortName> seen{sub};
    while (!work.empty()) {
      SortName cur = work.back();
      work.pop_back();
      for (const auto& [lo, hi] : subsorts) {
        if (lo != cur || seen.count(hi)) continue;
        if (hi == super) return true;
        seen.insert(hi);
        work.push_back(hi);
      }
    }
    return false;
  }

  bool common_supersort(const SortName& a, const SortName& b) const {
    if (sort_leq(a, b) || sort_leq(b, a)) return true;
    for (const auto& s : sorts) {
      if (sort_leq(a, s) && sort_leq(b, s)) return true;
    }
    return false;
  }

  // All sorts at or below `s` in the subsort order.
  std::vector<SortName> sorts_at_or_below(const SortName& s) const {
    std::vector<SortName> out;
    for (const auto& t : sorts) {
      if (sort_leq(t, s)) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Closing the subsort relation under transitivity; idempotent.
  std::set<std::pair<SortName, SortName>> subsort_closure() const {
    std::set<std::pair<SortName, SortName>> closed = subsorts;
    bool grew = true;
    while (grew) {
      grew = false;
      std::vector<std::pair<SortName, SortName>> add;
      for (const auto& [a, b] : closed) {
        for (const auto& [c, d] : closed) {
          if (b == c && !closed.count({a, d})) add.push_back({a, d});
        }
      }
      for (auto& p : add) grew |= closed.insert(p).second;
    }
    return closed;
  }

  const FunDecl* find(const std::string& name, const SortName& result) const {
    for (const auto& f : funs) {
      if (f.name == name && f.result_sort == result) return &f;
    }
    return nullptr;
  }

  int decl_index(const FunDecl* d) const { return static_cast<int>(d - funs.data()); }

  std::vector<std::string> constructors_of(const SortName& s) const {
    auto it = generated_by.find(s);
    if (it == generated_by.end()) return {};
    return it->second;
  }

  bool has_constructors(const SortName& s) const {
    auto it = generated_by.find(s);
    return it != generated_by.end() && !it->second.empty();
  }
};

// Diagnostics (empty iff well-formed), sorted by code then offending name
// so the result is independent of declaration order.
inline std::vector<Diagnostic> wf_signature(const Signature& sig) {
  std::vector<std::pair<std::string, Diagnostic>> found;
  auto report = [&](std::string code, const std::string& name, std::string msg) {
    found.push_back({code + "\x01" + name, Diagnostic{std::move(code), std::move(msg), {}}});
  };

  for (const auto& s : sig.sorts) {
    if (!is_valid_sort_name(s)) report("bad-sort-name", s, "sort name '" + s + "' is not an identifier");
  }

  // Cycle check: the closure must not relate any sort to itself.
  auto closed = sig.subsort_closure();
  std::set<SortName> cyclic;
  for (const auto& [a, b] : closed) {
    if (a == b) cyclic.insert(a);
  }
  for (const auto& s : cyclic) report("cyclic-subsort", s, "subsort cycle through '" + s + "'");
  for (const auto& [a, b] : sig.subsorts) {
    if (!sig.has_sort(a)) report("undeclared-sort", a, "subsort pair mentions undeclared sort '" + a + "'");
    if (!sig.has_sort(b)) report("undeclared-sort", b, "subsort pair mentions undeclared sort '" + b + "'");
  }

  for (const auto& f : sig.funs) {
    for (const auto& a : f.arg_sorts) {
      if (!sig.has_sort(a)) report("undeclared-sort", f.name, "'" + f.name + "' uses undeclared sort '" + a + "'");
    }
    if (!sig.has_sort(f.result_sort))
      report("undeclared-sort", f.name, "'" + f.name + "' uses undeclared sort '" + f.result_sort + "'");
    if (f.fixity == Fixity::Infix && f.arity() != 2)
      report("infix-arity", f.name, "infix '" + f.name + "' must take exactly 2 arguments");
    if (f.fixity == Fixity::Mixfix && is_operator_name(f.name) &&
        placeholder_count(f.name) != f.arity())
      report("mixfix-arity", f.name, "placeholder count of '" + f.name + "' differs from arity");
    if (f.priority >= 0 && f.fixity == Fixity::Prefix)
      report("priority-misuse", f.name, "priority declared for non-operator '" + f.name + "'");
  }

  for (const auto& [sort, ctors] : sig.generated_by) {
    if (!sig.has_sort(sort)) report("undeclared-sort", sort, "generated-by clause for undeclared sort '" + sort + "'");
    for (const auto& c : ctors) {
      if (!sig.find(c, sort))
        report("bad-generator", c, "constructor '" + c + "' of '" + sort + "' is not declared with that result sort");
    }
  }

  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Diagnostic> out;
  out.reserve(found.size());
  for (auto& [_, d] : found) out.push_back(std::move(d));
  return out;
}

// ---------------------------------------------------------------------------
// Typed terms and formulas. App nodes reference a resolved declaration by
// index into the owning Signature, so overloads are already disambiguated.

struct Term {
  enum class Kind { Var, App, Bottom };
  Kind kind = Kind::Bottom;
  std::string var;   // Var
  SortName sort;     // Var / Bottom: the static sort
  int decl = -1;     // App
  std::vector<Term> args;

  static Term make_var(std::string name, SortName s) {
    Term t;
    t.kind = Kind::Var;
    t.var = std::move(name);
    t.sort = std::move(s);
    return t;
  }
  static Term make_app(int decl, std::vector<Term> args) {
    Term t;
    t.kind = Kind::App;
    t.decl = decl;
    t.args = std::move(args);
    return t;
  }
  static Term make_bottom(SortName s) {
    Term t;
    t.kind = Kind::Bottom;
    t.sort = std::move(s);
    return t;
  }

  bool operator==(const Term& o) const {
    return kind == o.kind && var == o.var && sort == o.sort && decl == o.decl && args == o.args;
  }

  const SortName& sort_in(const Signature& sig) const {
    return kind == Kind::App ? sig.funs[decl].result_sort : sort;
  }

  void collect_vars(std::set<std::string>& out) const {
    if (kind == Kind::Var) out.insert(var);
    for (const auto& a : args) a.collect_vars(out);
  }
};

struct Formula {
  enum class Kind { Eq, Defined, Not, And, Or, Implies, Iff, Forall };
  Kind kind = Kind::Eq;
  Term lhs, rhs;             // Eq; Defined uses lhs only
  std::vector<Formula> sub;  // Not: 1 child; binary connectives: 2; Forall: 1
  std::string var;           // Forall
  SortName var_sort;

  static Formula eq(Term l, Term r) {
    Formula f;
    f.kind = Kind::Eq;
    f.lhs = std::move(l);
    f.rhs = std::move(r);
    return f;
  }
  static Formula defined(Term t) {
    Formula f;
    f.kind = Kind::Defined;
    f.lhs = std::move(t);
    return f;
  }
  static Formula con(Kind k, std::vector<Formula> children) {
    Formula f;
    f.kind = k;
    f.sub = std::move(children);
    return f;
  }
  static Formula negate(Formula inner) { return con(Kind::Not, {std::move(inner)}); }
  static Formula forall(std::string v, SortName s, Formula body) {
    Formula f;
    f.kind = Kind::Forall;
    f.var = std::move(v);
    f.var_sort = std::move(s);
    f.sub.push_back(std::move(body));
    return f;
  }

  bool operator==(const Formula& o) const {
    return kind == o.kind && lhs == o.lhs && rhs == o.rhs && sub == o.sub && var == o.var &&
           var_sort == o.var_sort;
  }

  std::set<std::string> free_vars() const {
    std::set<std::string> out;
    switch (kind) {
      case Kind::Eq:
        lhs.collect_vars(out);
        rhs.collect_vars(out);
        break;
      case Kind::Defined:
        lhs.collect_vars(out);
        break;
      case Kind::Forall:
        out = sub[0].free_vars();
        out.erase(var);
        break;
      default:
        for (const auto& s : sub) {
          auto inner = s.free_vars();
          out.insert(inner.begin(), inner.end());
        }
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Ground values: constructor normal forms, opaque atoms, or Undefined.
// Values are hash-consed through a ValueStore, so within one store equality
// of defined values is pointer equality.

struct Value {
  enum class Kind { Ctor, Atom, Undefined };
  Kind kind = Kind::Undefined;
  int decl = -1;       // Ctor: constructor declaration index
  std::string name;    // Ctor: constructor name; Atom: display label
  SortName sort;
  int atom = -1;       // Atom: index within the sort's carrier
  std::vector<const Value*> args;
  uint32_t id = 0;     // creation order; deterministic tie-breaker

  bool defined() const { return kind != Kind::Undefined; }
};

using ValueRef = const Value*;

class ValueStore {
 public:
  // Constructors are flat: an undefined argument yields Undefined.
  ValueRef ctor(int decl, const std::string& name, const SortName& sort,
                std::vector<ValueRef> args) {
    for (ValueRef a : args) {
      if (!a->defined()) return undefined(sort);
    }
    CtorKey key{decl, std::move(args)};
    auto it = ctors_.find(key);
    if (it != ctors_.end()) return it->second;
    Value v;
    v.kind = Value::Kind::Ctor;
    v.decl = decl;
    v.name = name;
    v.sort = sort;
    v.args = key.args;
    ValueRef ref = pool(std::move(v));
    ctors_.emplace(std::move(key), ref);
    return ref;
  }

  ValueRef atom(const SortName& sort, int index, const std::string& label) {
    std::string key = sort + "\x01" + std::to_string(index);
    auto it = named_.find(key);
    if (it != named_.end()) return it->second;
    Value v;
    v.kind = Value::Kind::Atom;
    v.sort = sort;
    v.atom = index;
    v.name = label;
    return named_[key] = pool(std::move(v));
  }

  ValueRef undefined(const SortName& sort) {
    auto it = undef_.find(sort);
    if (it != undef_.end()) return it->second;
    Value v;
    v.kind = Value::Kind::Undefined;
    v.sort = sort;
    return undef_[sort] = pool(std::move(v));
  }

  size_t size() const { return pool_.size(); }

 private:
  struct CtorKey {
    int decl;
    std::vector<ValueRef> args;
    bool operator==(const CtorKey& o) const { return decl == o.decl && args == o.args; }
  };
  struct CtorKeyHash {
    size_t operator()(const CtorKey& k) const {
      size_t h = static_cast<size_t>(k.decl) * 0x9e3779b97f4a7c15ull;
      for (ValueRef a : k.args) h = h * 1000003 + a->id;
      return h;
    }
  };

  ValueRef pool(Value v) {
    auto holder = std::make_unique<Value>(std::move(v));
    holder->id = static_cast<uint32_t>(pool_.size());
    ValueRef ref = holder.get();
    pool_.push_back(std::move(holder));
    return ref;
  }

  std::unordered_map<CtorKey, ValueRef, CtorKeyHash> ctors_;
  std::unordered_map<std::string, ValueRef> named_;
  std::unordered_map<std::string, ValueRef> undef_;
  std::vector<std::unique_ptr<Value>> pool_;
};

// Strong equality: defined values compare structurally (pointer equality in
// one store); Undefined values of sorts with a common supersort are equal.
inline bool value_equal(const Signature& sig, ValueRef a, ValueRef b) {
  if (a == b) return true;
  if (!a->defined() && !b->defined()) return sig.common_supersort(a->sort, b->sort);
  return false;
}

inline std::string value_display(ValueRef v) {
  switch (v->kind) {
    case Value::Kind::Undefined:
      return "undef";
    case Value::Kind::Atom:
      return v->name;
    case Value::Kind::Ctor: {
      if (v->args.empty()) return v->name;
      std::string out = v->name + "(";
      for (size_t i = 0; i < v->args.size(); ++i) out += (i ? "," : "") + value_display(v->args[i]);
      return out + ")";
    }
  }
  return "?";
}

// Deterministic ordering used by value enumeration: by size of the value's
// own-sort footprint first, then structurally.
inline bool value_before(ValueRef a, ValueRef b) { return a->id < b->id; }

}  // namespace speck
