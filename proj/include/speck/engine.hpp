#pragma once

// Bounded checking engine: enumerates ground values up to per-sort bounds,
// orients executable axioms into conditional rewrite rules, evaluates terms
// and formulas under strong-equality / definedness semantics, and checks all
// axioms exhaustively at the configured bounds.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "speck/elaborate.hpp"
#include "speck/kernel.hpp"

namespace speck {

struct CarrierConfig {
  std::map<SortName, int> bounds;    // per-sort generation bounds (constructor nodes)
  std::map<SortName, int> carriers;  // per-opaque-sort atom counts
  long fuel = 10000;

  int bound_for(const SortName& s) const {
    auto it = bounds.find(s);
    return it != bounds.end() ? it->second : 4;
  }

  int carrier_for(const SortName& s) const {
    auto it = carriers.find(s);
    if (it != carriers.end()) {
      if (it->second < 1) fail("no-carrier", "carrier for '" + s + "' must be at least 1");
      return it->second;
    }
    if (s == "Id") return 3;
    if (s == "Point") return 4;
    if (s == "Token" || s == "Command") return 2;
    if (s == "Class") return static_cast<int>(class_constant_names().size());
    return 1;
  }

  void validate() const {
    if (fuel < 1) fail("no-carrier", "fuel must be at least 1");
    for (const auto& [s, n] : carriers) {
      if (n < 1) fail("no-carrier", "carrier for '" + s + "' must be at least 1");
    }
    for (const auto& [s, n] : bounds) {
      if (n < 1) fail("no-carrier", "bound for '" + s + "' must be at least 1");
    }
  }
};

// ---------------------------------------------------------------------------

struct Rule {
  int axiom = -1;  // index into FlatSpec::axioms
  std::optional<Formula> condition;
  Term lhs;                           // f(p1..pn), constructor patterns
  Term rhs;                           // used unless formula_rhs is set
  std::optional<Formula> formula_rhs; // definitional: lhs rewrites to a truth value
};

struct RuleSet {
  std::vector<Rule> rules;
  std::vector<Rule> undef_rules;  // patterns rewritten to the undefined element
  std::vector<int> checks;        // axiom indices with no rule orientation
  std::map<int, std::vector<int>> rules_by_decl;
  std::map<int, std::vector<int>> undef_by_decl;

  bool decl_has_rules(int decl) const {
    return rules_by_decl.count(decl) || undef_by_decl.count(decl);
  }
};

namespace detail {

inline bool is_ctor_pattern(const Signature& sig, const Term& t) {
  if (t.kind == Term::Kind::Var) return true;
  if (t.kind != Term::Kind::App) return false;
  if (!sig.funs[t.decl].is_constructor) return false;
  for (const auto& a : t.args) {
    if (!is_ctor_pattern(sig, a)) return false;
  }
  return true;
}

inline bool rule_shaped(const Signature& sig, const Term& t, std::set<std::string>* vars) {
  if (t.kind != Term::Kind::App) return false;
  if (sig.funs[t.decl].is_constructor) return false;
  std::set<std::string> seen;
  for (const auto& a : t.args) {
    if (!is_ctor_pattern(sig, a)) return false;
    std::set<std::string> here;
    a.collect_vars(here);
    for (const auto& v : here) {
      if (!seen.insert(v).second) return false;  // non-linear
    }
  }
  if (vars) *vars = std::move(seen);
  return true;
}

inline bool is_true_const(const Signature& sig, const Term& t) {
  return t.kind == Term::Kind::App && t.args.empty() && sig.funs[t.decl].name == "true" &&
         sig.funs[t.decl].result_sort == "bool";
}

}  // namespace detail

// Classifies every axiom: equations and definitional equivalences with
// rule-shaped left sides become rewrite rules, ~(def(lhs)) becomes an
// undefinedness rule, everything else is checked by enumeration only.
// Rule-oriented axioms are re-checked as formulas as well.
inline RuleSet orient(const FlatSpec& flat) {
  RuleSet rs;
  const Signature& sig = flat.sig;

  for (size_t idx = 0; idx < flat.axioms.size(); ++idx) {
    const Formula* f = &flat.axioms[idx].formula;
    while (f->kind == Formula::Kind::Forall) f = &f->sub[0];

    auto add_rule = [&](Rule r) {
      r.axiom = static_cast<int>(idx);
      rs.rules_by_decl[r.lhs.decl].push_back(static_cast<int>(rs.rules.size()));
      rs.rules.push_back(std::move(r));
    };

    auto try_equation = [&](const Formula& eq, const Formula* cond) -> bool {
      if (eq.kind != Formula::Kind::Eq) return false;
      std::set<std::string> lhs_vars;
      if (!detail::rule_shaped(sig, eq.lhs, &lhs_vars)) return false;
      std::set<std::string> rhs_vars;
      eq.rhs.collect_vars(rhs_vars);
      for (const auto& v : rhs_vars) {
        if (!lhs_vars.count(v)) return false;
      }
      if (cond) {
        for (const auto& v : cond->free_vars()) {
          if (!lhs_vars.count(v)) return false;
        }
      }
      Rule r;
      if (cond) r.condition = *cond;
      r.lhs = eq.lhs;
      r.rhs = eq.rhs;
      add_rule(std::move(r));
      return true;
    };

    // (a) plain equations, (b) conditional equations
    if (f->kind == Formula::Kind::Eq && try_equation(*f, nullptr)) continue;
    if (f->kind == Formula::Kind::Implies && f->sub[1].kind == Formula::Kind::Eq &&
        try_equation(f->sub[1], &f->sub[0]))
      continue;

    // (c) undefinedness: ~(def(lhs))
    if (f->kind == Formula::Kind::Not && f->sub[0].kind == Formula::Kind::Defined) {
      const Term& lhs = f->sub[0].lhs;
      if (detail::rule_shaped(sig, lhs, nullptr)) {
        Rule r;
        r.axiom = static_cast<int>(idx);
        r.lhs = lhs;
        rs.undef_by_decl[lhs.decl].push_back(static_cast<int>(rs.undef_rules.size()));
        rs.undef_rules.push_back(std::move(r));
        continue;
      }
    }

    // Negated boolean application: ~(P(args)) fixes P(args) = false.
    if (f->kind == Formula::Kind::Not && f->sub[0].kind == Formula::Kind::Eq &&
        detail::is_true_const(sig, f->sub[0].rhs)) {
      std::set<std::string> lhs_vars;
      if (detail::rule_shaped(sig, f->sub[0].lhs, &lhs_vars)) {
        const FunDecl* false_decl = sig.find("false", "bool");
        Rule r;
        r.lhs = f->sub[0].lhs;
        r.rhs = Term::make_app(sig.decl_index(false_decl), {});
        add_rule(std::move(r));
        continue;
      }
    }

    // (d) definitional equivalences: P(args) <=> phi.
    if (f->kind == Formula::Kind::Iff) {
      auto try_def = [&](const Formula& head, const Formula& body) -> bool {
        if (head.kind != Formula::Kind::Eq || !detail::is_true_const(sig, head.rhs)) return false;
        std::set<std::string> lhs_vars;
        if (!detail::rule_shaped(sig, head.lhs, &lhs_vars)) return false;
        for (const auto& v : body.free_vars()) {
          if (!lhs_vars.count(v)) return false;
        }
        Rule r;
        r.lhs = head.lhs;
        r.formula_rhs = body;
        add_rule(std::move(r));
        return true;
      };
      if (try_def(f->sub[0], f->sub[1])) continue;
      if (try_def(f->sub[1], f->sub[0])) continue;
    }

    rs.checks.push_back(static_cast<int>(idx));
  }
  return rs;
}

// ---------------------------------------------------------------------------

class Context;
using NativeFn = std::function<ValueRef(Context&, const std::vector<ValueRef>&)>;

// One system instance: universes and natives whose meaning depends on a
// particular system value (e.g. next-handler links of one runtime tree).
struct SystemInstance {
  std::string label;
  std::map<SortName, std::vector<ValueRef>> universes;
  std::map<int, NativeFn> natives;
};

struct ModelBinding {
  std::map<SortName, std::vector<ValueRef>> universes;  // shared across instances
  std::map<int, NativeFn> natives;                      // shared natives
  std::vector<SystemInstance> instances;

  bool decl_is_native(int decl) const {
    if (natives.count(decl)) return true;
    for (const auto& inst : instances) {
      if (inst.natives.count(decl)) return true;
    }
    return false;
  }
};

struct FuelExhausted {
  std::string symbol;
};

struct OverlappingRules {
  std::string message;
};

class Context {
 public:
  Context(const FlatSpec& flat, const RuleSet& rules, CarrierConfig config, ValueStore& store,
          const ModelBinding* model = nullptr)
      : flat_(flat), rules_(rules), config_(std::move(config)), store_(store), model_(model) {
    config_.validate();
    const FunDecl* t = flat.sig.find("true", "bool");
    const FunDecl* f = flat.sig.find("false", "bool");
    true_ = store_.ctor(flat.sig.decl_index(t), "true", "bool", {});
    false_ = store_.ctor(flat.sig.decl_index(f), "false", "bool", {});
  }

  const FlatSpec& flat() const { return flat_; }
  const RuleSet& rules() const { return rules_; }
  const CarrierConfig& config() const { return config_; }
  ValueStore& store() { return store_; }
  const ModelBinding* model() const { return model_; }
  ValueRef true_value() const { return true_; }
  ValueRef false_value() const { return false_; }
  ValueRef bool_value(bool b) const { return b ? true_ : false_; }

  void set_instance(int index) { instance_ = index; }
  int instance() const { return instance_; }

  // -- evaluation entry points --

  using Env = std::vector<std::pair<std::string, ValueRef>>;

  ValueRef lookup(const Env& env, const std::string& var) const {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      if (it->first == var) return it->second;
    }
    fail("internal", "unbound variable '" + var + "'");
  }

  // Resets the fuel budget; use for each top-level obligation.
  void begin_obligation() {
    steps_ = 0;
    underspec_epoch_++;
  }

  bool touched_underspecified() const { return touched_; }
  void clear_touched() { touched_ = false; touched_symbol_.clear(); }
  const std::string& touched_symbol() const { return touched_symbol_; }

  ValueRef eval_term(const Term& t, const Env& env) {
    switch (t.kind) {
      case Term::Kind::Var:
        return lookup(env, t.var);
      case Term::Kind::Bottom:
        return store_.undefined(t.sort);
      case Term::Kind::App: {
        std::vector<ValueRef> args;
        args.reserve(t.args.size());
        for (const auto& a : t.args) args.push_back(eval_term(a, env));
        return apply(t.decl, std::move(args));
      }
    }
    fail("internal", "bad term");
  }

  ValueRef apply(int decl, std::vector<ValueRef> args) {
    const FunDecl& d = flat_.sig.funs[decl];
    if (d.is_constructor) return store_.ctor(decl, d.name, d.result_sort, std::move(args));

    bool scoped = instance_scoped(decl);
    if (args.empty() && !scoped) {
      // Constant fast path: evaluated once per run.
      if (nullary_memo_.size() < flat_.sig.funs.size())
        nullary_memo_.resize(flat_.sig.funs.size());
      auto& slot = nullary_memo_[decl];
      if (slot.result) {
        if (slot.underspec) mark_underspecified(d.name);
        return slot.result;
      }
    }

    MemoKey key{decl, scoped ? instance_ : -1, std::move(args)};
    auto found = memo_.find(key);
    if (found != memo_.end()) {
      if (found->second.underspec) mark_underspecified(d.name);
      return found->second.result;
    }

    ValueRef result = nullptr;
    bool before = touched_;
    std::string before_sym = touched_symbol_;
    touched_ = false;

    if (is_strict(d.totality)) {
      for (ValueRef a : key.args) {
        if (!a->defined()) {
          result = store_.undefined(d.result_sort);
          break;
        }
      }
    }
    if (!result) {
      if (const NativeFn* native = find_native(decl)) {
        result = (*native)(*this, key.args);
      } else {
        result = apply_rules(decl, d, key.args);
      }
    }

    bool here = touched_;
    touched_ = before || here;
    if (!here) touched_symbol_ = before_sym;
    if (key.args.empty() && !scoped) nullary_memo_[decl] = MemoEntry{result, here};
    memo_.emplace(std::move(key), MemoEntry{result, here});
    return result;
  }

  bool eval_formula(const Formula& f, Env& env) {
    switch (f.kind) {
      case Formula::Kind::Eq:
        return value_equal(flat_.sig, eval_term(f.lhs, env), eval_term(f.rhs, env));
      case Formula::Kind::Defined:
        return eval_term(f.lhs, env)->defined();
      case Formula::Kind::Not:
        return !eval_formula(f.sub[0], env);
      case Formula::Kind::And:
        return eval_formula(f.sub[0], env) && eval_formula(f.sub[1], env);
      case Formula::Kind::Or:
        return eval_formula(f.sub[0], env) || eval_formula(f.sub[1], env);
      case Formula::Kind::Implies:
        return !eval_formula(f.sub[0], env) || eval_formula(f.sub[1], env);
      case Formula::Kind::Iff:
        return eval_formula(f.sub[0], env) == eval_formula(f.sub[1], env);
      case Formula::Kind::Forall:
        return eval_forall(f, env);
    }
    fail("internal", "bad formula");
  }

  // The finite, deterministically ordered universe of a sort: model-provided
  // when bound, otherwise exhaustively generated at the configured bounds.
  // Includes the values of all subsorts.
  const std::vector<ValueRef>& universe(const SortName& sort) {
    if (model_) {
      if (instance_ >= 0) {
        const auto& inst = model_->instances[instance_].universes;
        auto it = inst.find(sort);
        if (it != inst.end()) return it->second;
      }
      auto it = model_->universes.find(sort);
      if (it != model_->universes.end()) return it->second;
    }
    auto cached = universe_cache_.find(sort);
    if (cached != universe_cache_.end()) return cached->second;
    generate_all();
    cached = universe_cache_.find(sort);
    if (cached == universe_cache_.end())
      fail("no-carrier", "no values for sort '" + sort + "'");
    return cached->second;
  }

 private:
  struct MemoKey {
    int decl;
    int instance;
    std::vector<ValueRef> args;
    bool operator==(const MemoKey& o) const {
      return decl == o.decl && instance == o.instance && args == o.args;
    }
  };
  struct MemoKeyHash {
    size_t operator()(const MemoKey& k) const {
      size_t h = std::hash<int>()(k.decl) * 31 + std::hash<int>()(k.instance);
      for (ValueRef v : k.args) h = h * 1000003 + v->id;
      return h;
    }
  };
  struct MemoEntry {
    ValueRef result;
    bool underspec;
  };

  const FlatSpec& flat_;
  const RuleSet& rules_;
  CarrierConfig config_;
  ValueStore& store_;
  const ModelBinding* model_;
  int instance_ = -1;
  ValueRef true_ = nullptr;
  ValueRef false_ = nullptr;

  long steps_ = 0;
  int underspec_epoch_ = 0;
  bool touched_ = false;
  std::string touched_symbol_;

  std::unordered_map<MemoKey, MemoEntry, MemoKeyHash> memo_;
  std::vector<MemoEntry> nullary_memo_;
  std::map<SortName, std::vector<ValueRef>> universe_cache_;
  std::map<SortName, std::vector<ValueRef>> own_values_;
  std::unordered_map<ValueRef, int> total_nodes_;

  bool instance_scoped(int decl) const {
    if (!model_) return false;
    for (const auto& inst : model_->instances) {
      if (inst.natives.count(decl)) return true;
    }
    return false;
  }

  const NativeFn* find_native(int decl) const {
    if (!model_) return nullptr;
    if (instance_ >= 0) {
      const auto& inst = model_->instances[instance_].natives;
      auto it = inst.find(decl);
      if (it != inst.end()) return &it->second;
    }
    auto it = model_->natives.find(decl);
    if (it != model_->natives.end()) return &it->second;
    return nullptr;
  }

  void mark_underspecified(const std::string& symbol) {
    touched_ = true;
    if (touched_symbol_.empty()) touched_symbol_ = symbol;
  }

  bool match(const Term& pat, ValueRef v, Env& binding) {
    if (pat.kind == Term::Kind::Var) {
      binding.push_back({pat.var, v});
      return true;
    }
    // Constructor pattern: never matches atoms or the undefined element.
    if (v->kind != Value::Kind::Ctor || v->decl != pat.decl) return false;
    for (size_t i = 0; i < pat.args.size(); ++i) {
      if (!match(pat.args[i], v->args[i], binding)) return false;
    }
    return true;
  }

  ValueRef fire(const Rule& rule, Env& binding) {
    if (++steps_ > config_.fuel) throw FuelExhausted{flat_.sig.funs[rule.lhs.decl].name};
    if (rule.formula_rhs) return bool_value(eval_formula(*rule.formula_rhs, binding));
    return eval_term(rule.rhs, binding);
  }

  ValueRef apply_rules(int decl, const FunDecl& d, const std::vector<ValueRef>& args) {
    auto undef_it = rules_.undef_by_decl.find(decl);
    if (undef_it != rules_.undef_by_decl.end()) {
      for (int ri : undef_it->second) {
        const Rule& rule = rules_.undef_rules[ri];
        Env binding;
        bool ok = true;
        for (size_t i = 0; i < args.size() && ok; ++i) ok = match(rule.lhs.args[i], args[i], binding);
        if (ok) return store_.undefined(d.result_sort);
      }
    }

    auto rit = rules_.rules_by_decl.find(decl);
    ValueRef result = nullptr;
    int fired_axiom = -1;
    if (rit != rules_.rules_by_decl.end()) {
      for (int ri : rit->second) {
        const Rule& rule = rules_.rules[ri];
        Env binding;
        bool ok = true;
        for (size_t i = 0; i < args.size() && ok; ++i) ok = match(rule.lhs.args[i], args[i], binding);
        if (!ok) continue;
        if (rule.condition && !eval_formula(*rule.condition, binding)) continue;
        ValueRef r = fire(rule, binding);
        if (!result) {
          result = r;
          fired_axiom = rule.axiom;
        } else if (!value_equal(flat_.sig, result, r)) {
          throw OverlappingRules{"rules from " + flat_.axioms[fired_axiom].id + " and " +
                                 flat_.axioms[rule.axiom].id + " rewrite '" + d.name +
                                 "' to distinct normal forms"};
        }
      }
    }
    if (result) return result;

    // No rule matched. An undefined argument explains the failure. A
    // function with no rules at all is underspecified (its value is left
    // open, so obligations touching it are skipped rather than failed); a
    // rule-bearing function that misses a defined input is an ordinary
    // undefined result and can falsify an axiom.
    for (ValueRef a : args) {
      if (!a->defined()) return store_.undefined(d.result_sort);
    }
    if (!rules_.decl_has_rules(decl)) mark_underspecified(d.name);
    return store_.undefined(d.result_sort);
  }

  // ---- bounded universal quantification ----

  // Recognizes `forall x in ... (x elem t) /\ ... => body` and iterates the
  // members of t instead of the whole carrier of x's sort.
  const Term* find_member_guard(const std::string& var, const Formula& f, const Env& env) {
    const Formula* cur = &f;
    while (cur->kind == Formula::Kind::Forall) {
      if (cur->var == var) return nullptr;  // shadowed
      cur = &cur->sub[0];
    }
    if (cur->kind != Formula::Kind::Implies) return nullptr;
    std::vector<const Formula*> conjuncts{&cur->sub[0]};
    for (size_t i = 0; i < conjuncts.size(); ++i) {
      if (conjuncts[i]->kind == Formula::Kind::And) {
        conjuncts.push_back(&conjuncts[i]->sub[0]);
        conjuncts.push_back(&conjuncts[i]->sub[1]);
      }
    }
    for (const Formula* c : conjuncts) {
      if (c->kind != Formula::Kind::Eq) continue;
      if (!detail::is_true_const(flat_.sig, c->rhs)) continue;
      const Term& app = c->lhs;
      if (app.kind != Term::Kind::App) continue;
      if (flat_.sig.funs[app.decl].name != ".elem.") continue;
      if (app.args.size() != 2) continue;
      if (app.args[0].kind != Term::Kind::Var || app.args[0].var != var) continue;
      std::set<std::string> tvars;
      app.args[1].collect_vars(tvars);
      bool closed = !tvars.count(var);
      for (const auto& v : tvars) {
        bool bound = false;
        for (const auto& [name, _] : env) bound = bound || name == v;
        closed = closed && bound;
      }
      if (closed) return &app.args[1];
    }
    return nullptr;
  }

  static std::optional<std::vector<ValueRef>> list_elements(ValueRef v) {
    std::vector<ValueRef> out;
    while (v->kind == Value::Kind::Ctor) {
      if (v->args.empty()) return out;
      if (v->args.size() == 2 && v->args[1]->sort == v->sort) {
        out.push_back(v->args[0]);
        v = v->args[1];
        continue;
      }
      return std::nullopt;
    }
    return std::nullopt;
  }

  bool eval_forall(const Formula& f, Env& env) {
    if (const Term* guard = find_member_guard(f.var, f.sub[0], env)) {
      ValueRef seq = eval_term(*guard, env);
      auto elements = seq->defined() ? list_elements(seq) : std::nullopt;
      if (elements) {
        std::set<ValueRef> seen;
        env.push_back({f.var, nullptr});
        for (ValueRef v : *elements) {
          if (!seen.insert(v).second) continue;
          env.back().second = v;
          if (!eval_formula(f.sub[0], env)) {
            env.pop_back();
            return false;
          }
        }
        env.pop_back();
        return true;
      }
    }
    const auto& values = universe(f.var_sort);
    env.push_back({f.var, nullptr});
    for (ValueRef v : values) {
      env.back().second = v;
      if (!eval_formula(f.sub[0], env)) {
        env.pop_back();
        return false;
      }
    }
    env.pop_back();
    return true;
  }

  // ---- exhaustive value generation ----

  int total_nodes(ValueRef v) {
    auto it = total_nodes_.find(v);
    if (it != total_nodes_.end()) return it->second;
    int n = 0;
    if (v->kind == Value::Kind::Ctor) {
      n = 1;
      for (ValueRef a : v->args) n += total_nodes(a);
    }
    return total_nodes_[v] = n;
  }

  int sort_nodes(ValueRef v, const SortName& s) {
    int n = 0;
    if (v->kind == Value::Kind::Ctor) {
      if (v->sort == s) n = 1;
      for (ValueRef a : v->args) n += sort_nodes(a, s);
    }
    return n;
  }

  bool value_less(ValueRef a, ValueRef b) {
    int ta = total_nodes(a), tb = total_nodes(b);
    if (ta != tb) return ta < tb;
    if (a->kind != b->kind) return a->kind < b->kind;
    if (a->kind == Value::Kind::Atom) {
      if (a->sort != b->sort) return a->sort < b->sort;
      return a->atom < b->atom;
    }
    if (a->kind == Value::Kind::Ctor) {
      if (a->decl != b->decl) return ctor_rank(a) < ctor_rank(b);
      for (size_t i = 0; i < a->args.size(); ++i) {
        if (a->args[i] != b->args[i]) return value_less(a->args[i], b->args[i]);
      }
      return false;
    }
    return a->sort < b->sort;
  }

  // Order constructors by their position in the generated-by clause.
  int ctor_rank(ValueRef v) {
    const auto& ctors = flat_.sig.constructors_of(v->sort);
    const std::string& name = flat_.sig.funs[v->decl].name;
    for (size_t i = 0; i < ctors.size(); ++i) {
      if (ctors[i] == name) return static_cast<int>(i);
    }
    return static_cast<int>(ctors.size());
  }

  void generate_all() {
    if (!universe_cache_.empty()) return;

    std::vector<SortName> generated;
    for (const auto& s : flat_.sig.sorts) {
      if (flat_.sig.has_constructors(s)) {
        generated.push_back(s);
      } else {
        // Opaque sort: a finite carrier of atoms.
        std::vector<ValueRef> atoms;
        int n = config_.carrier_for(s);
        for (int i = 0; i < n; ++i) atoms.push_back(store_.atom(s, i, atom_label(s, i)));
        own_values_[s] = std::move(atoms);
      }
    }

    // Joint fixpoint over the mutually recursive generated sorts.
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& s : generated) {
        for (const auto& cname : flat_.sig.constructors_of(s)) {
          const FunDecl* cd = flat_.sig.find(cname, s);
          int ci = flat_.sig.decl_index(cd);
          std::vector<std::vector<ValueRef>> pools;
          bool viable = true;
          for (const auto& arg_sort : cd->arg_sorts) {
            pools.push_back(values_at_or_below(arg_sort));
            viable = viable && !pools.back().empty();
          }
          if (!viable) continue;
          std::vector<size_t> odo(pools.size(), 0);
          for (;;) {
            std::vector<ValueRef> combo;
            for (size_t k = 0; k < pools.size(); ++k) combo.push_back(pools[k][odo[k]]);
            ValueRef v = store_.ctor(ci, cname, s, std::move(combo));
            if (within_bounds(v)) {
              auto& own = own_values_[s];
              if (std::find(own.begin(), own.end(), v) == own.end()) {
                own.push_back(v);
                grew = true;
              }
            }
            size_t k = 0;
            while (k < pools.size() && ++odo[k] == pools[k].size()) odo[k++] = 0;
            if (k == pools.size()) break;
          }
        }
      }
    }

    for (const auto& s : flat_.sig.sorts) {
      std::vector<ValueRef> all = values_at_or_below(s);
      std::sort(all.begin(), all.end(), [this](ValueRef a, ValueRef b) { return value_less(a, b); });
      universe_cache_[s] = std::move(all);
    }
  }

  std::vector<ValueRef> values_at_or_below(const SortName& s) {
    std::vector<ValueRef> out;
    for (const auto& t : flat_.sig.sorts_at_or_below(s)) {
      auto it = own_values_.find(t);
      if (it == own_values_.end()) continue;
      for (ValueRef v : it->second) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
      }
    }
    return out;
  }

  bool within_bounds(ValueRef v) {
    if (!v->defined()) return false;
    if (sort_nodes(v, v->sort) > config_.bound_for(v->sort)) return false;
    // Nested sorts are already within their own bounds by construction.
    return true;
  }

  std::string atom_label(const SortName& s, int index) {
    if (s == "Class" && index < static_cast<int>(class_constant_names().size()))
      return class_constant_names()[index];
    std::string base = s;
    base[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(base[0])));
    return base + std::to_string(index);
  }
};

// Convenience: exhaustive enumeration of one sort (ordered stream).
inline std::vector<ValueRef> gen_values(Context& ctx, const SortName& sort) {
  return ctx.universe(sort);
}

inline ValueRef normalize(Context& ctx, const Term& t) {
  Context::Env env;
  return ctx.eval_term(t, env);
}

}  // namespace speck
