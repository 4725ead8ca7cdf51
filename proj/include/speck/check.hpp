#pragma once

// Exhaustive bounded checking of a flat specification: every axiom (rules
// included, to catch orientation bugs) is evaluated over all bindings of its
// quantified variables; declared strict-total functions are audited for
// definedness; declarations with no computational meaning are reported as
// skipped.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "speck/engine.hpp"

namespace speck {

enum class Verdict { Pass, Counterexample, SkippedUnderspecified, FuelExhausted };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Counterexample: return "counterexample";
    case Verdict::SkippedUnderspecified: return "skipped-underspecified";
    case Verdict::FuelExhausted: return "fuel-exhausted";
  }
  return "?";
}

struct CheckReport {
  std::string axiom_id;
  std::string module;
  Verdict verdict = Verdict::Pass;
  int depth = 0;
  long enumerated = 0;
  std::vector<std::pair<std::string, std::string>> bindings;  // on counterexample
  std::string detail;
  Span span;
};

namespace detail {

struct Binder {
  std::string var;
  SortName sort;
};

inline const Formula* peel(const Formula& f, std::vector<Binder>& binders) {
  const Formula* cur = &f;
  while (cur->kind == Formula::Kind::Forall) {
    binders.push_back({cur->var, cur->var_sort});
    cur = &cur->sub[0];
  }
  return cur;
}

}  // namespace detail

// Checks one closed formula over all bindings of its leading universals.
inline CheckReport check_formula(Context& ctx, const std::string& id, const Formula& formula,
                                 Span span = {}) {
  CheckReport report;
  report.axiom_id = id;
  report.module = ctx.flat().name;
  report.span = span;

  std::vector<detail::Binder> binders;
  const Formula* core = detail::peel(formula, binders);

  std::vector<const std::vector<ValueRef>*> pools;
  for (const auto& b : binders) {
    pools.push_back(&ctx.universe(b.sort));
    report.depth = std::max(report.depth, ctx.config().bound_for(b.sort));
  }
  for (const auto* p : pools) {
    if (p->empty()) return report;  // vacuous
  }

  bool saw_skip = false;
  std::string skip_symbol;
  std::vector<size_t> odo(binders.size(), 0);
  Context::Env env;
  for (const auto& b : binders) env.push_back({b.var, nullptr});

  for (;;) {
    for (size_t i = 0; i < binders.size(); ++i) env[i].second = (*pools[i])[odo[i]];
    ++report.enumerated;
    ctx.begin_obligation();
    ctx.clear_touched();
    bool ok;
    try {
      ok = ctx.eval_formula(*core, env);
    } catch (const FuelExhausted& fe) {
      report.verdict = Verdict::FuelExhausted;
      report.detail = "fuel exhausted while rewriting '" + fe.symbol + "'";
      return report;
    }
    if (!ok && !ctx.touched_underspecified()) {
      // Self-validating counterexample: replay the binding before reporting.
      ctx.begin_obligation();
      bool replay = ctx.eval_formula(*core, env);
      if (replay) fail("internal", "counterexample for " + id + " did not replay");
      report.verdict = Verdict::Counterexample;
      for (size_t i = 0; i < binders.size(); ++i)
        report.bindings.push_back({binders[i].var, value_display(env[i].second)});
      return report;
    }
    if (ctx.touched_underspecified()) {
      saw_skip = true;
      if (skip_symbol.empty()) skip_symbol = ctx.touched_symbol();
    }

    size_t k = 0;
    while (k < odo.size() && ++odo[k] == pools[k]->size()) odo[k++] = 0;
    if (k == odo.size() || binders.empty()) break;
  }

  if (saw_skip) {
    report.verdict = Verdict::SkippedUnderspecified;
    report.detail = "mentions underspecified '" + skip_symbol + "'";
  }
  return report;
}

// All axioms of the flat spec, in declaration order, for the current
// instance of the context.
inline std::vector<CheckReport> check_axioms(Context& ctx) {
  std::vector<CheckReport> out;
  for (const auto& ax : ctx.flat().axioms) {
    out.push_back(check_formula(ctx, ax.id, ax.formula, ax.span));
  }
  return out;
}

// Totality audit: for a declared strict-total function, delta(f(args)) must
// hold over all defined argument tuples at the bounds.
inline CheckReport audit_one_totality(Context& ctx, const std::string& id, int decl) {
  const FunDecl& d = ctx.flat().sig.funs[decl];
  CheckReport report;
  report.axiom_id = id;
  report.module = ctx.flat().name;

  std::vector<const std::vector<ValueRef>*> pools;
  for (const auto& s : d.arg_sorts) {
    pools.push_back(&ctx.universe(s));
    report.depth = std::max(report.depth, ctx.config().bound_for(s));
  }
  for (const auto* p : pools) {
    if (p->empty()) return report;
  }

  bool saw_skip = false;
  std::vector<size_t> odo(pools.size(), 0);
  for (;;) {
    std::vector<ValueRef> args;
    for (size_t k = 0; k < pools.size(); ++k) args.push_back((*pools[k])[odo[k]]);
    ++report.enumerated;
    ctx.begin_obligation();
    ctx.clear_touched();
    ValueRef r;
    try {
      r = ctx.apply(decl, args);
    } catch (const FuelExhausted& fe) {
      report.verdict = Verdict::FuelExhausted;
      report.detail = "fuel exhausted while rewriting '" + fe.symbol + "'";
      break;
    }
    if (ctx.touched_underspecified()) {
      saw_skip = true;
    } else if (!r->defined()) {
      report.verdict = Verdict::Counterexample;
      for (size_t k = 0; k < args.size(); ++k)
        report.bindings.push_back({"arg" + std::to_string(k + 1), value_display(args[k])});
      break;
    }
    size_t k = 0;
    while (k < odo.size() && ++odo[k] == pools[k]->size()) odo[k++] = 0;
    if (k == odo.size() || pools.empty()) break;
  }
  if (report.verdict == Verdict::Pass && saw_skip) {
    report.verdict = Verdict::SkippedUnderspecified;
    report.detail = "no rules for '" + d.name + "'";
  }
  return report;
}

inline std::vector<CheckReport> audit_totality(Context& ctx) {
  std::vector<CheckReport> out;
  const Signature& sig = ctx.flat().sig;
  for (size_t i = 0; i < sig.funs.size(); ++i) {
    const FunDecl& d = sig.funs[i];
    if (d.totality != Totality::StrictTotal || d.is_constructor) continue;
    std::string id = "total:" + d.name;
    for (const auto& s : d.arg_sorts) id += ":" + s;
    out.push_back(audit_one_totality(ctx, id, static_cast<int>(i)));
  }
  return out;
}

// Declarations with no rules, no undefinedness rules and no native backing
// cannot be evaluated; they are reported once each.
inline std::vector<CheckReport> report_unspecified_decls(const FlatSpec& flat, const RuleSet& rules,
                                                         const ModelBinding* model) {
  std::vector<CheckReport> out;
  for (size_t i = 0; i < flat.sig.funs.size(); ++i) {
    const FunDecl& d = flat.sig.funs[i];
    if (d.is_constructor) continue;
    if (rules.decl_has_rules(static_cast<int>(i))) continue;
    if (model && model->decl_is_native(static_cast<int>(i))) continue;
    CheckReport report;
    report.axiom_id = "decl:" + d.name;
    report.module = flat.name;
    report.verdict = Verdict::SkippedUnderspecified;
    report.detail = "signature only; no axioms constrain '" + d.name + "'";
    out.push_back(std::move(report));
  }
  return out;
}

inline int verdict_rank(Verdict v) {
  switch (v) {
    case Verdict::Counterexample: return 3;
    case Verdict::FuelExhausted: return 2;
    case Verdict::SkippedUnderspecified: return 1;
    case Verdict::Pass: return 0;
  }
  return 0;
}

// Merge per-instance report lists (same ids in the same order).
inline void merge_reports(std::vector<CheckReport>& into, const std::vector<CheckReport>& add,
                          const std::string& instance_label) {
  if (into.empty()) {
    into = add;
    for (auto& r : into) {
      if (r.verdict == Verdict::Counterexample && !instance_label.empty())
        r.detail = "in " + instance_label + (r.detail.empty() ? "" : "; " + r.detail);
    }
    return;
  }
  for (size_t i = 0; i < into.size(); ++i) {
    into[i].enumerated += add[i].enumerated;
    if (verdict_rank(add[i].verdict) > verdict_rank(into[i].verdict)) {
      into[i].verdict = add[i].verdict;
      into[i].bindings = add[i].bindings;
      into[i].detail = add[i].detail;
      if (add[i].verdict == Verdict::Counterexample && !instance_label.empty())
        into[i].detail = "in " + instance_label + (add[i].detail.empty() ? "" : "; " + add[i].detail);
    }
  }
}

struct CheckRun {
  std::vector<CheckReport> reports;
  bool has(Verdict v) const {
    for (const auto& r : reports) {
      if (r.verdict == v) return true;
    }
    return false;
  }
};

namespace detail {

inline void collect_decls(const Term& t, std::set<int>& out) {
  if (t.kind == Term::Kind::App) out.insert(t.decl);
  for (const auto& a : t.args) collect_decls(a, out);
}

inline void collect_mentions(const Formula& f, std::set<int>& decls, std::set<SortName>& sorts) {
  if (f.kind == Formula::Kind::Eq || f.kind == Formula::Kind::Defined) {
    collect_decls(f.lhs, decls);
    if (f.kind == Formula::Kind::Eq) collect_decls(f.rhs, decls);
  }
  if (f.kind == Formula::Kind::Forall) sorts.insert(f.var_sort);
  for (const auto& s : f.sub) collect_mentions(s, decls, sorts);
}

// A formula depends on the system instance exactly when it applies an
// instance-scoped function (the routing links of one runtime tree); all
// other obligations are checked once against the union universes.
inline bool instance_dependent(const Formula& f, const ModelBinding* model) {
  if (!model || model->instances.empty()) return false;
  std::set<int> decls;
  std::set<SortName> sorts;
  collect_mentions(f, decls, sorts);
  for (const auto& inst : model->instances) {
    for (const auto& [decl, _] : inst.natives) {
      if (decls.count(decl)) return true;
    }
  }
  return false;
}

}  // namespace detail

// Full check of a flat spec: axioms, shipped consequences, totality audit,
// and unspecified-declaration records, across all model instances.
// Obligations that do not involve a system instance are checked once.
inline CheckRun check_spec(const FlatSpec& flat, const RuleSet& rules, const CarrierConfig& config,
                           ValueStore& store, const ModelBinding* model,
                           const std::vector<std::pair<std::string, Formula>>& consequences) {
  CheckRun run;
  Context ctx(flat, rules, config, store, model);

  std::set<SortName> instance_sorts;
  if (model) {
    for (const auto& inst : model->instances) {
      for (const auto& [sort, _] : inst.universes) instance_sorts.insert(sort);
    }
  }

  struct Obligation {
    std::string id;
    const Formula* formula;  // null: totality audit of `decl`
    int decl = -1;
    Span span;
    bool dependent = false;
  };
  std::vector<Obligation> obligations;
  for (const auto& ax : flat.axioms) {
    obligations.push_back(
        {ax.id, &ax.formula, -1, ax.span, detail::instance_dependent(ax.formula, model)});
  }
  for (const auto& [id, f] : consequences) {
    obligations.push_back({id, &f, -1, {}, detail::instance_dependent(f, model)});
  }
  for (size_t i = 0; i < flat.sig.funs.size(); ++i) {
    const FunDecl& d = flat.sig.funs[i];
    if (d.totality != Totality::StrictTotal || d.is_constructor) continue;
    std::string id = "total:" + d.name;
    for (const auto& s : d.arg_sorts) id += ":" + s;
    obligations.push_back({id, nullptr, static_cast<int>(i), {}, false});
  }
  (void)instance_sorts;

  int instance_count = model && !model->instances.empty() ? static_cast<int>(model->instances.size()) : 0;
  std::vector<CheckReport> merged;
  // Pass -1 covers the instance-independent obligations over the union
  // universes; each further pass checks the instance-bound ones against one
  // runtime system.
  for (int inst = -1; inst < instance_count; ++inst) {
    ctx.set_instance(inst);
    std::vector<CheckReport> here;
    bool any = false;
    for (const auto& ob : obligations) {
      bool run = inst < 0 ? !ob.dependent : ob.dependent;
      if (!run) {
        CheckReport placeholder;
        placeholder.axiom_id = ob.id;
        placeholder.module = flat.name;
        here.push_back(std::move(placeholder));
        continue;
      }
      any = true;
      if (ob.formula) {
        here.push_back(check_formula(ctx, ob.id, *ob.formula, ob.span));
      } else {
        here.push_back(audit_one_totality(ctx, ob.id, ob.decl));
      }
    }
    if (inst >= 0 && !any) break;  // no instance-bound obligations at all
    merge_reports(merged, here,
                  inst >= 0 && instance_count ? model->instances[inst].label : std::string());
  }
  run.reports = std::move(merged);
  auto skips = report_unspecified_decls(flat, rules, model);
  run.reports.insert(run.reports.end(), skips.begin(), skips.end());
  return run;
}

}  // namespace speck
