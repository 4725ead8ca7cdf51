#pragma once

// Expected theorems shipped with the corpus: formulas the axioms are
// supposed to entail (initiality of sequences, tree addressing laws). They
// are checked at the configured bounds but never oriented into rules.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "speck/elaborate.hpp"
#include "speck/parser.hpp"

namespace speck {

inline const std::map<std::string, std::vector<std::string>>& consequence_sources() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"SimpleSeq",
       {
           "forall a: w; s: seq in <> ~= append(a,s)",
           "forall a,b: w; s,t: seq in (a ~= b \\/ s ~= t) => append(a,s) ~= append(b,t)",
       }},
      {"Seq",
       {
           "forall a: w; s: seq in <> ~= append(a,s)",
           "forall a,b: w; s,t: seq in (a ~= b \\/ s ~= t) => append(a,s) ~= append(b,t)",
       }},
      {"PathTree",
       {
           "forall t: tree; p,q: path in subtree(t, p^q) = subtree(subtree(t,p), q)",
           "forall t: tree; p: path; a: w in def(getvalue(t,p)) => getvalue(setvalue(t,p,a), p) = a",
       }},
      {"EvtHandler",
       {
           "forall t: EHSystem; p,q: path in subtree(t, p^q) = subtree(subtree(t,p), q)",
           "forall t: EHSystem; p: path; a: EvtHandler in "
           "def(gethandler(t,p)) => gethandler(sethandler(t,p,a), p) = a",
       }},
      {"EvtHandlerDefault",
       {
           "forall t: EHSystem; p,q: path in subtree(t, p^q) = subtree(subtree(t,p), q)",
           "forall t: EHSystem; p: path; a: EvtHandler in "
           "def(gethandler(t,p)) => gethandler(sethandler(t,p,a), p) = a",
       }},
  };
  return table;
}

inline std::vector<std::pair<std::string, Formula>> consequences_for(const FlatSpec& flat) {
  std::vector<std::pair<std::string, Formula>> out;
  auto it = consequence_sources().find(flat.name);
  if (it == consequence_sources().end()) return out;
  int n = 0;
  for (const auto& src : it->second) {
    RawExpr raw = parse_expression_source(src);
    Typechecker tc(flat.sig, /*allow_hidden_imports=*/true);
    out.push_back({flat.name + ".cq" + std::to_string(++n), tc.formula(raw, {})});
  }
  return out;
}

}  // namespace speck
