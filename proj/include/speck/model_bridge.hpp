#pragma once

// Bridges the native event-handler model into the engine: handler atoms,
// value encodings of runtime trees, native backings for the tree-addressing
// and routing symbols, and exhaustive population generation.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "speck/ehmodel.hpp"
#include "speck/engine.hpp"

namespace speck {

// Geometry palette per visual class; managers carry none.
inline std::vector<eh::Rect> geometry_options(const std::string& cls) {
  if (cls == "Window") return {eh::Rect{0, 0, 10, 10}};
  if (cls == "Button") return {eh::Rect{2, 2, 3, 3}, eh::Rect{6, 2, 3, 3}};
  return {};
}

struct PopulationOptions {
  int max_handlers = 2;
  bool injective_ids = true;  // false: greedy canonical id assignment
  int id_count = 3;
  std::vector<std::string> classes = {"Application", "Document", "Window", "Button"};
  size_t cap = 100000;
};

namespace detail {

struct NodeKind {
  std::string cls;
  std::optional<eh::Rect> bounds;
};

inline std::vector<NodeKind> node_kinds(const std::vector<std::string>& classes) {
  std::vector<NodeKind> kinds;
  for (const auto& cls : classes) {
    auto geos = geometry_options(cls);
    if (geos.empty()) {
      kinds.push_back({cls, std::nullopt});
    } else {
      for (const auto& r : geos) kinds.push_back({cls, r});
    }
  }
  return kinds;
}

inline void compositions(int total, std::vector<std::vector<int>>& out) {
  for (int first = 1; first <= total; ++first) {
    if (first == total) {
      out.push_back({first});
      continue;
    }
    std::vector<std::vector<int>> rest;
    compositions(total - first, rest);
    for (auto& r : rest) {
      r.insert(r.begin(), first);
      out.push_back(std::move(r));
    }
  }
}

}  // namespace detail

// All part-of trees with up to max_handlers nodes over the class/geometry
// palette. Node identities (class, geometry, id) are pairwise distinct
// within each tree: with injective_ids every id assignment is enumerated,
// otherwise ids are assigned greedily in preorder and assemblies that cannot
// be made distinct are not realizable and are skipped.
inline std::vector<eh::EHTree> generate_population(const PopulationOptions& opt) {
  auto kinds = detail::node_kinds(opt.classes);

  struct Shape {
    int kind;
    std::vector<Shape> sons;
  };
  std::map<int, std::vector<Shape>> shapes_by_size;
  std::function<const std::vector<Shape>&(int)> shapes = [&](int n) -> const std::vector<Shape>& {
    auto it = shapes_by_size.find(n);
    if (it != shapes_by_size.end()) return it->second;
    std::vector<Shape> out;
    if (n >= 1) {
      std::vector<std::vector<int>> comps;
      if (n > 1) detail::compositions(n - 1, comps);
      else comps.push_back({});
      for (int k = 0; k < static_cast<int>(kinds.size()); ++k) {
        for (const auto& comp : comps) {
          std::vector<std::vector<Shape>> pools;
          for (int part : comp) pools.push_back(shapes(part));
          std::vector<size_t> odo(pools.size(), 0);
          for (;;) {
            Shape s;
            s.kind = k;
            for (size_t i = 0; i < pools.size(); ++i) s.sons.push_back(pools[i][odo[i]]);
            out.push_back(std::move(s));
            size_t i = 0;
            while (i < pools.size() && ++odo[i] == pools[i].size()) odo[i++] = 0;
            if (i == pools.size()) break;
          }
          if (pools.empty()) break;  // single labeled leaf per kind handled once
        }
      }
    }
    return shapes_by_size[n] = std::move(out);
  };

  // Fix: a leaf shape per kind (the loop above adds it once because the
  // empty composition list has one entry for n == 1).
  std::vector<eh::EHTree> population;

  auto build = [&](const Shape& shape) -> std::vector<eh::EHTree> {
    // Collect nodes in preorder.
    std::vector<const Shape*> preorder;
    std::function<void(const Shape&)> walk = [&](const Shape& s) {
      preorder.push_back(&s);
      for (const auto& son : s.sons) walk(son);
    };
    walk(shape);
    int n = static_cast<int>(preorder.size());

    std::vector<std::vector<int>> id_choices;
    if (opt.injective_ids) {
      // Every assignment of globally distinct ids.
      std::vector<int> ids(n, 0);
      std::function<void(int)> assign = [&](int i) {
        if (i == n) {
          id_choices.push_back(ids);
          return;
        }
        for (int id = 0; id < opt.id_count; ++id) {
          bool clash = false;
          for (int j = 0; j < i; ++j) clash = clash || ids[j] == id;
          if (clash) continue;
          ids[i] = id;
          assign(i + 1);
        }
      };
      assign(0);
    } else {
      std::vector<int> ids(n, -1);
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        ok = false;
        for (int id = 0; id < opt.id_count; ++id) {
          int candidate = (i + id) % opt.id_count;
          bool clash = false;
          for (int j = 0; j < i; ++j)
            clash = clash || (ids[j] == candidate && preorder[j]->kind == preorder[i]->kind);
          if (!clash) {
            ids[i] = candidate;
            ok = true;
            break;
          }
        }
      }
      if (ok) id_choices.push_back(ids);
    }

    std::vector<eh::EHTree> out;
    for (const auto& ids : id_choices) {
      int counter = 0;
      std::function<eh::EHTree(const Shape&)> assemble = [&](const Shape& s) {
        const auto& kind = kinds[s.kind];
        eh::Handler h = eh::make_handler(kind.cls, ids[counter++], kind.bounds);
        std::vector<eh::EHTree> sons;
        for (const auto& son : s.sons) sons.push_back(assemble(son));
        return eh::EHTree::node(std::move(h), std::move(sons));
      };
      out.push_back(assemble(shape));
    }
    return out;
  };

  for (int n = 1; n <= opt.max_handlers; ++n) {
    for (const auto& shape : shapes(n)) {
      auto labeled = build(shape);
      population.insert(population.end(), labeled.begin(), labeled.end());
      if (population.size() > opt.cap)
        fail("population-too-large", "population exceeds cap of " + std::to_string(opt.cap));
    }
  }
  return population;
}

// ---------------------------------------------------------------------------

struct EhModelData {
  const FlatSpec* flat = nullptr;
  ValueStore* store = nullptr;

  // Resolved declarations.
  int d_theta, d_mktree, d_ts_nil, d_ts_cons, d_zero, d_succ;
  int d_value, d_sonseq, d_gethandler, d_sethandler, d_subtree;
  int d_getid, d_setid, d_gnh, d_fnhoc, d_isa, d_contains, d_conforms, d_validapp;

  std::vector<eh::Handler> palette;
  std::map<std::string, int> palette_index;  // identity key -> palette slot
  std::vector<ValueRef> handler_atoms;
  std::vector<ValueRef> id_atoms;
  std::vector<eh::Point> grid;
  std::vector<ValueRef> point_atoms;
  std::vector<ValueRef> class_atoms;  // order of class_constant_names()

  static std::string identity_key(const eh::Handler& h) {
    std::string key = h.cls + "|" + std::to_string(h.id);
    if (h.bounds)
      key += "|" + std::to_string(h.bounds->x) + "," + std::to_string(h.bounds->y) + "," +
             std::to_string(h.bounds->w) + "," + std::to_string(h.bounds->h);
    return key;
  }

  ValueRef handler_atom(const eh::Handler& h) const {
    auto it = palette_index.find(identity_key(h));
    if (it == palette_index.end()) fail("population-too-large", "handler outside the palette");
    return handler_atoms[it->second];
  }

  const eh::Handler& handler_of(ValueRef atom) const { return palette[atom->atom]; }

  ValueRef encode_tree(const eh::EHTree& t) const {
    if (t.empty) return store->ctor(d_theta, "Theta", "EHSystem", {});
    ValueRef sons = store->ctor(d_ts_nil, "<>", "treeseq", {});
    for (auto it = t.sons.rbegin(); it != t.sons.rend(); ++it) {
      sons = store->ctor(d_ts_cons, "append", "treeseq", {encode_tree(*it), sons});
    }
    return store->ctor(d_mktree, "mktree", "EHSystem", {handler_atom(t.handler), sons});
  }

  std::optional<eh::EHTree> decode_tree(ValueRef v) const {
    if (!v->defined()) return std::nullopt;
    if (v->decl == d_theta) return eh::EHTree::make_empty();
    if (v->decl != d_mktree) return std::nullopt;
    if (v->args[0]->kind != Value::Kind::Atom) return std::nullopt;
    std::vector<eh::EHTree> sons;
    ValueRef cur = v->args[1];
    while (cur->decl == d_ts_cons) {
      auto son = decode_tree(cur->args[0]);
      if (!son) return std::nullopt;
      sons.push_back(std::move(*son));
      cur = cur->args[1];
    }
    if (cur->decl != d_ts_nil) return std::nullopt;
    return eh::EHTree::node(handler_of(v->args[0]), std::move(sons));
  }

  std::optional<int> decode_nat(ValueRef v) const {
    int n = 0;
    while (v->defined() && v->kind == Value::Kind::Ctor && v->decl == d_succ) {
      ++n;
      v = v->args[0];
    }
    if (!v->defined() || v->kind != Value::Kind::Ctor || v->decl != d_zero) return std::nullopt;
    return n;
  }

  std::optional<eh::Path> decode_path(ValueRef v) const {
    eh::Path p;
    while (v->defined() && v->kind == Value::Kind::Ctor && !v->args.empty() &&
           v->args.size() == 2) {
      auto n = decode_nat(v->args[0]);
      if (!n) return std::nullopt;
      p.push_back(*n);
      v = v->args[1];
    }
    if (!v->defined() || v->kind != Value::Kind::Ctor || !v->args.empty()) return std::nullopt;
    return p;
  }
};

namespace detail {

inline int find_decl(const FlatSpec& flat, const std::string& name,
                     const std::vector<SortName>& args, const SortName& result) {
  for (size_t i = 0; i < flat.sig.funs.size(); ++i) {
    const FunDecl& d = flat.sig.funs[i];
    if (d.name == name && d.arg_sorts == args && d.result_sort == result)
      return static_cast<int>(i);
  }
  fail("unknown-module", "model binding: no declaration " + name);
}

}  // namespace detail

struct EhBinding {
  ModelBinding binding;
  std::shared_ptr<EhModelData> data;
  std::vector<eh::EHTree> population;
};

// Builds the engine binding for a population of runtime trees: shared
// universes and natives, plus one instance per tree carrying the
// tree-dependent routing functions.
inline EhBinding bind_model(const FlatSpec& flat, ValueStore& store,
                            std::vector<eh::EHTree> population, const CarrierConfig& config,
                            size_t cap = 100000) {
  if (population.size() > cap)
    fail("population-too-large", "population of " + std::to_string(population.size()) +
                                     " trees exceeds cap " + std::to_string(cap));

  auto data = std::make_shared<EhModelData>();
  data->flat = &flat;
  data->store = &store;

  const auto& sig = flat.sig;
  data->d_theta = detail::find_decl(flat, "Theta", {}, "EHSystem");
  data->d_mktree = detail::find_decl(flat, "mktree", {"EvtHandler", "treeseq"}, "EHSystem");
  data->d_ts_nil = detail::find_decl(flat, "<>", {}, "treeseq");
  data->d_ts_cons = detail::find_decl(flat, "append", {"EHSystem", "treeseq"}, "treeseq");
  data->d_zero = detail::find_decl(flat, "0", {}, "nat");
  data->d_succ = detail::find_decl(flat, "succ", {"nat"}, "nat");
  data->d_value = detail::find_decl(flat, "value", {"EHSystem"}, "EvtHandler");
  data->d_sonseq = detail::find_decl(flat, "sonseq", {"EHSystem"}, "treeseq");
  data->d_gethandler = detail::find_decl(flat, "gethandler", {"EHSystem", "path"}, "EvtHandler");
  data->d_sethandler =
      detail::find_decl(flat, "sethandler", {"EHSystem", "path", "EvtHandler"}, "EHSystem");
  data->d_subtree = detail::find_decl(flat, "subtree", {"EHSystem", "path"}, "EHSystem");
  data->d_getid = detail::find_decl(flat, "GetId", {"EvtHandler"}, "Id");
  data->d_setid = detail::find_decl(flat, "SetId", {"EvtHandler", "Id"}, "EvtHandler");
  data->d_gnh = detail::find_decl(flat, "GetNextHandler", {"EvtHandler"}, "EvtHandler");
  data->d_fnhoc =
      detail::find_decl(flat, "FindNextHandlerOfClass", {"EvtHandler", "Class"}, "EvtHandler");
  data->d_isa = detail::find_decl(flat, ".isA.", {"Object", "Class"}, "bool");
  data->d_contains = detail::find_decl(flat, ".containsPoint.", {"EvtHandler", "Point"}, "bool");
  data->d_conforms = detail::find_decl(flat, "conforms", {"EHSystem"}, "bool");
  data->d_validapp = detail::find_decl(flat, "validAppEHS", {"EHSystem"}, "bool");

  // Palette: every (class, geometry) kind occurring in the population, at
  // every id of the carrier (so SetId stays within the palette).
  int id_count = config.carrier_for("Id");
  std::set<std::pair<std::string, std::string>> kinds;  // (cls, geo key)
  std::map<std::string, std::optional<eh::Rect>> kind_geo;
  std::function<void(const eh::EHTree&)> scan = [&](const eh::EHTree& t) {
    if (t.empty) return;
    id_count = std::max(id_count, t.handler.id + 1);
    eh::Handler base = t.handler;
    base.id = 0;
    std::string key = EhModelData::identity_key(base);
    kinds.insert({t.handler.cls, key});
    kind_geo[key] = t.handler.bounds;
    for (const auto& s : t.sons) scan(s);
  };
  for (const auto& t : population) scan(t);
  if (kinds.empty()) {
    // Empty population: keep a minimal palette so universes stay nonempty.
    eh::Handler app = eh::make_handler("Application", 0);
    std::string key = EhModelData::identity_key(app);
    kinds.insert({"Application", key});
    kind_geo[key] = std::nullopt;
  }

  for (const auto& [cls, key] : kinds) {
    for (int id = 0; id < id_count; ++id) {
      eh::Handler h = eh::make_handler(cls, id, kind_geo.at(key));
      int slot = static_cast<int>(data->palette.size());
      data->palette.push_back(h);
      data->palette_index[EhModelData::identity_key(h)] = slot;
      std::string label = h.cls + "#" + std::to_string(h.id);
      if (h.bounds)
        label += "@" + std::to_string(h.bounds->x) + "," + std::to_string(h.bounds->y) + "," +
                 std::to_string(h.bounds->w) + "," + std::to_string(h.bounds->h);
      data->handler_atoms.push_back(store.atom("EvtHandler", slot, label));
    }
  }

  for (int i = 0; i < id_count; ++i) data->id_atoms.push_back(store.atom("Id", i, "id" + std::to_string(i)));
  data->grid = eh::point_grid(config.carrier_for("Point"));
  for (size_t i = 0; i < data->grid.size(); ++i) {
    data->point_atoms.push_back(store.atom("Point", static_cast<int>(i),
                                           "p(" + std::to_string(data->grid[i].x) + "," +
                                               std::to_string(data->grid[i].y) + ")"));
  }
  for (size_t i = 0; i < class_constant_names().size(); ++i) {
    data->class_atoms.push_back(
        store.atom("Class", static_cast<int>(i), class_constant_names()[i]));
  }

  // Bound compatibility: every valid path of the population must be
  // enumerable at the configured path/nat bounds.
  int max_depth = 0, max_arity = 0;
  for (const auto& t : population) {
    max_depth = std::max(max_depth, t.depth());
    max_arity = std::max(max_arity, t.max_arity());
  }
  if (max_depth > config.bound_for("path") || max_arity + 1 > config.bound_for("nat"))
    fail("population-too-large",
         "population needs path bound >= " + std::to_string(max_depth) + " and nat bound >= " +
             std::to_string(max_arity + 1));

  EhBinding built;
  built.data = data;
  ModelBinding& mb = built.binding;

  mb.universes["EvtHandler"] = data->handler_atoms;
  mb.universes["Object"] = data->handler_atoms;
  mb.universes["Id"] = data->id_atoms;
  mb.universes["Point"] = data->point_atoms;
  mb.universes["Class"] = data->class_atoms;

  auto undef_if = [](Context& ctx, const std::vector<ValueRef>& args,
                     const SortName& result) -> ValueRef {
    for (ValueRef a : args) {
      if (!a->defined()) return ctx.store().undefined(result);
    }
    return nullptr;
  };
  auto d = data;  // captured by the natives

  mb.natives[d->d_value] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "EvtHandler")) return u;
    if (args[0]->decl != d->d_mktree) return ctx.store().undefined("EvtHandler");
    return args[0]->args[0];
  };
  mb.natives[d->d_sonseq] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "treeseq")) return u;
    if (args[0]->decl != d->d_mktree) return ctx.store().undefined("treeseq");
    return args[0]->args[1];
  };
  mb.natives[d->d_gethandler] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "EvtHandler")) return u;
    auto tree = d->decode_tree(args[0]);
    auto path = d->decode_path(args[1]);
    if (!tree || !path) return ctx.store().undefined("EvtHandler");
    auto h = eh::get_handler(*tree, *path);
    return h ? d->handler_atom(*h) : ctx.store().undefined("EvtHandler");
  };
  mb.natives[d->d_sethandler] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "EHSystem")) return u;
    auto tree = d->decode_tree(args[0]);
    auto path = d->decode_path(args[1]);
    if (!tree || !path || args[2]->kind != Value::Kind::Atom)
      return ctx.store().undefined("EHSystem");
    auto out = eh::set_handler(*tree, *path, d->handler_of(args[2]));
    return out ? d->encode_tree(*out) : ctx.store().undefined("EHSystem");
  };
  mb.natives[d->d_subtree] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "EHSystem")) return u;
    auto tree = d->decode_tree(args[0]);
    auto path = d->decode_path(args[1]);
    if (!tree || !path) return ctx.store().undefined("EHSystem");
    auto out = eh::subtree(*tree, *path);
    return out ? d->encode_tree(*out) : ctx.store().undefined("EHSystem");
  };
  mb.natives[d->d_getid] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "Id")) return u;
    int id = d->handler_of(args[0]).id;
    return d->id_atoms.at(id);
  };
  mb.natives[d->d_setid] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "EvtHandler")) return u;
    eh::Handler h = eh::set_id(d->handler_of(args[0]), args[1]->atom);
    return d->handler_atom(h);
  };
  mb.natives[d->d_isa] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "bool")) return u;
    const eh::Handler& h = d->handler_of(args[0]);
    return ctx.bool_value(eh::is_a(h.cls, args[1]->name));
  };
  mb.natives[d->d_contains] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "bool")) return u;
    auto r = eh::contains_point(d->handler_of(args[0]), d->grid.at(args[1]->atom));
    if (!r) return ctx.store().undefined("bool");
    return ctx.bool_value(*r);
  };
  mb.natives[d->d_conforms] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "bool")) return u;
    auto tree = d->decode_tree(args[0]);
    if (!tree) return ctx.store().undefined("bool");
    return ctx.bool_value(eh::conforms(*tree, d->grid));
  };
  mb.natives[d->d_validapp] = [d, undef_if](Context& ctx, const std::vector<ValueRef>& args) {
    if (ValueRef u = undef_if(ctx, args, "bool")) return u;
    auto tree = d->decode_tree(args[0]);
    if (!tree) return ctx.store().undefined("bool");
    return ctx.bool_value(eh::valid_app_ehs(*tree, d->grid));
  };
  for (size_t i = 0; i < class_constant_names().size(); ++i) {
    int decl = detail::find_decl(flat, class_constant_names()[i], {}, "Class");
    ValueRef atom = data->class_atoms[i];
    mb.natives[decl] = [atom](Context&, const std::vector<ValueRef>&) { return atom; };
  }

  // Union universes for obligations that are not tied to one system: every
  // population tree plus the empty system, and every occurring son list.
  {
    std::vector<ValueRef> trees, seqs;
    ValueRef theta = store.ctor(data->d_theta, "Theta", "EHSystem", {});
    ValueRef nil = store.ctor(data->d_ts_nil, "<>", "treeseq", {});
    for (const auto& t : population) {
      ValueRef root = data->encode_tree(t);
      if (std::find(trees.begin(), trees.end(), root) == trees.end()) trees.push_back(root);
      std::function<void(ValueRef)> collect = [&](ValueRef v) {
        if (v->decl != data->d_mktree) return;
        ValueRef seq = v->args[1];
        if (std::find(seqs.begin(), seqs.end(), seq) == seqs.end()) seqs.push_back(seq);
        ValueRef cur = seq;
        while (cur->decl == data->d_ts_cons) {
          collect(cur->args[0]);
          cur = cur->args[1];
        }
      };
      collect(root);
    }
    trees.push_back(theta);
    if (std::find(seqs.begin(), seqs.end(), nil) == seqs.end()) seqs.push_back(nil);
    mb.universes["EHSystem"] = std::move(trees);
    mb.universes["treeseq"] = std::move(seqs);
  }

  // An empty population keeps its quantifiers vacuous.
  if (population.empty()) {
    SystemInstance inst;
    inst.label = "(empty)";
    inst.universes["EHSystem"] = {};
    inst.universes["treeseq"] = {};
    mb.instances.push_back(std::move(inst));
  }

  // Per-tree instances: the routing functions follow the links of one
  // concrete runtime tree.
  for (const auto& tree : population) {
    SystemInstance inst;
    inst.label = eh::print_tree(tree);
    ValueRef root = data->encode_tree(tree);
    ValueRef theta = store.ctor(data->d_theta, "Theta", "EHSystem", {});
    inst.universes["EHSystem"] = {root, theta};

    std::vector<ValueRef> sonseqs;
    std::function<void(ValueRef)> collect_seqs = [&](ValueRef v) {
      if (v->decl != data->d_mktree) return;
      ValueRef seq = v->args[1];
      if (std::find(sonseqs.begin(), sonseqs.end(), seq) == sonseqs.end()) sonseqs.push_back(seq);
      ValueRef cur = seq;
      while (cur->decl == data->d_ts_cons) {
        collect_seqs(cur->args[0]);
        cur = cur->args[1];
      }
    };
    collect_seqs(root);
    ValueRef nil = store.ctor(data->d_ts_nil, "<>", "treeseq", {});
    if (std::find(sonseqs.begin(), sonseqs.end(), nil) == sonseqs.end()) sonseqs.push_back(nil);
    inst.universes["treeseq"] = sonseqs;

    std::map<ValueRef, ValueRef> parent_of;
    std::map<std::pair<ValueRef, ValueRef>, ValueRef> next_of_class;
    for (const auto& p : eh::valid_paths(tree)) {
      ValueRef self = data->handler_atom(*eh::get_handler(tree, p));
      if (p.empty()) {
        parent_of[self] = store.undefined("EvtHandler");
      } else {
        eh::Path lead(p.begin(), p.end() - 1);
        parent_of[self] = data->handler_atom(*eh::get_handler(tree, lead));
      }
      for (size_t c = 0; c < class_constant_names().size(); ++c) {
        auto found = eh::find_next_handler_of_class(tree, p, class_constant_names()[c]);
        next_of_class[{self, data->class_atoms[c]}] =
            found ? data->handler_atom(*found) : store.undefined("EvtHandler");
      }
    }
    inst.natives[data->d_gnh] = [d, parent_of, undef_if](Context& ctx,
                                                         const std::vector<ValueRef>& args) {
      if (ValueRef u = undef_if(ctx, args, "EvtHandler")) return u;
      auto it = parent_of.find(args[0]);
      return it != parent_of.end() ? it->second : ctx.store().undefined("EvtHandler");
    };
    inst.natives[data->d_fnhoc] = [d, next_of_class, undef_if](Context& ctx,
                                                               const std::vector<ValueRef>& args) {
      if (ValueRef u = undef_if(ctx, args, "EvtHandler")) return u;
      auto it = next_of_class.find({args[0], args[1]});
      return it != next_of_class.end() ? it->second : ctx.store().undefined("EvtHandler");
    };
    mb.instances.push_back(std::move(inst));
  }

  built.population = std::move(population);
  (void)sig;
  return built;
}

}  // namespace speck
