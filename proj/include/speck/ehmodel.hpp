#pragma once

// Native executable model of the event-handling subsystem: part-of trees of
// handler records with geometry, class tags and ids; the conformance and
// application-validity predicates; default event dispatch and command
// routing. Everything here is pure; trees are rebuilt, never mutated.

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "speck/diag.hpp"

namespace speck::eh {

// Fixed single-inheritance class table. VObject and Manager are the only
// direct subclasses of EvtHandler; visual objects carry geometry, managers
// do not.
inline const std::map<std::string, std::string>& class_parents() {
  static const std::map<std::string, std::string> table = {
      {"Object", ""},          {"EvtHandler", "Object"},  {"VObject", "EvtHandler"},
      {"Manager", "EvtHandler"}, {"Window", "VObject"},   {"Button", "VObject"},
      {"Application", "Manager"}, {"Document", "Manager"},
  };
  return table;
}

inline bool is_a(const std::string& cls, const std::string& ancestor) {
  const auto& table = class_parents();
  if (!table.count(cls) || !table.count(ancestor))
    fail("unknown-class", "unknown class '" + (table.count(cls) ? ancestor : cls) + "'");
  std::string cur = cls;
  for (;;) {
    if (cur == ancestor) return true;
    auto it = table.find(cur);
    if (it->second.empty()) return false;
    cur = it->second;
  }
}

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

// Half-open box: contains (px,py) iff x <= px < x+w and y <= py < y+h.
struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
  bool contains(Point p) const { return x <= p.x && p.x < x + w && y <= p.y && p.y < y + h; }
  bool operator==(const Rect&) const = default;
};

struct Handler {
  std::string cls;
  int id = 0;
  std::optional<Rect> bounds;

  bool operator==(const Handler&) const = default;

  bool isa(const std::string& ancestor) const { return is_a(cls, ancestor); }
};

// Validating constructor: geometry present exactly on visual handlers, and
// every handler is either a visual object or a manager, never both.
inline Handler make_handler(std::string cls, int id, std::optional<Rect> bounds = std::nullopt) {
  if (!class_parents().count(cls)) fail("unknown-class", "unknown class '" + cls + "'");
  bool visual = is_a(cls, "VObject");
  bool manager = is_a(cls, "Manager");
  if (visual == manager)
    fail("unknown-class", "handler class must be exactly one of VObject/Manager kind: " + cls);
  if (visual && !bounds) fail("unknown-class", "visual handler '" + cls + "' needs bounds");
  if (!visual && bounds) fail("unknown-class", "manager handler '" + cls + "' cannot have bounds");
  Handler h;
  h.cls = std::move(cls);
  h.id = id;
  h.bounds = bounds;
  return h;
}

struct EHTree {
  bool empty = true;
  Handler handler;
  std::vector<EHTree> sons;

  bool operator==(const EHTree&) const = default;

  static EHTree make_empty() { return EHTree{}; }
  static EHTree node(Handler h, std::vector<EHTree> sons = {}) {
    EHTree t;
    t.empty = false;
    t.handler = std::move(h);
    t.sons = std::move(sons);
    return t;
  }

  int handler_count() const {
    if (empty) return 0;
    int n = 1;
    for (const auto& s : sons) n += s.handler_count();
    return n;
  }

  int depth() const {
    if (empty) return 0;
    int d = 0;
    for (const auto& s : sons) d = std::max(d, s.depth());
    return d + 1;
  }

  int max_arity() const {
    if (empty) return 0;
    int a = static_cast<int>(sons.size());
    for (const auto& s : sons) a = std::max(a, s.max_arity());
    return a;
  }
};

using Path = std::vector<int>;  // 1-based child indices

// ---------------------------------------------------------------------------
// Tree addressing, following the recursive path-tree equations: descending
// into son n of a node, undefined on the empty tree or an invalid index.

inline std::optional<EHTree> subtree(const EHTree& t, const Path& p, size_t from = 0) {
  if (from == p.size()) return t;
  if (t.empty) return std::nullopt;
  int n = p[from];
  if (n < 1 || n > static_cast<int>(t.sons.size())) return std::nullopt;
  return subtree(t.sons[n - 1], p, from + 1);
}

inline std::optional<Handler> get_handler(const EHTree& t, const Path& p) {
  auto sub = subtree(t, p);
  if (!sub || sub->empty) return std::nullopt;
  return sub->handler;
}

inline std::optional<EHTree> set_handler(const EHTree& t, const Path& p, const Handler& h,
                                         size_t from = 0) {
  if (t.empty) return std::nullopt;
  if (from == p.size()) {
    EHTree out = t;
    out.handler = h;
    return out;
  }
  int n = p[from];
  if (n < 1 || n > static_cast<int>(t.sons.size())) return std::nullopt;
  auto son = set_handler(t.sons[n - 1], p, h, from + 1);
  if (!son) return std::nullopt;
  EHTree out = t;
  out.sons[n - 1] = std::move(*son);
  return out;
}

// Geometry test; undefined (nullopt) on managers, which have no screen
// representation.
inline std::optional<bool> contains_point(const Handler& h, Point pt) {
  if (!h.bounds) return std::nullopt;
  return h.bounds->contains(pt);
}

// Two-valued reading used inside the conformance predicate: an undefined
// containment test never holds.
inline bool contains_for_check(const EHTree& t, Point pt) {
  if (t.empty || !t.handler.bounds) return false;
  return t.handler.bounds->contains(pt);
}

// conforms: sons conform, no point outside a node leaks into one of its
// sons, and no point lies in two distinct sons. Point quantification ranges
// over the given finite grid.
inline bool conforms(const EHTree& t, const std::vector<Point>& grid) {
  if (t.empty) return true;
  for (const auto& son : t.sons) {
    if (!conforms(son, grid)) return false;
  }
  for (const auto& pt : grid) {
    bool in_node = !t.handler.bounds ? false : t.handler.bounds->contains(pt);
    const EHTree* holder = nullptr;
    for (const auto& son : t.sons) {
      if (!contains_for_check(son, pt)) continue;
      if (!in_node) return false;
      if (holder && !(*holder == son)) return false;
      holder = &son;
    }
  }
  return true;
}

inline void collect_paths(const EHTree& t, Path& prefix, std::vector<Path>& out) {
  if (t.empty) return;
  out.push_back(prefix);
  for (size_t i = 0; i < t.sons.size(); ++i) {
    prefix.push_back(static_cast<int>(i) + 1);
    collect_paths(t.sons[i], prefix, out);
    prefix.pop_back();
  }
}

inline std::vector<Path> valid_paths(const EHTree& t) {
  std::vector<Path> out;
  Path prefix;
  collect_paths(t, prefix, out);
  return out;
}

inline bool is_prefix(const Path& p, const Path& q) {
  if (p.size() > q.size()) return false;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] != q[i]) return false;
  }
  return true;
}

// validAppEHS: nonempty; an Application exactly at the root; managers only
// above managers and visual objects only below visual objects; a Window
// exactly where a visual child hangs under a manager; and every visual
// node's subtree conforms.
inline bool valid_app_ehs(const EHTree& t, const std::vector<Point>& grid) {
  if (t.empty) return false;
  auto paths = valid_paths(t);
  for (const auto& p : paths) {
    Handler h = *get_handler(t, p);
    if (h.isa("Application") != p.empty()) return false;
  }
  for (const auto& p : paths) {
    Handler hp = *get_handler(t, p);
    for (const auto& q : paths) {
      if (!is_prefix(p, q)) continue;
      Handler hq = *get_handler(t, q);
      if (hq.isa("Manager") && !hp.isa("Manager")) return false;
      if (hp.isa("VObject") && !hq.isa("VObject")) return false;
    }
  }
  for (const auto& q : paths) {
    if (q.empty()) continue;
    Path parent(q.begin(), q.end() - 1);
    Handler child = *get_handler(t, q);
    Handler father = *get_handler(t, parent);
    bool window_position = father.isa("Manager") && child.isa("VObject");
    if (window_position != child.isa("Window")) return false;
  }
  for (const auto& p : paths) {
    Handler h = *get_handler(t, p);
    if (h.isa("VObject") && !conforms(*subtree(t, p), grid)) return false;
  }
  return true;
}

inline bool ids_unique(const EHTree& t) {
  std::set<int> ids;
  bool ok = true;
  auto walk = [&](auto&& self, const EHTree& node) -> void {
    if (node.empty || !ok) return;
    if (!ids.insert(node.handler.id).second) ok = false;
    for (const auto& s : node.sons) self(self, s);
  };
  walk(walk, t);
  return ok;
}

inline int get_id(const Handler& h) { return h.id; }

inline Handler set_id(const Handler& h, int id) {
  Handler out = h;
  out.id = id;
  return out;
}

// Default routing: the next handler of a non-root node is its father;
// undefined exactly at the root.
inline std::optional<Handler> get_next_handler(const EHTree& t, const Path& q) {
  if (!get_handler(t, q)) return std::nullopt;
  if (q.empty()) return std::nullopt;
  Path parent(q.begin(), q.end() - 1);
  return get_handler(t, parent);
}

// Nearest self-or-ancestor whose class is compatible with cl.
inline std::optional<Handler> find_next_handler_of_class(const EHTree& t, const Path& q,
                                                         const std::string& cl) {
  if (!get_handler(t, q)) return std::nullopt;
  Path p = q;
  for (;;) {
    Handler h = *get_handler(t, p);
    if (h.isa(cl)) return h;
    if (p.empty()) return std::nullopt;
    p.pop_back();
  }
}

// Downward event dispatch: from the window, follow the unique son containing
// the point until no son contains it.
inline Path dispatch_event(const EHTree& t, const Path& window_path, Point pt) {
  auto start = subtree(t, window_path);
  if (!start || start->empty || !contains_for_check(*start, pt))
    fail("not-contained", "point is not inside the window's handler");
  Path result = window_path;
  const EHTree* cur = &*start;
  for (;;) {
    const EHTree* next = nullptr;
    int index = 0;
    for (size_t i = 0; i < cur->sons.size(); ++i) {
      if (contains_for_check(cur->sons[i], pt)) {
        next = &cur->sons[i];
        index = static_cast<int>(i) + 1;
        break;
      }
    }
    if (!next) return result;
    result.push_back(index);
    cur = next;
  }
}

// Upward command routing: repeatedly step to the next handler, collecting
// handlers until one compatible with the target class is reached.
inline std::vector<Handler> route_command(const EHTree& t, const Path& origin,
                                          const std::string& target_class) {
  auto h = get_handler(t, origin);
  if (!h) fail("unroutable", "origin path is not valid");
  if (h->isa(target_class)) return {*h};
  std::vector<Handler> visited;
  Path p = origin;
  while (!p.empty()) {
    p.pop_back();
    Handler step = *get_handler(t, p);
    visited.push_back(step);
    if (step.isa(target_class)) return visited;
  }
  fail("unroutable", "no handler of class '" + target_class + "' above the origin");
}

// The runtime tree of the running-example figure: an application with two
// documents, one of which has opened a window with two buttons.
inline EHTree fig2() {
  EHTree button1 = EHTree::node(make_handler("Button", 4, Rect{2, 2, 3, 3}));
  EHTree button2 = EHTree::node(make_handler("Button", 5, Rect{6, 2, 3, 3}));
  EHTree window =
      EHTree::node(make_handler("Window", 3, Rect{0, 0, 10, 10}), {button1, button2});
  EHTree doc1 = EHTree::node(make_handler("Document", 2), {window});
  EHTree doc2 = EHTree::node(make_handler("Document", 6));
  return EHTree::node(make_handler("Application", 1), {doc1, doc2});
}

// Point grid with k sample coordinates per axis, covering the fixture
// geometry (odd coordinates 1, 3, 5, ...).
inline std::vector<Point> point_grid(int per_axis) {
  std::vector<Point> out;
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) out.push_back(Point{2 * i + 1, 2 * j + 1});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Textual tree fixtures: Class(id[, x,y,w,h])[child, ...]; the empty tree is
// written Theta.

inline std::string print_tree(const EHTree& t) {
  if (t.empty) return "Theta";
  std::ostringstream out;
  out << t.handler.cls << "(" << t.handler.id;
  if (t.handler.bounds) {
    out << ", " << t.handler.bounds->x << "," << t.handler.bounds->y << ","
        << t.handler.bounds->w << "," << t.handler.bounds->h;
  }
  out << ")";
  if (!t.sons.empty()) {
    out << "[";
    for (size_t i = 0; i < t.sons.size(); ++i) out << (i ? ", " : "") << print_tree(t.sons[i]);
    out << "]";
  }
  return out.str();
}

namespace detail {

struct FixtureParser {
  const std::string& text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail("parse-error", std::string("fixture: expected '") + c + "'");
    ++pos;
  }
  int number() {
    skip_ws();
    bool neg = pos < text.size() && text[pos] == '-';
    if (neg) ++pos;
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      fail("parse-error", "fixture: expected number");
    int v = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      v = v * 10 + (text[pos++] - '0');
    return neg ? -v : v;
  }
  std::string word() {
    skip_ws();
    std::string w;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      w += text[pos++];
    if (w.empty()) fail("parse-error", "fixture: expected class name");
    return w;
  }

  EHTree tree() {
    std::string cls = word();
    if (cls == "Theta") return EHTree::make_empty();
    expect('(');
    int id = number();
    std::optional<Rect> bounds;
    if (peek() == ',') {
      ++pos;
      Rect r;
      r.x = number();
      expect(',');
      r.y = number();
      expect(',');
      r.w = number();
      expect(',');
      r.h = number();
      bounds = r;
    }
    expect(')');
    std::vector<EHTree> sons;
    if (peek() == '[') {
      ++pos;
      for (;;) {
        sons.push_back(tree());
        if (peek() == ',') {
          ++pos;
          continue;
        }
        break;
      }
      expect(']');
    }
    return EHTree::node(make_handler(cls, id, bounds), std::move(sons));
  }
};

}  // namespace detail

inline EHTree parse_tree(const std::string& text) {
  detail::FixtureParser p{text};
  EHTree t = p.tree();
  p.skip_ws();
  if (p.pos != text.size()) fail("parse-error", "fixture: trailing input");
  return t;
}

inline std::string print_path(const Path& p) {
  std::string out = "<";
  for (size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + std::to_string(p[i]);
  return out + ">";
}

}  // namespace speck::eh
