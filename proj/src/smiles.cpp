// SPDX-License-Identifier: Apache-2.0
#include "grin/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace grin::smiles {

namespace {

const std::array<std::string, 11> kElements = {"B", "C",  "N",  "O", "P", "S",
                                               "F", "Cl", "Br", "I", "*"};

bool known_element(const std::string& el) {
  return std::find(kElements.begin(), kElements.end(), el) != kElements.end();
}

struct Parser {
  const std::string& text;
  size_t pos = 0;

  std::vector<AtomNode> atoms;
  std::vector<Bond> bonds;
  std::vector<bool> bracketed;  // bracket atoms keep their explicit H count

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg + " at position " + std::to_string(pos) + " in \"" +
                      text + "\"");
  }

  bool done() const { return pos >= text.size(); }
  char peek() const { return done() ? '\0' : text[pos]; }

  void add_bond(int a, int b, BondOrder order) {
    if (a == b) fail("self-loop bond");
    for (const Bond& e : bonds) {
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a))
        fail("duplicate bond");
    }
    bonds.push_back({a, b, order});
  }

  std::string read_element() {
    char c = peek();
    if (c == '*') {
      ++pos;
      return "*";
    }
    if (c == 'C' && pos + 1 < text.size() && text[pos + 1] == 'l') {
      pos += 2;
      return "Cl";
    }
    if (c == 'B' && pos + 1 < text.size() && text[pos + 1] == 'r') {
      pos += 2;
      return "Br";
    }
    std::string el(1, c);
    if (!known_element(el)) fail("unknown element '" + el + "'");
    ++pos;
    return el;
  }

  int read_bracket_atom() {
    ++pos;  // '['
    if (done()) fail("unterminated bracket");
    std::string el = read_element();
    if (el == "*") fail("anchors may not be bracketed");
    int hcount = 0;
    if (peek() == 'H') {
      ++pos;
      hcount = 1;
      if (std::isdigit(static_cast<unsigned char>(peek())))
        hcount = text[pos++] - '0';
    }
    int charge = 0;
    if (peek() == '+') {
      charge = 1;
      ++pos;
    } else if (peek() == '-') {
      charge = -1;
      ++pos;
    }
    if (peek() != ']') fail("expected ']'");
    ++pos;
    atoms.push_back({el, charge, hcount});
    bracketed.push_back(true);
    return static_cast<int>(atoms.size()) - 1;
  }

  int read_atom() {
    if (peek() == '[') return read_bracket_atom();
    std::string el = read_element();
    atoms.push_back({el, 0, 0});
    bracketed.push_back(false);
    return static_cast<int>(atoms.size()) - 1;
  }

  void parse() {
    std::vector<int> stack;  // prev atom per nesting level
    int prev = -1;
    BondOrder pending = BondOrder::Single;
    bool has_pending = false;
    std::map<char, std::pair<int, BondOrder>> open_rings;

    while (!done()) {
      char c = peek();
      if (c == '-' || c == '=' || c == '#') {
        if (has_pending) fail("two consecutive bond symbols");
        pending = c == '-'   ? BondOrder::Single
                  : c == '=' ? BondOrder::Double
                             : BondOrder::Triple;
        has_pending = true;
        ++pos;
      } else if (c == '(') {
        if (prev < 0) fail("branch before any atom");
        if (has_pending) fail("bond symbol before '('");
        stack.push_back(prev);
        ++pos;
      } else if (c == ')') {
        if (stack.empty()) fail("unbalanced ')'");
        if (has_pending) fail("dangling bond symbol before ')'");
        prev = stack.back();
        stack.pop_back();
        ++pos;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        if (prev < 0) fail("ring digit before any atom");
        BondOrder order = has_pending ? pending : BondOrder::Single;
        auto it = open_rings.find(c);
        if (it == open_rings.end()) {
          open_rings[c] = {prev, order};
        } else {
          // an explicit order on either side wins; they must not conflict
          BondOrder open_order = it->second.second;
          if (open_order != BondOrder::Single && order != BondOrder::Single &&
              open_order != order)
            fail("conflicting ring bond orders");
          BondOrder final_order =
              open_order != BondOrder::Single ? open_order : order;
          add_bond(it->second.first, prev, final_order);
          open_rings.erase(it);
        }
        has_pending = false;
        ++pos;
      } else if (c == '*' || c == '[' ||
                 std::isupper(static_cast<unsigned char>(c))) {
        int a = read_atom();
        if (prev >= 0)
          add_bond(prev, a, has_pending ? pending : BondOrder::Single);
        else if (has_pending)
          fail("bond symbol before first atom");
        prev = a;
        has_pending = false;
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
    }
    if (!stack.empty()) fail("unbalanced '('");
    if (has_pending) fail("dangling bond symbol");
    if (!open_rings.empty()) fail("dangling ring-closure digit");
    if (atoms.empty()) fail("empty input");
  }
};

int bond_order_sum(const RepeatUnit& ru, int atom) {
  int s = 0;
  for (const Bond& b : ru.bonds)
    if (b.a == atom || b.b == atom) s += static_cast<int>(b.order);
  return s;
}

std::pair<int, int> edge_key(int a, int b) {
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace

int default_valence(const std::string& element) {
  if (element == "B" || element == "N" || element == "P") return 3;
  if (element == "C") return 4;
  if (element == "O" || element == "S") return 2;
  return 1;  // F, Cl, Br, I, *
}

int RepeatUnit::degree(int atom) const {
  int d = 0;
  for (const Bond& b : bonds)
    if (b.a == atom || b.b == atom) ++d;
  return d;
}

std::vector<std::vector<int>> RepeatUnit::adjacency() const {
  std::vector<std::vector<int>> adj(atoms.size());
  for (const Bond& b : bonds) {
    adj[b.a].push_back(b.b);
    adj[b.b].push_back(b.a);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

RepeatUnit parse_molecule(const std::string& text) {
  if (text.empty()) throw SyntaxError("empty input");
  Parser p(text);
  p.parse();

  RepeatUnit ru;
  ru.atoms = std::move(p.atoms);
  ru.bonds = std::move(p.bonds);
  ru.source_text = text;

  // implicit hydrogens from standard valence; bracket atoms keep theirs
  for (size_t i = 0; i < ru.atoms.size(); ++i) {
    if (p.bracketed[i]) continue;
    if (ru.atoms[i].element == "*") {
      ru.atoms[i].implicit_h = 0;
      continue;
    }
    int free = default_valence(ru.atoms[i].element) -
               bond_order_sum(ru, static_cast<int>(i));
    ru.atoms[i].implicit_h = std::max(0, free);
  }

  // connectivity
  {
    auto adj = ru.adjacency();
    std::vector<bool> seen(ru.atoms.size(), false);
    std::vector<int> todo = {0};
    seen[0] = true;
    while (!todo.empty()) {
      int v = todo.back();
      todo.pop_back();
      for (int u : adj[v])
        if (!seen[u]) {
          seen[u] = true;
          todo.push_back(u);
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw ConnectivityError("disconnected fragments in \"" + text + "\"");
  }

  std::vector<int> anchors;
  for (size_t i = 0; i < ru.atoms.size(); ++i)
    if (ru.atoms[i].element == "*") anchors.push_back(static_cast<int>(i));
  if (anchors.size() == 2) {
    ru.anchor_in = anchors[0];
    ru.anchor_out = anchors[1];
  }
  return ru;
}

RepeatUnit parse_repeat_unit(const std::string& text) {
  RepeatUnit ru = parse_molecule(text);
  std::vector<int> anchors;
  for (size_t i = 0; i < ru.atoms.size(); ++i)
    if (ru.atoms[i].element == "*") anchors.push_back(static_cast<int>(i));
  if (anchors.size() != 2)
    throw AnchorError("expected exactly 2 '*' anchors, found " +
                      std::to_string(anchors.size()) + " in \"" + text + "\"");
  for (int a : anchors)
    if (ru.degree(a) != 1)
      throw AnchorError("anchor atom " + std::to_string(a) +
                        " must have degree 1 in \"" + text + "\"");
  return ru;
}

namespace {

// Serializer: index-ordered DFS from atom 0; non-tree edges become ring
// closures with digits written at both endpoints.
struct Serializer {
  const RepeatUnit& ru;
  std::vector<std::vector<int>> adj;
  std::set<std::pair<int, int>> back_edges;
  std::map<std::pair<int, int>, char> open_digit;
  std::set<char> digits_in_use;
  std::vector<bool> visited;
  std::ostringstream out;

  explicit Serializer(const RepeatUnit& r) : ru(r), adj(r.adjacency()) {
    visited.assign(ru.atoms.size(), false);
  }

  BondOrder order_of(int a, int b) const {
    for (const Bond& e : ru.bonds)
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return e.order;
    throw Error("internal: missing bond");
  }

  void write_bond(BondOrder o) {
    if (o == BondOrder::Double) out << '=';
    if (o == BondOrder::Triple) out << '#';
  }

  void write_atom(int v) {
    const AtomNode& a = ru.atoms[v];
    if (a.element == "*") {
      out << '*';
      return;
    }
    int free = default_valence(a.element);
    for (int u : adj[v]) free -= static_cast<int>(order_of(v, u));
    bool bracket = a.formal_charge != 0 || a.implicit_h != std::max(0, free);
    if (!bracket) {
      out << a.element;
      return;
    }
    out << '[' << a.element;
    if (a.implicit_h == 1)
      out << 'H';
    else if (a.implicit_h > 1)
      out << 'H' << a.implicit_h;
    if (a.formal_charge > 0) out << '+';
    if (a.formal_charge < 0) out << '-';
    out << ']';
  }

  char take_digit() {
    for (char d = '1'; d <= '9'; ++d)
      if (!digits_in_use.count(d)) {
        digits_in_use.insert(d);
        return d;
      }
    throw Error("more than 9 simultaneously open rings");
  }

  void find_back_edges() {
    std::vector<bool> seen(ru.atoms.size(), false);
    std::set<std::pair<int, int>> tree;
    std::vector<std::pair<int, int>> stack = {{0, -1}};
    while (!stack.empty()) {
      auto [v, parent] = stack.back();
      stack.pop_back();
      if (seen[v]) continue;
      seen[v] = true;
      if (parent >= 0) tree.insert(edge_key(parent, v));
      for (auto it = adj[v].rbegin(); it != adj[v].rend(); ++it)
        if (!seen[*it]) stack.push_back({*it, v});
    }
    for (const Bond& b : ru.bonds) {
      auto k = edge_key(b.a, b.b);
      if (!tree.count(k)) back_edges.insert(k);
    }
  }

  void write_ring_marks(int v) {
    for (int u : adj[v]) {
      auto k = edge_key(v, u);
      if (!back_edges.count(k)) continue;
      auto it = open_digit.find(k);
      if (it == open_digit.end()) {
        char d = take_digit();
        open_digit[k] = d;
        write_bond(order_of(v, u));
        out << d;
      } else {
        write_bond(order_of(v, u));
        out << it->second;
        digits_in_use.erase(it->second);
        open_digit.erase(it);
        back_edges.erase(k);
      }
    }
  }

  void dfs(int v, int parent) {
    visited[v] = true;
    write_atom(v);
    write_ring_marks(v);
    std::vector<int> children;
    for (int u : adj[v])
      if (u != parent && !visited[u] && !back_edges.count(edge_key(v, u)) &&
          !open_digit.count(edge_key(v, u)))
        children.push_back(u);
    for (size_t i = 0; i < children.size(); ++i) {
      int u = children[i];
      if (visited[u]) continue;
      if (i + 1 < children.size()) out << '(';
      write_bond(order_of(v, u));
      dfs(u, v);
      if (i + 1 < children.size()) out << ')';
    }
  }
};

}  // namespace

std::string canonical_text(const RepeatUnit& ru) {
  if (ru.atoms.empty()) throw Error("empty repeat unit");
  Serializer s(ru);
  s.find_back_edges();
  s.dfs(0, -1);
  return s.out.str();
}

}  // namespace grin::smiles
