#include "cosyn/error.hpp"
#include "cosyn/scltl.hpp"

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <deque>
#include <map>
#include <sstream>
#include <tuple>

namespace cosyn {

namespace {

// Residual formulas are kept as antichains of terms (sum of products). A term
// is a sorted set of obligations: a literal, `X psi`, or `psi1 U psi2`, where
// psi ranges over hash-consed subformulas of the input. Both sets are finite,
// so the reachable residuals are too.
using Term = std::vector<int>;
using Sop = std::vector<Term>;

const Sop kTrueSop{Term{}};
const Sop kFalseSop{};

bool is_true(const Sop& s) { return s.size() == 1 && s.front().empty(); }

enum class ObKind { Pos, Neg, Next, Until };

struct Obligation {
  ObKind kind;
  int ref;  // proposition index for literals, node id otherwise
  auto operator<=>(const Obligation&) const = default;
};

struct NodeKey {
  NodeKind kind;
  int atom;
  int lhs;
  int rhs;
  auto operator<=>(const NodeKey&) const = default;
};

// Drops terms that contain another term and sorts the rest.
Sop normalize(Sop terms) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  Sop kept;
  for (Term& t : terms) {
    const bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const Term& k) {
      return std::includes(t.begin(), t.end(), k.begin(), k.end());
    });
    if (!absorbed) kept.push_back(std::move(t));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

class Compiler {
 public:
  explicit Compiler(const Formula& f) : ap_(f.ap) {}

  int intern(const NodePtr& n) {
    const int l = n->lhs ? intern(n->lhs) : -1;
    const int r = n->rhs ? intern(n->rhs) : -1;
    const NodeKey key{n->kind, n->atom, l, r};
    auto [it, inserted] = node_ids_.try_emplace(key, static_cast<int>(nodes_.size()));
    if (inserted) {
      nodes_.push_back(key);
      sop_cache_.emplace_back();
    }
    return it->second;
  }

  Sop sop(int node) {
    if (sop_cache_[node]) return *sop_cache_[node];
    const NodeKey k = nodes_[node];
    Sop s;
    switch (k.kind) {
      case NodeKind::True: s = kTrueSop; break;
      case NodeKind::False: s = kFalseSop; break;
      case NodeKind::Atom: s = {{obligation({ObKind::Pos, k.atom})}}; break;
      case NodeKind::NegAtom: s = {{obligation({ObKind::Neg, k.atom})}}; break;
      case NodeKind::And: s = product(sop(k.lhs), sop(k.rhs)); break;
      case NodeKind::Or: s = sum(sop(k.lhs), sop(k.rhs)); break;
      case NodeKind::Next: {
        // X true = true and X false = false.
        const Sop sub = sop(k.lhs);
        s = (is_true(sub) || sub.empty()) ? sub : Sop{{obligation({ObKind::Next, k.lhs})}};
        break;
      }
      case NodeKind::Until: {
        // psi U true = true and psi U false = false.
        const Sop goal = sop(k.rhs);
        s = (is_true(goal) || goal.empty()) ? goal : Sop{{obligation({ObKind::Until, node})}};
        break;
      }
    }
    sop_cache_[node] = s;
    return s;
  }

  Sop derive(const Sop& s, Letter a) {
    Sop out;
    for (const Term& t : s) {
      Sop acc = kTrueSop;
      for (int ob : t) {
        acc = product(acc, derive_obligation(ob, a));
        if (acc.empty()) break;
      }
      out.insert(out.end(), acc.begin(), acc.end());
    }
    return normalize(std::move(out));
  }

  std::string render(const Sop& s) const {
    if (s.empty()) return "false";
    if (is_true(s)) return "true";
    std::ostringstream os;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) os << " | ";
      for (std::size_t j = 0; j < s[i].size(); ++j) {
        if (j) os << " & ";
        const Obligation& ob = obligations_[s[i][j]];
        switch (ob.kind) {
          case ObKind::Pos: os << ap_[ob.ref]; break;
          case ObKind::Neg: os << '!' << ap_[ob.ref]; break;
          case ObKind::Next: os << "X " << render_node(ob.ref); break;
          case ObKind::Until: os << render_node(ob.ref); break;
        }
      }
    }
    return os.str();
  }

 private:
  int obligation(Obligation ob) {
    auto [it, inserted] = ob_ids_.try_emplace(ob, static_cast<int>(obligations_.size()));
    if (inserted) obligations_.push_back(ob);
    return it->second;
  }

  Sop sum(const Sop& a, const Sop& b) {
    Sop out = a;
    out.insert(out.end(), b.begin(), b.end());
    return normalize(std::move(out));
  }

  Sop product(const Sop& a, const Sop& b) {
    Sop out;
    for (const Term& x : a) {
      for (const Term& y : b) {
        Term t;
        std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(t));
        if (!contradictory(t)) out.push_back(std::move(t));
      }
    }
    return normalize(std::move(out));
  }

  // p & !p within one term.
  bool contradictory(const Term& t) const {
    for (int i : t) {
      const Obligation& ob = obligations_[i];
      if (ob.kind != ObKind::Pos) continue;
      const auto neg = ob_ids_.find({ObKind::Neg, ob.ref});
      if (neg != ob_ids_.end() && std::binary_search(t.begin(), t.end(), neg->second)) return true;
    }
    return false;
  }

  Sop derive_obligation(int ob_id, Letter a) {
    const auto key = std::make_pair(ob_id, a);
    if (auto it = deriv_cache_.find(key); it != deriv_cache_.end()) return it->second;
    const Obligation ob = obligations_[ob_id];
    const bool holds = (a >> ob.ref) & 1u;
    Sop s;
    switch (ob.kind) {
      case ObKind::Pos: s = holds ? kTrueSop : kFalseSop; break;
      case ObKind::Neg: s = holds ? kFalseSop : kTrueSop; break;
      case ObKind::Next: s = sop(ob.ref); break;
      case ObKind::Until: {
        // d(l U r) = d(r) | (d(l) & (l U r))
        const NodeKey k = nodes_[ob.ref];
        s = sum(derive(sop(k.rhs), a), product(derive(sop(k.lhs), a), Sop{{ob_id}}));
        break;
      }
    }
    deriv_cache_.emplace(key, s);
    return s;
  }

  std::string render_node(int id) const {
    const NodeKey k = nodes_[id];
    switch (k.kind) {
      case NodeKind::True: return "true";
      case NodeKind::False: return "false";
      case NodeKind::Atom: return ap_[k.atom];
      case NodeKind::NegAtom: return "!" + ap_[k.atom];
      case NodeKind::And: return "(" + render_node(k.lhs) + " & " + render_node(k.rhs) + ")";
      case NodeKind::Or: return "(" + render_node(k.lhs) + " | " + render_node(k.rhs) + ")";
      case NodeKind::Next: return "X " + render_node(k.lhs);
      case NodeKind::Until: return "(" + render_node(k.lhs) + " U " + render_node(k.rhs) + ")";
    }
    return {};
  }

  const std::vector<std::string>& ap_;
  std::map<NodeKey, int> node_ids_;
  std::vector<NodeKey> nodes_;
  std::vector<std::optional<Sop>> sop_cache_;
  std::map<Obligation, int> ob_ids_;
  std::vector<Obligation> obligations_;
  std::map<std::pair<int, Letter>, Sop> deriv_cache_;
};

}  // namespace

Dfa::State Dfa::run(std::span<const Letter> word, State from) const {
  State q = from;
  for (Letter a : word) q = step(q, a);
  return q;
}

bool Dfa::accepts(std::span<const Letter> word) const {
  State q = initial_;
  if (q == accepting_) return true;
  for (Letter a : word) {
    q = step(q, a);
    if (q == accepting_) return true;
  }
  return false;
}

Dfa Dfa::from_table(std::vector<std::string> ap, std::vector<State> table, State initial, State accepting,
                    std::vector<std::string> names) {
  if (ap.size() > kMaxPropositions) throw ConfigError("too many atomic propositions");
  Dfa d;
  d.ap_ = std::move(ap);
  const std::size_t letters = d.num_letters();
  if (table.empty() || table.size() % letters != 0) throw ConfigError("transition table is not total");
  d.num_states_ = table.size() / letters;
  for (State s : table) {
    if (s >= d.num_states_) throw ConfigError("transition target out of range");
  }
  if (initial >= d.num_states_ || accepting >= d.num_states_) throw ConfigError("state index out of range");
  d.table_ = std::move(table);
  d.initial_ = initial;
  d.accepting_ = accepting;
  for (Letter a = 0; a < letters; ++a) {
    if (d.step(accepting, a) != accepting) throw ConfigError("accepting state is not absorbing");
  }
  for (State q = 0; q < d.num_states_ && !d.rejecting_; ++q) {
    if (q == accepting) continue;
    bool sink = true;
    for (Letter a = 0; a < letters && sink; ++a) sink = d.step(q, a) == q;
    if (sink) d.rejecting_ = q;
  }
  if (names.empty()) {
    for (State q = 0; q < d.num_states_; ++q) names.push_back("q" + std::to_string(q));
  }
  if (names.size() != d.num_states_) throw ConfigError("state name count mismatch");
  d.names_ = std::move(names);
  d.compute_distances();
  return d;
}

void Dfa::compute_distances() {
  const std::size_t letters = num_letters();
  std::vector<std::vector<State>> preds(num_states_);
  for (State q = 0; q < num_states_; ++q) {
    for (Letter a = 0; a < letters; ++a) {
      const State t = step(q, a);
      if (preds[t].empty() || preds[t].back() != q) preds[t].push_back(q);
    }
  }
  constexpr unsigned kUnseen = ~0u;
  distance_.assign(num_states_, kUnseen);
  distance_[accepting_] = 0;
  std::deque<State> queue{accepting_};
  unsigned farthest = 0;
  while (!queue.empty()) {
    const State q = queue.front();
    queue.pop_front();
    for (State p : preds[q]) {
      if (distance_[p] != kUnseen) continue;
      distance_[p] = distance_[q] + 1;
      farthest = std::max(farthest, distance_[p]);
      queue.push_back(p);
    }
  }
  max_distance_ = farthest + 1;
  for (unsigned& d : distance_) {
    if (d == kUnseen) d = max_distance_;
  }
}

Dfa compile(const Formula& f, CompileOptions options) {
  if (f.ap.size() > kMaxPropositions) {
    throw ConfigError("alphabet too large: " + std::to_string(f.ap.size()) + " propositions (max " +
                      std::to_string(kMaxPropositions) + ")");
  }
  Compiler c(f);
  const Sop start = c.sop(c.intern(f.root));
  const Letter letters = Letter{1} << f.ap.size();

  std::map<Sop, Dfa::State> ids;
  std::vector<Sop> states;
  std::vector<std::vector<Dfa::State>> rows;
  auto add = [&](const Sop& s) {
    ids.emplace(s, states.size());
    states.push_back(s);
    rows.emplace_back(letters, 0);
    return states.size() - 1;
  };

  // Recursive-order depth-first numbering with an explicit stack.
  add(start);
  std::vector<std::pair<Dfa::State, Letter>> stack{{0, 0}};
  while (!stack.empty()) {
    auto& [q, a] = stack.back();
    if (a == letters) {
      stack.pop_back();
      continue;
    }
    const Letter letter = a++;
    const Dfa::State from = q;
    const Sop next = c.derive(states[from], letter);
    auto it = ids.find(next);
    if (it != ids.end()) {
      rows[from][letter] = it->second;
      continue;
    }
    const Dfa::State id = add(next);
    rows[from][letter] = id;
    stack.emplace_back(id, 0);
  }

  if (!ids.contains(kTrueSop)) {
    const Dfa::State id = add(kTrueSop);
    std::fill(rows[id].begin(), rows[id].end(), id);
  }

  std::vector<Dfa::State> table;
  table.reserve(states.size() * letters);
  for (const auto& row : rows) table.insert(table.end(), row.begin(), row.end());
  std::vector<std::string> names;
  for (const Sop& s : states) names.push_back(c.render(s));

  Dfa dfa = Dfa::from_table(f.ap, std::move(table), 0, ids.at(kTrueSop), std::move(names));
  return options.minimize ? minimize(dfa) : dfa;
}

Dfa minimize(const Dfa& dfa) {
  const std::size_t n = dfa.num_states();
  const std::size_t letters = dfa.num_letters();
  // Moore refinement: split blocks by (block, successor blocks) signatures.
  std::vector<std::size_t> block(n);
  for (std::size_t q = 0; q < n; ++q) block[q] = dfa.is_accepting(q) ? 0 : 1;
  std::size_t num_blocks = 0;
  while (true) {
    std::map<std::vector<std::size_t>, std::size_t> sig_ids;
    std::vector<std::size_t> next(n);
    for (std::size_t q = 0; q < n; ++q) {
      std::vector<std::size_t> sig{block[q]};
      for (Letter a = 0; a < letters; ++a) sig.push_back(block[dfa.step(q, a)]);
      next[q] = sig_ids.try_emplace(std::move(sig), sig_ids.size()).first->second;
    }
    const std::size_t count = sig_ids.size();
    block = std::move(next);
    if (count == num_blocks) break;
    num_blocks = count;
  }

  // Renumber blocks depth-first from the initial state, then unreachable ones.
  std::vector<std::size_t> order(num_blocks, SIZE_MAX);
  std::size_t assigned = 0;
  std::vector<std::pair<std::size_t, Letter>> stack;
  auto visit = [&](std::size_t q) {
    if (order[block[q]] != SIZE_MAX) return;
    order[block[q]] = assigned++;
    stack.emplace_back(q, 0);
  };
  auto explore = [&](std::size_t root) {
    visit(root);
    while (!stack.empty()) {
      auto& [q, a] = stack.back();
      if (a == letters) {
        stack.pop_back();
        continue;
      }
      const std::size_t target = dfa.step(q, a++);
      visit(target);
    }
  };
  explore(dfa.initial());
  for (std::size_t q = 0; q < n; ++q) explore(q);

  std::vector<Dfa::State> table(num_blocks * letters);
  std::vector<std::string> names(num_blocks);
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t b = order[block[q]];
    for (Letter a = 0; a < letters; ++a) table[b * letters + a] = order[block[dfa.step(q, a)]];
    if (names[b].empty()) names[b] = dfa.state_name(q);
  }
  return Dfa::from_table(dfa.ap(), std::move(table), order[block[dfa.initial()]],
                         order[block[dfa.accepting()]], std::move(names));
}

std::string to_dot(const Dfa& dfa) {
  std::ostringstream os;
  os << "digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n";
  for (Dfa::State q = 0; q < dfa.num_states(); ++q) {
    os << "  q" << q << " [label=\"q" << q << " [d=" << dfa.distance(q) << "]\""
       << (dfa.is_accepting(q) ? ", shape=doublecircle" : ", shape=circle") << "];\n";
  }
  os << "  __start -> q" << dfa.initial() << ";\n";
  const auto& ap = dfa.ap();
  auto letter_text = [&](Letter a) {
    std::string s = "{";
    bool first = true;
    for (std::size_t i = 0; i < ap.size(); ++i) {
      if (!((a >> i) & 1u)) continue;
      if (!first) s += ",";
      s += ap[i];
      first = false;
    }
    return s + "}";
  };
  for (Dfa::State q = 0; q < dfa.num_states(); ++q) {
    std::map<Dfa::State, std::vector<Letter>> edges;
    for (Letter a = 0; a < dfa.num_letters(); ++a) edges[dfa.step(q, a)].push_back(a);
    for (const auto& [target, letters] : edges) {
      std::string label;
      if (letters.size() == dfa.num_letters()) {
        label = "true";
      } else {
        for (std::size_t i = 0; i < letters.size(); ++i) label += (i ? " " : "") + letter_text(letters[i]);
      }
      os << "  q" << q << " -> q" << target << " [label=\"" << label << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace cosyn
