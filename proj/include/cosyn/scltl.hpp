#pragma once

// Syntactically co-safe LTL: formulas, parser, and the co-safety automaton
// compiled from them by formula derivatives.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cosyn {

/// A letter of the alphabet 2^AP, bit i set iff proposition i holds.
using Letter = std::uint32_t;

/// Alphabet blow-up guard: letters are enumerated explicitly.
inline constexpr std::size_t kMaxPropositions = 16;

enum class NodeKind { True, False, Atom, NegAtom, And, Or, Next, Until };

struct FormulaNode;
using NodePtr = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  NodeKind kind;
  int atom = -1;  // proposition index for Atom / NegAtom
  NodePtr lhs;    // sole operand of Next
  NodePtr rhs;
};

namespace ltl {

NodePtr make_true();
NodePtr make_false();
NodePtr atom(int index);
NodePtr neg_atom(int index);
NodePtr conj(NodePtr lhs, NodePtr rhs);
NodePtr disj(NodePtr lhs, NodePtr rhs);
NodePtr next(NodePtr sub);
NodePtr until(NodePtr lhs, NodePtr rhs);

/// X applied `times` times.
NodePtr next_n(NodePtr sub, int times);

bool structurally_equal(const NodePtr& a, const NodePtr& b);

/// Number of levels in the tree; a single leaf has depth 1.
int depth(const NodePtr& node);

}  // namespace ltl

/// scLTL formula in compiled form: negation only on atoms, no sugar.
struct Formula {
  NodePtr root;
  std::vector<std::string> ap;
};

/// Fully parenthesised text that parses back to the same tree.
std::string to_string(const NodePtr& node, const std::vector<std::string>& ap);
std::string to_string(const Formula& f);

/// Parses `text` over the ordered proposition set `ap`.
///
/// Grammar, loosest binding first: `U` (right associative), `|`, `&`, then the
/// prefix operators `!`, `X`, `X^k`, `G[a,b]`, `F[a,b]`. Atoms are identifiers
/// from `ap`, `true` and `false`. Bounded operators are expanded on the fly:
/// `G[0,k] p` becomes `p & (X p & (... & X^k p))`, `F` likewise with `|`.
///
/// Throws ParseError on malformed text, unknown propositions, or negation
/// applied to anything other than an atom.
Formula parse(std::string_view text, std::vector<std::string> ap);

/// Letter with exactly the named propositions set.
Letter make_letter(const std::vector<std::string>& ap, std::initializer_list<std::string_view> props);

/// Deterministic co-safety automaton over 2^AP with a unique absorbing
/// accepting state and per-state distance to acceptance.
class Dfa {
 public:
  using State = std::size_t;

  /// Builds an automaton from an explicit row-major table
  /// (`table[q * 2^|AP| + letter]`). Validates totality and that `accepting`
  /// is absorbing; the rejecting sink is the first non-accepting state whose
  /// transitions are all self-loops, if any.
  static Dfa from_table(std::vector<std::string> ap, std::vector<State> table, State initial,
                        State accepting, std::vector<std::string> names = {});

  std::size_t num_states() const { return num_states_; }
  std::size_t num_letters() const { return std::size_t{1} << ap_.size(); }
  const std::vector<std::string>& ap() const { return ap_; }

  State initial() const { return initial_; }
  State accepting() const { return accepting_; }
  std::optional<State> rejecting() const { return rejecting_; }
  bool is_accepting(State q) const { return q == accepting_; }
  bool is_rejecting(State q) const { return rejecting_ && *rejecting_ == q; }

  State step(State q, Letter a) const { return table_[q * num_letters() + a]; }

  /// Extended transition function: the state reached from `from` after `word`.
  State run(std::span<const Letter> word, State from) const;
  State run(std::span<const Letter> word) const { return run(word, initial_); }

  /// True iff some prefix of `word` drives the initial state into acceptance.
  bool accepts(std::span<const Letter> word) const;

  /// Minimum number of letters to reach acceptance; `max_distance()` when
  /// acceptance is unreachable.
  unsigned distance(State q) const { return distance_[q]; }
  /// One more than the largest finite distance.
  unsigned max_distance() const { return max_distance_; }

  /// Residual formula (or user-supplied name) of a state.
  const std::string& state_name(State q) const { return names_[q]; }

  const std::vector<State>& table() const { return table_; }

 private:
  Dfa() = default;
  void compute_distances();

  std::vector<std::string> ap_;
  std::size_t num_states_ = 0;
  std::vector<State> table_;
  State initial_ = 0;
  State accepting_ = 0;
  std::optional<State> rejecting_;
  std::vector<unsigned> distance_;
  unsigned max_distance_ = 1;
  std::vector<std::string> names_;
};

struct CompileOptions {
  bool minimize = false;
};

/// Compiles `f` by repeated formula derivatives. States are residual formulas
/// in canonical sum-of-products form, numbered depth-first from the initial
/// state with letters visited in ascending order. `true` is the accepting
/// state (always present) and `false` the rejecting sink (present only if
/// reachable). Throws ConfigError if |AP| exceeds kMaxPropositions.
Dfa compile(const Formula& f, CompileOptions options = {});

/// Partition-refinement minimisation. Language and distances are preserved.
Dfa minimize(const Dfa& dfa);

inline Dfa::State dfa_step(const Dfa& dfa, Dfa::State q, Letter a) { return dfa.step(q, a); }
inline bool word_accepted(const Dfa& dfa, std::span<const Letter> word) { return dfa.accepts(word); }

/// Graphviz rendering: nodes `q{i} [d=<dist>]`, accepting node double-circled.
std::string to_dot(const Dfa& dfa);

/// Reads a UTF-8 formula file (one formula, surrounding whitespace ignored).
std::string read_formula_file(const std::string& path);

}  // namespace cosyn
