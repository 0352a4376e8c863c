#include "oracles/ltl_semantics.hpp"

#include "cosyn/error.hpp"
#include "cosyn/scltl.hpp"

#include <doctest.h>

#include <deque>
#include <fstream>
#include <random>

using namespace cosyn;

namespace {

std::vector<Letter> word(std::initializer_list<Letter> letters) { return letters; }

// Shortest accepting word length from q by breadth-first search over letters.
std::optional<unsigned> bfs_distance(const Dfa& dfa, Dfa::State from) {
  std::vector<int> seen(dfa.num_states(), -1);
  std::deque<Dfa::State> queue{from};
  seen[from] = 0;
  while (!queue.empty()) {
    const Dfa::State q = queue.front();
    queue.pop_front();
    if (dfa.is_accepting(q)) return static_cast<unsigned>(seen[q]);
    for (Letter a = 0; a < dfa.num_letters(); ++a) {
      const Dfa::State r = dfa.step(q, a);
      if (seen[r] < 0) {
        seen[r] = seen[q] + 1;
        queue.push_back(r);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("parse builds the expected trees") {
  const Formula until = parse("(!b) U c", {"b", "c"});
  CHECK(ltl::structurally_equal(until.root, ltl::until(ltl::neg_atom(0), ltl::atom(1))));

  const Formula g = parse("G[0,2] safe", {"safe"});
  const NodePtr s = ltl::atom(0);
  CHECK(ltl::structurally_equal(g.root, ltl::conj(s, ltl::conj(ltl::next(s), ltl::next(ltl::next(s))))));

  const Formula f = parse("F[0,1] a", {"a"});
  CHECK(ltl::structurally_equal(f.root, ltl::disj(ltl::atom(0), ltl::next(ltl::atom(0)))));

  const Formula xk = parse("X^3 a", {"a"});
  CHECK(ltl::structurally_equal(xk.root, ltl::next_n(ltl::atom(0), 3)));
}

TEST_CASE("precedence: unary > & > | > U, U right-associative") {
  const std::vector<std::string> ap{"a", "b", "c"};
  const NodePtr a = ltl::atom(0), b = ltl::atom(1), c = ltl::atom(2);
  CHECK(ltl::structurally_equal(parse("a | b & c", ap).root, ltl::disj(a, ltl::conj(b, c))));
  CHECK(ltl::structurally_equal(parse("a U b U c", ap).root, ltl::until(a, ltl::until(b, c))));
  CHECK(ltl::structurally_equal(parse("a | b U c", ap).root, ltl::until(ltl::disj(a, b), c)));
  CHECK(ltl::structurally_equal(parse("X a & b", ap).root, ltl::conj(ltl::next(a), b)));
}

TEST_CASE("to_string round-trips through the parser") {
  const std::vector<std::string> ap{"a", "b"};
  for (const char* text : {"(!b) U a", "G[0,3] a", "X (a | b) & !a", "true U (a & X b)", "false | a"}) {
    const Formula f = parse(text, ap);
    CHECK(ltl::structurally_equal(parse(to_string(f), ap).root, f.root));
  }
}

TEST_CASE("parse errors") {
  const std::vector<std::string> ap{"a", "b"};
  CHECK_THROWS_AS(parse("!(a U b)", ap), ParseError);
  CHECK_THROWS_AS(parse("a & c", ap), ParseError);
  CHECK_THROWS_AS(parse("a &", ap), ParseError);
  CHECK_THROWS_AS(parse("(a", ap), ParseError);
  CHECK_THROWS_AS(parse("G[3,1] a", ap), ParseError);
  CHECK_THROWS_AS(parse("a $ b", ap), ParseError);
  try {
    parse("a & zz", ap);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("compile(a): three states with distances 1, 0 and d_max") {
  const Dfa dfa = compile(parse("a", {"a"}));
  REQUIRE(dfa.num_states() == 3);
  const Dfa::State q = dfa.initial();
  CHECK(dfa.is_accepting(dfa.step(q, 1)));
  REQUIRE(dfa.rejecting().has_value());
  CHECK(dfa.step(q, 0) == *dfa.rejecting());
  CHECK(dfa.distance(q) == 1);
  CHECK(dfa.distance(dfa.accepting()) == 0);
  CHECK(dfa.max_distance() == 2);
  CHECK(dfa.distance(*dfa.rejecting()) == 2);
}

TEST_CASE("compile(G[0,1] safe) is a two-step chain") {
  const Dfa dfa = compile(parse("G[0,1] safe", {"safe"}));
  const Dfa::State q0 = dfa.initial();
  const Dfa::State q1 = dfa.step(q0, 1);
  CHECK(dfa.is_accepting(dfa.step(q1, 1)));
  CHECK(dfa.is_rejecting(dfa.step(q0, 0)));
  CHECK(dfa.is_rejecting(dfa.step(q1, 0)));
  CHECK(dfa.distance(q0) == 2);
  CHECK(dfa.distance(q1) == 1);
}

TEST_CASE("compile(true) is a single accepting sink") {
  const Dfa dfa = compile(parse("true", {"a"}));
  CHECK(dfa.num_states() == 1);
  CHECK(dfa.is_accepting(dfa.initial()));
  CHECK(dfa.max_distance() == 1);
  CHECK(dfa.accepts(word({})));
}

TEST_CASE("the automaton of G[0,1] !b has the reference numbering") {
  const Dfa dfa = compile(parse("G[0,1] !b", {"b"}));
  REQUIRE(dfa.num_states() == 4);
  CHECK(dfa.initial() == 0);
  CHECK(dfa.step(0, 0) == 1);
  CHECK(dfa.step(1, 0) == 2);
  CHECK(dfa.step(0, 1) == 3);
  CHECK(dfa.step(1, 1) == 3);
  CHECK(dfa.accepting() == 2);
  CHECK(dfa.is_rejecting(3));
  for (Letter a = 0; a < 2; ++a) {
    CHECK(dfa.step(2, a) == 2);
    CHECK(dfa.step(3, a) == 3);
  }
  CHECK(dfa.accepts(word({0, 0})));
  CHECK_FALSE(dfa.accepts(word({1})));
  CHECK(dfa.run(word({})) == dfa.initial());
}

TEST_CASE("G[0,10] safe compiles to a chain of T+2 states plus the sink") {
  const Dfa dfa = compile(parse("G[0,10] safe", {"safe"}));
  CHECK(dfa.num_states() == 13);
  CHECK(dfa.rejecting().has_value());
  CHECK(dfa.distance(dfa.initial()) == 11);
  CHECK(dfa.max_distance() == 12);
}

TEST_CASE("automaton invariants on a sample of formulas") {
  const std::vector<std::string> ap{"a", "b"};
  for (const char* text : {"(!b) U a", "G[0,3] a", "F[0,4] (a & b)", "(a U b) & X X a", "a U (b U X a)",
                           "X (a | !b) U (b & X !a)"}) {
    CAPTURE(text);
    const Formula f = parse(text, ap);
    const Dfa dfa = compile(f);
    // Totality, absorption and BFS-consistent distances.
    for (Dfa::State q = 0; q < dfa.num_states(); ++q) {
      const auto d = bfs_distance(dfa, q);
      CHECK(dfa.distance(q) == (d ? *d : dfa.max_distance()));
      for (Letter a = 0; a < dfa.num_letters(); ++a) {
        CHECK(dfa.step(q, a) < dfa.num_states());
        if (dfa.is_accepting(q)) CHECK(dfa.step(q, a) == q);
      }
    }
    // Compiling twice gives the same table; minimisation keeps the language.
    CHECK(compile(f).table() == dfa.table());
    const Dfa small = minimize(dfa);
    CHECK(small.num_states() <= dfa.num_states());
    for (const auto& w : oracle::all_words(4, 5)) {
      CHECK(small.accepts(w) == dfa.accepts(w));
      CHECK(dfa.accepts(w) == oracle::good_prefix(f, w));
    }
    CHECK(small.distance(small.initial()) == dfa.distance(dfa.initial()));
  }
}

TEST_CASE("acceptance is preserved by extension") {
  const Dfa dfa = compile(parse("(!b) U (a & X b)", {"a", "b"}));
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Letter> letter(0, 3);
  for (int i = 0; i < 200; ++i) {
    std::vector<Letter> w;
    for (int k = 0; k < 8; ++k) w.push_back(letter(rng));
    if (!dfa.accepts(w)) continue;
    w.push_back(letter(rng));
    CHECK(dfa.accepts(w));
  }
}

TEST_CASE("alphabet guard") {
  std::vector<std::string> ap;
  for (int i = 0; i < 17; ++i) ap.push_back("p" + std::to_string(i));
  CHECK_THROWS_AS(compile(parse("p0", ap)), ConfigError);
}

TEST_CASE("from_table validates its input") {
  // q0 --a--> q1 (accepting), q0 --!a--> q0.
  const Dfa dfa = Dfa::from_table({"a"}, {0, 1, 1, 1}, 0, 1);
  CHECK(dfa.distance(0) == 1);
  CHECK_FALSE(dfa.rejecting().has_value());
  CHECK_THROWS_AS(Dfa::from_table({"a"}, {0, 1, 0, 1}, 0, 1), ConfigError);  // accepting not absorbing
  CHECK_THROWS_AS(Dfa::from_table({"a"}, {0, 2, 1, 1}, 0, 1), ConfigError);  // target out of range
}

TEST_CASE("DOT export annotates distances and marks acceptance") {
  const Dfa dfa = compile(parse("G[0,1] !b", {"b"}));
  const std::string dot = to_dot(dfa);
  CHECK(dot.find("q0 [d=2]") != std::string::npos);
  CHECK(dot.find("q2 [d=0]") != std::string::npos);
  CHECK(dot.find("doublecircle") != std::string::npos);
  CHECK(dot.rfind("digraph", 0) == 0);
}

TEST_CASE("formula files") {
  {
    std::ofstream out("formula.txt");
    out << "  (!hit) U goal \n";
  }
  CHECK(read_formula_file("formula.txt") == "(!hit) U goal");
  CHECK_THROWS_AS(read_formula_file("missing-formula.txt"), ConfigError);
}
