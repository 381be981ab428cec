#include <map>
#include <random>
#include <string>

#include "doctest.h"
#include "ftg/constraint_engine.hpp"
#include "ftg/term_store.hpp"
#include "generators.hpp"
#include "oracles/lattice_oracle.hpp"
#include "oracles/ref_unifier.hpp"
#include "test_util.hpp"

using namespace ftg;

namespace {

using gen::load_graph;
using gen::random_graph;
using gen::small_lattice;

SortId sort(const TermStore& s, const char* name) { return *s.lattice().find(name); }

}  // namespace

TEST_CASE("new_node") {
  SortLattice l = small_lattice();
  TermStore s(l);
  NodeRef n = s.new_node(SortLattice::top);
  CHECK(s.sort(n) == SortLattice::top);
  CHECK(s.features(n).empty());
  CHECK_THROWS_AS(s.new_node(SortLattice::bottom), BottomSortError);
  CHECK(s.deref(s.deref(n)) == s.deref(n));
}

TEST_CASE("put_feature") {
  SortLattice l = small_lattice();
  TermStore s(l);
  NodeRef n = s.new_node(SortLattice::top);
  NodeRef v = s.new_node(sort(s, "noun"));
  REQUIRE(s.put_feature(n, "head", v));
  const std::string before = s.debug_state();
  REQUIRE(s.put_feature(n, "head", v));
  CHECK(s.debug_state() == before);

  NodeRef verb = s.new_node(sort(s, "verb"));
  CHECK_FALSE(s.put_feature(n, "head", verb));
  CHECK_FALSE(s.consistent());
  // Inconsistency is sticky until rollback.
  CHECK_FALSE(s.put_feature(n, "other", v));
}

TEST_CASE("put_feature on a closed node") {
  SortLattice l = small_lattice();
  TermStore s(l);
  auto rule = std::make_shared<SortRule>();
  rule->name = "a/1";
  rule->guard = sort(s, "a");
  rule->var = "C";
  rule->body.push_back(ClosedFeatures{PathExpr{"C", {}, {}}, std::make_shared<const std::vector<std::string>>(
                                                              std::vector<std::string>{"f", "g"})});
  s.engine().install_rule(rule);
  NodeRef n = s.new_node(sort(s, "a"));
  Checkpoint cp = s.checkpoint();
  CHECK(s.put_feature(n, "f", s.new_node(SortLattice::top)));
  CHECK_FALSE(s.put_feature(n, "h", s.new_node(SortLattice::top)));
  s.rollback(cp);
  // The monitor survives unification with an open node.
  NodeRef m = s.new_node(SortLattice::top);
  REQUIRE(s.put_feature(m, "h", s.new_node(SortLattice::top)));
  CHECK_FALSE(s.unify(n, m));
}

TEST_CASE("resolve_path") {
  SortLattice l = small_lattice();
  TermStore s(l);
  NodeRef p = s.new_node(sort(s, "phrase"));
  CHECK(s.resolve_path(p, {}, false) == s.deref(p));
  const std::vector<std::string> subj{"subj"};
  CHECK_FALSE(s.resolve_path(p, subj, false));
  const std::vector<std::string> path{"synsem", "loc", "cat"};
  auto cat = s.resolve_path(p, path, true);
  REQUIRE(cat);
  CHECK(s.sort(*testutil::path(s, p, "synsem")) == sort(s, "synsem"));
  CHECK(s.sort(*testutil::path(s, p, "synsem.loc")) == sort(s, "loc"));
  CHECK(s.sort(*cat) == SortLattice::top);
  CHECK(s.resolve_path(p, path, false) == cat);
}

TEST_CASE("unify examples") {
  SortLattice l = small_lattice();
  TermStore s(l);
  NodeRef n = s.new_node(sort(s, "a"));
  const std::string before = s.debug_state();
  CHECK(s.unify(n, n));
  CHECK(s.debug_state() == before);

  NodeRef noun = s.new_node(sort(s, "noun"));
  NodeRef subst = s.new_node(sort(s, "substantive"));
  REQUIRE(s.unify(noun, subst));
  CHECK(s.deref(noun) == s.deref(subst));
  CHECK(s.sort(subst) == sort(s, "noun"));

  // f:X g:X against f:d g:e, where d and e have no common subsort.
  Checkpoint cp = s.checkpoint();
  NodeRef x = s.new_node(SortLattice::top);
  NodeRef left = s.new_node(SortLattice::top);
  REQUIRE(s.put_feature(left, "f", x));
  REQUIRE(s.put_feature(left, "g", x));
  NodeRef right = s.new_node(SortLattice::top);
  REQUIRE(s.put_feature(right, "f", s.new_node(sort(s, "d"))));
  REQUIRE(s.put_feature(right, "g", s.new_node(sort(s, "e"))));
  CHECK_FALSE(s.unify(left, right));
  s.rollback(cp);
  CHECK(s.consistent());
}

TEST_CASE("cyclic unification terminates") {
  SortLattice l = small_lattice();
  TermStore s(l);
  NodeRef x = s.new_node(sort(s, "a"));
  REQUIRE(s.put_feature(x, "f", x));
  NodeRef y = s.new_node(sort(s, "b"));
  NodeRef z = s.new_node(SortLattice::top);
  REQUIRE(s.put_feature(y, "f", z));
  REQUIRE(s.put_feature(z, "f", y));
  REQUIRE(s.unify(x, y));
  CHECK(s.deref(x) == s.deref(z));
  CHECK(s.sort(x) == sort(s, "c"));
  CHECK(*s.feature(x, "f") == x);
}

TEST_CASE("checkpoints") {
  SortLattice l = small_lattice();
  TermStore s(l);
  NodeRef n = s.new_node(sort(s, "a"));
  const std::string base = s.debug_state();

  Checkpoint outer = s.checkpoint();
  REQUIRE(s.put_feature(n, "f", s.new_node(sort(s, "d"))));
  Checkpoint inner = s.checkpoint();
  CHECK_FALSE(s.restrict_sort(n, sort(s, "e")));
  CHECK_THROWS_AS(s.rollback(outer), NonLifoRollback);
  s.rollback(inner);
  CHECK(s.consistent());
  s.rollback(outer);
  CHECK(s.debug_state() == base);

  Checkpoint c = s.checkpoint();
  REQUIRE(s.restrict_sort(n, sort(s, "c")));
  s.commit(c);
  CHECK(s.sort(n) == sort(s, "c"));
  CHECK(s.open_checkpoints() == 0);
}

TEST_CASE("copy_into") {
  SortLattice l = small_lattice();
  TermStore src(l);
  NodeRef x = src.new_node(sort(src, "a"));
  NodeRef y = src.new_node(sort(src, "b"));
  REQUIRE(src.put_feature(x, "f", y));
  REQUIRE(src.put_feature(y, "g", x));
  REQUIRE(src.put_feature(x, "h", y));

  TermStore dst(l);
  auto rule = std::make_shared<SortRule>();
  rule->name = "b/1";
  rule->guard = sort(dst, "b");
  rule->var = "B";
  TermTemplate e;
  e.sort_name = "d";
  e.sort = sort(dst, "d");
  rule->body.push_back(PathEq{PathExpr{"B", {"mark"}, {}}, e});
  dst.engine().install_rule(rule);

  auto c1 = src.copy_into(x, dst);
  auto c2 = src.copy_into(x, dst);
  REQUIRE(c1);
  REQUIRE(c2);
  CHECK(*c1 != *c2);
  CHECK(dst.deref(*dst.feature(*c1, "f")) != dst.deref(*dst.feature(*c2, "f")));
  // The cycle and the sharing survive; the target's rule fired on the copy.
  NodeRef fy = *dst.feature(*c1, "f");
  CHECK(dst.deref(*dst.feature(fy, "g")) == dst.deref(*c1));
  CHECK(dst.deref(*dst.feature(*c1, "h")) == dst.deref(fy));
  CHECK(dst.sort(*dst.feature(fy, "mark")) == sort(dst, "d"));
  CHECK(dst.fired(fy).size() == 1);

  // Copy within the same store.
  auto c3 = src.copy_into(x, src);
  REQUIRE(c3);
  CHECK(isomorphic(src, x, *c3));
  CHECK(src.deref(*c3) != src.deref(x));
}

TEST_CASE("isomorphism respects sharing") {
  SortLattice l = small_lattice();
  TermStore s(l);
  NodeRef shared = s.new_node(SortLattice::top);
  NodeRef sx = s.new_node(SortLattice::top);
  REQUIRE(s.put_feature(shared, "f", sx));
  REQUIRE(s.put_feature(shared, "g", sx));
  NodeRef plain = s.new_node(SortLattice::top);
  REQUIRE(s.put_feature(plain, "f", s.new_node(SortLattice::top)));
  REQUIRE(s.put_feature(plain, "g", s.new_node(SortLattice::top)));
  CHECK(isomorphic(s, shared, shared));
  CHECK_FALSE(isomorphic(s, shared, plain));
  CHECK_FALSE(isomorphic(s, plain, shared));
}

TEST_CASE("clone keeps constraints") {
  SortLattice l = small_lattice();
  TermStore s(l);
  NodeRef first = s.new_node(SortLattice::top);
  NodeRef result = s.new_node(SortLattice::top);
  NodeRef second = s.new_node(SortLattice::elist);
  NodeRef root = s.new_node(SortLattice::top);
  REQUIRE(s.put_feature(root, "a", first));
  REQUIRE(s.put_feature(root, "r", result));
  REQUIRE(s.put_feature(root, "b", second));
  REQUIRE(s.engine().append(result, first, second));
  REQUIRE(s.engine().pending_suspensions() == 1);

  NodeRef copy = s.clone(root);
  CHECK(isomorphic(s, root, copy));
  CHECK(s.engine().pending_suspensions() == 2);
  // Binding the copy's list wakes only the copy's suspension.
  REQUIRE(s.restrict_sort(*s.feature(copy, "a"), SortLattice::elist));
  CHECK(s.sort(*s.feature(copy, "r")) == SortLattice::elist);
  CHECK(s.sort(*s.feature(root, "r")) == SortLattice::top);
  CHECK(s.engine().pending_suspensions() == 1);
}

TEST_CASE("unification agrees with the reference unifier") {
  SortLattice l = small_lattice();
  const oracle::Meet meet = gen::small_meet();
  std::mt19937 rng(99);
  int successes = 0, failures = 0;
  for (int round = 0; round < 500; ++round) {
    oracle::Graph g = random_graph(rng, 8);
    std::uniform_int_distribution<std::size_t> pick(0, g.sort.size() - 1);
    const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    auto ref = oracle::reference_unify(g, a, b, meet);

    TermStore s(l);
    auto refs = load_graph(s, g);
    const bool ok = s.unify(refs[a], refs[b]);
    REQUIRE(ok == ref.has_value());
    if (!ok) {
      ++failures;
      continue;
    }
    ++successes;
    REQUIRE(oracle::isomorphic(testutil::snapshot(s, refs[a]), 0, ref->graph, ref->class_of[a]));

    // Idempotence.
    const std::size_t nodes = s.node_count();
    const oracle::Graph once = testutil::snapshot(s, refs[a]);
    REQUIRE(s.unify(refs[a], refs[b]));
    REQUIRE(s.node_count() == nodes);
    REQUIRE(oracle::isomorphic(testutil::snapshot(s, refs[a]), 0, once, 0));

    // Commutativity.
    TermStore t(l);
    auto trefs = load_graph(t, g);
    REQUIRE(t.unify(trefs[b], trefs[a]));
    REQUIRE(oracle::isomorphic(testutil::snapshot(t, trefs[a]), 0, once, 0));

    // Associativity: (a b) c against (b c) a, both checked by the reference.
    auto ref2 = oracle::reference_unify(ref->graph, ref->class_of[a], ref->class_of[c], meet);
    TermStore u(l);
    auto urefs = load_graph(u, g);
    const bool bc = u.unify(urefs[b], urefs[c]);
    const bool abc = bc && u.unify(urefs[c], urefs[a]);
    const bool left = s.unify(refs[a], refs[c]);
    REQUIRE(left == ref2.has_value());
    REQUIRE(abc == left);
    if (left) {
      REQUIRE(oracle::isomorphic(testutil::snapshot(s, refs[a]), 0, ref2->graph, ref2->class_of[ref->class_of[a]]));
      REQUIRE(oracle::isomorphic(testutil::snapshot(u, urefs[a]), 0, testutil::snapshot(s, refs[a]), 0));
    }
  }
  CHECK(successes > 100);
  CHECK(failures > 20);
}

TEST_CASE("sorts only ever move down") {
  SortLattice l = small_lattice();
  std::mt19937 rng(5);
  for (int round = 0; round < 200; ++round) {
    oracle::Graph g = random_graph(rng, 8);
    TermStore s(l);
    auto refs = load_graph(s, g);
    std::vector<SortId> last;
    for (NodeRef r : refs) last.push_back(s.sort(r));
    std::uniform_int_distribution<std::size_t> pick(0, refs.size() - 1);
    for (int step = 0; step < 6; ++step) {
      if (!s.unify(refs[pick(rng)], refs[pick(rng)])) break;
      for (std::size_t i = 0; i < refs.size(); ++i) {
        REQUIRE(l.leq(s.sort(refs[i]), last[i]));
        last[i] = s.sort(refs[i]);
      }
    }
  }
}

TEST_CASE("rollback restores the exact prior state") {
  SortLattice l = small_lattice();
  std::mt19937 rng(2024);
  long checked = 0;
  for (int round = 0; round < 1000; ++round) {
    const long n = gen::random_rollbacks(l, rng);
    REQUIRE(n > 0);
    checked += n;
  }
  CHECK(checked > 3000);
}
