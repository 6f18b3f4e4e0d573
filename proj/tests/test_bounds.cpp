#include "doctest.h"

#include "oracle.hpp"
#include "testutil.hpp"
#include "xqui/dtd.hpp"
#include "xqui/kbound.hpp"

#include <set>
#include <string>

using namespace xqui;
using xqui::test::ch;
using xqui::test::fixture;

namespace {

int Fq(const char* text, const char* tag) {
    return tag_frequency(*parse_query(text), tag);
}
int Fu(const char* text, const char* tag) {
    return tag_frequency(*parse_update(text), tag);
}

} // namespace

TEST_CASE("published bound examples reproduce exactly") {
    Dtd recur = parse_dtd(fixture("recur.dtd"));

    // nested for-loops: frequencies along for add up
    CHECK(Fq("for $x in /a/a return for $y in /a/b return ($x, $y)", "a") == 3);

    // plain downward path: two a-steps dominate
    CHECK(Fq("/r/a/b/f/a", "a") == 2);
    CHECK(Fq("/r/a/b/f/a", "b") == 1);
    QueryPtr p1 = parse_query("/r/a/b/f/a");
    CHECK(recursive_steps(*p1) == 0);
    CHECK(k_of(*p1, recur).k() == 2);

    // all-recursive path: bound comes entirely from the step count
    QueryPtr p2 = parse_query("/descendant::b/descendant::c/descendant::e");
    CHECK(recursive_steps(*p2) == 3);
    CHECK(k_of(*p2, recur).f_max == 0);
    CHECK(k_of(*p2, recur).k() == 3);

    // mixed: one recursive step plus one repeated tag
    QueryPtr p3 = parse_query("/descendant::b/a/b");
    CHECK(recursive_steps(*p3) == 1);
    CHECK(k_of(*p3, recur).k() == 2);

    // the dependent pair: one recursive step each side
    CHECK(k_of(*parse_query("/descendant::b"), recur).k() == 1);
    CHECK(k_of(*parse_update("delete /descendant::c"), recur).k() == 1);
    CHECK(k_pair(*parse_query("/descendant::b"),
                 *parse_update("delete /descendant::c"), recur) == 2);

    // constructor nesting drives the update bound
    Dtd nested = parse_dtd(fixture("nested_insert.dtd"));
    UpdatePtr u = parse_update(fixture("nested_insert_u.xq"));
    CHECK(tag_frequency(*u, "b") == 3);
    CHECK(k_of(*u, nested).k() == 3);

    // sibling navigation: recursive step + sibling tag match
    Dtd sib = parse_dtd(fixture("sibling.dtd"));
    CHECK(k_of(*parse_query(fixture("sibling_q.xq")), sib).k() == 2);
}

TEST_CASE("frequency follows the combinators") {
    CHECK(Fq("()", "a") == 0);
    CHECK(Fq("\"s\"", "a") == 0);

    // branches take the max, iteration adds
    CHECK(Fq("($x/a/a, $x/a)", "a") == 2);
    CHECK(Fq("if ($x/a) then $x/a/a else $x/b", "a") == 2);
    CHECK(Fq("for $y in $x/a return $y/a", "a") == 2);
    CHECK(Fq("let $y := $x/a return ($y/a, $y/a)", "a") == 2);

    // identity hops are free; non-self wildcard steps hit every tag
    CHECK(Fq("$x", "a") == 0);
    CHECK(Fq("$x/.", "a") == 0);
    CHECK(Fq("$x/child::node()", "a") == 1);
    CHECK(Fq("$x/child::node()", "zz") == 1);
    CHECK(Fq("$x/text()", "a") == 0);
    CHECK(Fq("$x/descendant::a", "a") == 0);
    CHECK(Fq("$x/following-sibling::a", "a") == 1);
    CHECK(Fq("$x/..", "a") == 1);

    // constructors count their own tag once per nesting level
    CHECK(Fq("<a><a/></a>", "a") == 2);
    CHECK(Fq("<a>{$x/a}</a>", "a") == 2);
    CHECK(Fq("<a>{$x/b}</a>", "b") == 1);

    // update forms: rename introduces its new tag, insert adds both operands
    CHECK(Fu("rename node $x as z", "z") == 1);
    CHECK(Fu("delete $x/a/a", "a") == 2);
    CHECK(Fu("insert <a/> into $x/a", "a") == 2);
    CHECK(Fu("replace node $x/a with <a/>", "a") == 2);
    CHECK(Fu("(delete $x/a, delete $x/a)", "a") == 1);
    CHECK(Fu("for $y in $x/a return delete $y/a", "a") == 2);
    CHECK(Fu("if ($x/a) then delete $x/a else ()", "a") == 1);
}

TEST_CASE("recursion count follows the combinators") {
    CHECK(recursive_steps(*parse_query("$x/descendant::a")) == 1);
    CHECK(recursive_steps(*parse_query("$x/ancestor-or-self::node()")) == 1);
    CHECK(recursive_steps(*parse_query("$x/a")) == 0);
    CHECK(recursive_steps(*parse_query("($x//a, $x//b)")) == 1);          // max
    CHECK(recursive_steps(*parse_query("for $y in $x//a return $y//b")) == 2); // sum
    CHECK(recursive_steps(*parse_query("<e>{$x//a}</e>")) == 1);          // pass-through
    CHECK(recursive_steps(*parse_update("insert <e/> into $x//a")) == 1);
    CHECK(recursive_steps(*parse_update(
              "for $y in $x//a return replace node $y with <e>{$y//b}</e>")) == 2);
}

TEST_CASE("bounds cover constructed tags outside the schema alphabet") {
    Dtd split = parse_dtd(fixture("split.dtd"));
    QueryPtr q = parse_query("<zz><zz/></zz>");
    CHECK(mentioned_tags(*q) == std::set<std::string>{"zz"});
    CHECK(k_of(*q, split).f_max == 2);

    UpdatePtr u = parse_update("rename node /doc/a as zz");
    std::set<std::string> tags = mentioned_tags(*u);
    CHECK(tags.count("zz") == 1);
    CHECK(tags.count("doc") == 1);
    CHECK(tags.count("a") == 1);
}

TEST_CASE("pair bound sums the sides and floors at one") {
    Dtd split = parse_dtd(fixture("split.dtd"));
    CHECK(k_pair(*parse_query("()"), *parse_update("()"), split) == 1);

    Dtd nested = parse_dtd(fixture("nested_insert.dtd"));
    QueryPtr q = parse_query(fixture("nested_insert_q.xq"));
    UpdatePtr u = parse_update(fixture("nested_insert_u.xq"));
    CHECK(k_pair(*q, *u, nested) == k_of(*q, nested).k() + k_of(*u, nested).k());
    CHECK(k_pair(*q, *u, nested) == 4);
}

TEST_CASE("folding splices between repeated labels") {
    Dtd recur = parse_dtd(fixture("recur.dtd"));
    Chain c = ch("r.a.b.f.a.c.f.a.e");
    REQUIRE(is_chain(recur, c));

    std::set<Chain> cl = fold_closure(c);
    CHECK(cl.count(ch("r.a.c.f.a.e")) == 1);
    CHECK(cl.count(ch("r.a.e")) == 1);
    CHECK(cl.count(ch("r.a.b.f.a.e")) == 1);
    for (const Chain& f : cl) CHECK(is_chain(recur, f));

    // full fold reaches the unique all-distinct residue here
    CHECK(fold(c) == ch("r.a.e"));
    CHECK(fold(fold(c)) == fold(c));

    // nothing to fold in an all-distinct chain
    Chain flat = ch("r.a.c.f.g");
    CHECK(fold(flat) == flat);
    CHECK(fold_closure(flat) == std::set<Chain>{flat});
}

TEST_CASE("every splice of a valid chain stays a valid chain") {
    Dtd recur = parse_dtd(fixture("recur.dtd"));
    std::set<Chain> chains = xqui::oracle::k_chains(recur, 2, 5000);
    REQUIRE(!chains.empty());
    size_t folded_nontrivially = 0;
    for (const Chain& c : chains) {
        std::set<Chain> cl = fold_closure(c);
        for (const Chain& f : cl) {
            CHECK(is_chain(recur, f));
            CHECK(f.front() == c.front());
            CHECK(f.back() == c.back());
        }
        Chain full = fold(c);
        CHECK(cl.count(full) == 1);
        std::set<Label> uniq(full.begin(), full.end());
        CHECK(uniq.size() == full.size()); // fully folded: all labels distinct
        CHECK(is_k_chain(recur, full, 1));
        if (full != c) ++folded_nontrivially;
    }
    CHECK(folded_nontrivially > 0);
}
