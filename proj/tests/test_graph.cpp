#include "doctest.h"

#include "oracle.hpp"
#include "testutil.hpp"
#include "xqui/cdag.hpp"
#include "xqui/diag.hpp"
#include "xqui/dtd.hpp"

#include <algorithm>
#include <deque>
#include <set>

using namespace xqui;
using xqui::test::ch;
using xqui::test::fixture;

namespace {

SymId sym(const SymTable& t, const char* tag) { return t.of(Label::elem(tag)); }

// Saturate: breadth-first intern of every extension the graph will accept.
void saturate(Cdag& g) {
    std::deque<int> work{g.root()};
    std::set<int> seen{g.root()};
    while (!work.empty()) {
        int n = work.front();
        work.pop_front();
        for (SymId s = 0; s < g.syms().nsyms(); ++s) {
            int to = g.intern(n, s, 0);
            if (to >= 0 && seen.insert(to).second) work.push_back(to);
        }
    }
}

} // namespace

TEST_CASE("symbol table mirrors the schema") {
    Dtd d = parse_dtd(fixture("split.dtd"));
    SymTable t(d);
    CHECK(t.ntags() == 4); // doc a b c
    CHECK(t.nsyms() == 5);
    CHECK(t.root_sym() == sym(t, "doc"));
    CHECK(t.is_text(t.text_sym()));
    CHECK(t.of(Label::text()) == t.text_sym());
    CHECK(t.of(Label::elem("nope")) == -1);
    for (SymId s = 0; s < t.ntags(); ++s) CHECK(t.of(t.label(s)) == s);

    // adjacency: doc <- (a|b)*, a <- (c), b <- (c), c EMPTY
    CHECK(t.can(sym(t, "doc"), sym(t, "a")));
    CHECK(t.can(sym(t, "doc"), sym(t, "b")));
    CHECK(!t.can(sym(t, "doc"), sym(t, "c")));
    CHECK(t.can(sym(t, "a"), sym(t, "c")));
    CHECK(!t.can(sym(t, "a"), sym(t, "b")));
    CHECK(!t.can(sym(t, "c"), sym(t, "a")));
    CHECK(!t.can(t.text_sym(), sym(t, "a")));

    CHECK(t.succs(sym(t, "doc")) == std::vector<SymId>({sym(t, "a"), sym(t, "b")}));
    CHECK(t.succs(sym(t, "c")).empty());

    // (a|b)* allows any adjacent ordering; (c) alone has no sibling pairs
    auto& sd = t.sib(sym(t, "doc"));
    CHECK(sd.size() == 4);
    CHECK(sd.count({sym(t, "a"), sym(t, "b")}) == 1);
    CHECK(sd.count({sym(t, "b"), sym(t, "b")}) == 1);
    CHECK(t.sib(sym(t, "a")).empty());
}

TEST_CASE("code masks are plain bitsets over expression ids") {
    CodeMask m(200);
    CHECK(!m.any());
    m.set(0);
    m.set(63);
    m.set(64);
    m.set(199);
    CHECK(m.any());
    CHECK(m.test(0));
    CHECK(m.test(63));
    CHECK(m.test(64));
    CHECK(m.test(199));
    CHECK(!m.test(1));
    CHECK(!m.test(128));

    CodeMask r(200);
    r.set_range(60, 70);
    for (int i = 0; i < 200; ++i) CHECK(r.test(i) == (i >= 60 && i < 70));

    CodeMask o(200);
    o.set(5);
    CHECK(!o.intersects(m));
    CHECK(o.intersects(r) == false);
    o.or_with(r);
    CHECK(o.test(65));
    CHECK(o.intersects(r));
    CHECK(o.intersects(m)); // via bit 64
}

TEST_CASE("interning extends by one symbol and memoizes") {
    Dtd d = parse_dtd(fixture("split.dtd"));
    SymTable t(d);
    Cdag g(t, 2, 8);
    CHECK(g.depth_of(g.root()) == 0);
    CHECK(g.sym_of(g.root()) == t.root_sym());
    CHECK(g.max_depth() == 2 * t.ntags());

    int a1 = g.intern(g.root(), sym(t, "a"), 1);
    REQUIRE(a1 >= 0);
    CHECK(g.depth_of(a1) == 1);
    CHECK(g.find(1, sym(t, "a")) == a1);
    size_t edges_before = g.edges().size();
    CHECK(g.intern(g.root(), sym(t, "a"), 3) == a1); // same node, same edge
    CHECK(g.edges().size() == edges_before);

    // the shared edge carries both codes
    int eid = -1;
    for (size_t i = 0; i < g.edges().size(); ++i)
        if (g.edges()[i].from == g.root() && g.edges()[i].to == a1)
            eid = static_cast<int>(i);
    REQUIRE(eid >= 0);
    CHECK(g.edge(eid).codes.test(1));
    CHECK(g.edge(eid).codes.test(3));
    CHECK(!g.edge(eid).codes.test(2));

    // schema-impossible extensions are rejected without creating nodes
    size_t nodes_before = g.nodes().size();
    CHECK(g.intern(g.root(), sym(t, "c"), 1) == -1);
    CHECK(g.intern(a1, sym(t, "b"), 1) == -1);
    int c2 = g.intern(a1, sym(t, "c"), 2);
    REQUIRE(c2 >= 0);
    CHECK(g.intern(c2, sym(t, "a"), 2) == -1); // c is EMPTY
    CHECK(g.nodes().size() == nodes_before + 1);
}

TEST_CASE("interning respects the occurrence bound") {
    Dtd d = parse_dtd(fixture("recur.dtd"));
    SymTable t(d);
    // r.a.b.f.a needs two a's: rejected at k=1, accepted at k=2
    for (int k : {1, 2}) {
        Cdag g(t, k, 4);
        int n = g.root();
        n = g.intern(n, sym(t, "a"), 0);
        REQUIRE(n >= 0);
        n = g.intern(n, sym(t, "b"), 0);
        REQUIRE(n >= 0);
        n = g.intern(n, sym(t, "f"), 0);
        REQUIRE(n >= 0);
        int again = g.intern(n, sym(t, "a"), 0);
        if (k == 1)
            CHECK(again == -1);
        else
            CHECK(again >= 0);
    }
}

TEST_CASE("construction rejects out-of-range bounds") {
    Dtd d = parse_dtd(fixture("split.dtd"));
    SymTable t(d);
    CHECK_THROWS_AS(Cdag(t, 0, 4), Error);
    CHECK_THROWS_AS(Cdag(t, 201, 4), Error);
}

TEST_CASE("parents filters backward edges by lineage") {
    Dtd d = parse_dtd(fixture("split.dtd"));
    SymTable t(d);
    Cdag g(t, 1, 8);
    int a1 = g.intern(g.root(), sym(t, "a"), 2);
    int b1 = g.intern(g.root(), sym(t, "b"), 3);
    REQUIRE(a1 >= 0);
    REQUIRE(b1 >= 0);

    CodeMask only2(8), only3(8), both(8);
    only2.set(2);
    only3.set(3);
    both.set_range(0, 8);
    CHECK(g.parents(a1, only2) == std::vector<int>{g.root()});
    CHECK(g.parents(a1, only3).empty());
    CHECK(g.parents(b1, only3) == std::vector<int>{g.root()});
    CHECK(g.parents(g.root(), both).empty());
}

TEST_CASE("saturated graphs stay within the structural node bound") {
    for (const char* name : {"split.dtd", "recur.dtd", "sibling.dtd",
                             "nested_insert.dtd", "bib.dtd"}) {
        Dtd d = parse_dtd(fixture(name));
        SymTable t(d);
        for (int k : {1, 2, 3}) {
            CAPTURE(name);
            CAPTURE(k);
            Cdag g(t, k, 4);
            saturate(g);
            size_t ntags = static_cast<size_t>(t.ntags());
            CHECK(g.nodes().size() <= (static_cast<size_t>(k) * ntags + 2) * (ntags + 1));

            // completeness: every oracle k-chain threads through existing nodes
            for (const Chain& c : xqui::oracle::k_chains(d, k)) {
                for (size_t i = 0; i < c.size(); ++i) {
                    CAPTURE(to_string(c));
                    CHECK(g.find(static_cast<int>(i), t.of(c[i])) >= 0);
                }
            }
        }
    }
}

TEST_CASE("graph rendering emits dot") {
    Dtd d = parse_dtd(fixture("split.dtd"));
    SymTable t(d);
    Cdag g(t, 1, 4);
    saturate(g);
    std::string dot = g.to_dot();
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("->") != std::string::npos);
}

TEST_CASE("chain-level axis sets agree with the navigation oracle") {
    struct Cfg {
        const char* dtd;
        int k;
    };
    for (const Cfg& cfg : {Cfg{"split.dtd", 2}, Cfg{"recur.dtd", 2},
                           Cfg{"sibling.dtd", 2}, Cfg{"nested_insert.dtd", 3},
                           Cfg{"bib.dtd", 1}}) {
        Dtd d = parse_dtd(fixture(cfg.dtd));
        std::set<Chain> uni = xqui::oracle::k_chains(d, cfg.k);
        xqui::oracle::ChainNav nav(d, uni);
        for (const Chain& c : uni) {
            for (Axis ax : {Axis::Self, Axis::Child, Axis::Descendant,
                            Axis::DescendantOrSelf, Axis::Parent, Axis::Ancestor,
                            Axis::AncestorOrSelf, Axis::FollowingSibling,
                            Axis::PrecedingSibling}) {
                CAPTURE(cfg.dtd);
                CAPTURE(to_string(c));
                CAPTURE(axis_name(ax));
                CHECK(axis_chains(d, cfg.k, c, ax) == nav.axis(c, ax));
            }
        }
    }
}

TEST_CASE("extension suffixes agree with the navigation oracle") {
    for (const char* name : {"split.dtd", "recur.dtd", "sibling.dtd"}) {
        Dtd d = parse_dtd(fixture(name));
        int k = 2;
        std::set<Chain> uni = xqui::oracle::k_chains(d, k);
        xqui::oracle::ChainNav nav(d, uni);
        for (const Chain& c : uni) {
            std::set<Chain> naive;
            for (const Chain& e : nav.extensions(c))
                naive.insert(Chain(e.begin() + static_cast<ptrdiff_t>(c.size()), e.end()));
            CAPTURE(name);
            CAPTURE(to_string(c));
            CHECK(extension_suffixes(d, k, c) == naive);
        }
    }
}

TEST_CASE("node-test filtering looks at the final label") {
    Dtd d = parse_dtd(fixture("bib.dtd"));
    std::set<Chain> uni = xqui::oracle::k_chains(d, 1);
    std::set<Chain> titles = test_chains(d, uni, NodeTest::name("title"));
    CHECK(titles == std::set<Chain>{ch("bib.book.title")});
    std::set<Chain> texts = test_chains(d, uni, NodeTest::text());
    for (const Chain& c : texts) CHECK(c.back().is_text());
    CHECK(texts.count(ch("bib.book.title.#text")) == 1);
    CHECK(test_chains(d, uni, NodeTest::any()) == uni);
}
