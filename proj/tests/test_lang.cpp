#include "doctest.h"

#include "xqui/ast.hpp"
#include "xqui/diag.hpp"

#include <set>
#include <vector>

using namespace xqui;

namespace {

// Unwraps the single-step case: a path of one component parses to a bare Step.
const Query& step_of(const QueryPtr& q) {
    REQUIRE(q->kind == Query::Kind::Step);
    return *q;
}

void collect_ids(const Query& q, std::vector<ExprId>& out);

void collect_ids_child(const QueryPtr& q, std::vector<ExprId>& out) {
    if (q) collect_ids(*q, out);
}

void collect_ids(const Query& q, std::vector<ExprId>& out) {
    out.push_back(q.id);
    collect_ids_child(q.a, out);
    collect_ids_child(q.b, out);
    collect_ids_child(q.c, out);
}

void collect_ids(const Update& u, std::vector<ExprId>& out) {
    out.push_back(u.id);
    collect_ids_child(u.q0, out);
    collect_ids_child(u.q1, out);
    if (u.u1) collect_ids(*u.u1, out);
    if (u.u2) collect_ids(*u.u2, out);
}

// Preorder id assignment: ids in a subtree are exactly [id, id_end), the root
// gets the smallest, and every node's children start right after it.
void check_preorder(const Query& q) {
    std::vector<ExprId> ids;
    collect_ids(q, ids);
    REQUIRE(!ids.empty());
    CHECK(ids.front() == q.id);
    CHECK(static_cast<ExprId>(ids.size()) == q.id_end - q.id);
    std::set<ExprId> uniq(ids.begin(), ids.end());
    CHECK(uniq.size() == ids.size());
    CHECK(*uniq.begin() == q.id);
    CHECK(*uniq.rbegin() == q.id_end - 1);
}

void check_preorder(const Update& u) {
    std::vector<ExprId> ids;
    collect_ids(u, ids);
    REQUIRE(!ids.empty());
    CHECK(ids.front() == u.id);
    CHECK(static_cast<ExprId>(ids.size()) == u.id_end - u.id);
    std::set<ExprId> uniq(ids.begin(), ids.end());
    CHECK(uniq.size() == ids.size());
    CHECK(*uniq.begin() == u.id);
    CHECK(*uniq.rbegin() == u.id_end - 1);
}

} // namespace

TEST_CASE("atoms parse to core forms") {
    CHECK(parse_query("()")->kind == Query::Kind::Empty);

    QueryPtr s = parse_query("\"lit\"");
    CHECK(s->kind == Query::Kind::Str);
    CHECK(s->str == "lit");

    QueryPtr seq = parse_query("(\"x\", \"y\")");
    REQUIRE(seq->kind == Query::Kind::Seq);
    CHECK(seq->a->kind == Query::Kind::Str);
    CHECK(seq->b->kind == Query::Kind::Str);

    QueryPtr iff = parse_query("if (/a) then /b else ()");
    REQUIRE(iff->kind == Query::Kind::If);
    CHECK(iff->a->kind == Query::Kind::Step);
    CHECK(iff->b->kind == Query::Kind::Step);
    CHECK(iff->c->kind == Query::Kind::Empty);
}

TEST_CASE("bare variables are self steps") {
    const Query& st = step_of(parse_query("$x"));
    CHECK(st.var == "x");
    CHECK(st.axis == Axis::Self);
    CHECK(st.test.kind == NodeTest::Kind::AnyNode);
}

TEST_CASE("absolute paths desugar to for-nests of single steps") {
    // Leading /a anchors at the root variable with a self axis: it selects the
    // root element iff its tag is a.
    const Query& one = step_of(parse_query("/a"));
    CHECK(one.var == kRootVar);
    CHECK(one.axis == Axis::Self);
    CHECK(one.test.kind == NodeTest::Kind::Tag);
    CHECK(one.test.tag == "a");

    // /a/b: for $v in $root/self::a return $v/child::b
    QueryPtr two = parse_query("/a/b");
    REQUIRE(two->kind == Query::Kind::For);
    const Query& in = step_of(two->a);
    CHECK(in.var == kRootVar);
    CHECK(in.axis == Axis::Self);
    const Query& last = step_of(two->b);
    CHECK(last.var == two->var);
    CHECK(last.axis == Axis::Child);
    CHECK(last.test.tag == "b");
}

TEST_CASE("// expands to a descendant-or-self step plus child step") {
    QueryPtr q = parse_query("//b");
    REQUIRE(q->kind == Query::Kind::For);
    const Query& dos = step_of(q->a);
    CHECK(dos.var == kRootVar);
    CHECK(dos.axis == Axis::DescendantOrSelf);
    CHECK(dos.test.kind == NodeTest::Kind::AnyNode);
    const Query& child = step_of(q->b);
    CHECK(child.var == q->var);
    CHECK(child.axis == Axis::Child);
    CHECK(child.test.tag == "b");
}

TEST_CASE("abbreviated steps map onto axes and node tests") {
    QueryPtr dot = parse_query("/a/.");
    const Query& self = step_of(dot->b);
    CHECK(self.axis == Axis::Self);
    CHECK(self.test.kind == NodeTest::Kind::AnyNode);

    QueryPtr dotdot = parse_query("/a/..");
    const Query& parent = step_of(dotdot->b);
    CHECK(parent.axis == Axis::Parent);
    CHECK(parent.test.kind == NodeTest::Kind::AnyNode);

    // The wildcard stands for any label.
    QueryPtr star = parse_query("/a/*");
    CHECK(step_of(star->b).test.kind == NodeTest::Kind::AnyNode);

    QueryPtr text = parse_query("/a/text()");
    CHECK(step_of(text->b).test.kind == NodeTest::Kind::Text);

    QueryPtr named = parse_query("$x/descendant::c");
    CHECK(step_of(named).axis == Axis::Descendant);
    CHECK(step_of(named).test.tag == "c");
}

TEST_CASE("following and preceding expand to the ancestor/sibling/descendant triple") {
    // following::c == ancestor-or-self::node()/following-sibling::node()
    //                 /descendant-or-self::c
    QueryPtr q = parse_query("$x/following::c");
    REQUIRE(q->kind == Query::Kind::For);
    REQUIRE(q->a->kind == Query::Kind::For);
    const Query& inner = *q->a;
    CHECK(step_of(inner.a).axis == Axis::AncestorOrSelf);
    CHECK(step_of(inner.a).var == "x");
    CHECK(step_of(inner.b).axis == Axis::FollowingSibling);
    CHECK(step_of(inner.b).test.kind == NodeTest::Kind::AnyNode);
    const Query& last = step_of(q->b);
    CHECK(last.axis == Axis::DescendantOrSelf);
    CHECK(last.test.tag == "c");

    QueryPtr p = parse_query("$x/preceding::c");
    REQUIRE(p->kind == Query::Kind::For);
    CHECK(step_of(p->a->b).axis == Axis::PrecedingSibling);

    // following-sibling:: is primitive, not sugar
    QueryPtr fs = parse_query("$x/following-sibling::b");
    CHECK(fs->kind == Query::Kind::Step);
}

TEST_CASE("predicates become existential if-filters") {
    // /a[b]/c: the filter keeps a binding iff its child::b result is nonempty.
    QueryPtr q = parse_query("/a[b]/c");
    REQUIRE(q->kind == Query::Kind::For);
    REQUIRE(q->a->kind == Query::Kind::For);
    const Query& filt = *q->a;
    CHECK(step_of(filt.a).test.tag == "a");
    REQUIRE(filt.b->kind == Query::Kind::If);
    const Query& cond = step_of(filt.b->a);
    CHECK(cond.var == filt.var);
    CHECK(cond.axis == Axis::Child);
    CHECK(cond.test.tag == "b");
    const Query& then = step_of(filt.b->b);
    CHECK(then.var == filt.var);
    CHECK(then.axis == Axis::Self);
    CHECK(filt.b->c->kind == Query::Kind::Empty);
    CHECK(step_of(q->b).test.tag == "c");
}

TEST_CASE("element constructors hold sequenced content") {
    QueryPtr e = parse_query("<a><b/>{/r/c}</a>");
    REQUIRE(e->kind == Query::Kind::Elem);
    CHECK(e->tag == "a");
    REQUIRE(e->a->kind == Query::Kind::Seq);
    CHECK(e->a->a->kind == Query::Kind::Elem);
    CHECK(e->a->a->tag == "b");
    CHECK(e->a->a->a->kind == Query::Kind::Empty);
    CHECK(e->a->b->kind == Query::Kind::For);

    // Literal text runs become string literals, with entities decoded.
    QueryPtr t = parse_query("<a>x&amp;y</a>");
    REQUIRE(t->a->kind == Query::Kind::Str);
    CHECK(t->a->str == "x&y");
}

TEST_CASE("update surface forms parse to the expected shapes") {
    UpdatePtr del = parse_update("delete nodes /a/b");
    CHECK(del->kind == Update::Kind::Delete);
    CHECK(del->q0->kind == Query::Kind::For);
    // the "nodes"/"node" keyword is optional
    CHECK(parse_update("delete /a/b")->kind == Update::Kind::Delete);

    UpdatePtr ren = parse_update("rename node /a as b");
    CHECK(ren->kind == Update::Kind::Rename);
    CHECK(ren->tag == "b");
    CHECK(parse_update("rename /a as b")->kind == Update::Kind::Rename);

    struct Pos {
        const char* text;
        InsertPos pos;
    };
    for (const Pos& p : {Pos{"into", InsertPos::Into},
                         Pos{"as first into", InsertPos::IntoFirst},
                         Pos{"as last into", InsertPos::IntoLast},
                         Pos{"before", InsertPos::Before},
                         Pos{"after", InsertPos::After}}) {
        CAPTURE(p.text);
        UpdatePtr ins = parse_update(std::string("insert nodes <c/> ") + p.text + " /a");
        REQUIRE(ins->kind == Update::Kind::Insert);
        CHECK(ins->pos == p.pos);
        CHECK(ins->q1->kind == Query::Kind::Elem);
        CHECK(ins->q0->kind == Query::Kind::Step);
    }

    UpdatePtr rep = parse_update("replace node /a with <b/>");
    CHECK(rep->kind == Update::Kind::Replace);
    CHECK(rep->q0->kind == Query::Kind::Step);
    CHECK(rep->q1->kind == Query::Kind::Elem);

    UpdatePtr comp = parse_update(
        "for $x in /a return if ($x/c) then delete $x/b else ()");
    REQUIRE(comp->kind == Update::Kind::For);
    CHECK(comp->var == "x");
    REQUIRE(comp->u1->kind == Update::Kind::If);
    CHECK(comp->u1->u1->kind == Update::Kind::Delete);
    CHECK(comp->u1->u2->kind == Update::Kind::Nop);

    UpdatePtr let = parse_update("let $y := /a return delete $y/b");
    REQUIRE(let->kind == Update::Kind::Let);
    CHECK(let->q0->kind == Query::Kind::Step);
    CHECK(let->u1->kind == Update::Kind::Delete);
}

TEST_CASE("expression ids are assigned in contiguous preorder") {
    for (const char* text : {"()", "/a", "/a[b]/c", "//b/following::c",
                             "for $x in /a/b return <e>{($x, \"t\")}</e>",
                             "if (/a) then (/b, /c) else let $y := /a return $y"}) {
        CAPTURE(text);
        check_preorder(*parse_query(text));
    }
    for (const char* text : {"delete //b",
                             "for $x in /a return insert <b><c/></b> into $x",
                             "if (/a/c) then rename /a as b else replace /a with <e/>"}) {
        CAPTURE(text);
        check_preorder(*parse_update(text));
    }
}

TEST_CASE("free variables and quasi-closure") {
    CHECK(free_vars(*parse_query("$x/a")) == std::set<std::string>{"x"});
    CHECK(free_vars(*parse_query("/a")) == std::set<std::string>{kRootVar});
    CHECK(free_vars(*parse_query("for $x in /a return $y")) ==
          std::set<std::string>({kRootVar, "y"}));
    // binders shadow: $y is bound in the body, so only the root leaks
    CHECK(free_vars(*parse_query("let $y := /a return $y/b")) ==
          std::set<std::string>{kRootVar});
    CHECK(free_vars(*parse_query("(for $x in /a return $x, $x)")) ==
          std::set<std::string>({kRootVar, "x"}));

    CHECK(quasi_closed(*parse_query("/a/b")));
    CHECK(!quasi_closed(*parse_query("$x/a")));
    CHECK(quasi_closed(*parse_update("for $x in /a return delete $x/b")));
    CHECK(!quasi_closed(*parse_update("rename node $z as b")));
    CHECK(free_vars(*parse_update("insert $v into /a")) ==
          std::set<std::string>({kRootVar, "v"}));
}

TEST_CASE("core-form text round-trips through the parser") {
    // to_string of a desugared tree without generated variables is itself
    // valid surface syntax and re-parses to the same rendering.
    for (const char* text : {"for $x in $root/child::a return $x/self::node()",
                             "let $y := $root/descendant::b return ($y/parent::node(), \"s\")",
                             "if ($root/child::a) then <e>{()}</e> else ()"}) {
        CAPTURE(text);
        std::string once = parse_query(text)->to_string();
        CHECK(parse_query(once)->to_string() == once);
    }
    for (const char* text : {"delete nodes $root/child::b",
                             "insert nodes <c>{()}</c> as last into $root/self::a",
                             "replace node $root/child::a with <b>{()}</b>",
                             "rename node $root/child::a as e"}) {
        CAPTURE(text);
        std::string once = parse_update(text)->to_string();
        CHECK(parse_update(once)->to_string() == once);
    }
}

TEST_CASE("parse errors report positions and causes") {
    CHECK_THROWS_AS(parse_query("foo::a"), ParseError);
    CHECK_THROWS_WITH_AS(parse_query("foo::a"),
                         "unknown axis 'foo' (line 1, col 6)", ParseError);
    CHECK_THROWS_AS(parse_query("for $x in /a"), ParseError);     // missing return
    CHECK_THROWS_AS(parse_query("/a["), ParseError);              // open predicate
    CHECK_THROWS_AS(parse_query("/a extra"), ParseError);         // trailing junk
    CHECK_THROWS_AS(parse_query("$"), ParseError);                // bare sigil
    CHECK_THROWS_AS(parse_query("<a><b></a>"), ParseError);       // mismatched tags
    CHECK_THROWS_AS(parse_query("\"unterminated"), ParseError);
    CHECK_THROWS_AS(parse_query(""), ParseError);
    CHECK_THROWS_AS(parse_update(""), ParseError);
    CHECK_THROWS_AS(parse_update("delete"), ParseError);
    CHECK_THROWS_AS(parse_update("insert <a/> inside /a"), ParseError);
    CHECK_THROWS_AS(parse_update("rename node /a"), ParseError);  // missing as-clause

    // multi-line position tracking
    try {
        parse_query("(/a,\n  foo::b)");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}
