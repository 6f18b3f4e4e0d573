#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace xqui {

// Expression identifiers: assigned in preorder over the final (desugared)
// tree, so the ids of a subexpression form the contiguous range [id, id_end).
using ExprId = int;

enum class Axis {
    Self,
    Child,
    Descendant,
    DescendantOrSelf,
    Parent,
    Ancestor,
    AncestorOrSelf,
    FollowingSibling,
    PrecedingSibling,
};

const char* axis_name(Axis a);

// descendant, descendant-or-self, ancestor, ancestor-or-self
bool axis_recursive(Axis a);

struct NodeTest {
    enum class Kind { Tag, AnyNode, Text }; // a, node(), text()
    Kind kind = Kind::AnyNode;
    std::string tag;

    static NodeTest any() { return {}; }
    static NodeTest text() { return {Kind::Text, {}}; }
    static NodeTest name(std::string t) { return {Kind::Tag, std::move(t)}; }
    std::string to_string() const;
};

// Core query forms, post-desugaring.  Surface paths, predicates, wildcards,
// abbreviated axes and the following/preceding axes are all rewritten into
// these by the parser; a Step always applies a single axis to a variable.
struct Query;
using QueryPtr = std::shared_ptr<Query>;

struct Query {
    enum class Kind {
        Empty, // ()
        Str,   // string literal
        Seq,   // a, b
        If,    // if (a) then b else c
        For,   // for $var in a return b
        Let,   // let $var := a return b
        Step,  // $var/axis::test
        Elem,  // <tag>a</tag>
    };

    Kind kind = Kind::Empty;
    ExprId id = -1;
    ExprId id_end = -1; // one past the last id in this subtree

    std::string str;  // Str: literal value
    std::string var;  // For/Let: bound variable; Step: context variable
    Axis axis = Axis::Self;
    NodeTest test;    // Step
    std::string tag;  // Elem

    QueryPtr a, b, c; // Seq(a,b) If(a,b,c) For(a=in,b=body) Let(a=def,b=body) Elem(a)

    std::string to_string() const;
};

enum class InsertPos { Into, IntoFirst, IntoLast, Before, After };
const char* insert_pos_name(InsertPos p);

struct Update;
using UpdatePtr = std::shared_ptr<Update>;

// Update forms.  Targets and sources are queries; composition mirrors the
// query combinators.
struct Update {
    enum class Kind {
        Nop,     // ()
        Seq,     // u1, u2
        If,      // if (q) then u1 else u2
        For,     // for $var in q return u
        Let,     // let $var := q return u
        Delete,  // delete nodes q0
        Rename,  // rename node q0 as tag
        Insert,  // insert nodes q1 pos q0
        Replace, // replace node q0 with q1
    };

    Kind kind = Kind::Nop;
    ExprId id = -1;
    ExprId id_end = -1;

    std::string var;          // For/Let
    std::string tag;          // Rename
    InsertPos pos = InsertPos::Into;
    QueryPtr q0;              // target (Delete/Rename/Insert/Replace) or For/Let/If source/cond
    QueryPtr q1;              // source (Insert/Replace)
    UpdatePtr u1, u2;         // Seq(u1,u2) If(.,u1,u2) For/Let body=u1

    std::string to_string() const;
};

// Name of the implicit context variable absolute paths anchor at.
inline const char* kRootVar = "root";

std::set<std::string> free_vars(const Query& q);
std::set<std::string> free_vars(const Update& u);

// A query/update is quasi-closed when its only free variable is the root
// context variable.  Analysis and evaluation require this.
bool quasi_closed(const Query& q);
bool quasi_closed(const Update& u);

// Parse the XQuery / XQuery Update fragment.  Throws ParseError.  The result
// is desugared (see Query) with preorder expression ids assigned.
QueryPtr parse_query(std::string_view text);
UpdatePtr parse_update(std::string_view text);

} // namespace xqui
