#include "xqui/ast.hpp"

namespace xqui {

const char* axis_name(Axis a) {
    switch (a) {
    case Axis::Self: return "self";
    case Axis::Child: return "child";
    case Axis::Descendant: return "descendant";
    case Axis::DescendantOrSelf: return "descendant-or-self";
    case Axis::Parent: return "parent";
    case Axis::Ancestor: return "ancestor";
    case Axis::AncestorOrSelf: return "ancestor-or-self";
    case Axis::FollowingSibling: return "following-sibling";
    case Axis::PrecedingSibling: return "preceding-sibling";
    }
    return "?";
}

bool axis_recursive(Axis a) {
    return a == Axis::Descendant || a == Axis::DescendantOrSelf || a == Axis::Ancestor ||
           a == Axis::AncestorOrSelf;
}

std::string NodeTest::to_string() const {
    switch (kind) {
    case Kind::Tag: return tag;
    case Kind::AnyNode: return "node()";
    case Kind::Text: return "text()";
    }
    return "?";
}

const char* insert_pos_name(InsertPos p) {
    switch (p) {
    case InsertPos::Into: return "into";
    case InsertPos::IntoFirst: return "as first into";
    case InsertPos::IntoLast: return "as last into";
    case InsertPos::Before: return "before";
    case InsertPos::After: return "after";
    }
    return "?";
}

std::string Query::to_string() const {
    using K = Kind;
    switch (kind) {
    case K::Empty: return "()";
    case K::Str: return "\"" + str + "\"";
    case K::Seq: return "(" + a->to_string() + ", " + b->to_string() + ")";
    case K::If:
        return "if (" + a->to_string() + ") then " + b->to_string() + " else " + c->to_string();
    case K::For: return "for $" + var + " in " + a->to_string() + " return " + b->to_string();
    case K::Let: return "let $" + var + " := " + a->to_string() + " return " + b->to_string();
    case K::Step: return "$" + var + "/" + axis_name(axis) + "::" + test.to_string();
    case K::Elem: return "<" + tag + ">{" + a->to_string() + "}</" + tag + ">";
    }
    return "?";
}

std::string Update::to_string() const {
    using K = Kind;
    switch (kind) {
    case K::Nop: return "()";
    case K::Seq: return "(" + u1->to_string() + ", " + u2->to_string() + ")";
    case K::If:
        return "if (" + q0->to_string() + ") then " + u1->to_string() + " else " + u2->to_string();
    case K::For: return "for $" + var + " in " + q0->to_string() + " return " + u1->to_string();
    case K::Let: return "let $" + var + " := " + q0->to_string() + " return " + u1->to_string();
    case K::Delete: return "delete nodes " + q0->to_string();
    case K::Rename: return "rename node " + q0->to_string() + " as " + tag;
    case K::Insert:
        return "insert nodes " + q1->to_string() + " " + insert_pos_name(pos) + " " +
               q0->to_string();
    case K::Replace: return "replace node " + q0->to_string() + " with " + q1->to_string();
    }
    return "?";
}

namespace {

void collect_free(const Query& q, std::set<std::string>& bound, std::set<std::string>& out) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::Empty:
    case K::Str:
        break;
    case K::Seq:
        collect_free(*q.a, bound, out);
        collect_free(*q.b, bound, out);
        break;
    case K::If:
        collect_free(*q.a, bound, out);
        collect_free(*q.b, bound, out);
        collect_free(*q.c, bound, out);
        break;
    case K::For:
    case K::Let: {
        collect_free(*q.a, bound, out);
        bool added = bound.insert(q.var).second;
        collect_free(*q.b, bound, out);
        if (added) bound.erase(q.var);
        break;
    }
    case K::Step:
        if (bound.count(q.var) == 0) out.insert(q.var);
        break;
    case K::Elem:
        collect_free(*q.a, bound, out);
        break;
    }
}

void collect_free(const Update& u, std::set<std::string>& bound, std::set<std::string>& out) {
    using K = Update::Kind;
    switch (u.kind) {
    case K::Nop:
        break;
    case K::Seq:
        collect_free(*u.u1, bound, out);
        collect_free(*u.u2, bound, out);
        break;
    case K::If:
        collect_free(*u.q0, bound, out);
        collect_free(*u.u1, bound, out);
        collect_free(*u.u2, bound, out);
        break;
    case K::For:
    case K::Let: {
        collect_free(*u.q0, bound, out);
        bool added = bound.insert(u.var).second;
        collect_free(*u.u1, bound, out);
        if (added) bound.erase(u.var);
        break;
    }
    case K::Delete:
    case K::Rename:
        collect_free(*u.q0, bound, out);
        break;
    case K::Insert:
    case K::Replace:
        collect_free(*u.q0, bound, out);
        collect_free(*u.q1, bound, out);
        break;
    }
}

} // namespace

std::set<std::string> free_vars(const Query& q) {
    std::set<std::string> bound, out;
    collect_free(q, bound, out);
    return out;
}

std::set<std::string> free_vars(const Update& u) {
    std::set<std::string> bound, out;
    collect_free(u, bound, out);
    return out;
}

bool quasi_closed(const Query& q) {
    for (const std::string& v : free_vars(q))
        if (v != kRootVar) return false;
    return true;
}

bool quasi_closed(const Update& u) {
    for (const std::string& v : free_vars(u))
        if (v != kRootVar) return false;
    return true;
}

} // namespace xqui
