#include "xqui/kbound.hpp"

#include <algorithm>

namespace xqui {

int tag_frequency(const Query& q, const std::string& tag) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::Empty:
    case K::Str:
        return 0;
    case K::Seq:
        return std::max(tag_frequency(*q.a, tag), tag_frequency(*q.b, tag));
    case K::If:
        return std::max({tag_frequency(*q.a, tag), tag_frequency(*q.b, tag),
                         tag_frequency(*q.c, tag)});
    case K::For:
    case K::Let:
        return tag_frequency(*q.a, tag) + tag_frequency(*q.b, tag);
    case K::Step:
        if (axis_recursive(q.axis)) return 0;
        if (q.axis == Axis::Self)
            // Identity hops ($x and `.` desugar to self::node()) touch no new
            // node and count 0; a tag-tested self step is the anchor of an
            // absolute path and counts like any other non-recursive match.
            return q.test.kind == NodeTest::Kind::Tag && q.test.tag == tag ? 1 : 0;
        if (q.test.kind == NodeTest::Kind::AnyNode) return 1;
        if (q.test.kind == NodeTest::Kind::Tag && q.test.tag == tag) return 1;
        return 0;
    case K::Elem:
        return (q.tag == tag ? 1 : 0) + tag_frequency(*q.a, tag);
    }
    return 0;
}

int tag_frequency(const Update& u, const std::string& tag) {
    using K = Update::Kind;
    switch (u.kind) {
    case K::Nop:
        return 0;
    case K::Seq:
        return std::max(tag_frequency(*u.u1, tag), tag_frequency(*u.u2, tag));
    case K::If:
        return std::max({tag_frequency(*u.q0, tag), tag_frequency(*u.u1, tag),
                         tag_frequency(*u.u2, tag)});
    case K::For:
    case K::Let:
        return tag_frequency(*u.q0, tag) + tag_frequency(*u.u1, tag);
    case K::Delete:
        return tag_frequency(*u.q0, tag);
    case K::Rename:
        return tag_frequency(*u.q0, tag) + (u.tag == tag ? 1 : 0);
    case K::Insert:
    case K::Replace:
        return tag_frequency(*u.q0, tag) + tag_frequency(*u.q1, tag);
    }
    return 0;
}

int recursive_steps(const Query& q) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::Empty:
    case K::Str:
        return 0;
    case K::Seq:
        return std::max(recursive_steps(*q.a), recursive_steps(*q.b));
    case K::If:
        return std::max({recursive_steps(*q.a), recursive_steps(*q.b), recursive_steps(*q.c)});
    case K::For:
    case K::Let:
        return recursive_steps(*q.a) + recursive_steps(*q.b);
    case K::Step:
        return axis_recursive(q.axis) ? 1 : 0;
    case K::Elem:
        return recursive_steps(*q.a);
    }
    return 0;
}

int recursive_steps(const Update& u) {
    using K = Update::Kind;
    switch (u.kind) {
    case K::Nop:
        return 0;
    case K::Seq:
        return std::max(recursive_steps(*u.u1), recursive_steps(*u.u2));
    case K::If:
        return std::max({recursive_steps(*u.q0), recursive_steps(*u.u1), recursive_steps(*u.u2)});
    case K::For:
    case K::Let:
        return recursive_steps(*u.q0) + recursive_steps(*u.u1);
    case K::Delete:
    case K::Rename:
        return recursive_steps(*u.q0);
    case K::Insert:
    case K::Replace:
        return recursive_steps(*u.q0) + recursive_steps(*u.q1);
    }
    return 0;
}

namespace {

void collect_tags(const Query& q, std::set<std::string>& out) {
    if (q.kind == Query::Kind::Step && q.test.kind == NodeTest::Kind::Tag) out.insert(q.test.tag);
    if (q.kind == Query::Kind::Elem) out.insert(q.tag);
    if (q.a) collect_tags(*q.a, out);
    if (q.b) collect_tags(*q.b, out);
    if (q.c) collect_tags(*q.c, out);
}

void collect_tags(const Update& u, std::set<std::string>& out) {
    if (u.kind == Update::Kind::Rename) out.insert(u.tag);
    if (u.q0) collect_tags(*u.q0, out);
    if (u.q1) collect_tags(*u.q1, out);
    if (u.u1) collect_tags(*u.u1, out);
    if (u.u2) collect_tags(*u.u2, out);
}

} // namespace

std::set<std::string> mentioned_tags(const Query& q) {
    std::set<std::string> out;
    collect_tags(q, out);
    return out;
}

std::set<std::string> mentioned_tags(const Update& u) {
    std::set<std::string> out;
    collect_tags(u, out);
    return out;
}

namespace {

template <typename Expr>
KBound k_of_impl(const Expr& e, const Dtd& d) {
    std::set<std::string> tags = mentioned_tags(e);
    tags.insert(d.tags().begin(), d.tags().end());
    KBound kb;
    for (const std::string& t : tags) kb.f_max = std::max(kb.f_max, tag_frequency(e, t));
    kb.r = recursive_steps(e);
    return kb;
}

} // namespace

KBound k_of(const Query& q, const Dtd& d) { return k_of_impl(q, d); }
KBound k_of(const Update& u, const Dtd& d) { return k_of_impl(u, d); }

int k_pair(const Query& q, const Update& u, const Dtd& d) {
    return std::max(1, k_of(q, d).k() + k_of(u, d).k());
}

Chain fold(Chain c) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < c.size() && !changed; ++i) {
            // last later occurrence of c[i]
            for (size_t j = c.size(); j-- > i + 1;) {
                if (c[j] == c[i]) {
                    c.erase(c.begin() + static_cast<ptrdiff_t>(i) + 1,
                            c.begin() + static_cast<ptrdiff_t>(j) + 1);
                    changed = true;
                    break;
                }
            }
        }
    }
    return c;
}

std::set<Chain> fold_closure(const Chain& c) {
    std::set<Chain> seen{c};
    std::vector<Chain> work{c};
    while (!work.empty()) {
        Chain cur = std::move(work.back());
        work.pop_back();
        for (size_t i = 0; i < cur.size(); ++i) {
            for (size_t j = i + 1; j < cur.size(); ++j) {
                if (cur[j] != cur[i]) continue;
                Chain next = cur;
                next.erase(next.begin() + static_cast<ptrdiff_t>(i) + 1,
                           next.begin() + static_cast<ptrdiff_t>(j) + 1);
                if (seen.insert(next).second) work.push_back(next);
            }
        }
    }
    return seen;
}

} // namespace xqui
