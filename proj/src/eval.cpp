#include "xqui/eval.hpp"
#include "xqui/diag.hpp"

#include <algorithm>
#include <set>

namespace xqui {

namespace {

bool test_passes(const Store& s, Location l, const NodeTest& t) {
    const Node& n = s.at(l);
    switch (t.kind) {
    case NodeTest::Kind::AnyNode: return true;
    case NodeTest::Kind::Text: return n.label.is_text();
    case NodeTest::Kind::Tag: return !n.label.is_text() && n.label.name() == t.tag;
    }
    return false;
}

void axis_nodes(const Store& s, Location ctx, Axis axis, std::vector<Location>& out) {
    const Node& n = s.at(ctx);
    switch (axis) {
    case Axis::Self:
        out.push_back(ctx);
        break;
    case Axis::Child:
        out.insert(out.end(), n.children.begin(), n.children.end());
        break;
    case Axis::Descendant: {
        auto all = s.preorder(ctx);
        out.insert(out.end(), all.begin() + 1, all.end());
        break;
    }
    case Axis::DescendantOrSelf: {
        auto all = s.preorder(ctx);
        out.insert(out.end(), all.begin(), all.end());
        break;
    }
    case Axis::Parent:
        if (n.parent != kNoLoc) out.push_back(n.parent);
        break;
    case Axis::Ancestor:
        for (Location p = n.parent; p != kNoLoc; p = s.at(p).parent) out.push_back(p);
        break;
    case Axis::AncestorOrSelf:
        for (Location p = ctx; p != kNoLoc; p = s.at(p).parent) out.push_back(p);
        break;
    case Axis::FollowingSibling:
    case Axis::PrecedingSibling: {
        if (n.parent == kNoLoc) break;
        const auto& sibs = s.at(n.parent).children;
        auto it = std::find(sibs.begin(), sibs.end(), ctx);
        if (it == sibs.end()) break;
        if (axis == Axis::FollowingSibling) {
            out.insert(out.end(), it + 1, sibs.end());
        } else {
            out.insert(out.end(), sibs.begin(), it);
        }
        break;
    }
    }
}

// Merge adjacent text children of an element (constructor semantics).
void merge_text_children(Store& s, Location el) {
    const auto kids = s.at(el).children;
    bool any_adjacent = false;
    for (size_t i = 0; i + 1 < kids.size(); ++i)
        if (s.at(kids[i]).label.is_text() && s.at(kids[i + 1]).label.is_text())
            any_adjacent = true;
    if (!any_adjacent) return;
    std::vector<Location> merged;
    size_t i = 0;
    while (i < kids.size()) {
        if (!s.at(kids[i]).label.is_text()) {
            merged.push_back(kids[i]);
            ++i;
            continue;
        }
        std::string text;
        while (i < kids.size() && s.at(kids[i]).label.is_text()) {
            text += s.at(kids[i]).text;
            ++i;
        }
        merged.push_back(s.add_text(std::move(text)));
    }
    for (Location k : kids) s.unlink(k);
    for (Location k : merged)
        if (s.at(k).parent == kNoLoc) s.append_child(el, k);
}

const NodeSeq& lookup(const DynEnv& env, const std::string& var) {
    auto it = env.vars.find(var);
    if (it == env.vars.end()) throw EvalError("unbound variable $" + var);
    return it->second;
}

} // namespace

NodeSeq eval_query(const Query& q, Store& s, DynEnv& env) {
    using K = Query::Kind;
    switch (q.kind) {
    case K::Empty:
        return {};
    case K::Str:
        return {s.add_text(q.str)};
    case K::Seq: {
        NodeSeq out = eval_query(*q.a, s, env);
        NodeSeq rhs = eval_query(*q.b, s, env);
        out.insert(out.end(), rhs.begin(), rhs.end());
        return out;
    }
    case K::If: {
        NodeSeq cond = eval_query(*q.a, s, env);
        return eval_query(cond.empty() ? *q.c : *q.b, s, env);
    }
    case K::For: {
        NodeSeq src = eval_query(*q.a, s, env);
        NodeSeq out;
        for (Location l : src) {
            NodeSeq saved;
            bool had = env.vars.count(q.var);
            if (had) saved = env.vars[q.var];
            env.vars[q.var] = {l};
            NodeSeq part = eval_query(*q.b, s, env);
            out.insert(out.end(), part.begin(), part.end());
            if (had)
                env.vars[q.var] = std::move(saved);
            else
                env.vars.erase(q.var);
        }
        return out;
    }
    case K::Let: {
        NodeSeq def = eval_query(*q.a, s, env);
        NodeSeq saved;
        bool had = env.vars.count(q.var);
        if (had) saved = env.vars[q.var];
        env.vars[q.var] = std::move(def);
        NodeSeq out = eval_query(*q.b, s, env);
        if (had)
            env.vars[q.var] = std::move(saved);
        else
            env.vars.erase(q.var);
        return out;
    }
    case K::Step: {
        const NodeSeq& ctxs = lookup(env, q.var);
        NodeSeq out;
        for (Location ctx : ctxs) {
            std::vector<Location> cand;
            axis_nodes(s, ctx, q.axis, cand);
            for (Location l : cand)
                if (test_passes(s, l, q.test)) out.push_back(l);
        }
        s.document_order(out);
        return out;
    }
    case K::Elem: {
        NodeSeq content = eval_query(*q.a, s, env);
        Location el = s.add_element(q.tag);
        for (Location l : content) s.append_child(el, s.deep_copy(l));
        merge_text_children(s, el);
        return {el};
    }
    }
    return {};
}

NodeSeq eval_query(const Query& q, Store& s, Location root) {
    DynEnv env;
    env.vars[kRootVar] = {root};
    return eval_query(q, s, env);
}

// --------------------------------------------------------------------------
// Updates

std::string UpdateCommand::to_string(const Store& s) const {
    switch (kind) {
    case Kind::Del: return "del(" + std::to_string(target) + ")";
    case Kind::Ren: return "ren(" + std::to_string(target) + ", " + tag + ")";
    case Kind::Ins: {
        std::string out = "ins([";
        for (size_t i = 0; i < content.size(); ++i)
            out += (i ? ", " : "") + serialize(s, content[i]);
        return out + "], " + insert_pos_name(pos) + ", " + std::to_string(target) + ")";
    }
    case Kind::Repl: {
        std::string out = "repl(" + std::to_string(target) + ", [";
        for (size_t i = 0; i < content.size(); ++i)
            out += (i ? ", " : "") + serialize(s, content[i]);
        return out + "])";
    }
    }
    return "?";
}

namespace {

Location single_target(const NodeSeq& seq, const char* what) {
    if (seq.size() != 1)
        throw CardinalityError(std::string(what) + " target produced " +
                               std::to_string(seq.size()) + " nodes, expected exactly 1");
    return seq.front();
}

std::vector<Location> copy_all(Store& s, const NodeSeq& seq) {
    std::vector<Location> out;
    out.reserve(seq.size());
    for (Location l : seq) out.push_back(s.deep_copy(l));
    return out;
}

void build(const Update& u, Store& s, DynEnv& env, std::vector<UpdateCommand>& out) {
    using K = Update::Kind;
    switch (u.kind) {
    case K::Nop:
        return;
    case K::Seq:
        build(*u.u1, s, env, out);
        build(*u.u2, s, env, out);
        return;
    case K::If: {
        NodeSeq cond = eval_query(*u.q0, s, env);
        if (!cond.empty())
            build(*u.u1, s, env, out);
        else if (u.u2)
            build(*u.u2, s, env, out);
        return;
    }
    case K::For: {
        NodeSeq src = eval_query(*u.q0, s, env);
        for (Location l : src) {
            NodeSeq saved;
            bool had = env.vars.count(u.var);
            if (had) saved = env.vars[u.var];
            env.vars[u.var] = {l};
            build(*u.u1, s, env, out);
            if (had)
                env.vars[u.var] = std::move(saved);
            else
                env.vars.erase(u.var);
        }
        return;
    }
    case K::Let: {
        NodeSeq def = eval_query(*u.q0, s, env);
        NodeSeq saved;
        bool had = env.vars.count(u.var);
        if (had) saved = env.vars[u.var];
        env.vars[u.var] = std::move(def);
        build(*u.u1, s, env, out);
        if (had)
            env.vars[u.var] = std::move(saved);
        else
            env.vars.erase(u.var);
        return;
    }
    case K::Delete: {
        NodeSeq targets = eval_query(*u.q0, s, env);
        for (Location l : targets) {
            UpdateCommand c;
            c.kind = UpdateCommand::Kind::Del;
            c.target = l;
            out.push_back(std::move(c));
        }
        return;
    }
    case K::Rename: {
        Location t = single_target(eval_query(*u.q0, s, env), "rename");
        if (s.at(t).label.is_text()) throw EvalError("rename target must be an element");
        UpdateCommand c;
        c.kind = UpdateCommand::Kind::Ren;
        c.target = t;
        c.tag = u.tag;
        out.push_back(std::move(c));
        return;
    }
    case K::Insert: {
        NodeSeq src = eval_query(*u.q1, s, env);
        Location t = single_target(eval_query(*u.q0, s, env), "insert");
        bool into = u.pos == InsertPos::Into || u.pos == InsertPos::IntoFirst ||
                    u.pos == InsertPos::IntoLast;
        if (into && s.at(t).label.is_text())
            throw EvalError("insert into target must be an element");
        UpdateCommand c;
        c.kind = UpdateCommand::Kind::Ins;
        c.target = t;
        c.pos = u.pos;
        c.content = copy_all(s, src);
        out.push_back(std::move(c));
        return;
    }
    case K::Replace: {
        Location t = single_target(eval_query(*u.q0, s, env), "replace");
        NodeSeq src = eval_query(*u.q1, s, env);
        UpdateCommand c;
        c.kind = UpdateCommand::Kind::Repl;
        c.target = t;
        c.content = copy_all(s, src);
        out.push_back(std::move(c));
        return;
    }
    }
}

size_t child_index(const Store& s, Location parent, Location child) {
    const auto& kids = s.at(parent).children;
    auto it = std::find(kids.begin(), kids.end(), child);
    return static_cast<size_t>(it - kids.begin());
}

} // namespace

std::vector<UpdateCommand> build_upl(const Update& u, Store& s, DynEnv& env) {
    std::vector<UpdateCommand> out;
    build(u, s, env, out);
    return out;
}

std::vector<UpdateCommand> build_upl(const Update& u, Store& s, Location root) {
    DynEnv env;
    env.vars[kRootVar] = {root};
    return build_upl(u, s, env);
}

void apply_upl(Store& s, const std::vector<UpdateCommand>& upl) {
    using K = UpdateCommand::Kind;
    // Compatibility checks before any mutation: two replacements of one node,
    // or renames of one node to different tags, make the list unappliable.
    {
        std::set<Location> repl_seen;
        std::map<Location, std::string> ren_seen;
        for (const UpdateCommand& c : upl) {
            if (c.kind == K::Repl && !repl_seen.insert(c.target).second)
                throw EvalError("incompatible updates: node replaced twice");
            if (c.kind == K::Ren) {
                auto [it, fresh] = ren_seen.emplace(c.target, c.tag);
                if (!fresh && it->second != c.tag)
                    throw EvalError("incompatible updates: node renamed to different tags");
            }
        }
    }
    for (const UpdateCommand& c : upl)
        if (c.kind == K::Ren) s.at(c.target).label = Label::elem(c.tag);
    for (const UpdateCommand& c : upl) {
        if (c.kind == K::Ins) {
            if (c.pos == InsertPos::Before || c.pos == InsertPos::After) {
                Location parent = s.at(c.target).parent;
                if (parent == kNoLoc)
                    throw EvalError("insert before/after target has no parent");
                size_t idx = child_index(s, parent, c.target);
                s.insert_children(parent, c.pos == InsertPos::After ? idx + 1 : idx, c.content);
            } else if (c.pos == InsertPos::IntoFirst) {
                s.insert_children(c.target, 0, c.content);
            } else { // Into == IntoLast
                s.insert_children(c.target, s.at(c.target).children.size(), c.content);
            }
        } else if (c.kind == K::Repl) {
            Location parent = s.at(c.target).parent;
            if (parent == kNoLoc) throw EvalError("replace target has no parent");
            size_t idx = child_index(s, parent, c.target);
            s.unlink(c.target);
            s.insert_children(parent, idx, c.content);
        }
    }
    for (const UpdateCommand& c : upl)
        if (c.kind == K::Del) s.unlink(c.target);
}

LocationSet involved_locations(const Store& s, const std::vector<UpdateCommand>& upl) {
    using K = UpdateCommand::Kind;
    LocationSet out;
    for (const UpdateCommand& c : upl) {
        if (c.kind == K::Del || c.kind == K::Ren || c.kind == K::Repl) out.insert(c.target);
        if (c.kind == K::Ins || c.kind == K::Repl)
            for (Location root : c.content)
                for (Location l : s.preorder(root)) out.insert(l);
    }
    return out;
}

std::string query_value(const Query& q, const Store& doc, Location root) {
    Store s = doc;
    NodeSeq res = eval_query(q, s, root);
    return serialize_forest(s, res);
}

bool dynamic_independent(const Query& q, const Update& u, const Store& doc, Location root) {
    std::string before = query_value(q, doc, root);
    Store s = doc;
    auto upl = build_upl(u, s, root);
    apply_upl(s, upl);
    std::string after = query_value(q, s, root);
    return before == after;
}

} // namespace xqui
