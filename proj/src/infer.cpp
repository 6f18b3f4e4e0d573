#include "xqui/infer.hpp"

#include "xqui/diag.hpp"

#include <algorithm>
#include <deque>
#include <queue>

namespace xqui {

namespace {

std::set<std::string> free_of(const Query& q) { return free_vars(q); }

bool has_free(const Query& q, const std::string& v) {
    auto f = free_vars(q);
    return f.count(v) != 0;
}

} // namespace

Inference::Inference(const Dtd& d, int k, int ncodes)
    : d_(&d), syms_(d), g_(syms_, k, ncodes) {}

FrontierPtr Inference::root_frontier() {
    auto f = std::make_shared<Frontier>();
    auto e = std::make_shared<Entry>();
    e->kind = Entry::Kind::Root;
    e->node = g_.root();
    f->ends.push_back(e);
    f->lineage = CodeMask(g_.ncodes());
    return f;
}

CodeMask Inference::lineage_of(ExprId id, ExprId id_end, const std::set<std::string>& free,
                               const StaticEnv& env) const {
    CodeMask m(g_.ncodes());
    m.set_range(id, id_end);
    for (const auto& v : free) {
        auto it = env.find(v);
        if (it != env.end())
            m.or_with(it->second->lineage);
    }
    return m;
}

bool Inference::test_pass_sym(const NodeTest& t, SymId s) const {
    switch (t.kind) {
    case NodeTest::Kind::AnyNode: return true;
    case NodeTest::Kind::Text: return s == syms_.text_sym();
    case NodeTest::Kind::Tag: return syms_.of(Label::elem(t.tag)) == s;
    }
    return false;
}

bool Inference::test_pass_elem(const NodeTest& t, const ElemEnd& e) {
    switch (t.kind) {
    case NodeTest::Kind::AnyNode: return true;
    case NodeTest::Kind::Text: return e.tag.is_text();
    case NodeTest::Kind::Tag: return !e.tag.is_text() && e.tag.name() == t.tag;
    }
    return false;
}

Inference::StepOut Inference::do_step(const Query& q, const FrontierPtr& base) {
    StepOut out;
    const Frontier& f = *base;

    if (!f.elems.empty() && q.axis != Axis::Self)
        throw Error("unsupported: axis step '" + std::string(axis_name(q.axis)) +
                    "::' applied to constructed content (only self steps may "
                    "navigate constructed nodes)");

    auto make_forward = [&](int node, bool multi) {
        auto e = std::make_shared<Entry>();
        e->kind = Entry::Kind::Forward;
        e->node = node;
        e->step = q.id;
        e->base = base;
        e->multi = multi;
        return e;
    };
    auto make_selfat = [&](const EntryPtr& b) {
        auto e = std::make_shared<Entry>();
        e->kind = Entry::Kind::SelfAt;
        e->node = b->node;
        e->step = q.id;
        e->base_entry = b;
        return e;
    };

    switch (q.axis) {
    case Axis::Self: {
        for (const auto& e : f.ends) {
            if (test_pass_sym(q.test, g_.sym_of(e->node))) {
                out.results.push_back(make_selfat(e));
                out.live.insert(e.get());
            }
        }
        for (const auto& el : f.elems) {
            if (test_pass_elem(q.test, *el))
                out.elem_results.push_back(el);
        }
        return out;
    }
    case Axis::Child: {
        // One pass per distinct binding node; entries at the same node share
        // the same reachable children.
        std::map<int, bool> node_has; // binding node -> yielded a result
        std::set<int> result_nodes;
        for (const auto& e : f.ends) {
            auto [it, fresh] = node_has.try_emplace(e->node, false);
            if (fresh) {
                for (SymId s : syms_.succs(g_.sym_of(e->node))) {
                    if (!test_pass_sym(q.test, s))
                        continue;
                    int r = g_.intern(e->node, s, q.id);
                    if (r >= 0) {
                        result_nodes.insert(r);
                        it->second = true;
                    }
                }
            }
            if (it->second)
                out.live.insert(e.get());
        }
        for (int r : result_nodes)
            out.results.push_back(make_forward(r, false));
        return out;
    }
    case Axis::Descendant:
    case Axis::DescendantOrSelf: {
        // One BFS for the whole frontier; all intermediate nodes get the step
        // code so materialization can re-walk exactly this exploration.
        std::set<int> visited;
        std::deque<int> work;
        std::map<int, std::vector<int>> radj; // result-side reverse adjacency
        for (const auto& e : f.ends) {
            if (visited.insert(e->node).second)
                work.push_back(e->node);
        }
        std::set<int> result_nodes;
        while (!work.empty()) {
            int u = work.front();
            work.pop_front();
            for (SymId s : syms_.succs(g_.sym_of(u))) {
                int r = g_.intern(u, s, q.id);
                if (r < 0)
                    continue;
                radj[r].push_back(u);
                if (visited.insert(r).second)
                    work.push_back(r);
                if (test_pass_sym(q.test, g_.sym_of(r)))
                    result_nodes.insert(r);
            }
        }
        // Liveness: a binding node is live iff some strict descendant node in
        // the explored region passes the test.  Walk backwards from results.
        std::set<int> can_reach;
        {
            std::deque<int> back(result_nodes.begin(), result_nodes.end());
            std::set<int> seen(result_nodes.begin(), result_nodes.end());
            while (!back.empty()) {
                int v = back.front();
                back.pop_front();
                auto it = radj.find(v);
                if (it == radj.end())
                    continue;
                for (int u : it->second) {
                    can_reach.insert(u);
                    if (seen.insert(u).second)
                        back.push_back(u);
                }
            }
        }
        for (const auto& e : f.ends) {
            bool self_ok = q.axis == Axis::DescendantOrSelf &&
                           test_pass_sym(q.test, g_.sym_of(e->node));
            if (self_ok) {
                out.results.push_back(make_selfat(e));
                out.live.insert(e.get());
            }
            if (can_reach.count(e->node))
                out.live.insert(e.get());
        }
        for (int r : result_nodes)
            out.results.push_back(make_forward(r, true));
        return out;
    }
    case Axis::Parent:
    case Axis::Ancestor:
    case Axis::AncestorOrSelf: {
        for (const auto& e : f.ends) {
            if (q.axis == Axis::AncestorOrSelf &&
                test_pass_sym(q.test, g_.sym_of(e->node))) {
                out.results.push_back(make_selfat(e));
                out.live.insert(e.get());
            }
            // Collect ancestors within this derivation's lineage.
            std::set<int> anc;
            std::deque<int> work;
            for (int p : g_.parents(e->node, f.lineage))
                if (anc.insert(p).second)
                    work.push_back(p);
            if (q.axis != Axis::Parent) {
                while (!work.empty()) {
                    int u = work.front();
                    work.pop_front();
                    for (int p : g_.parents(u, f.lineage))
                        if (anc.insert(p).second)
                            work.push_back(p);
                }
            }
            for (int p : anc) {
                if (!test_pass_sym(q.test, g_.sym_of(p)))
                    continue;
                auto ne = std::make_shared<Entry>();
                ne->kind = Entry::Kind::Backward;
                ne->node = p;
                ne->step = q.id;
                ne->base_entry = e;
                out.results.push_back(ne);
                out.live.insert(e.get());
            }
        }
        return out;
    }
    case Axis::FollowingSibling:
    case Axis::PrecedingSibling: {
        bool fwd = q.axis == Axis::FollowingSibling;
        for (const auto& e : f.ends) {
            SymId mine = g_.sym_of(e->node);
            for (int p : g_.parents(e->node, f.lineage)) {
                std::set<int> made; // result nodes for this (entry, parent)
                for (const auto& [l, r] : syms_.sib(g_.sym_of(p))) {
                    SymId sib = -1;
                    if (fwd && l == mine)
                        sib = r;
                    else if (!fwd && r == mine)
                        sib = l;
                    if (sib < 0 || !test_pass_sym(q.test, sib))
                        continue;
                    int rn = g_.intern(p, sib, q.id);
                    if (rn < 0 || !made.insert(rn).second)
                        continue;
                    auto ne = std::make_shared<Entry>();
                    ne->kind = Entry::Kind::Sibling;
                    ne->node = rn;
                    ne->step = q.id;
                    ne->base_entry = e;
                    ne->via = p;
                    out.results.push_back(ne);
                    out.live.insert(e.get());
                }
            }
        }
        return out;
    }
    }
    throw Error("internal: unhandled axis");
}

QInf Inference::infer_query(const Query& q) {
    StaticEnv env;
    env[std::string(kRootVar)] = root_frontier();
    return infer(q, env);
}

UInf Inference::infer_update(const Update& u) {
    StaticEnv env;
    env[std::string(kRootVar)] = root_frontier();
    return inferU(u, env);
}

QInf Inference::infer(const Query& q, const StaticEnv& env) {
    // live_of: binding entries of env[v] through which subexpression `part`
    // can produce a nonempty result.  For parts not mentioning v, emptiness
    // does not depend on v, so every binding qualifies when the part can
    // produce anything at all.
    auto live_of = [&](const QInf& inf, const Query& part,
                       const std::string& v) -> std::set<const Entry*> {
        if (has_free(part, v)) {
            auto it = inf.contributes.find(v);
            return it == inf.contributes.end() ? std::set<const Entry*>{} : it->second;
        }
        if (!inf.nonempty())
            return {};
        std::set<const Entry*> all;
        auto it = env.find(v);
        if (it != env.end())
            for (const auto& e : it->second->ends)
                all.insert(e.get());
        return all;
    };

    switch (q.kind) {
    case Query::Kind::Empty:
        return {};
    case Query::Kind::Str: {
        QInf out;
        auto el = std::make_shared<ElemEnd>();
        el->kind = ElemEnd::Kind::Bare;
        el->tag = Label::text();
        el->ctor = q.id;
        out.elems.push_back(el);
        return out;
    }
    case Query::Kind::Seq: {
        QInf ia = infer(*q.a, env);
        QInf ib = infer(*q.b, env);
        QInf out;
        out.returns = ia.returns;
        out.returns.insert(out.returns.end(), ib.returns.begin(), ib.returns.end());
        out.used = ia.used;
        out.used.insert(out.used.end(), ib.used.begin(), ib.used.end());
        out.elems = ia.elems;
        out.elems.insert(out.elems.end(), ib.elems.begin(), ib.elems.end());
        for (const auto& v : free_of(q)) {
            auto s = live_of(ia, *q.a, v);
            auto t = live_of(ib, *q.b, v);
            s.insert(t.begin(), t.end());
            out.contributes[v] = std::move(s);
        }
        return out;
    }
    case Query::Kind::If: {
        QInf ic = infer(*q.a, env);
        QInf it = infer(*q.b, env);
        QInf ie = infer(*q.c, env);
        QInf out;
        out.returns = it.returns;
        out.returns.insert(out.returns.end(), ie.returns.begin(), ie.returns.end());
        // The condition's returns are read (tested for emptiness), not returned.
        out.used = ic.used;
        for (const auto& e : ic.returns)
            out.used.push_back({e, false});
        out.used.insert(out.used.end(), it.used.begin(), it.used.end());
        out.used.insert(out.used.end(), ie.used.begin(), ie.used.end());
        out.elems = it.elems;
        out.elems.insert(out.elems.end(), ie.elems.begin(), ie.elems.end());
        for (const auto& v : free_of(q)) {
            auto s = live_of(it, *q.b, v);
            auto t2 = live_of(ie, *q.c, v);
            s.insert(t2.begin(), t2.end());
            out.contributes[v] = std::move(s);
        }
        return out;
    }
    case Query::Kind::For: {
        QInf ia = infer(*q.a, env);
        auto bind = std::make_shared<Frontier>();
        bind->ends = ia.returns;
        bind->elems = ia.elems;
        bind->lineage = lineage_of(q.a->id, q.a->id_end, free_of(*q.a), env);

        QInf out;
        out.used = ia.used;
        if (bind->ends.empty() && bind->elems.empty()) {
            // No bindings: the loop body never runs and nothing is returned.
            for (const auto& v : free_of(q))
                out.contributes[v] = {};
            return out;
        }
        StaticEnv env2 = env;
        env2[q.var] = bind;
        QInf ib = infer(*q.b, env2);
        bool body_nonempty = ib.nonempty();

        // Bindings whose body run can contribute to the overall result.
        std::set<const Entry*> live;
        if (body_nonempty) {
            if (has_free(*q.b, q.var)) {
                auto it2 = ib.contributes.find(q.var);
                if (it2 != ib.contributes.end())
                    live = it2->second;
            } else {
                for (const auto& e : bind->ends)
                    live.insert(e.get());
            }
        }
        for (const auto& e : bind->ends)
            if (live.count(e.get()))
                out.used.push_back({e, false});
        bool body_used_counts =
            !live.empty() || (!bind->elems.empty() && body_nonempty);
        if (body_used_counts)
            out.used.insert(out.used.end(), ib.used.begin(), ib.used.end());

        out.returns = ib.returns;
        out.elems = ib.elems;
        for (const auto& v : free_of(q)) {
            std::set<const Entry*> s;
            if (body_nonempty)
                s = live_of(ia, *q.a, v);
            if (v != q.var && has_free(*q.b, v)) {
                auto it2 = ib.contributes.find(v);
                if (it2 != ib.contributes.end())
                    s.insert(it2->second.begin(), it2->second.end());
            }
            out.contributes[v] = std::move(s);
        }
        return out;
    }
    case Query::Kind::Let: {
        QInf ia = infer(*q.a, env);
        auto bind = std::make_shared<Frontier>();
        bind->ends = ia.returns;
        bind->elems = ia.elems;
        bind->lineage = lineage_of(q.a->id, q.a->id_end, free_of(*q.a), env);
        StaticEnv env2 = env;
        env2[q.var] = bind;
        QInf ib = infer(*q.b, env2);

        QInf out;
        out.returns = ib.returns;
        out.elems = ib.elems;
        // The definition is evaluated unconditionally: its returns and reads
        // are all read chains of the whole expression.
        out.used = ia.used;
        for (const auto& e : ia.returns)
            out.used.push_back({e, false});
        out.used.insert(out.used.end(), ib.used.begin(), ib.used.end());
        bool body_nonempty = ib.nonempty();
        for (const auto& v : free_of(q)) {
            std::set<const Entry*> s;
            if (body_nonempty)
                s = live_of(ia, *q.a, v);
            if (v != q.var && has_free(*q.b, v)) {
                auto it2 = ib.contributes.find(v);
                if (it2 != ib.contributes.end())
                    s.insert(it2->second.begin(), it2->second.end());
            }
            out.contributes[v] = std::move(s);
        }
        return out;
    }
    case Query::Kind::Step: {
        auto it = env.find(q.var);
        if (it == env.end())
            throw Error("unbound variable $" + q.var);
        StepOut so = do_step(q, it->second);
        QInf out;
        out.returns = so.results;
        out.elems = so.elem_results;
        // Forward axes re-derive their results from the binding chains
        // themselves; other axes read nodes outside the bound subtrees, so
        // the live binding chains count as read.
        bool forward = q.axis == Axis::Self || q.axis == Axis::Child ||
                       q.axis == Axis::DescendantOrSelf;
        if (!forward) {
            for (const auto& e : it->second->ends)
                if (so.live.count(e.get()))
                    out.used.push_back({e, false});
        }
        out.contributes[q.var] = std::move(so.live);
        return out;
    }
    case Query::Kind::Elem: {
        QInf ib = infer(*q.a, env);
        QInf out;
        auto make = [&](ElemEnd::Kind kind) {
            auto el = std::make_shared<ElemEnd>();
            el->kind = kind;
            el->tag = Label::elem(q.tag);
            el->ctor = q.id;
            return el;
        };
        if (!ib.nonempty()) {
            out.elems.push_back(make(ElemEnd::Kind::Bare));
        } else {
            for (const auto& e : ib.returns) {
                auto el = make(ElemEnd::Kind::Graft);
                el->ret = e;
                out.elems.push_back(el);
            }
            for (const auto& inner : ib.elems) {
                auto el = make(ElemEnd::Kind::Nest);
                el->inner = inner;
                out.elems.push_back(el);
            }
        }
        // Content nodes are copied wholesale: their entire subtrees are read.
        out.used = ib.used;
        for (const auto& e : ib.returns)
            out.used.push_back({e, true});
        // A constructor always yields a node, so every binding of every free
        // variable is live.
        for (const auto& v : free_of(q)) {
            std::set<const Entry*> all;
            auto it = env.find(v);
            if (it != env.end())
                for (const auto& e : it->second->ends)
                    all.insert(e.get());
            out.contributes[v] = std::move(all);
        }
        return out;
    }
    }
    throw Error("internal: unhandled query kind");
}

UInf Inference::inferU(const Update& u, const StaticEnv& env) {
    switch (u.kind) {
    case Update::Kind::Nop:
        return {};
    case Update::Kind::Seq: {
        UInf a = inferU(*u.u1, env);
        UInf b = inferU(*u.u2, env);
        a.upds.insert(a.upds.end(), b.upds.begin(), b.upds.end());
        return a;
    }
    case Update::Kind::If: {
        // Condition chains are reads, not writes: they cannot affect the
        // updated locations and are discarded.
        (void)infer(*u.q0, env);
        UInf a = inferU(*u.u1, env);
        UInf b = inferU(*u.u2, env);
        a.upds.insert(a.upds.end(), b.upds.begin(), b.upds.end());
        return a;
    }
    case Update::Kind::For: {
        QInf ia = infer(*u.q0, env);
        if (ia.returns.empty() && ia.elems.empty())
            return {};
        auto bind = std::make_shared<Frontier>();
        bind->ends = ia.returns;
        bind->elems = ia.elems;
        bind->lineage = lineage_of(u.q0->id, u.q0->id_end, free_vars(*u.q0), env);
        StaticEnv env2 = env;
        env2[u.var] = bind;
        return inferU(*u.u1, env2);
    }
    case Update::Kind::Let: {
        QInf ia = infer(*u.q0, env);
        auto bind = std::make_shared<Frontier>();
        bind->ends = ia.returns;
        bind->elems = ia.elems;
        bind->lineage = lineage_of(u.q0->id, u.q0->id_end, free_vars(*u.q0), env);
        StaticEnv env2 = env;
        env2[u.var] = bind;
        return inferU(*u.u1, env2);
    }
    case Update::Kind::Delete: {
        QInf i0 = infer(*u.q0, env);
        UInf out;
        for (const auto& e : i0.returns) {
            UpdEnd ue;
            ue.target = e;
            ue.drop_last = true;
            ue.sfx = UpdEnd::Sfx::LastSym;
            ue.op = u.q0->id;
            out.upds.push_back(std::move(ue));
        }
        // Constructed targets have no store effect; nothing to record.
        return out;
    }
    case Update::Kind::Rename: {
        QInf i0 = infer(*u.q0, env);
        UInf out;
        for (const auto& e : i0.returns) {
            UpdEnd a;
            a.target = e;
            a.drop_last = true;
            a.allow_root = true;
            a.sfx = UpdEnd::Sfx::LastSym;
            a.op = u.q0->id;
            out.upds.push_back(std::move(a));
            UpdEnd b;
            b.target = e;
            b.drop_last = true;
            b.allow_root = true;
            b.sfx = UpdEnd::Sfx::Rename;
            b.rename_to = Label::elem(u.tag);
            b.op = u.q0->id;
            out.upds.push_back(std::move(b));
        }
        return out;
    }
    case Update::Kind::Insert: {
        QInf isrc = infer(*u.q1, env);
        QInf itgt = infer(*u.q0, env);
        bool drop = u.pos == InsertPos::Before || u.pos == InsertPos::After;
        UInf out;
        for (const auto& t : itgt.returns) {
            for (const auto& s : isrc.returns) {
                UpdEnd ue;
                ue.target = t;
                ue.drop_last = drop;
                ue.sfx = UpdEnd::Sfx::SrcGraft;
                ue.src = s;
                ue.op = u.q0->id;
                out.upds.push_back(std::move(ue));
            }
            for (const auto& el : isrc.elems) {
                UpdEnd ue;
                ue.target = t;
                ue.drop_last = drop;
                ue.sfx = UpdEnd::Sfx::Elem;
                ue.elem = el;
                ue.op = u.q0->id;
                out.upds.push_back(std::move(ue));
            }
        }
        return out;
    }
    case Update::Kind::Replace: {
        QInf isrc = infer(*u.q1, env);
        QInf itgt = infer(*u.q0, env);
        UInf out;
        for (const auto& t : itgt.returns) {
            UpdEnd a;
            a.target = t;
            a.drop_last = true;
            a.sfx = UpdEnd::Sfx::LastSym;
            a.op = u.q0->id;
            out.upds.push_back(std::move(a));
            for (const auto& s : isrc.returns) {
                UpdEnd ue;
                ue.target = t;
                ue.drop_last = true;
                ue.sfx = UpdEnd::Sfx::SrcGraft;
                ue.src = s;
                ue.op = u.q0->id;
                out.upds.push_back(std::move(ue));
            }
            for (const auto& el : isrc.elems) {
                UpdEnd ue;
                ue.target = t;
                ue.drop_last = true;
                ue.sfx = UpdEnd::Sfx::Elem;
                ue.elem = el;
                ue.op = u.q0->id;
                out.upds.push_back(std::move(ue));
            }
        }
        return out;
    }
    }
    throw Error("internal: unhandled update kind");
}

// ---------------------------------------------------------------------------
// Materializer

const std::vector<Materializer::Suffix>& Materializer::suffixes(int from, int to,
                                                                ExprId step) {
    auto key = std::make_tuple(from, to, step);
    auto it = suffix_memo_.find(key);
    if (it != suffix_memo_.end())
        return it->second;
    std::vector<Suffix> out;
    // DFS over step-coded edges, collecting every label path from->to of
    // length >= 1.  The graph is layered by depth, so paths are acyclic.
    struct Frame {
        int node;
        size_t next = 0;
    };
    const int nsyms = g_->syms().nsyms();
    std::vector<int> path;
    std::vector<uint8_t> counts(static_cast<size_t>(nsyms), 0);
    std::vector<Frame> stack{{from, 0}};
    while (!stack.empty()) {
        Frame& fr = stack.back();
        const auto& outs = g_->node(fr.node).out;
        if (fr.next >= outs.size()) {
            if (!path.empty()) {
                counts[static_cast<size_t>(g_->sym_of(path.back()))]--;
                path.pop_back();
            }
            stack.pop_back();
            continue;
        }
        const Cdag::Edge& ed = g_->edge(outs[fr.next++]);
        if (!ed.codes.test(step))
            continue;
        SymId s = g_->sym_of(ed.to);
        path.push_back(ed.to);
        counts[static_cast<size_t>(s)]++;
        if (ed.to == to) {
            Suffix sf;
            for (int n : path)
                sf.labels.push_back(g_->label_of(n));
            sf.counts = counts;
            out.push_back(std::move(sf));
        }
        stack.push_back({ed.to, 0});
    }
    return suffix_memo_.emplace(key, std::move(out)).first->second;
}

const std::set<Chain>& Materializer::mat(const EntryPtr& e) {
    auto it = memo_.find(e.get());
    if (it != memo_.end())
        return it->second;
    std::set<Chain> out;
    switch (e->kind) {
    case Entry::Kind::Root:
        out.insert(Chain{g_->label_of(g_->root())});
        break;
    case Entry::Kind::SelfAt:
        out = mat(e->base_entry);
        break;
    case Entry::Kind::Forward: {
        for (const auto& be : e->base->ends) {
            std::vector<Suffix> sfx = suffixes(be->node, e->node, e->step);
            // Non-recursive steps extend a base chain by exactly one edge;
            // longer walks belong to other ends of the shared step code.
            if (!e->multi)
                std::erase_if(sfx, [](const Suffix& s) { return s.labels.size() != 1; });
            if (sfx.empty())
                continue;
            for (const Chain& b : mat(be)) {
                std::vector<int> bc(static_cast<size_t>(g_->syms().nsyms()), 0);
                bool in_alpha = true;
                for (const Label& l : b) {
                    SymId s = g_->syms().of(l);
                    if (s < 0) {
                        in_alpha = false;
                        break;
                    }
                    bc[static_cast<size_t>(s)]++;
                }
                if (!in_alpha)
                    continue; // constructed labels never extend in the schema
                for (const Suffix& sf : sfx) {
                    bool ok = true;
                    for (int s = 0; s < g_->syms().nsyms(); ++s) {
                        int limit = s == g_->syms().text_sym() ? 1 : g_->k();
                        if (bc[static_cast<size_t>(s)] + sf.counts[static_cast<size_t>(s)] > limit) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok)
                        continue;
                    Chain c = b;
                    c.insert(c.end(), sf.labels.begin(), sf.labels.end());
                    out.insert(std::move(c));
                }
            }
        }
        break;
    }
    case Entry::Kind::Backward: {
        size_t len = static_cast<size_t>(g_->depth_of(e->node)) + 1;
        Label want = g_->label_of(e->node);
        for (const Chain& b : mat(e->base_entry)) {
            if (b.size() < len)
                continue;
            if (b[len - 1] != want)
                continue;
            out.insert(Chain(b.begin(), b.begin() + static_cast<long>(len)));
        }
        break;
    }
    case Entry::Kind::Sibling: {
        Label via = g_->label_of(e->via);
        Label mine = g_->label_of(e->node);
        for (const Chain& b : mat(e->base_entry)) {
            if (b.size() < 2 || b[b.size() - 2] != via)
                continue;
            Chain c(b.begin(), b.end() - 1);
            c.push_back(mine);
            // The swapped label may push its occurrence count over the bound.
            int cnt = 0;
            for (const Label& l : c)
                if (l == mine)
                    cnt++;
            int limit = mine.is_text() ? 1 : g_->k();
            if (cnt <= limit)
                out.insert(std::move(c));
        }
        break;
    }
    }
    return memo_.emplace(e.get(), std::move(out)).first->second;
}

std::set<Chain> Materializer::mat_elem(const ElemEndPtr& e) {
    std::set<Chain> out;
    switch (e->kind) {
    case ElemEnd::Kind::Bare:
        out.insert(Chain{e->tag});
        break;
    case ElemEnd::Kind::Graft: {
        // A copied node keeps its source context: its subtree can only hold
        // what the full source chain could extend to within the bound.
        for (const Chain& b : mat(e->ret)) {
            for (const Chain& x : extension_suffixes(g_->syms().dtd(), g_->k(), b)) {
                Chain c{e->tag, b.back()};
                c.insert(c.end(), x.begin(), x.end());
                out.insert(std::move(c));
            }
        }
        break;
    }
    case ElemEnd::Kind::Nest: {
        for (const Chain& inner : mat_elem(e->inner)) {
            Chain c{e->tag};
            c.insert(c.end(), inner.begin(), inner.end());
            out.insert(std::move(c));
        }
        break;
    }
    }
    return out;
}

std::set<std::pair<Chain, Chain>> Materializer::mat_upd(const UpdEnd& ue) {
    std::set<std::pair<Chain, Chain>> out;
    std::vector<std::pair<Chain, Chain>> split; // (prefix, dropped-last or empty)
    for (const Chain& t : mat(ue.target)) {
        if (ue.drop_last) {
            if (t.size() < 2 && !ue.allow_root)
                continue;
            if (t.empty())
                continue;
            split.emplace_back(Chain(t.begin(), t.end() - 1), Chain{t.back()});
        } else {
            split.emplace_back(t, Chain{});
        }
    }
    switch (ue.sfx) {
    case UpdEnd::Sfx::LastSym:
        for (auto& [p, last] : split)
            out.emplace(p, last);
        break;
    case UpdEnd::Sfx::Rename:
        for (auto& [p, last] : split)
            out.emplace(p, Chain{ue.rename_to});
        break;
    case UpdEnd::Sfx::SrcGraft: {
        // Same context rule as element grafts: suffixes are extensions of the
        // whole source chain, not of its last label in isolation.
        std::set<Chain> sfxs;
        for (const Chain& s : mat(ue.src)) {
            for (const Chain& x : extension_suffixes(g_->syms().dtd(), g_->k(), s)) {
                Chain c{s.back()};
                c.insert(c.end(), x.begin(), x.end());
                sfxs.insert(std::move(c));
            }
        }
        for (auto& [p, last] : split)
            for (const Chain& s : sfxs)
                out.emplace(p, s);
        break;
    }
    case UpdEnd::Sfx::Elem: {
        std::set<Chain> sfxs = mat_elem(ue.elem);
        for (auto& [p, last] : split)
            for (const Chain& s : sfxs)
                out.emplace(p, s);
        break;
    }
    }
    return out;
}

} // namespace xqui
