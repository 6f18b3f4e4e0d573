#include "xqui/check.hpp"

#include "xqui/diag.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace xqui {

const char* witness_kind_name(Witness::Kind k) {
    switch (k) {
    case Witness::Kind::RinU: return "return-inside-update";
    case Witness::Kind::UinR: return "update-covers-return";
    case Witness::Kind::UinV: return "update-covers-used";
    }
    return "?";
}

std::string Witness::to_string() const {
    std::string u = xqui::to_string(upd_prefix);
    u += ":";
    u += xqui::to_string(upd_suffix);
    return std::string(witness_kind_name(kind)) + " query=" + xqui::to_string(query_chain) +
           " update=" + u;
}

std::set<std::pair<Chain, Chain>> confl_plain(const std::set<Chain>& t1,
                                              const std::set<Chain>& t2) {
    std::set<std::pair<Chain, Chain>> out;
    for (const Chain& c1 : t1)
        for (const Chain& c2 : t2)
            if (is_prefix(c1, c2)) out.emplace(c1, c2);
    return out;
}

// ---------------------------------------------------------------------------
// Materialized route

CheckResult check_materialized(Materializer& mq, Materializer& mu, const QInf& qi,
                               const UInf& ui, size_t max_witnesses) {
    CheckResult res;
    std::set<Chain> r;
    for (const auto& e : qi.returns) {
        const auto& cs = mq.mat(e);
        r.insert(cs.begin(), cs.end());
    }
    std::set<Chain> v_plain, v_closed;
    for (const UsedEnd& ue : qi.used) {
        const auto& cs = mq.mat(ue.e);
        auto& dst = ue.closed ? v_closed : v_plain;
        dst.insert(cs.begin(), cs.end());
    }
    std::set<std::pair<Chain, Chain>> u;
    for (const UpdEnd& ue : ui.upds) {
        auto cs = mu.mat_upd(ue);
        u.insert(cs.begin(), cs.end());
    }

    auto add = [&](Witness::Kind kind, const Chain& qc, const Chain& p, const Chain& s) {
        if (res.witnesses.size() < max_witnesses)
            res.witnesses.push_back({kind, qc, p, s});
        res.verdict = Verdict::MaybeDependent;
    };

    for (const auto& [p, s] : u) {
        Chain full = concat(p, s);
        Chain head = p;
        head.push_back(s.front());
        for (const Chain& cr : r) {
            if (is_prefix(cr, full)) add(Witness::Kind::RinU, cr, p, s);
            if (is_prefix(head, cr)) add(Witness::Kind::UinR, cr, p, s);
        }
        for (const Chain& cv : v_plain)
            if (is_prefix(head, cv)) add(Witness::Kind::UinV, cv, p, s);
        for (const Chain& cv : v_closed)
            if (is_prefix(head, cv) || is_prefix(cv, head)) add(Witness::Kind::UinV, cv, p, s);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Graph route
//
// Each derivation end becomes a small automaton whose count-valid runs spell
// exactly the chains the materializer reads off the graph.  Occurrence counts
// are carried by the comparison walk, not baked into states, so machines stay
// linear in the graph region they cover.  The three conflict conditions all
// reduce to "some word of one machine is a prefix of some word of the other":
// the product advances both sides on a common label until one side completes,
// then the other side finishes alone.
//
// Backward ends (parent/ancestor steps) denote cuts of base chains, and a cut
// is real only if the base run could still be completed within the occurrence
// budget.  That completability depends on counts, so it cannot be a state
// property; it is attached as a guard evaluated against the live counts when
// a run accepts at, or continues past, such a boundary.

namespace {

// Shared label space: schema symbols keep their table ids, constructed tags
// get fresh ids above them.  A constructed tag spelling a schema name shares
// the schema id (chains compare by name).
class AlphaMap {
public:
    explicit AlphaMap(const SymTable& syms) : syms_(&syms) {}

    int of_sym(SymId s) const { return s; }
    int of_label(const Label& l) {
        SymId s = syms_->of(l);
        if (s >= 0) return s;
        auto [it, fresh] =
            extra_.emplace(l.name(), syms_->nsyms() + static_cast<int>(extra_.size()));
        (void)fresh;
        return it->second;
    }
    Label label_of(int a) const {
        if (a < syms_->nsyms()) return syms_->label(a);
        for (const auto& [name, id] : extra_)
            if (id == a) return Label::elem(name);
        throw Error("internal: unknown alphabet id");
    }

private:
    const SymTable* syms_;
    std::map<std::string, int> extra_;
};

struct Nfa {
    struct Tr {
        int to = -1;
        int alpha = -1;     // emitted label
        int budget = -1;    // symbol charged to the current count group, -1 exempt
        int need = -1;      // symbol that must still have headroom, uncharged
        bool reset = false; // entering copied content: counts start fresh
        bool head = false;  // this transition emits the update-suffix head
        int guard = -1;     // guard that must hold before taking this transition
    };
    // A guard asserts that the run so far is a genuine cut of some deeper
    // derivation: from one of the entry states (after charging the entry
    // symbol, if any) the surrounding machine can be completed through each
    // target set in order, within the count budget.
    struct Guard {
        std::vector<std::pair<int, int>> entries; // (state, charged sym or -1)
        std::vector<std::vector<int>> thread;     // successive target state sets
    };
    std::vector<std::vector<Tr>> out;
    std::vector<int> starts;
    std::vector<char> accept;
    std::vector<int> accept_guard;
    std::vector<int> at_node; // graph node a state sits at, -1 otherwise
    std::vector<Guard> guards;

    int add_state(int node = -1) {
        out.emplace_back();
        accept.push_back(0);
        accept_guard.push_back(-1);
        at_node.push_back(node);
        return static_cast<int>(out.size()) - 1;
    }
    int add_guard(Guard g) {
        guards.push_back(std::move(g));
        return static_cast<int>(guards.size()) - 1;
    }
};

using Counts = std::vector<uint8_t>;

class MachineBuilder {
public:
    MachineBuilder(const Cdag& g, AlphaMap& alpha) : g_(&g), alpha_(&alpha) {}

    Nfa entry_machine(const Entry* e) {
        Nfa m;
        std::map<const Entry*, Piece> memo;
        Piece p = add_entry(m, memo, e);
        m.starts = p.starts;
        for (int s : p.accepts) {
            m.accept[static_cast<size_t>(s)] = 1;
            if (!p.guard_thread.empty())
                m.accept_guard[static_cast<size_t>(s)] = m.add_guard({{{s, -1}}, p.guard_thread});
        }
        return m;
    }

    Nfa upd_machine(const UpdEnd& ue) {
        Nfa m;
        std::map<const Entry*, Piece> memo;
        Piece tp = add_entry(m, memo, ue.target.get());
        std::set<int> acc(tp.accepts.begin(), tp.accepts.end());

        // Junction points where the suffix may begin.  For parent-anchored
        // operations the target's last label is dropped: the junction sits one
        // transition short of an accept, and taking the suffix still requires
        // the dropped label to have been possible (headroom, plus any cut
        // guards of the target derivation, probed hypothetically).
        struct Junction {
            int state;
            int need = -1;
            int guard = -1;
        };
        std::vector<Junction> junctions;
        SymId last = g_->sym_of(ue.target->node);
        if (ue.drop_last) {
            std::map<int, std::vector<int>> cand; // pre-state -> accept states
            for (int s : tp.states)
                for (const Nfa::Tr& t : m.out[static_cast<size_t>(s)])
                    if (acc.count(t.to)) cand[s].push_back(t.to);
            for (auto& [s, ts] : cand) {
                Junction j{s, -1, -1};
                if (tp.guard_thread.empty()) {
                    j.need = last;
                } else {
                    Nfa::Guard gd;
                    for (int t : ts) gd.entries.emplace_back(t, last);
                    gd.thread = tp.guard_thread;
                    j.guard = m.add_guard(std::move(gd));
                }
                junctions.push_back(j);
            }
        } else {
            for (int a : tp.accepts) {
                Junction j{a, -1, -1};
                if (!tp.guard_thread.empty())
                    j.guard = m.add_guard({{{a, -1}}, tp.guard_thread});
                junctions.push_back(j);
            }
        }

        switch (ue.sfx) {
        case UpdEnd::Sfx::LastSym:
            // Full chains and head-truncated chains coincide: the suffix is
            // the final label itself.
            for (int s : tp.states)
                for (Nfa::Tr& t : m.out[static_cast<size_t>(s)])
                    if (acc.count(t.to)) t.head = true;
            for (int a : tp.accepts) {
                m.accept[static_cast<size_t>(a)] = 1;
                if (!tp.guard_thread.empty())
                    m.accept_guard[static_cast<size_t>(a)] =
                        m.add_guard({{{a, -1}}, tp.guard_thread});
            }
            break;
        case UpdEnd::Sfx::Rename: {
            int ren = m.add_state();
            m.accept[static_cast<size_t>(ren)] = 1;
            int a = alpha_->of_label(ue.rename_to);
            for (const Junction& j : junctions)
                m.out[static_cast<size_t>(j.state)].push_back(
                    {ren, a, -1, j.need, false, true, j.guard});
            break;
        }
        case UpdEnd::Sfx::SrcGraft: {
            std::set<SymId> heads = accept_syms(ue.src.get());
            std::map<SymId, int> ext;
            for (const Junction& j : junctions)
                for (SymId b : heads)
                    m.out[static_cast<size_t>(j.state)].push_back(
                        {ext_state(m, ext, b), alpha_->of_sym(b), b, j.need, true, true,
                         j.guard});
            break;
        }
        case UpdEnd::Sfx::Elem: {
            std::vector<std::tuple<int, int, int>> js;
            for (const Junction& j : junctions) js.emplace_back(j.state, j.need, j.guard);
            add_elem(m, ue.elem.get(), js, true);
            break;
        }
        }
        m.starts = tp.starts;
        return m;
    }

    // Symbols that can end a chain of the entry's set: last labels of
    // count-valid accepting runs.  Drives graft suffix heads.
    std::set<SymId> accept_syms(const Entry* e) {
        auto it = accept_syms_memo_.find(e);
        if (it != accept_syms_memo_.end()) return it->second;
        Nfa m = entry_machine(e);
        std::set<SymId> out;
        std::set<std::vector<int>> visited;
        struct St {
            int s;
            Counts counts;
            int last_sym;
        };
        std::deque<St> work;
        for (int s0 : m.starts) work.push_back({s0, zero_counts(), -1});
        while (!work.empty()) {
            St st = std::move(work.front());
            work.pop_front();
            std::vector<int> key{st.s};
            for (uint8_t c : st.counts) key.push_back(c);
            if (!visited.insert(std::move(key)).second) continue;
            if (st.last_sym >= 0 && accept_ok(m, st.s, st.counts)) out.insert(st.last_sym);
            for (const Nfa::Tr& t : m.out[static_cast<size_t>(st.s)]) {
                St nx{t.to, st.counts, t.budget};
                if (!take(m, t, nx.counts)) continue;
                work.push_back(std::move(nx));
            }
        }
        accept_syms_memo_.emplace(e, out);
        return out;
    }

    Counts zero_counts() const { return Counts(static_cast<size_t>(g_->syms().nsyms()), 0); }

    bool headroom(SymId s, const Counts& counts) const {
        int limit = s == g_->syms().text_sym() ? 1 : g_->k();
        return counts[static_cast<size_t>(s)] < limit;
    }

    // Count evolution plus guard evaluation for one transition.  The guard is
    // judged on the counts before the transition's own effects.
    bool take(const Nfa& m, const Nfa::Tr& t, Counts& counts) const {
        if (t.need >= 0 && !headroom(t.need, counts)) return false;
        if (t.guard >= 0 && !guard_ok(m, m.guards[static_cast<size_t>(t.guard)], counts))
            return false;
        if (t.reset) std::fill(counts.begin(), counts.end(), 0);
        if (t.budget >= 0) {
            if (!headroom(t.budget, counts)) return false;
            counts[static_cast<size_t>(t.budget)]++;
        }
        return true;
    }

    bool accept_ok(const Nfa& m, int s, const Counts& counts) const {
        if (!m.accept[static_cast<size_t>(s)]) return false;
        int g = m.accept_guard[static_cast<size_t>(s)];
        return g < 0 || guard_ok(m, m.guards[static_cast<size_t>(g)], counts);
    }

    const Cdag& graph() const { return *g_; }

private:
    struct Piece {
        std::vector<int> starts;
        std::vector<int> accepts;
        std::set<int> states;
        // Acceptance at, or continuation past, the accepts additionally
        // requires completing the run through these sets in order.
        std::vector<std::vector<int>> guard_thread;
    };

    const Cdag* g_;
    AlphaMap* alpha_;
    std::map<const Entry*, std::set<SymId>> accept_syms_memo_;

    bool guard_ok(const Nfa& m, const Nfa::Guard& gd, const Counts& counts) const {
        for (auto [s, sym] : gd.entries) {
            Counts c = counts;
            if (sym >= 0) {
                if (!headroom(sym, c)) continue;
                c[static_cast<size_t>(sym)]++;
            }
            if (thread_ok(m, s, c, gd.thread, 0)) return true;
        }
        return false;
    }

    bool thread_ok(const Nfa& m, int s, const Counts& counts,
                   const std::vector<std::vector<int>>& thread, size_t lvl) const {
        if (lvl == thread.size()) return true;
        std::set<std::pair<int, Counts>> visited;
        return thread_dfs(m, s, counts, thread, lvl, visited);
    }

    bool thread_dfs(const Nfa& m, int s, const Counts& counts,
                    const std::vector<std::vector<int>>& thread, size_t lvl,
                    std::set<std::pair<int, Counts>>& visited) const {
        if (!visited.insert({s, counts}).second) return false;
        const auto& tgt = thread[lvl];
        if (std::find(tgt.begin(), tgt.end(), s) != tgt.end() &&
            thread_ok(m, s, counts, thread, lvl + 1))
            return true;
        for (const Nfa::Tr& t : m.out[static_cast<size_t>(s)]) {
            Counts c = counts;
            if (!take(m, t, c)) continue;
            if (thread_dfs(m, t.to, c, thread, lvl, visited)) return true;
        }
        return false;
    }

    int ext_state(Nfa& m, std::map<SymId, int>& ext, SymId s) {
        auto it = ext.find(s);
        if (it != ext.end()) return it->second;
        int st = m.add_state();
        m.accept[static_cast<size_t>(st)] = 1;
        ext.emplace(s, st);
        // Schema closure: anything the content models allow below s.
        for (SymId n : g_->syms().succs(s))
            m.out[static_cast<size_t>(st)].push_back(
                {ext_state(m, ext, n), alpha_->of_sym(n), n, -1, false, false, -1});
        return st;
    }

    void add_elem(Nfa& m, const ElemEnd* el,
                  const std::vector<std::tuple<int, int, int>>& junctions, bool outer) {
        int a = alpha_->of_label(el->tag);
        switch (el->kind) {
        case ElemEnd::Kind::Bare: {
            int e0 = m.add_state();
            m.accept[static_cast<size_t>(e0)] = 1;
            for (auto [s, need, guard] : junctions)
                m.out[static_cast<size_t>(s)].push_back({e0, a, -1, need, false, outer, guard});
            break;
        }
        case ElemEnd::Kind::Graft: {
            int g0 = m.add_state();
            for (auto [s, need, guard] : junctions)
                m.out[static_cast<size_t>(s)].push_back({g0, a, -1, need, false, outer, guard});
            std::map<SymId, int> ext;
            for (SymId b : accept_syms(el->ret.get()))
                m.out[static_cast<size_t>(g0)].push_back(
                    {ext_state(m, ext, b), alpha_->of_sym(b), b, -1, true, false, -1});
            break;
        }
        case ElemEnd::Kind::Nest: {
            int n0 = m.add_state();
            for (auto [s, need, guard] : junctions)
                m.out[static_cast<size_t>(s)].push_back({n0, a, -1, need, false, outer, guard});
            add_elem(m, el->inner.get(), {{n0, -1, -1}}, false);
            break;
        }
        }
    }

    Piece add_entry(Nfa& m, std::map<const Entry*, Piece>& memo, const Entry* e) {
        auto it = memo.find(e);
        if (it != memo.end()) return it->second;
        Piece p;
        switch (e->kind) {
        case Entry::Kind::Root: {
            int s0 = m.add_state();
            int s1 = m.add_state(g_->root());
            SymId rs = g_->syms().root_sym();
            m.out[static_cast<size_t>(s0)].push_back(
                {s1, alpha_->of_sym(rs), rs, -1, false, false, -1});
            p.starts = {s0};
            p.accepts = {s1};
            p.states = {s0, s1};
            break;
        }
        case Entry::Kind::SelfAt:
            p = add_entry(m, memo, e->base_entry.get());
            break;
        case Entry::Kind::Forward: {
            // Graph region whose step-coded walks can still reach the result
            // node.  Non-recursive steps extend a base chain by exactly one
            // edge, so their region is the result node alone.
            std::set<int> region{e->node};
            if (e->multi) {
                std::deque<int> work{e->node};
                while (!work.empty()) {
                    int v = work.front();
                    work.pop_front();
                    for (int eid : g_->node(v).in) {
                        const Cdag::Edge& ed = g_->edge(eid);
                        if (!ed.codes.test(e->step)) continue;
                        if (region.insert(ed.from).second) work.push_back(ed.from);
                    }
                }
            }
            std::map<int, int> gstate;
            for (int v : region) {
                int s = m.add_state(v);
                gstate.emplace(v, s);
                p.states.insert(s);
            }
            if (e->multi) {
                for (int v : region) {
                    for (int eid : g_->node(v).out) {
                        const Cdag::Edge& ed = g_->edge(eid);
                        if (!ed.codes.test(e->step) || !region.count(ed.to)) continue;
                        SymId s = g_->sym_of(ed.to);
                        m.out[static_cast<size_t>(gstate[v])].push_back(
                            {gstate[ed.to], alpha_->of_sym(s), s, -1, false, false, -1});
                    }
                }
            }
            for (const auto& be : e->base->ends) {
                Piece bp = add_entry(m, memo, be.get());
                p.starts.insert(p.starts.end(), bp.starts.begin(), bp.starts.end());
                p.states.insert(bp.states.begin(), bp.states.end());
                for (int a : bp.accepts) {
                    int guard = -1;
                    if (!bp.guard_thread.empty()) guard = m.add_guard({{{a, -1}}, bp.guard_thread});
                    for (int eid : g_->node(be->node).out) {
                        const Cdag::Edge& ed = g_->edge(eid);
                        if (!ed.codes.test(e->step) || !region.count(ed.to)) continue;
                        SymId s = g_->sym_of(ed.to);
                        m.out[static_cast<size_t>(a)].push_back(
                            {gstate[ed.to], alpha_->of_sym(s), s, -1, false, false, guard});
                    }
                }
            }
            p.accepts = {gstate[e->node]};
            std::sort(p.starts.begin(), p.starts.end());
            p.starts.erase(std::unique(p.starts.begin(), p.starts.end()), p.starts.end());
            break;
        }
        case Entry::Kind::Backward: {
            Piece bp = add_entry(m, memo, e->base_entry.get());
            p.starts = bp.starts;
            p.states = bp.states;
            for (int s : bp.states)
                if (m.at_node[static_cast<size_t>(s)] == e->node) p.accepts.push_back(s);
            p.guard_thread.push_back(bp.accepts);
            p.guard_thread.insert(p.guard_thread.end(), bp.guard_thread.begin(),
                                  bp.guard_thread.end());
            break;
        }
        case Entry::Kind::Sibling: {
            Piece bp = add_entry(m, memo, e->base_entry.get());
            std::set<int> bacc(bp.accepts.begin(), bp.accepts.end());
            int na = m.add_state(e->node);
            SymId mine = g_->sym_of(e->node);
            SymId dropped = g_->sym_of(e->base_entry->node);
            SymId via_sym = g_->sym_of(e->via);
            // Runs one transition short of a base accept, sitting at a node
            // labeled like the shared parent, may swap to the sibling label.
            // The swap demands that the dropped label was still chargeable
            // (the base chain must exist) without actually charging it.
            for (int s : bp.states) {
                int n = m.at_node[static_cast<size_t>(s)];
                if (n < 0 || g_->sym_of(n) != via_sym) continue;
                std::vector<int> cand;
                for (const Nfa::Tr& t : m.out[static_cast<size_t>(s)])
                    if (bacc.count(t.to)) cand.push_back(t.to);
                if (cand.empty()) continue;
                Nfa::Tr tr{na, alpha_->of_sym(mine), mine, -1, false, false, -1};
                if (bp.guard_thread.empty()) {
                    tr.need = dropped;
                } else {
                    Nfa::Guard gd;
                    for (int t : cand) gd.entries.emplace_back(t, dropped);
                    gd.thread = bp.guard_thread;
                    tr.guard = m.add_guard(std::move(gd));
                }
                m.out[static_cast<size_t>(s)].push_back(tr);
            }
            p.starts = bp.starts;
            p.states = bp.states;
            p.states.insert(na);
            p.accepts = {na};
            break;
        }
        }
        memo.emplace(e, p);
        return p;
    }
};

// Synchronized comparison: advance A and B on a common label.  When A accepts
// (and on_a_accept), B finishing alone exhibits a word of B extending a word
// of A; when B crosses its suffix head (and on_b_head), A finishing alone
// exhibits a word of A extending B's head-truncated word.  Counts are exact
// and completions are required, so every hit corresponds to concrete chains
// both materializations contain.
class ProductRunner {
public:
    ProductRunner(const Nfa& a, MachineBuilder& mba, const Nfa& b, MachineBuilder& mbb,
                  AlphaMap& alpha)
        : a_(&a), b_(&b), mba_(&mba), mbb_(&mbb), alpha_(&alpha) {}

    struct Hit {
        bool via_a_accept = false; // else via the B head crossing
        Chain query_chain;
        Chain upd_full;
        int head_pos = 0; // index in upd_full where the suffix starts
    };

    bool run(bool on_a_accept, bool on_b_head, Hit& hit) {
        std::set<std::vector<int>> visited;
        struct St {
            int sa, sb;
            Counts ca, cb;
            std::vector<std::pair<int, bool>> word; // (alpha, B-head flag)
        };
        std::deque<St> work;
        for (int sa : a_->starts)
            for (int sb : b_->starts)
                work.push_back({sa, sb, mba_->zero_counts(), mbb_->zero_counts(), {}});
        while (!work.empty()) {
            St st = std::move(work.front());
            work.pop_front();
            std::vector<int> key{st.sa, st.sb};
            for (uint8_t c : st.ca) key.push_back(c);
            for (uint8_t c : st.cb) key.push_back(c);
            if (!visited.insert(std::move(key)).second) continue;
            if (visited.size() > kStateBudget)
                throw Error("independence check exceeded its state budget");
            for (const Nfa::Tr& ta : a_->out[static_cast<size_t>(st.sa)]) {
                for (const Nfa::Tr& tb : b_->out[static_cast<size_t>(st.sb)]) {
                    if (ta.alpha != tb.alpha) continue;
                    St nx;
                    nx.sa = ta.to;
                    nx.sb = tb.to;
                    nx.ca = st.ca;
                    nx.cb = st.cb;
                    if (!mba_->take(*a_, ta, nx.ca)) continue;
                    if (!mbb_->take(*b_, tb, nx.cb)) continue;
                    nx.word = st.word;
                    nx.word.emplace_back(ta.alpha, tb.head);
                    if (on_b_head && tb.head) {
                        std::vector<std::pair<int, bool>> arest, brest;
                        if (solo(*a_, *mba_, nx.sa, nx.ca, arest) &&
                            solo(*b_, *mbb_, nx.sb, nx.cb, brest)) {
                            assemble(hit, nx.word, arest, brest);
                            hit.via_a_accept = false;
                            return true;
                        }
                    }
                    if (on_a_accept && mba_->accept_ok(*a_, nx.sa, nx.ca)) {
                        std::vector<std::pair<int, bool>> brest;
                        if (solo(*b_, *mbb_, nx.sb, nx.cb, brest)) {
                            assemble(hit, nx.word, {}, brest);
                            hit.via_a_accept = true;
                            return true;
                        }
                    }
                    work.push_back(std::move(nx));
                }
            }
        }
        return false;
    }

private:
    static constexpr size_t kStateBudget = 2'000'000;

    const Nfa* a_;
    const Nfa* b_;
    MachineBuilder* mba_;
    MachineBuilder* mbb_;
    AlphaMap* alpha_;

    void assemble(Hit& hit, const std::vector<std::pair<int, bool>>& word,
                  const std::vector<std::pair<int, bool>>& arest,
                  const std::vector<std::pair<int, bool>>& brest) {
        hit.query_chain.clear();
        hit.upd_full.clear();
        hit.head_pos = -1;
        for (auto [al, hd] : word) {
            hit.query_chain.push_back(alpha_->label_of(al));
            if (hd && hit.head_pos < 0) hit.head_pos = static_cast<int>(hit.upd_full.size());
            hit.upd_full.push_back(alpha_->label_of(al));
        }
        for (auto [al, hd] : arest) {
            (void)hd;
            hit.query_chain.push_back(alpha_->label_of(al));
        }
        for (auto [al, hd] : brest) {
            if (hd && hit.head_pos < 0) hit.head_pos = static_cast<int>(hit.upd_full.size());
            hit.upd_full.push_back(alpha_->label_of(al));
        }
        if (hit.head_pos < 0) hit.head_pos = static_cast<int>(hit.upd_full.size()) - 1;
    }

    // Finish machine `m` alone from (s, counts) to guarded acceptance,
    // collecting the emitted labels.  An empty completion is allowed.
    static bool solo(const Nfa& m, MachineBuilder& mb, int s, Counts counts,
                     std::vector<std::pair<int, bool>>& path) {
        std::set<std::pair<int, Counts>> visited;
        struct Frame {
            int s;
            Counts counts;
            size_t next = 0;
            bool checked = false;
        };
        std::vector<Frame> stack{{s, std::move(counts), 0, false}};
        path.clear();
        while (!stack.empty()) {
            Frame& fr = stack.back();
            if (!fr.checked) {
                fr.checked = true;
                if (mb.accept_ok(m, fr.s, fr.counts)) return true;
                if (!visited.insert({fr.s, fr.counts}).second) {
                    stack.pop_back();
                    if (!path.empty()) path.pop_back();
                    continue;
                }
            }
            const auto& outs = m.out[static_cast<size_t>(fr.s)];
            if (fr.next >= outs.size()) {
                stack.pop_back();
                if (!path.empty()) path.pop_back();
                continue;
            }
            const Nfa::Tr& t = outs[fr.next++];
            Counts nc = fr.counts;
            if (!mb.take(m, t, nc)) continue;
            path.emplace_back(t.alpha, t.head);
            stack.push_back({t.to, std::move(nc), 0, false});
        }
        path.clear();
        return false;
    }
};

} // namespace

CheckResult check_cdag(const Cdag& gq, const Cdag& gu, const QInf& qi, const UInf& ui,
                       size_t max_witnesses) {
    if (gq.syms().nsyms() != gu.syms().nsyms() || gq.k() != gu.k())
        throw Error("internal: query and update graphs disagree on schema or bound");
    AlphaMap alpha(gq.syms());
    MachineBuilder mbq(gq, alpha), mbu(gu, alpha);

    std::vector<Nfa> rmachines;
    {
        std::set<const Entry*> seen;
        for (const auto& e : qi.returns)
            if (seen.insert(e.get()).second) rmachines.push_back(mbq.entry_machine(e.get()));
    }
    std::vector<std::pair<bool, Nfa>> vmachines; // (closed, machine)
    {
        std::set<std::pair<const Entry*, bool>> seen;
        for (const UsedEnd& ue : qi.used)
            if (seen.emplace(ue.e.get(), ue.closed).second)
                vmachines.emplace_back(ue.closed, mbq.entry_machine(ue.e.get()));
    }

    CheckResult res;
    auto note = [&](Witness::Kind kind, const ProductRunner::Hit& h) {
        res.verdict = Verdict::MaybeDependent;
        if (res.witnesses.size() >= max_witnesses) return;
        Witness w;
        w.kind = kind;
        w.query_chain = h.query_chain;
        w.upd_prefix.assign(h.upd_full.begin(), h.upd_full.begin() + h.head_pos);
        w.upd_suffix.assign(h.upd_full.begin() + h.head_pos, h.upd_full.end());
        res.witnesses.push_back(std::move(w));
    };

    for (const UpdEnd& ue : ui.upds) {
        Nfa bm = mbu.upd_machine(ue);
        for (const Nfa& am : rmachines) {
            ProductRunner pr(am, mbq, bm, mbu, alpha);
            ProductRunner::Hit hit;
            if (pr.run(true, true, hit))
                note(hit.via_a_accept ? Witness::Kind::RinU : Witness::Kind::UinR, hit);
        }
        for (const auto& [closed, vm] : vmachines) {
            // Plain used chains conflict when the update head is a prefix of
            // them; subtree-closed ones also when they reach into the update's
            // full chains (any comparability with the head).
            ProductRunner pr(vm, mbq, bm, mbu, alpha);
            ProductRunner::Hit hit;
            if (pr.run(closed, true, hit)) note(Witness::Kind::UinV, hit);
        }
    }
    return res;
}

} // namespace xqui
