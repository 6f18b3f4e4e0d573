#include "xqui/cdag.hpp"
#include "xqui/diag.hpp"

#include <algorithm>
#include <deque>

namespace xqui {

// --------------------------------------------------------------------------
// SymTable

SymTable::SymTable(const Dtd& d) : dtd_(&d), ntags_(static_cast<int>(d.tags().size())) {
    root_ = d.tag_index(d.root());
    for (int i = 0; i < ntags_; ++i) index_[d.tags()[static_cast<size_t>(i)]] = i;
    adj_.assign(static_cast<size_t>(ntags_), std::vector<char>(static_cast<size_t>(nsyms()), 0));
    succ_.resize(static_cast<size_t>(ntags_));
    for (int a = 0; a < ntags_; ++a) {
        for (const Label& l : occurring(d.model_of(Label::elem(d.tags()[static_cast<size_t>(a)])))) {
            SymId b = of(l);
            if (b < 0) continue; // cannot happen: models reference declared tags
            adj_[static_cast<size_t>(a)][static_cast<size_t>(b)] = 1;
            succ_[static_cast<size_t>(a)].push_back(b);
        }
        auto& v = succ_[static_cast<size_t>(a)];
        std::sort(v.begin(), v.end());
    }
    sib_.resize(static_cast<size_t>(ntags_));
}

SymId SymTable::of(const Label& l) const {
    if (l.is_text()) return text_sym();
    auto it = index_.find(l.name());
    return it == index_.end() ? -1 : it->second;
}

Label SymTable::label(SymId s) const {
    if (is_text(s)) return Label::text();
    return Label::elem(dtd_->tags()[static_cast<size_t>(s)]);
}

const std::vector<SymId>& SymTable::succs(SymId a) const {
    static const std::vector<SymId> none;
    if (is_text(a)) return none;
    return succ_[static_cast<size_t>(a)];
}

const std::set<std::pair<SymId, SymId>>& SymTable::sib(SymId p) const {
    auto& slot = sib_[static_cast<size_t>(p)];
    if (!slot) {
        auto pairs = std::make_unique<std::set<std::pair<SymId, SymId>>>();
        for (const auto& [a, b] : sibling_order(dtd_->model_of(label(p))))
            pairs->emplace(of(a), of(b));
        slot = std::move(pairs);
    }
    return *slot;
}

// --------------------------------------------------------------------------
// CodeMask

void CodeMask::set(int bit) {
    size_t word = static_cast<size_t>(bit) / 64;
    if (word >= w_.size()) w_.resize(word + 1, 0);
    w_[word] |= uint64_t{1} << (bit % 64);
}

void CodeMask::set_range(int lo, int hi) {
    for (int b = lo; b < hi; ++b) set(b);
}

bool CodeMask::test(int bit) const {
    size_t word = static_cast<size_t>(bit) / 64;
    return word < w_.size() && (w_[word] >> (bit % 64)) & 1;
}

void CodeMask::or_with(const CodeMask& o) {
    if (o.w_.size() > w_.size()) w_.resize(o.w_.size(), 0);
    for (size_t i = 0; i < o.w_.size(); ++i) w_[i] |= o.w_[i];
}

bool CodeMask::intersects(const CodeMask& o) const {
    size_t n = std::min(w_.size(), o.w_.size());
    for (size_t i = 0; i < n; ++i)
        if (w_[i] & o.w_[i]) return true;
    return false;
}

bool CodeMask::any() const {
    for (uint64_t x : w_)
        if (x) return true;
    return false;
}

// --------------------------------------------------------------------------
// Cdag

Cdag::Cdag(const SymTable& syms, int k, int ncodes) : syms_(&syms), k_(k), ncodes_(ncodes) {
    if (k < 1) throw Error("chain bound k must be at least 1");
    if (k > 200) throw Error("chain bound k too large (max 200)");
    // A k-bounded chain has at most k occurrences of each tag plus one text
    // label, so depth indices range over 0..k*ntags.
    max_depth_ = k * syms.ntags();
    root_ = get_node(0, syms.root_sym());
    auto& r = nodes_[static_cast<size_t>(root_)];
    r.mincnt.assign(static_cast<size_t>(syms.nsyms()), 0);
    r.mincnt[static_cast<size_t>(syms.root_sym())] = 1;
}

int Cdag::find(int depth, SymId sym) const {
    auto it = index_.find({depth, sym});
    return it == index_.end() ? -1 : it->second;
}

int Cdag::get_node(int depth, SymId sym) {
    auto it = index_.find({depth, sym});
    if (it != index_.end()) return it->second;
    NodeRec n;
    n.depth = depth;
    n.sym = sym;
    n.mincnt.assign(static_cast<size_t>(syms_->nsyms()), static_cast<uint8_t>(k_ + 1));
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    index_.emplace(std::make_pair(depth, sym), id);
    return id;
}

int Cdag::intern(int from, SymId sym, ExprId code) {
    const NodeRec& f = nodes_[static_cast<size_t>(from)];
    if (!syms_->can(f.sym, sym)) return -1;
    if (f.depth + 1 > max_depth_) return -1;
    // Count cap: some root path reaching `from` must tolerate one more `sym`.
    if (f.mincnt[static_cast<size_t>(sym)] + 1 > k_) return -1;
    int depth = f.depth + 1;
    int to = get_node(depth, sym);
    auto eit = edge_index_.find({from, to});
    int eid;
    if (eit == edge_index_.end()) {
        Edge e;
        e.from = from;
        e.to = to;
        e.codes = CodeMask(ncodes_);
        eid = static_cast<int>(edges_.size());
        edges_.push_back(std::move(e));
        edge_index_.emplace(std::make_pair(from, to), eid);
        nodes_[static_cast<size_t>(from)].out.push_back(eid);
        nodes_[static_cast<size_t>(to)].in.push_back(eid);
    } else {
        eid = eit->second;
    }
    edges_[static_cast<size_t>(eid)].codes.set(code);
    // Relax the target's pointwise-minimum counts and propagate.
    relax_from(from);
    return to;
}

void Cdag::relax_from(int start) {
    std::deque<int> work{start};
    while (!work.empty()) {
        int u = work.front();
        work.pop_front();
        const NodeRec& nu = nodes_[static_cast<size_t>(u)];
        for (int eid : nu.out) {
            int v = edges_[static_cast<size_t>(eid)].to;
            NodeRec& nv = nodes_[static_cast<size_t>(v)];
            bool changed = false;
            for (int s = 0; s < syms_->nsyms(); ++s) {
                uint8_t cand = static_cast<uint8_t>(nu.mincnt[static_cast<size_t>(s)] +
                                                    (s == nv.sym ? 1 : 0));
                if (cand < nv.mincnt[static_cast<size_t>(s)]) {
                    nv.mincnt[static_cast<size_t>(s)] = cand;
                    changed = true;
                }
            }
            if (changed) work.push_back(v);
        }
    }
}

std::vector<int> Cdag::parents(int node, const CodeMask& lineage) const {
    std::vector<int> out;
    for (int eid : nodes_[static_cast<size_t>(node)].in) {
        const Edge& e = edges_[static_cast<size_t>(eid)];
        if (e.codes.intersects(lineage)) out.push_back(e.from);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string Cdag::to_dot() const {
    std::string out = "digraph chains {\n  rankdir=TB;\n  node [shape=box, fontname=\"mono\"];\n";
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const NodeRec& n = nodes_[i];
        out += "  n" + std::to_string(i) + " [label=\"" + std::to_string(n.depth) + ":" +
               syms_->display(n.sym) + "\"];\n";
    }
    for (const Edge& e : edges_) {
        out += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) + ";\n";
    }
    out += "}\n";
    return out;
}

// --------------------------------------------------------------------------
// Chain-level axis semantics

namespace {

bool counts_ok(const Chain& c, int k) {
    std::map<Label, int> counts;
    for (const Label& l : c)
        if (++counts[l] > k) return false;
    return true;
}

void extend_all(const Dtd& d, int k, const Chain& base, std::map<Label, int> counts,
                std::set<Chain>& out, bool include_base) {
    if (include_base) out.insert(base);
    const Label& last = base.back();
    if (last.is_text()) return;
    for (const Label& nxt : occurring(d.model_of(last))) {
        int& cnt = counts[nxt];
        if (cnt + 1 > k) continue;
        ++cnt;
        Chain c2 = base;
        c2.push_back(nxt);
        extend_all(d, k, c2, counts, out, true);
        --cnt;
    }
}

} // namespace

std::set<Chain> extension_suffixes(const Dtd& d, int k, const Chain& c) {
    std::map<Label, int> counts;
    for (const Label& l : c) ++counts[l];
    std::set<Chain> full;
    extend_all(d, k, c, counts, full, true);
    std::set<Chain> out;
    for (const Chain& f : full) out.insert(Chain(f.begin() + static_cast<ptrdiff_t>(c.size()), f.end()));
    return out;
}

std::set<Chain> axis_chains(const Dtd& d, int k, const Chain& c, Axis axis) {
    std::set<Chain> out;
    if (c.empty() || !counts_ok(c, k)) return out;
    switch (axis) {
    case Axis::Self:
        out.insert(c);
        break;
    case Axis::Child: {
        if (c.back().is_text()) break;
        for (const Label& nxt : occurring(d.model_of(c.back()))) {
            Chain c2 = c;
            c2.push_back(nxt);
            if (counts_ok(c2, k)) out.insert(std::move(c2));
        }
        break;
    }
    case Axis::Descendant:
    case Axis::DescendantOrSelf: {
        std::map<Label, int> counts;
        for (const Label& l : c) ++counts[l];
        extend_all(d, k, c, counts, out, axis == Axis::DescendantOrSelf);
        break;
    }
    case Axis::Parent: {
        if (c.size() >= 2) out.insert(Chain(c.begin(), c.end() - 1));
        break;
    }
    case Axis::Ancestor: {
        for (size_t n = 1; n < c.size(); ++n) out.insert(Chain(c.begin(), c.begin() + static_cast<ptrdiff_t>(n)));
        break;
    }
    case Axis::AncestorOrSelf: {
        for (size_t n = 1; n <= c.size(); ++n) out.insert(Chain(c.begin(), c.begin() + static_cast<ptrdiff_t>(n)));
        break;
    }
    case Axis::FollowingSibling:
    case Axis::PrecedingSibling: {
        if (c.size() < 2) break;
        const Label& parent = c[c.size() - 2];
        const Label& self = c.back();
        for (const auto& [a, b] : sibling_order(d.model_of(parent))) {
            const Label* gamma = nullptr;
            if (axis == Axis::FollowingSibling && a == self) gamma = &b;
            if (axis == Axis::PrecedingSibling && b == self) gamma = &a;
            if (!gamma) continue;
            Chain c2(c.begin(), c.end() - 1);
            c2.push_back(*gamma);
            if (counts_ok(c2, k)) out.insert(std::move(c2));
        }
        break;
    }
    }
    return out;
}

std::set<Chain> test_chains(const Dtd& d, const std::set<Chain>& chains, const NodeTest& t) {
    (void)d;
    std::set<Chain> out;
    for (const Chain& c : chains) {
        if (c.empty()) continue;
        const Label& last = c.back();
        bool pass = false;
        switch (t.kind) {
        case NodeTest::Kind::AnyNode: pass = true; break;
        case NodeTest::Kind::Text: pass = last.is_text(); break;
        case NodeTest::Kind::Tag: pass = !last.is_text() && last.name() == t.tag; break;
        }
        if (pass) out.insert(c);
    }
    return out;
}

} // namespace xqui
