#pragma once

#include "xqui/ast.hpp"
#include "xqui/dtd.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace xqui {

// Dense symbol ids over the schema alphabet: 0..ntags-1 are the element tags
// in declaration order, ntags is the text type.  Constructed tags outside the
// schema never enter the main chain graph (element chains carry Labels).
using SymId = int;

class SymTable {
public:
    explicit SymTable(const Dtd& d);

    const Dtd& dtd() const { return *dtd_; }
    int ntags() const { return ntags_; }
    int nsyms() const { return ntags_ + 1; }
    SymId text_sym() const { return ntags_; }
    SymId root_sym() const { return root_; }

    bool is_text(SymId s) const { return s == ntags_; }
    SymId of(const Label& l) const; // -1 for labels outside the alphabet
    Label label(SymId s) const;
    std::string display(SymId s) const { return label(s).display(); }

    // can(a,b): b may occur in the content model of a.
    bool can(SymId a, SymId b) const { return !is_text(a) && adj_[a][b]; }
    const std::vector<SymId>& succs(SymId a) const;

    // Sibling order of the content model of parent tag p, as sym pairs.
    const std::set<std::pair<SymId, SymId>>& sib(SymId p) const;

private:
    const Dtd* dtd_;
    int ntags_;
    SymId root_;
    std::map<std::string, SymId> index_;
    std::vector<std::vector<char>> adj_;
    std::vector<std::vector<SymId>> succ_;
    mutable std::vector<std::unique_ptr<std::set<std::pair<SymId, SymId>>>> sib_;
};

// Bitmask over expression ids; edges carry the ids of the steps that walked
// them, frontiers carry the ids of everything their derivation involved.
class CodeMask {
public:
    CodeMask() = default;
    explicit CodeMask(int nbits) : w_((static_cast<size_t>(nbits) + 63) / 64, 0) {}

    void set(int bit);
    void set_range(int lo, int hi); // [lo, hi)
    bool test(int bit) const;
    void or_with(const CodeMask& o);
    bool intersects(const CodeMask& o) const;
    bool any() const;

private:
    std::vector<uint64_t> w_;
};

// The chain graph: one node per (depth, symbol) pair that some bounded chain
// realizes, built incrementally as steps walk it.  Per-node counts are
// pointwise minima over root paths; extending an edge is allowed when the
// minimum for the extending symbol stays within k.  That is exact for the
// single extension being justified; longer compositions are re-checked
// against exact per-path counts wherever chains are read off the graph.
class Cdag {
public:
    Cdag(const SymTable& syms, int k, int ncodes);

    struct Edge {
        int from, to;
        CodeMask codes;
    };
    struct NodeRec {
        int depth;
        SymId sym;
        std::vector<int> out, in; // edge indices
        std::vector<uint8_t> mincnt;
    };

    const SymTable& syms() const { return *syms_; }
    int k() const { return k_; }
    int ncodes() const { return ncodes_; }
    int root() const { return root_; }
    int max_depth() const { return max_depth_; }

    SymId sym_of(int n) const { return node(n).sym; }
    int depth_of(int n) const { return node(n).depth; }
    Label label_of(int n) const { return syms_->label(node(n).sym); }

    const std::vector<NodeRec>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const NodeRec& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
    const Edge& edge(int id) const { return edges_[static_cast<size_t>(id)]; }
    int find(int depth, SymId sym) const; // -1 if absent

    // Extend from a node by one symbol on behalf of expression `code`.
    // Returns the target node id, or -1 when rejected (unreachable symbol,
    // depth cap, or count cap).
    int intern(int from, SymId sym, ExprId code);

    // Nodes one level up reachable backwards along edges whose codes meet the
    // mask.
    std::vector<int> parents(int node, const CodeMask& lineage) const;

    std::string to_dot() const;

private:
    const SymTable* syms_;
    int k_;
    int ncodes_;
    int max_depth_;
    int root_ = -1;
    std::vector<NodeRec> nodes_;
    std::vector<Edge> edges_;
    std::map<std::pair<int, int>, int> index_; // (depth, sym) -> node
    std::map<std::pair<int, int>, int> edge_index_; // (from, to) -> edge

    int get_node(int depth, SymId sym);
    void relax_from(int node);
};

// ----- chain-level axis semantics (graph-free; used by tests, tools and the
// materializer's extension computations) -----

// Chains reachable from c along one axis step, within the k bound.  For the
// downward recursive axes this enumerates extension suffixes exhaustively —
// intended for bounded/test use.
std::set<Chain> axis_chains(const Dtd& d, int k, const Chain& c, Axis axis);

// Filter a chain set by a node test on the last label.
std::set<Chain> test_chains(const Dtd& d, const std::set<Chain>& chains, const NodeTest& t);

// All suffixes x (including the empty one) with c+x a valid k-bounded chain.
std::set<Chain> extension_suffixes(const Dtd& d, int k, const Chain& c);

} // namespace xqui
