#pragma once

#include "xqui/ast.hpp"
#include "xqui/cdag.hpp"
#include "xqui/dtd.hpp"

#include <map>
#include <memory>
#include <set>
#include <vector>

namespace xqui {

struct Entry;
struct ElemEnd;
struct Frontier;
using EntryPtr = std::shared_ptr<const Entry>;
using ElemEndPtr = std::shared_ptr<const ElemEnd>;
using FrontierPtr = std::shared_ptr<const Frontier>;

// A chain-set end marker in the main graph.  An entry denotes the set of
// chains derivable for one result node of one step, together with enough of
// the derivation to read the exact set back off the graph (the graph alone
// over-approximates: nodes merge chains of unrelated subexpressions).
struct Entry {
    enum class Kind {
        Root,     // the root binding: exactly the one-label root chain
        Forward,  // base chains extended by >=1 step-coded edges to `node`
        SelfAt,   // chains of base_entry (kept by a self/zero-length step)
        Backward, // prefixes of base_entry chains cut at `node`
        Sibling,  // base_entry chains with the last label swapped to sym(node)
    };
    Kind kind = Kind::Root;
    int node = -1;       // end node (main graph)
    ExprId step = -1;    // creating expression
    FrontierPtr base;    // Forward: the whole binding frontier
    EntryPtr base_entry; // SelfAt / Backward / Sibling
    int via = -1;        // Sibling: the parent node the swap went through
    bool multi = false;  // Forward: walks may chain step edges (recursive axes);
                         // otherwise only direct edges extend a base chain
};

// An element-chain end: chains rooted at a constructed node, kept intensional
// (grafts onto return chains are never expanded into the schema).
struct ElemEnd {
    enum class Kind {
        Bare,  // just the constructed label (also: string literals, as text)
        Graft, // tag . (last label of a return chain) . (schema extensions)
        Nest,  // tag . (chains of an inner element end)
    };
    Kind kind = Kind::Bare;
    Label tag;
    EntryPtr ret;    // Graft
    ElemEndPtr inner; // Nest
    ExprId ctor = -1;
};

// A variable binding or intermediate result set: node entries, element ends,
// and the code mask of everything that contributed (used to filter backward
// edges to this derivation's own lineage).
struct Frontier {
    std::vector<EntryPtr> ends;
    std::vector<ElemEndPtr> elems;
    CodeMask lineage;
};

struct UsedEnd {
    EntryPtr e;
    bool closed = false; // constructor content: the whole subtree is read
};

// Inference result for a query: return / used / element chain sets, plus, for
// each free variable, the binding entries that can yield a nonempty result
// (drives the for-loop used-chain filter).
struct QInf {
    std::vector<EntryPtr> returns;
    std::vector<UsedEnd> used;
    std::vector<ElemEndPtr> elems;
    std::map<std::string, std::set<const Entry*>> contributes;

    bool nonempty() const { return !returns.empty() || !elems.empty(); }
};

// An update-chain end: prefix chains come from a target entry (optionally
// with the last label dropped, for operations anchored at the parent), the
// suffix from the operation.
struct UpdEnd {
    enum class Sfx {
        LastSym,  // suffix = the dropped last label (delete/rename/replace targets)
        Rename,   // suffix = the new tag
        SrcGraft, // suffix = last label of a source return chain + its extensions
        Elem,     // suffix = chains of a source element end
    };
    EntryPtr target;
    bool drop_last = false;
    // With drop_last, a root-chain target leaves no parent prefix.  Deleting
    // the root is a no-op and inserting beside or replacing it cannot
    // complete, so those ends vanish; a rename does fire at the root, so its
    // ends survive with an empty prefix.
    bool allow_root = false;
    Sfx sfx = Sfx::LastSym;
    Label rename_to;
    EntryPtr src;    // SrcGraft
    ElemEndPtr elem; // Elem
    ExprId op = -1;
};

struct UInf {
    std::vector<UpdEnd> upds;
};

// The chain inference engine.  One instance owns one graph; query and update
// are inferred into separate instances by the orchestrator.
class Inference {
public:
    // ncodes: size of the expression id space (root id_end).
    Inference(const Dtd& d, int k, int ncodes);

    QInf infer_query(const Query& q);
    UInf infer_update(const Update& u);

    const Cdag& graph() const { return g_; }
    const SymTable& symtab() const { return syms_; }
    const Dtd& dtd() const { return *d_; }

private:
    using StaticEnv = std::map<std::string, FrontierPtr>;

    const Dtd* d_;
    SymTable syms_;
    Cdag g_;

    FrontierPtr root_frontier();
    CodeMask lineage_of(ExprId id, ExprId id_end, const std::set<std::string>& free,
                        const StaticEnv& env) const;

    struct StepOut {
        std::vector<EntryPtr> results;
        std::vector<ElemEndPtr> elem_results;
        std::set<const Entry*> live; // base entries with >= 1 result
    };
    StepOut do_step(const Query& q, const FrontierPtr& base);

    QInf infer(const Query& q, const StaticEnv& env);
    UInf inferU(const Update& u, const StaticEnv& env);

    bool test_pass_sym(const NodeTest& t, SymId s) const;
    static bool test_pass_elem(const NodeTest& t, const ElemEnd& e);
};

// Reads exact chain sets off entries (the reference route; exact per-path
// count filtering).  Memoizes per entry.
class Materializer {
public:
    explicit Materializer(const Cdag& g) : g_(&g) {}

    const std::set<Chain>& mat(const EntryPtr& e);
    std::set<Chain> mat_elem(const ElemEndPtr& e);
    // Update chains as (prefix, suffix) pairs; prefix may be empty.
    std::set<std::pair<Chain, Chain>> mat_upd(const UpdEnd& ue);

private:
    const Cdag* g_;
    std::map<const Entry*, std::set<Chain>> memo_;

    // Label paths from node `from` to node `to` along edges coded `step`
    // (length >= 1), with per-symbol counts of the suffix.
    struct Suffix {
        Chain labels;
        std::vector<uint8_t> counts;
    };
    std::map<std::tuple<int, int, ExprId>, std::vector<Suffix>> suffix_memo_;
    const std::vector<Suffix>& suffixes(int from, int to, ExprId step);
};

} // namespace xqui
