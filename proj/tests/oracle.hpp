#pragma once

// Brute-force reference implementations the unit tests compare the engine
// against.  Everything here works on explicit chain sets — no graph, no
// sharing — so it is slow but easy to audit against the inference rules.

#include "xqui/ast.hpp"
#include "xqui/dtd.hpp"

#include <random>
#include <set>
#include <utility>
#include <vector>

namespace xqui::oracle {

// All k-chains of d, by exhaustive depth-first search.  Throws Error if the
// set would exceed cap.
std::set<Chain> k_chains(const Dtd& d, int k, std::size_t cap = 200000);

// Navigation over an explicit chain universe.
class ChainNav {
public:
    ChainNav(const Dtd& d, std::set<Chain> universe);

    const std::set<Chain>& universe() const { return C_; }
    std::set<Chain> axis(const Chain& c, Axis ax) const;
    std::set<Chain> extensions(const Chain& c) const; // {e in C | c prefix of e}
    static bool test_ok(const Chain& c, const NodeTest& t);

private:
    const Dtd* d_;
    std::set<Chain> C_;
};

// How the used-chain filters of the step/for rules are granulated.  PerChain
// is the textbook rule: a binding chain is read only if it individually
// produces results.  PerNode coarsens liveness to "some binding of the same
// length and final label produces results".
//
// The engine filters per shared derivation end, gated on graph edges whose
// feasibility comes from a pointwise-min occurrence profile.  That profile
// mixes counts across merged derivations, so an edge can exist that no
// individual chain justifies, and the engine can then mark chains read that
// even PerNode finds dead.  Tests therefore assert
//   per-chain used  ⊆  engine used  ⊆  valid k-chains
// everywhere, exact equality on returned/element/update chains, and the full
// pinch (engine == PerChain == PerNode) on the curated corpus, where the
// mixing does not occur.
enum class UsedGrain { PerChain, PerNode };

struct QueryChains {
    std::set<Chain> returns;
    std::set<Chain> used;        // plain used chains
    std::set<Chain> used_closed; // constructor-content bases: whole subtrees read
    std::set<Chain> elems;
};

using UpdPair = std::pair<Chain, Chain>; // prefix : suffix

struct UpdateChains {
    std::set<UpdPair> upds;
};

// Rule-by-rule chain inference over explicit sets.  Mirrors the engine's
// documented deviations (parent-anchored replace content, self-only
// navigation of constructed nodes).  Throws Error on the same inputs the
// engine rejects.
QueryChains naive_query(const Dtd& d, const Query& q, int k, UsedGrain grain,
                        std::size_t cap = 200000);
UpdateChains naive_update(const Dtd& d, const Update& u, int k, UsedGrain grain,
                          std::size_t cap = 200000);

// Conflict check straight from the three directed conditions of the
// independence definition, over explicit sets.  used_closed holds unexpanded
// bases; a closed base conflicts when prefix-comparable either way with the
// update head.
bool naive_independent(const std::set<Chain>& returns, const std::set<Chain>& used,
                       const std::set<Chain>& used_closed,
                       const std::set<UpdPair>& upds);

// --- random instance generators (deterministic under a seeded rng) ---------

// A small schema: tag count in [1, max_tags], root is the first tag, every
// tag's model is satisfiable by a finite tree (back references are always
// optional or starred).
Dtd random_dtd(std::mt19937_64& rng, int max_tags);

// Quasi-closed expressions over d's alphabet.  Queries are path-heavy with
// occasional for/let/if/sequence/constructor nodes; updates weight deletes
// highest and keep nesting shallow.
QueryPtr random_query(std::mt19937_64& rng, const Dtd& d);
UpdatePtr random_update(std::mt19937_64& rng, const Dtd& d);

} // namespace xqui::oracle
