#pragma once

#include "xqui/ast.hpp"
#include "xqui/dtd.hpp"
#include "xqui/label.hpp"

namespace xqui {

// The chain-space bound: chains are explored with every label restricted to at
// most k occurrences.  k = (max tag frequency) + (number of recursive steps),
// computed per expression; the analysis runs at the sum for the query/update
// pair, floored at 1.
struct KBound {
    int f_max = 0; // max over tags of the frequency measure
    int r = 0;     // recursive-step measure
    int k() const { return f_max + r; }
};

// How many nodes with tag `tag` one evaluation path can touch: 1 per
// non-recursive step whose test is the tag or node(), 1 per constructor or
// rename introducing the tag; summed over for/let and update operands, maxed
// over sequence/conditional branches.  Self steps touch no new node and count
// 0.
int tag_frequency(const Query& q, const std::string& tag);
int tag_frequency(const Update& u, const std::string& tag);

// Number of recursive-axis steps (descendant, descendant-or-self, ancestor,
// ancestor-or-self), summed/maxed the same way.
int recursive_steps(const Query& q);
int recursive_steps(const Update& u);

// Tags mentioned anywhere in the expression (tests, constructors, rename).
std::set<std::string> mentioned_tags(const Query& q);
std::set<std::string> mentioned_tags(const Update& u);

// Bound for one expression: frequencies maxed over the schema alphabet plus
// any tags the expression mentions (constructed tags may be outside the
// schema).
KBound k_of(const Query& q, const Dtd& d);
KBound k_of(const Update& u, const Dtd& d);

// Bound for a pair, floored at 1.
int k_pair(const Query& q, const Update& u, const Dtd& d);

// Chain folding: repeatedly splice out the segment between two occurrences of
// the same label (keeping the first occurrence and everything after the
// second) until all labels are distinct.  Splicing preserves chain validity.
Chain fold(Chain c);

// All chains reachable from c by zero or more single splices.  Small helper
// for bound-stability checks; the splice relation is confluent enough in
// practice but not canonical, so exhaustive exploration is offered.
std::set<Chain> fold_closure(const Chain& c);

} // namespace xqui
