#pragma once

#include "xqui/infer.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace xqui {

enum class Verdict { Independent, MaybeDependent };

inline const char* verdict_name(Verdict v) {
    return v == Verdict::Independent ? "independent" : "maybe-dependent";
}

// One concrete conflicting pair: a query-side chain (return or used) and an
// update chain c:c', with the rule that fired.
struct Witness {
    enum class Kind { RinU, UinR, UinV };
    Kind kind = Kind::RinU;
    Chain query_chain;
    Chain upd_prefix; // may be empty (root-anchored operations)
    Chain upd_suffix; // never empty
    std::string to_string() const;
};

const char* witness_kind_name(Witness::Kind k);

struct CheckResult {
    Verdict verdict = Verdict::Independent;
    std::vector<Witness> witnesses;
};

// The bare conflict relation over two plain chain sets:
// {(c1,c2) | c1 in t1, c2 in t2, c1 prefix of c2}.
std::set<std::pair<Chain, Chain>> confl_plain(const std::set<Chain>& t1,
                                              const std::set<Chain>& t2);

// Reference route: materialize every inferred chain set and scan the three
// conflict conditions directly.  mq/mu read chains off the query's and the
// update's graphs respectively.
CheckResult check_materialized(Materializer& mq, Materializer& mu, const QInf& qi,
                               const UInf& ui, size_t max_witnesses = 8);

// Graph route: per-derivation automata over the two graphs, compared by a
// synchronized walk that tracks occurrence counts exactly; chain sets are
// never expanded.  Verdicts agree with check_materialized; witnesses are
// spelled from the walk only when a conflict is found.
CheckResult check_cdag(const Cdag& gq, const Cdag& gu, const QInf& qi, const UInf& ui,
                       size_t max_witnesses = 8);

} // namespace xqui
