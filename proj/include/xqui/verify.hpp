#pragma once

#include "xqui/ast.hpp"
#include "xqui/check.hpp"
#include "xqui/dtd.hpp"
#include "xqui/store.hpp"

#include <optional>
#include <string>

namespace xqui {

// Exhaustive dynamic cross-check of the static verdict: evaluate the pair on
// every valid document within the bounds and look for an observable
// dependence.  A static Independent together with any counterexample is a
// soundness violation.
struct VerifyOptions {
    int max_depth = 4;
    int max_repeat = 2;
    std::optional<int> k; // analysis bound override
    int threads = 0;      // 0: XMLQUI_THREADS or hardware default
    bool check_properties = true; // projection / involved-typing invariants
};

struct VerifyReport {
    Verdict verdict = Verdict::Independent;
    int k = 1;
    bool routes_agree = true;
    long instances = 0;       // documents enumerated
    long applicable = 0;      // where both sides evaluated without error
    long counterexamples = 0; // observable dependence
    long projection_failures = 0;
    long typing_failures = 0;
    std::string first_counterexample; // serialized document, empty if none

    bool no_applicable() const { return applicable == 0; }
    bool sound() const {
        return !(verdict == Verdict::Independent && counterexamples > 0);
    }
    bool properties_ok() const {
        return projection_failures == 0 && typing_failures == 0;
    }
};

VerifyReport verify_pair(const Dtd& d, const Query& q, const Update& u,
                         const VerifyOptions& opt = {});

std::string verify_text(const VerifyReport& r);
std::string verify_json(const VerifyReport& r);

// Evaluating the query on the projection of the document to the inferred read
// set (returned chains subtree-closed, used chains as flagged) must give the
// same value as evaluating on the full document.
bool projection_property_holds(const Query& q, const Store& doc, Location root,
                               const std::set<Chain>& returns, const std::set<Chain>& used,
                               const std::set<Chain>& used_closed,
                               std::string* why = nullptr);

// Every location the update touches must be typed by an inferred update
// chain: targets by a full prefix+suffix chain in the original document,
// inserted/replacing content by prefix + a nonempty suffix prefix in the
// updated document.  Vacuously true when the update does not apply.
bool involved_typing_holds(const Update& u, const Store& doc, Location root,
                           const std::set<std::pair<Chain, Chain>>& upd,
                           std::string* why = nullptr);

} // namespace xqui
