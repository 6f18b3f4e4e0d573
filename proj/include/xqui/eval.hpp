#pragma once

#include "xqui/ast.hpp"
#include "xqui/store.hpp"

#include <map>
#include <string>
#include <vector>

namespace xqui {

// A node sequence: evaluation order for sequences, document order (deduped)
// for step results, per the usual XPath/XQuery rules.
using NodeSeq = std::vector<Location>;

struct DynEnv {
    std::map<std::string, NodeSeq> vars;
};

// Evaluate a query.  The store grows: element constructors and string literals
// allocate fresh nodes beside the input document.  Throws EvalError on unbound
// variables.
NodeSeq eval_query(const Query& q, Store& s, DynEnv& env);
NodeSeq eval_query(const Query& q, Store& s, Location root);

// One primitive update command.  Targets are locations in the evaluated store;
// content roots are already deep-copied (snapshot semantics: evaluating the
// update never observes its own effects).
struct UpdateCommand {
    enum class Kind { Ins, Del, Repl, Ren };
    Kind kind;
    Location target = kNoLoc;
    std::vector<Location> content; // Ins/Repl
    InsertPos pos = InsertPos::Into;
    std::string tag; // Ren

    std::string to_string(const Store& s) const;
};

// Evaluate the update into its pending command list, without applying
// anything.  Insert/replace/rename targets must evaluate to exactly one node
// (CardinalityError); delete accepts any number of targets.
std::vector<UpdateCommand> build_upl(const Update& u, Store& s, DynEnv& env);
std::vector<UpdateCommand> build_upl(const Update& u, Store& s, Location root);

// Apply a pending list: renames first, then inserts/replaces in list order,
// then deletes.  Deleting a parentless node is a no-op; replacing or
// inserting before/after a parentless node is an EvalError.
void apply_upl(Store& s, const std::vector<UpdateCommand>& upl);

// Locations the update touches: delete/rename/replace targets, plus insert/
// replace content roots and their descendants.
LocationSet involved_locations(const Store& s, const std::vector<UpdateCommand>& upl);

// Dynamic independence of q and u on one document: evaluate q, apply u to a
// fresh copy, evaluate q again, compare results by value (order-sensitive).
bool dynamic_independent(const Query& q, const Update& u, const Store& doc, Location root);

// Result of q on (a copy of) the document, canonically serialized — the
// value the dynamic check compares.
std::string query_value(const Query& q, const Store& doc, Location root);

} // namespace xqui
