#pragma once

#include "xqui/ast.hpp"
#include "xqui/check.hpp"
#include "xqui/dtd.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace xqui {

// Which conflict-check implementation to run.  Materialized reads the chain
// sets out of the graph and compares them pairwise; Graph runs the automaton
// product without ever expanding a set.  Both runs the two and cross-checks
// the verdicts.
enum class Route { Graph, Materialized, Both };

const char* route_name(Route r);

struct AnalyzeOptions {
    std::optional<int> k; // override; default max(1, k_q + k_u)
    Route route = Route::Both;
    std::size_t max_witnesses = 8;
    bool with_chains = true; // include materialized chain sets in the report
};

struct AnalyzeReport {
    Verdict verdict = Verdict::Independent;
    int k_q = 0;
    int k_u = 0;
    int k = 1;
    std::vector<Witness> witnesses;
    bool routes_agree = true; // meaningful when route == Both

    // Materialized chain sets (populated when requested).
    std::set<Chain> returns;
    std::set<Chain> used;        // plain
    std::set<Chain> used_closed; // constructor content: whole subtree read
    std::set<std::pair<Chain, Chain>> upd;

    struct Timings {
        double infer_q_ms = 0;
        double infer_u_ms = 0;
        double check_ms = 0;
    } timings;
    struct GraphStats {
        int nodes = 0;
        int edges = 0;
    } graph_q, graph_u;
};

// The full static pipeline on parsed inputs: bound selection, chain inference
// for both sides, conflict check.  Both expressions must be quasi-closed.
AnalyzeReport analyze_pair(const Dtd& d, const Query& q, const Update& u,
                           const AnalyzeOptions& opt = {});

std::string report_text(const AnalyzeReport& r);
std::string report_json(const AnalyzeReport& r);

// Chain inspection for a single expression.
struct ChainsReport {
    bool update_role = false;
    int k = 1;
    bool materialized = false;
    std::set<Chain> returns;
    std::set<Chain> used;
    std::set<Chain> used_closed;
    std::vector<std::set<Chain>> elems; // one set per constructed element end
    std::set<std::pair<Chain, Chain>> upd;
    struct {
        int nodes = 0;
        int edges = 0;
    } graph;
    std::string dot;
};

ChainsReport chains_query(const Dtd& d, const Query& q, std::optional<int> k_opt,
                          bool materialize);
ChainsReport chains_update(const Dtd& d, const Update& u, std::optional<int> k_opt,
                           bool materialize);

std::string chains_json(const ChainsReport& r);
std::string chains_text(const ChainsReport& r);

} // namespace xqui
