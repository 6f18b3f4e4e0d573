#include "xqui/driver.hpp"

#include "xqui/diag.hpp"
#include "xqui/infer.hpp"
#include "xqui/kbound.hpp"

#include "json.hpp"

#include <chrono>
#include <sstream>

namespace xqui {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void collect_sets(Materializer& mq, Materializer& mu, const QInf& qi, const UInf& ui,
                  std::set<Chain>& r, std::set<Chain>& v, std::set<Chain>& vc,
                  std::set<std::pair<Chain, Chain>>& u) {
    for (const auto& e : qi.returns) {
        const auto& cs = mq.mat(e);
        r.insert(cs.begin(), cs.end());
    }
    for (const UsedEnd& ue : qi.used) {
        const auto& cs = mq.mat(ue.e);
        auto& dst = ue.closed ? vc : v;
        dst.insert(cs.begin(), cs.end());
    }
    for (const UpdEnd& ue : ui.upds) {
        auto cs = mu.mat_upd(ue);
        u.insert(cs.begin(), cs.end());
    }
}

nlohmann::json chain_json(const Chain& c) { return to_string(c); }

nlohmann::json chains_array(const std::set<Chain>& cs) {
    nlohmann::json a = nlohmann::json::array();
    for (const Chain& c : cs) a.push_back(chain_json(c));
    return a;
}

nlohmann::json upd_array(const std::set<std::pair<Chain, Chain>>& us) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [p, s] : us)
        a.push_back({{"prefix", to_string(p)}, {"suffix", to_string(s)}});
    return a;
}

void print_chains(std::ostream& os, const char* title, const std::set<Chain>& cs) {
    if (cs.empty()) return;
    os << title << ":\n";
    for (const Chain& c : cs) os << "  " << to_string(c) << "\n";
}

void print_upd(std::ostream& os, const std::set<std::pair<Chain, Chain>>& us) {
    if (us.empty()) return;
    os << "update chains (prefix : suffix):\n";
    for (const auto& [p, s] : us) os << "  " << to_string(p) << " : " << to_string(s) << "\n";
}

} // namespace

const char* route_name(Route r) {
    switch (r) {
    case Route::Graph: return "graph";
    case Route::Materialized: return "materialized";
    case Route::Both: return "both";
    }
    return "?";
}

AnalyzeReport analyze_pair(const Dtd& d, const Query& q, const Update& u,
                           const AnalyzeOptions& opt) {
    if (!quasi_closed(q)) throw Error("query must be quasi-closed (free variables beyond $root)");
    if (!quasi_closed(u)) throw Error("update must be quasi-closed (free variables beyond $root)");

    AnalyzeReport rep;
    rep.k_q = k_of(q, d).k();
    rep.k_u = k_of(u, d).k();
    rep.k = opt.k ? *opt.k : std::max(1, rep.k_q + rep.k_u);
    if (rep.k < 1) throw Error("chain bound k must be >= 1");

    auto t0 = Clock::now();
    Inference iq(d, rep.k, q.id_end);
    QInf qi = iq.infer_query(q);
    rep.timings.infer_q_ms = ms_since(t0);

    t0 = Clock::now();
    Inference iu(d, rep.k, u.id_end);
    UInf ui = iu.infer_update(u);
    rep.timings.infer_u_ms = ms_since(t0);

    rep.graph_q = {static_cast<int>(iq.graph().nodes().size()),
                   static_cast<int>(iq.graph().edges().size())};
    rep.graph_u = {static_cast<int>(iu.graph().nodes().size()),
                   static_cast<int>(iu.graph().edges().size())};

    Materializer mq(iq.graph()), mu(iu.graph());

    t0 = Clock::now();
    CheckResult cr;
    switch (opt.route) {
    case Route::Materialized:
        cr = check_materialized(mq, mu, qi, ui, opt.max_witnesses);
        break;
    case Route::Graph:
        cr = check_cdag(iq.graph(), iu.graph(), qi, ui, opt.max_witnesses);
        break;
    case Route::Both: {
        cr = check_materialized(mq, mu, qi, ui, opt.max_witnesses);
        CheckResult cg = check_cdag(iq.graph(), iu.graph(), qi, ui, opt.max_witnesses);
        rep.routes_agree = cg.verdict == cr.verdict;
        break;
    }
    }
    rep.timings.check_ms = ms_since(t0);
    rep.verdict = cr.verdict;
    rep.witnesses = std::move(cr.witnesses);

    if (opt.with_chains)
        collect_sets(mq, mu, qi, ui, rep.returns, rep.used, rep.used_closed, rep.upd);
    return rep;
}

std::string report_text(const AnalyzeReport& r) {
    std::ostringstream os;
    os << "verdict: " << verdict_name(r.verdict) << "\n";
    os << "k: " << r.k << " (query " << r.k_q << ", update " << r.k_u << ")\n";
    if (!r.routes_agree) os << "WARNING: check routes disagree (internal inconsistency)\n";
    print_chains(os, "returned", r.returns);
    print_chains(os, "used", r.used);
    print_chains(os, "used (subtree-closed)", r.used_closed);
    print_upd(os, r.upd);
    if (!r.witnesses.empty()) {
        os << "conflicts:\n";
        for (const Witness& w : r.witnesses) os << "  " << w.to_string() << "\n";
    }
    return os.str();
}

std::string report_json(const AnalyzeReport& r) {
    nlohmann::json j;
    j["verdict"] = verdict_name(r.verdict);
    j["k"] = r.k;
    j["k_query"] = r.k_q;
    j["k_update"] = r.k_u;
    j["routes_agree"] = r.routes_agree;
    j["returned"] = chains_array(r.returns);
    j["used"] = chains_array(r.used);
    j["used_closed"] = chains_array(r.used_closed);
    j["update"] = upd_array(r.upd);
    nlohmann::json ws = nlohmann::json::array();
    for (const Witness& w : r.witnesses)
        ws.push_back({{"kind", witness_kind_name(w.kind)},
                      {"query", to_string(w.query_chain)},
                      {"update_prefix", to_string(w.upd_prefix)},
                      {"update_suffix", to_string(w.upd_suffix)}});
    j["conflicts"] = ws;
    j["graph"] = {{"query", {{"nodes", r.graph_q.nodes}, {"edges", r.graph_q.edges}}},
                  {"update", {{"nodes", r.graph_u.nodes}, {"edges", r.graph_u.edges}}}};
    j["timings_ms"] = {{"infer_query", r.timings.infer_q_ms},
                       {"infer_update", r.timings.infer_u_ms},
                       {"check", r.timings.check_ms}};
    return j.dump(2);
}

ChainsReport chains_query(const Dtd& d, const Query& q, std::optional<int> k_opt,
                          bool materialize) {
    if (!quasi_closed(q)) throw Error("query must be quasi-closed (free variables beyond $root)");
    ChainsReport rep;
    rep.k = k_opt ? *k_opt : std::max(1, k_of(q, d).k());
    if (rep.k < 1) throw Error("chain bound k must be >= 1");
    Inference inf(d, rep.k, q.id_end);
    QInf qi = inf.infer_query(q);
    rep.graph = {static_cast<int>(inf.graph().nodes().size()),
                 static_cast<int>(inf.graph().edges().size())};
    rep.dot = inf.graph().to_dot();
    if (materialize) {
        rep.materialized = true;
        Materializer m(inf.graph());
        for (const auto& e : qi.returns) {
            const auto& cs = m.mat(e);
            rep.returns.insert(cs.begin(), cs.end());
        }
        for (const UsedEnd& ue : qi.used) {
            const auto& cs = m.mat(ue.e);
            auto& dst = ue.closed ? rep.used_closed : rep.used;
            dst.insert(cs.begin(), cs.end());
        }
        for (const auto& el : qi.elems) rep.elems.push_back(m.mat_elem(el));
    }
    return rep;
}

ChainsReport chains_update(const Dtd& d, const Update& u, std::optional<int> k_opt,
                           bool materialize) {
    if (!quasi_closed(u)) throw Error("update must be quasi-closed (free variables beyond $root)");
    ChainsReport rep;
    rep.update_role = true;
    rep.k = k_opt ? *k_opt : std::max(1, k_of(u, d).k());
    if (rep.k < 1) throw Error("chain bound k must be >= 1");
    Inference inf(d, rep.k, u.id_end);
    UInf ui = inf.infer_update(u);
    rep.graph = {static_cast<int>(inf.graph().nodes().size()),
                 static_cast<int>(inf.graph().edges().size())};
    rep.dot = inf.graph().to_dot();
    if (materialize) {
        rep.materialized = true;
        Materializer m(inf.graph());
        for (const UpdEnd& ue : ui.upds) {
            auto cs = m.mat_upd(ue);
            rep.upd.insert(cs.begin(), cs.end());
        }
    }
    return rep;
}

std::string chains_json(const ChainsReport& r) {
    nlohmann::json j;
    j["role"] = r.update_role ? "update" : "query";
    j["k"] = r.k;
    j["graph"] = {{"nodes", r.graph.nodes}, {"edges", r.graph.edges}};
    if (r.materialized) {
        if (r.update_role) {
            j["update"] = upd_array(r.upd);
        } else {
            j["returned"] = chains_array(r.returns);
            j["used"] = chains_array(r.used);
            j["used_closed"] = chains_array(r.used_closed);
            nlohmann::json es = nlohmann::json::array();
            for (const auto& s : r.elems) es.push_back(chains_array(s));
            j["elements"] = es;
        }
    }
    return j.dump(2);
}

std::string chains_text(const ChainsReport& r) {
    std::ostringstream os;
    os << "role: " << (r.update_role ? "update" : "query") << "\n";
    os << "k: " << r.k << "\n";
    os << "graph: " << r.graph.nodes << " nodes, " << r.graph.edges << " edges\n";
    if (r.materialized) {
        print_chains(os, "returned", r.returns);
        print_chains(os, "used", r.used);
        print_chains(os, "used (subtree-closed)", r.used_closed);
        print_upd(os, r.upd);
        for (size_t i = 0; i < r.elems.size(); ++i)
            print_chains(os, ("element " + std::to_string(i)).c_str(), r.elems[i]);
    }
    return os.str();
}

} // namespace xqui
