#include "xqui/verify.hpp"

#include "xqui/diag.hpp"
#include "xqui/driver.hpp"
#include "xqui/eval.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

namespace xqui {

namespace {

// Deepest element-constructor nesting; constructed content can push chains
// this far beyond the document depth.
int elem_depth(const Query& q) {
    int sub = 0;
    for (const QueryPtr& c : {q.a, q.b, q.c})
        if (c) sub = std::max(sub, elem_depth(*c));
    return sub + (q.kind == Query::Kind::Elem ? 1 : 0);
}

int elem_depth(const Update& u) {
    int sub = 0;
    if (u.q0) sub = std::max(sub, elem_depth(*u.q0));
    if (u.q1) sub = std::max(sub, elem_depth(*u.q1));
    if (u.u1) sub = std::max(sub, elem_depth(*u.u1));
    if (u.u2) sub = std::max(sub, elem_depth(*u.u2));
    return sub;
}

int default_threads() {
    if (const char* env = std::getenv("XMLQUI_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

} // namespace

bool projection_property_holds(const Query& q, const Store& doc, Location root,
                               const std::set<Chain>& returns, const std::set<Chain>& used,
                               const std::set<Chain>& used_closed, std::string* why) {
    LocationSet keep{root};
    for (Location l : doc.preorder(root)) {
        Chain c = doc.node_chain(l);
        if (returns.count(c) || used_closed.count(c)) {
            for (Location d2 : doc.preorder(l)) keep.insert(d2);
        } else if (used.count(c)) {
            keep.insert(l);
        }
    }
    std::string full, proj;
    try {
        full = query_value(q, doc, root);
        Tree p = project(doc, root, keep);
        proj = query_value(q, p.store, p.root);
    } catch (const EvalError&) {
        return true; // the query itself does not evaluate; nothing to compare
    }
    if (full == proj) return true;
    if (why) {
        *why = "projection changed the query value\n  full:      " + full +
               "\n  projected: " + proj + "\n  document:  " + serialize(doc, root);
    }
    return false;
}

bool involved_typing_holds(const Update& u, const Store& doc, Location root,
                           const std::set<std::pair<Chain, Chain>>& upd, std::string* why) {
    Store s = doc;
    std::vector<UpdateCommand> upl;
    try {
        upl = build_upl(u, s, root);
    } catch (const EvalError&) {
        return true; // update does not apply to this document
    }

    // Targets are typed against the original document; copied content against
    // the document after application (that is where it acquires a chain).
    std::vector<std::pair<Location, Chain>> target_chains;
    std::vector<Location> content;
    for (const UpdateCommand& cmd : upl) {
        using K = UpdateCommand::Kind;
        if (cmd.kind == K::Del || cmd.kind == K::Ren || cmd.kind == K::Repl)
            target_chains.emplace_back(cmd.target, s.node_chain(cmd.target));
        if (cmd.kind == K::Ins || cmd.kind == K::Repl)
            for (Location c : cmd.content)
                for (Location l : s.preorder(c)) content.push_back(l);
    }
    try {
        apply_upl(s, upl);
    } catch (const EvalError&) {
        return true; // incompatible command list; no effect to type
    }

    auto typed = [&](const Chain& c) {
        for (const auto& [p, sfx] : upd) {
            if (c.size() <= p.size() || c.size() > p.size() + sfx.size()) continue;
            if (!std::equal(p.begin(), p.end(), c.begin())) continue;
            if (std::equal(c.begin() + static_cast<long>(p.size()), c.end(), sfx.begin()))
                return true;
        }
        return false;
    };
    auto fail = [&](Location l, const Chain& c, const char* what) {
        if (why) {
            *why = std::string(what) + " location not typed by any inferred update chain: " +
                   to_string(c) + "\n  document: " + serialize(doc, root);
        }
        (void)l;
        return false;
    };

    for (const auto& [l, c] : target_chains)
        if (!typed(c)) return fail(l, c, "target");
    for (Location l : content) {
        // Content that ended up outside the document (inserted under a node
        // that was itself deleted or replaced) is unreachable afterwards.
        if (s.component_root(l) != root) continue;
        Chain c = s.node_chain(l);
        if (!typed(c)) return fail(l, c, "content");
    }
    return true;
}

VerifyReport verify_pair(const Dtd& d, const Query& q, const Update& u,
                         const VerifyOptions& opt) {
    VerifyReport rep;

    AnalyzeOptions ao;
    ao.k = opt.k;
    ao.route = Route::Both;
    ao.with_chains = false;
    AnalyzeReport ar = analyze_pair(d, q, u, ao);
    rep.verdict = ar.verdict;
    rep.k = ar.k;
    rep.routes_agree = ar.routes_agree;

    // The decision runs at the pair bound; the projection/typing invariants
    // are statements about the inferred chain family, so they are checked at
    // a bound large enough to cover every chain the bounded document space
    // (plus constructed content) can realize.
    std::set<Chain> r, v, vc;
    std::set<std::pair<Chain, Chain>> uset;
    if (opt.check_properties) {
        int kchk = std::max(rep.k, opt.max_depth + elem_depth(u) + elem_depth(q) + 1);
        AnalyzeOptions po;
        po.k = kchk;
        po.route = Route::Materialized;
        po.with_chains = true;
        AnalyzeReport pr = analyze_pair(d, q, u, po);
        r = std::move(pr.returns);
        v = std::move(pr.used);
        vc = std::move(pr.used_closed);
        uset = std::move(pr.upd);
    }

    int nthreads = opt.threads > 0 ? opt.threads : default_threads();

    struct Shared {
        std::mutex mu;
        ValidDocs docs;
        long index = 0;
        explicit Shared(const Dtd& d, int md, int mr) : docs(d, md, mr) {}
    } shared(d, opt.max_depth, opt.max_repeat);

    struct Local {
        long instances = 0, applicable = 0, counterexamples = 0;
        long projection_failures = 0, typing_failures = 0;
        long first_cx_index = -1;
        std::string first_cx;
    };
    std::vector<Local> locals(static_cast<size_t>(nthreads));

    auto worker = [&](Local& loc) {
        for (;;) {
            std::optional<Tree> t;
            long idx;
            {
                std::lock_guard<std::mutex> lk(shared.mu);
                t = shared.docs.next();
                idx = shared.index++;
            }
            if (!t) return;
            loc.instances++;
            bool applicable = true, indep = true;
            try {
                indep = dynamic_independent(q, u, t->store, t->root);
            } catch (const EvalError&) {
                applicable = false;
            }
            if (applicable) {
                loc.applicable++;
                if (!indep) {
                    loc.counterexamples++;
                    if (loc.first_cx_index < 0) {
                        loc.first_cx_index = idx;
                        loc.first_cx = serialize(t->store, t->root);
                    }
                }
            }
            if (opt.check_properties) {
                if (!projection_property_holds(q, t->store, t->root, r, v, vc))
                    loc.projection_failures++;
                if (!involved_typing_holds(u, t->store, t->root, uset))
                    loc.typing_failures++;
            }
        }
    };

    if (nthreads == 1) {
        worker(locals[0]);
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i)
            pool.emplace_back(worker, std::ref(locals[static_cast<size_t>(i)]));
        for (auto& th : pool) th.join();
    }

    long best = -1;
    for (const Local& loc : locals) {
        rep.instances += loc.instances;
        rep.applicable += loc.applicable;
        rep.counterexamples += loc.counterexamples;
        rep.projection_failures += loc.projection_failures;
        rep.typing_failures += loc.typing_failures;
        if (loc.first_cx_index >= 0 && (best < 0 || loc.first_cx_index < best)) {
            best = loc.first_cx_index;
            rep.first_counterexample = loc.first_cx;
        }
    }
    return rep;
}

std::string verify_text(const VerifyReport& r) {
    std::ostringstream os;
    os << "static verdict: " << verdict_name(r.verdict) << " (k=" << r.k << ")\n";
    if (!r.routes_agree) os << "WARNING: check routes disagree (internal inconsistency)\n";
    os << "instances: " << r.instances << " (" << r.applicable << " applicable)\n";
    os << "counterexamples: " << r.counterexamples << "\n";
    if (r.no_applicable()) os << "note: no applicable instance within the bounds\n";
    if (!r.first_counterexample.empty())
        os << "first counterexample: " << r.first_counterexample << "\n";
    if (r.projection_failures || r.typing_failures)
        os << "property failures: projection " << r.projection_failures << ", typing "
           << r.typing_failures << "\n";
    os << "soundness: " << (r.sound() ? "ok" : "VIOLATED") << "\n";
    return os.str();
}

std::string verify_json(const VerifyReport& r) {
    nlohmann::json j;
    j["verdict"] = verdict_name(r.verdict);
    j["k"] = r.k;
    j["routes_agree"] = r.routes_agree;
    j["instances"] = r.instances;
    j["applicable"] = r.applicable;
    j["counterexamples"] = r.counterexamples;
    j["projection_failures"] = r.projection_failures;
    j["typing_failures"] = r.typing_failures;
    j["no_applicable_instance"] = r.no_applicable();
    j["sound"] = r.sound();
    if (!r.first_counterexample.empty()) j["first_counterexample"] = r.first_counterexample;
    return j.dump(2);
}

} // namespace xqui
