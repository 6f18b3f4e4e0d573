#include "xqui/bench.hpp"

#include "xqui/ast.hpp"
#include "xqui/diag.hpp"
#include "xqui/driver.hpp"
#include "xqui/infer.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace xqui {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Repeat f until the cumulative wall time is large enough to trust, then
// return the per-iteration average in ms.
template <class F>
std::pair<double, int> timed(F&& f, double min_ms = 50.0, int max_reps = 1000) {
    int reps = 0;
    auto t0 = Clock::now();
    double total;
    do {
        f();
        ++reps;
        total = ms_since(t0);
    } while (total < min_ms && reps < max_reps);
    return {total / reps, reps};
}

} // namespace

Dtd make_dn(int n) {
    if (n < 1)
        throw Error("make_dn: n must be positive");
    std::string alts;
    for (int i = 1; i <= n; ++i) {
        if (i > 1)
            alts += '|';
        alts += "a" + std::to_string(i);
    }
    std::string text;
    for (int i = 1; i <= n; ++i)
        text += "<!ELEMENT a" + std::to_string(i) + " (" + alts + ")*>\n";
    return parse_dtd(text, "a1");
}

std::string make_em(int m) {
    if (m < 1)
        throw Error("make_em: m must be positive");
    std::string q;
    for (int i = 0; i < m; ++i)
        q += "/descendant::node()";
    return q;
}

BenchCell bench_cell(int n, int m, int k) {
    Dtd d = make_dn(n);
    QueryPtr q = parse_query(make_em(m));

    BenchCell cell;
    cell.n = n;
    cell.m = m;
    cell.k = k;
    {
        // Size probe outside the timed loop.
        Inference inf(d, k, q->id_end);
        inf.infer_query(*q);
        cell.nodes = static_cast<int>(inf.graph().nodes().size());
        cell.edges = static_cast<int>(inf.graph().edges().size());
    }
    auto [avg, reps] = timed([&] {
        Inference inf(d, k, q->id_end);
        inf.infer_query(*q);
    });
    cell.infer_ms = avg;
    cell.reps = reps;
    return cell;
}

BenchReport bench_recursive(std::ostream* progress) {
    BenchReport rep;
    for (int n : {1, 3, 5, 10})
        for (int m : {1, 5, 10})
            for (int k : {m, m + 5, m + 10}) {
                BenchCell c = bench_cell(n, m, k);
                if (progress)
                    *progress << "d" << c.n << " e" << c.m << " k=" << c.k
                              << "  " << c.infer_ms << " ms  (" << c.nodes
                              << " nodes, " << c.edges << " edges)\n";
                rep.cells.push_back(c);
            }
    return rep;
}

std::vector<PairBench> bench_pairs(std::ostream* progress) {
    struct Fixture {
        const char* name;
        const char* dtd;
        const char* root;
        const char* query;
        const char* update;
    };
    // The bundled worked-example pairs, inlined so the benchmark has no file
    // dependencies.
    static const Fixture fixtures[] = {
        {"ancestry-split",
         "<!ELEMENT doc (a|b)*> <!ELEMENT a (c)> <!ELEMENT b (c)> "
         "<!ELEMENT c EMPTY>",
         "doc", "/descendant-or-self::node()/child::a/descendant-or-self::node()/child::c",
         "delete /descendant-or-self::node()/child::b/descendant-or-self::node()/child::c"},
        {"bib-titles-vs-author-insert",
         "<!ELEMENT bib (book)*> <!ELEMENT book (title,author*)> "
         "<!ELEMENT title (#PCDATA)> <!ELEMENT author (first?,second?,email?)> "
         "<!ELEMENT first (#PCDATA)> <!ELEMENT second (#PCDATA)> "
         "<!ELEMENT email (#PCDATA)>",
         "bib", "/descendant-or-self::node()/child::title",
         "for $x in /descendant-or-self::node()/child::book return "
         "insert <author><first>\"f\"</first><second>\"s\"</second></author> into $x"},
        {"descendant-depth-gap",
         "<!ELEMENT r (a)> <!ELEMENT a (b,c,e)*> <!ELEMENT b (f)> "
         "<!ELEMENT c (f)> <!ELEMENT e (f)> <!ELEMENT f (a,g)> "
         "<!ELEMENT g EMPTY>",
         "r", "/descendant::b", "delete /descendant::c"},
    };

    std::vector<PairBench> out;
    for (const Fixture& fx : fixtures) {
        Dtd d = parse_dtd(fx.dtd, fx.root);
        QueryPtr q = parse_query(fx.query);
        UpdatePtr u = parse_update(fx.update);

        PairBench pb;
        pb.name = fx.name;
        AnalyzeReport last;
        auto [avg, reps] = timed([&] { last = analyze_pair(d, *q, *u); });
        pb.analyze_ms = avg;
        pb.reps = reps;
        pb.verdict = verdict_name(last.verdict);
        if (progress)
            *progress << pb.name << "  " << pb.analyze_ms << " ms  "
                      << pb.verdict << "\n";
        out.push_back(std::move(pb));
    }
    return out;
}

std::string bench_text(const BenchReport& r) {
    std::ostringstream os;
    os << "  n   m    k   infer-ms    reps    nodes    edges\n";
    for (const BenchCell& c : r.cells) {
        char line[128];
        std::snprintf(line, sizeof line, "%3d %3d %4d %10.3f %7d %8d %8d\n",
                      c.n, c.m, c.k, c.infer_ms, c.reps, c.nodes, c.edges);
        os << line;
    }
    return os.str();
}

std::string bench_json(const BenchReport& r) {
    nlohmann::json j = nlohmann::json::array();
    for (const BenchCell& c : r.cells)
        j.push_back({{"n", c.n},
                     {"m", c.m},
                     {"k", c.k},
                     {"infer_ms", c.infer_ms},
                     {"reps", c.reps},
                     {"nodes", c.nodes},
                     {"edges", c.edges}});
    return j.dump(2) + "\n";
}

std::string pairs_text(const std::vector<PairBench>& r) {
    std::ostringstream os;
    for (const PairBench& p : r) {
        char line[160];
        std::snprintf(line, sizeof line, "%-28s %10.3f ms  %s\n",
                      p.name.c_str(), p.analyze_ms, p.verdict.c_str());
        os << line;
    }
    return os.str();
}

std::string pairs_json(const std::vector<PairBench>& r) {
    nlohmann::json j = nlohmann::json::array();
    for (const PairBench& p : r)
        j.push_back({{"name", p.name},
                     {"analyze_ms", p.analyze_ms},
                     {"reps", p.reps},
                     {"verdict", p.verdict}});
    return j.dump(2) + "\n";
}

} // namespace xqui
