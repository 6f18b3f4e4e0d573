#pragma once

#include "xqui/dtd.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace xqui {

// Scalability harness on the recursive family: schema d_n has n mutually
// recursive types a1..an, each with content model (a1|...|an)*, rooted at a1;
// expression e_m is m consecutive /descendant::node() steps.  Cells time
// chain inference (graph construction included) only — no materialization,
// no conflict check.
Dtd make_dn(int n);
std::string make_em(int m);

struct BenchCell {
    int n = 0;
    int m = 0;
    int k = 0;
    double infer_ms = 0;
    int reps = 0;
    int nodes = 0;
    int edges = 0;
};

struct BenchReport {
    std::vector<BenchCell> cells;
};

// The full grid: n in {1,3,5,10}, m in {1,5,10}, k in {m, m+5, m+10}.
// Progress lines go to *progress as cells finish (may be null).
BenchReport bench_recursive(std::ostream* progress = nullptr);

// One cell, repeated until the cumulative time is measurable.
BenchCell bench_cell(int n, int m, int k);

// End-to-end timing of the bundled worked-example pairs (parse, infer both
// sides, check).
struct PairBench {
    std::string name;
    double analyze_ms = 0;
    int reps = 0;
    std::string verdict;
};

std::vector<PairBench> bench_pairs(std::ostream* progress = nullptr);

std::string bench_text(const BenchReport& r);
std::string bench_json(const BenchReport& r);
std::string pairs_text(const std::vector<PairBench>& r);
std::string pairs_json(const std::vector<PairBench>& r);

} // namespace xqui
