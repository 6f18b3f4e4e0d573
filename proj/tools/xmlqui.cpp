// Command line front end: static independence analysis, chain inspection,
// reference evaluation, dynamic verification, and benchmarks.

#include "CLI11.hpp"

#include "xqui/bench.hpp"
#include "xqui/diag.hpp"
#include "xqui/driver.hpp"
#include "xqui/eval.hpp"
#include "xqui/verify.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw xqui::Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct SchemaArgs {
    std::string path;
    std::string root; // optional override; default: first declared element
};

void add_schema(CLI::App* cmd, SchemaArgs& s) {
    cmd->add_option("--schema", s.path, "DTD file")->required();
    cmd->add_option("--root", s.root, "root element (default: first declared)");
}

xqui::Dtd load_schema(const SchemaArgs& s) {
    std::optional<std::string> root;
    if (!s.root.empty())
        root = s.root;
    return xqui::parse_dtd(slurp(s.path), root);
}

int run_analyze(const SchemaArgs& schema, const std::string& qpath,
                const std::string& upath, std::optional<int> k,
                const std::string& format) {
    xqui::Dtd d = load_schema(schema);
    xqui::QueryPtr q = xqui::parse_query(slurp(qpath));
    xqui::UpdatePtr u = xqui::parse_update(slurp(upath));

    xqui::AnalyzeOptions opt;
    opt.k = k;
    xqui::AnalyzeReport rep = xqui::analyze_pair(d, *q, *u, opt);

    std::cout << (format == "json" ? xqui::report_json(rep)
                                   : xqui::report_text(rep));
    return rep.verdict == xqui::Verdict::Independent ? 0 : 1;
}

int run_chains(const SchemaArgs& schema, const std::string& epath,
               const std::string& role, std::optional<int> k,
               const std::string& format, bool materialize) {
    xqui::Dtd d = load_schema(schema);
    std::string text = slurp(epath);

    xqui::ChainsReport rep;
    if (role == "query") {
        xqui::QueryPtr q = xqui::parse_query(text);
        rep = xqui::chains_query(d, *q, k, materialize);
    } else {
        xqui::UpdatePtr u = xqui::parse_update(text);
        rep = xqui::chains_update(d, *u, k, materialize);
    }

    if (format == "dot")
        std::cout << rep.dot;
    else if (format == "json")
        std::cout << xqui::chains_json(rep);
    else
        std::cout << xqui::chains_text(rep);
    return 0;
}

int run_eval(const std::string& dpath, const std::string& qpath,
             const std::string& upath) {
    xqui::Tree t = xqui::parse_document(slurp(dpath));
    if (!qpath.empty()) {
        xqui::QueryPtr q = xqui::parse_query(slurp(qpath));
        xqui::NodeSeq out = xqui::eval_query(*q, t.store, t.root);
        std::cout << xqui::serialize_forest(t.store, out) << "\n";
    } else {
        xqui::UpdatePtr u = xqui::parse_update(slurp(upath));
        auto upl = xqui::build_upl(*u, t.store, t.root);
        xqui::apply_upl(t.store, upl);
        std::cout << xqui::serialize(t.store, t.root) << "\n";
    }
    return 0;
}

int run_verify(const SchemaArgs& schema, const std::string& qpath,
               const std::string& upath, const xqui::VerifyOptions& opt,
               const std::string& format) {
    xqui::Dtd d = load_schema(schema);
    xqui::QueryPtr q = xqui::parse_query(slurp(qpath));
    xqui::UpdatePtr u = xqui::parse_update(slurp(upath));

    xqui::VerifyReport rep = xqui::verify_pair(d, *q, *u, opt);
    std::cout << (format == "json" ? xqui::verify_json(rep)
                                   : xqui::verify_text(rep));
    return rep.sound() && rep.properties_ok() ? 0 : 1;
}

int run_bench(const std::string& family, const std::string& format) {
    if (family == "paper") {
        auto pairs = xqui::bench_pairs(&std::cerr);
        std::cout << (format == "json" ? xqui::pairs_json(pairs)
                                       : xqui::pairs_text(pairs));
    } else {
        xqui::BenchReport rep = xqui::bench_recursive(&std::cerr);
        std::cout << (format == "json" ? xqui::bench_json(rep)
                                       : xqui::bench_text(rep));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"xmlqui — schema-aware query/update independence analyzer"};
    app.require_subcommand(1);

    std::string format = "text";
    std::optional<int> k;

    // analyze
    SchemaArgs a_schema;
    std::string a_query, a_update;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "decide independence of a query/update pair");
    add_schema(analyze, a_schema);
    analyze->add_option("--query", a_query, "query file")->required();
    analyze->add_option("--update", a_update, "update file")->required();
    analyze->add_option("--k", k, "occurrence bound override");
    analyze->add_option("--format", format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // chains
    SchemaArgs c_schema;
    std::string c_expr, c_role = "query";
    bool c_mat = false;
    CLI::App* chains =
        app.add_subcommand("chains", "show inferred chain sets for one expression");
    add_schema(chains, c_schema);
    chains->add_option("--expr", c_expr, "expression file")->required();
    chains->add_option("--role", c_role, "query|update")
        ->required()
        ->check(CLI::IsMember({"query", "update"}));
    chains->add_option("--k", k, "occurrence bound override");
    chains->add_option("--format", format, "text|dot|json")
        ->check(CLI::IsMember({"text", "dot", "json"}));
    chains->add_flag("--materialize", c_mat, "read explicit chains off the graph");

    // eval
    std::string e_doc, e_query, e_update;
    CLI::App* eval =
        app.add_subcommand("eval", "run the reference evaluator on a document");
    eval->add_option("--doc", e_doc, "document file")->required();
    CLI::Option* eq = eval->add_option("--query", e_query, "query file");
    CLI::Option* eu = eval->add_option("--update", e_update, "update file");
    eq->excludes(eu);

    // verify
    SchemaArgs v_schema;
    std::string v_query, v_update;
    xqui::VerifyOptions vopt;
    CLI::App* verify = app.add_subcommand(
        "verify", "cross-check the static verdict against exhaustive evaluation");
    add_schema(verify, v_schema);
    verify->add_option("--query", v_query, "query file")->required();
    verify->add_option("--update", v_update, "update file")->required();
    verify->add_option("--max-depth", vopt.max_depth, "document depth bound");
    verify->add_option("--max-repeat", vopt.max_repeat,
                       "max occurrences of a label per sibling list");
    verify->add_option("--k", k, "occurrence bound override");
    verify->add_option("--threads", vopt.threads,
                       "worker threads (default: XMLQUI_THREADS or hardware)");
    verify->add_flag("!--no-properties", vopt.check_properties,
                     "skip projection/typing property checks");
    verify->add_option("--format", format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // bench
    std::string b_family = "r";
    CLI::App* bench = app.add_subcommand("bench", "timing benchmarks");
    bench->add_option("--family", b_family, "r|paper")
        ->check(CLI::IsMember({"r", "paper"}));
    bench->add_option("--format", format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze)
            return run_analyze(a_schema, a_query, a_update, k, format);
        if (*chains)
            return run_chains(c_schema, c_expr, c_role, k, format, c_mat);
        if (*eval) {
            if (e_query.empty() == e_update.empty())
                throw xqui::Error("eval needs exactly one of --query/--update");
            return run_eval(e_doc, e_query, e_update);
        }
        if (*verify) {
            vopt.k = k;
            return run_verify(v_schema, v_query, v_update, vopt, format);
        }
        if (*bench)
            return run_bench(b_family, format);
    } catch (const xqui::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
