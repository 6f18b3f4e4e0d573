#include "xqui/ast.hpp"
#include "xqui/diag.hpp"

#include <cctype>
#include <optional>

namespace xqui {

namespace {

QueryPtr mk(Query::Kind k) {
    auto q = std::make_shared<Query>();
    q->kind = k;
    return q;
}

QueryPtr mk_empty() { return mk(Query::Kind::Empty); }

QueryPtr mk_step(std::string var, Axis axis, NodeTest test) {
    auto q = mk(Query::Kind::Step);
    q->var = std::move(var);
    q->axis = axis;
    q->test = std::move(test);
    return q;
}

QueryPtr mk_for(std::string var, QueryPtr in, QueryPtr body) {
    auto q = mk(Query::Kind::For);
    q->var = std::move(var);
    q->a = std::move(in);
    q->b = std::move(body);
    return q;
}

// --------------------------------------------------------------------------
// Character cursor with save/restore; understands XQuery (: comments :).

struct Cursor {
    std::string_view s;
    size_t i = 0;
    int line = 1, col = 1;

    struct State {
        size_t i;
        int line, col;
    };
    State state() const { return {i, line, col}; }
    void restore(State st) {
        i = st.i;
        line = st.line;
        col = st.col;
    }

    bool eof() const { return i >= s.size(); }
    char peek(size_t ahead = 0) const { return i + ahead < s.size() ? s[i + ahead] : '\0'; }
    char get() {
        char c = s[i++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }

    void skip_ws() {
        while (!eof()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                get();
            } else if (peek() == '(' && peek(1) == ':') {
                int depth = 0;
                while (!eof()) {
                    if (peek() == '(' && peek(1) == ':') {
                        get();
                        get();
                        ++depth;
                    } else if (peek() == ':' && peek(1) == ')') {
                        get();
                        get();
                        if (--depth == 0) break;
                    } else {
                        get();
                    }
                }
                if (depth != 0) fail("unterminated comment");
            } else {
                break;
            }
        }
    }

    static bool name_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    }

    // Reads a name without skipping whitespace first.
    std::string name() {
        if (!name_start(peek())) {
            if (std::isdigit(static_cast<unsigned char>(peek())))
                fail("numeric literals are not supported");
            fail("expected a name");
        }
        std::string out;
        while (!eof() && name_char(peek())) out += get();
        return out;
    }

    // Peeks whether a whole word follows (with word boundary).
    bool at_word(std::string_view w) const {
        if (s.compare(i, w.size(), w) != 0) return false;
        char after = i + w.size() < s.size() ? s[i + w.size()] : '\0';
        return !name_char(after);
    }

    bool eat_word(std::string_view w) {
        if (!at_word(w)) return false;
        for (size_t n = 0; n < w.size(); ++n) get();
        return true;
    }

    bool eat(char c) {
        if (peek() != c) return false;
        get();
        return true;
    }

    bool eat(std::string_view sym) {
        if (s.compare(i, sym.size(), sym) != 0) return false;
        for (size_t n = 0; n < sym.size(); ++n) get();
        return true;
    }

    void expect(char c, const char* what) {
        if (!eat(c)) fail(std::string("expected '") + c + "' " + what);
    }
};

// --------------------------------------------------------------------------
// Recursive-descent parser producing core forms directly.

class ExprParser {
public:
    explicit ExprParser(std::string_view text) : cur{text} {}

    QueryPtr parse_query_top() {
        QueryPtr q = query();
        cur.skip_ws();
        if (!cur.eof()) cur.fail("trailing content after query");
        return q;
    }

    UpdatePtr parse_update_top() {
        UpdatePtr u = update();
        cur.skip_ws();
        if (!cur.eof()) cur.fail("trailing content after update");
        return u;
    }

private:
    Cursor cur;
    int fresh_n_ = 0;
    std::vector<std::string> ctx_stack_{kRootVar}; // context var for relative paths

    std::string fresh() { return "#" + std::to_string(fresh_n_++); }
    const std::string& ctx_var() const { return ctx_stack_.back(); }

    // ---- queries ----

    // query := single (',' single)*
    QueryPtr query() {
        QueryPtr q = single();
        cur.skip_ws();
        while (cur.eat(',')) {
            QueryPtr rhs = single();
            auto seq = mk(Query::Kind::Seq);
            seq->a = std::move(q);
            seq->b = std::move(rhs);
            q = std::move(seq);
            cur.skip_ws();
        }
        return q;
    }

    QueryPtr single() {
        cur.skip_ws();
        if (cur.at_word("for") && ahead_is_var_binding("for")) return for_expr();
        if (cur.at_word("let") && ahead_is_var_binding("let")) return let_expr();
        if (cur.at_word("if") && ahead_is_paren("if")) return if_expr();
        return path_expr();
    }

    bool ahead_is_var_binding(std::string_view kw) {
        auto st = cur.state();
        cur.eat_word(kw);
        cur.skip_ws();
        bool ok = cur.peek() == '$';
        cur.restore(st);
        return ok;
    }

    bool ahead_is_paren(std::string_view kw) {
        auto st = cur.state();
        cur.eat_word(kw);
        cur.skip_ws();
        bool ok = cur.peek() == '(' && cur.peek(1) != ':';
        cur.restore(st);
        return ok;
    }

    QueryPtr for_expr() {
        cur.eat_word("for");
        cur.skip_ws();
        cur.expect('$', "before variable name");
        std::string v = cur.name();
        cur.skip_ws();
        if (!cur.eat_word("in")) cur.fail("expected 'in'");
        QueryPtr src = single();
        cur.skip_ws();
        if (!cur.eat_word("return")) cur.fail("expected 'return'");
        QueryPtr body = single();
        return mk_for(std::move(v), std::move(src), std::move(body));
    }

    QueryPtr let_expr() {
        cur.eat_word("let");
        cur.skip_ws();
        cur.expect('$', "before variable name");
        std::string v = cur.name();
        cur.skip_ws();
        if (!cur.eat(":=")) cur.fail("expected ':='");
        QueryPtr def = single();
        cur.skip_ws();
        if (!cur.eat_word("return")) cur.fail("expected 'return'");
        QueryPtr body = single();
        auto q = mk(Query::Kind::Let);
        q->var = std::move(v);
        q->a = std::move(def);
        q->b = std::move(body);
        return q;
    }

    QueryPtr if_expr() {
        cur.eat_word("if");
        cur.skip_ws();
        cur.expect('(', "after 'if'");
        QueryPtr cond = query();
        cur.skip_ws();
        cur.expect(')', "after condition");
        cur.skip_ws();
        if (!cur.eat_word("then")) cur.fail("expected 'then'");
        QueryPtr then = single();
        cur.skip_ws();
        if (!cur.eat_word("else")) cur.fail("expected 'else'");
        QueryPtr els = single();
        auto q = mk(Query::Kind::If);
        q->a = std::move(cond);
        q->b = std::move(then);
        q->c = std::move(els);
        return q;
    }

    // A path-or-primary expression.
    QueryPtr path_expr() {
        cur.skip_ws();
        char c = cur.peek();
        if (c == '\'' || c == '"') return string_lit();
        if (c == '<') return elem_ctor();
        if (c == '(') {
            cur.get();
            cur.skip_ws();
            if (cur.eat(')')) return mk_empty();
            QueryPtr q = query();
            cur.skip_ws();
            cur.expect(')', "to close parenthesized expression");
            return q;
        }
        return path();
    }

    QueryPtr string_lit() {
        char quote = cur.get();
        std::string val;
        while (!cur.eof() && cur.peek() != quote) val += cur.get();
        if (cur.eof()) cur.fail("unterminated string literal");
        cur.get();
        auto q = mk(Query::Kind::Str);
        q->str = std::move(val);
        return q;
    }

    // Accumulates a path: first step applies directly to the start variable,
    // later steps and predicates wrap the accumulated expression in a For with
    // a fresh variable.
    struct PathAcc {
        QueryPtr expr;   // null while the path is still just a variable
        std::string var; // meaningful only while expr is null
    };

    void apply_step(PathAcc& acc, Axis axis, NodeTest test) {
        if (!acc.expr) {
            acc.expr = mk_step(acc.var, axis, std::move(test));
        } else {
            std::string f = fresh();
            acc.expr = mk_for(f, std::move(acc.expr), mk_step(f, axis, std::move(test)));
        }
    }

    QueryPtr path() {
        PathAcc acc;
        cur.skip_ws();
        if (cur.peek() == '$') {
            cur.get();
            acc.var = cur.name();
            cur.skip_ws();
            if (cur.peek() == '[') {
                predicates(acc); // $x[p]: predicate on the bare variable
            } else if (cur.eat("//")) {
                apply_step(acc, Axis::DescendantOrSelf, NodeTest::any());
                step(acc, Axis::Child);
            } else if (cur.eat('/')) {
                step(acc, Axis::Child);
            } else {
                // bare variable reference
                apply_step(acc, Axis::Self, NodeTest::any());
                return acc.expr;
            }
        } else if (cur.peek() == '/') {
            acc.var = kRootVar;
            cur.get();
            if (cur.eat('/')) {
                apply_step(acc, Axis::DescendantOrSelf, NodeTest::any());
                step(acc, Axis::Child);
            } else {
                cur.skip_ws();
                if (!step_starts_here()) {
                    // bare '/': the root node itself
                    apply_step(acc, Axis::Self, NodeTest::any());
                    return acc.expr;
                }
                // '/name' selects the root node when it matches the test
                step(acc, Axis::Self);
            }
        } else if (step_starts_here()) {
            // relative path: anchored at the current context variable
            acc.var = ctx_var();
            step(acc, Axis::Child);
        } else {
            cur.fail("expected expression");
        }
        while (true) {
            cur.skip_ws();
            if (cur.eat("//")) {
                apply_step(acc, Axis::DescendantOrSelf, NodeTest::any());
                step(acc, Axis::Child);
            } else if (cur.eat('/')) {
                step(acc, Axis::Child);
            } else {
                break;
            }
        }
        return acc.expr;
    }

    bool step_starts_here() {
        char c = cur.peek();
        return Cursor::name_start(c) || c == '*' || c == '.' || c == '@';
    }

    // One step (with predicates); default_axis applies when no axis is written.
    void step(PathAcc& acc, Axis default_axis) {
        cur.skip_ws();
        if (cur.peek() == '@') cur.fail("attributes are not supported");
        Axis axis = default_axis;
        NodeTest test = NodeTest::any();

        if (cur.peek() == '.') {
            cur.get();
            if (cur.eat('.')) {
                axis = Axis::Parent;
            } else {
                axis = Axis::Self;
            }
        } else if (cur.eat('*')) {
            // wildcard: any label
            test = NodeTest::any();
        } else {
            auto st = cur.state();
            std::string word = cur.name();
            if (cur.eat("::")) {
                std::optional<Axis> ax = axis_by_name(word);
                if (!ax) {
                    // following/preceding expand to three primitive steps
                    if (word == "following" || word == "preceding") {
                        Axis sib = word == "following" ? Axis::FollowingSibling
                                                       : Axis::PrecedingSibling;
                        NodeTest t = node_test();
                        apply_step(acc, Axis::AncestorOrSelf, NodeTest::any());
                        apply_step(acc, sib, NodeTest::any());
                        apply_step(acc, Axis::DescendantOrSelf, std::move(t));
                        predicates(acc);
                        return;
                    }
                    cur.fail("unknown axis '" + word + "'");
                }
                axis = *ax;
                test = node_test();
            } else {
                cur.restore(st);
                test = node_test();
            }
        }
        apply_step(acc, axis, std::move(test));
        predicates(acc);
    }

    static std::optional<Axis> axis_by_name(const std::string& w) {
        if (w == "self") return Axis::Self;
        if (w == "child") return Axis::Child;
        if (w == "descendant") return Axis::Descendant;
        if (w == "descendant-or-self") return Axis::DescendantOrSelf;
        if (w == "parent") return Axis::Parent;
        if (w == "ancestor") return Axis::Ancestor;
        if (w == "ancestor-or-self") return Axis::AncestorOrSelf;
        if (w == "following-sibling") return Axis::FollowingSibling;
        if (w == "preceding-sibling") return Axis::PrecedingSibling;
        return std::nullopt;
    }

    NodeTest node_test() {
        cur.skip_ws();
        if (cur.eat('*')) return NodeTest::any();
        std::string word = cur.name();
        auto st = cur.state();
        cur.skip_ws();
        if (cur.eat('(')) {
            cur.skip_ws();
            cur.expect(')', "after node test");
            if (word == "node") return NodeTest::any();
            if (word == "text") return NodeTest::text();
            cur.fail("unsupported node test '" + word + "()'");
        }
        cur.restore(st);
        return NodeTest::name(std::move(word));
    }

    void predicates(PathAcc& acc) {
        cur.skip_ws();
        while (cur.peek() == '[') {
            cur.get();
            std::string f = fresh();
            ctx_stack_.push_back(f);
            QueryPtr cond = query();
            ctx_stack_.pop_back();
            cur.skip_ws();
            cur.expect(']', "to close predicate");
            if (!acc.expr) apply_step(acc, Axis::Self, NodeTest::any());
            auto iff = mk(Query::Kind::If);
            iff->a = std::move(cond);
            iff->b = mk_step(f, Axis::Self, NodeTest::any());
            iff->c = mk_empty();
            acc.expr = mk_for(f, std::move(acc.expr), std::move(iff));
            cur.skip_ws();
        }
    }

    // ---- element constructors ----

    QueryPtr elem_ctor() {
        cur.expect('<', "at element constructor");
        std::string tag = cur.name();
        cur.skip_ws();
        if (cur.eat("/>")) {
            auto q = mk(Query::Kind::Elem);
            q->tag = std::move(tag);
            q->a = mk_empty();
            return q;
        }
        cur.expect('>', "after constructor tag");
        std::vector<QueryPtr> items;
        std::string textbuf;
        auto flush_text = [&]() {
            bool all_space = true;
            for (char c : textbuf)
                if (!std::isspace(static_cast<unsigned char>(c))) all_space = false;
            if (!textbuf.empty() && !all_space) {
                auto s = mk(Query::Kind::Str);
                s->str = textbuf;
                items.push_back(std::move(s));
            }
            textbuf.clear();
        };
        while (true) {
            if (cur.eof()) cur.fail("unterminated element constructor <" + tag + ">");
            if (cur.peek() == '<') {
                if (cur.peek(1) == '/') {
                    flush_text();
                    cur.get();
                    cur.get();
                    std::string close = cur.name();
                    if (close != tag)
                        cur.fail("mismatched closing tag </" + close + "> for <" + tag + ">");
                    cur.skip_ws();
                    cur.expect('>', "to close constructor");
                    break;
                }
                flush_text();
                items.push_back(elem_ctor());
            } else if (cur.peek() == '{') {
                flush_text();
                cur.get();
                items.push_back(query());
                cur.skip_ws();
                cur.expect('}', "to close enclosed expression");
            } else if (cur.peek() == '&') {
                cur.get();
                textbuf += entity();
            } else {
                textbuf += cur.get();
            }
        }
        QueryPtr content;
        if (items.empty()) {
            content = mk_empty();
        } else {
            content = items.back();
            for (size_t n = items.size() - 1; n-- > 0;) {
                auto seq = mk(Query::Kind::Seq);
                seq->a = items[n];
                seq->b = std::move(content);
                content = std::move(seq);
            }
        }
        auto q = mk(Query::Kind::Elem);
        q->tag = std::move(tag);
        q->a = std::move(content);
        return q;
    }

    std::string entity() {
        std::string ref;
        while (!cur.eof() && cur.peek() != ';') ref += cur.get();
        if (cur.eof()) cur.fail("unterminated entity reference");
        cur.get();
        if (ref == "amp") return "&";
        if (ref == "lt") return "<";
        if (ref == "gt") return ">";
        if (ref == "quot") return "\"";
        if (ref == "apos") return "'";
        cur.fail("unknown entity &" + ref + ";");
    }

    // ---- updates ----

    UpdatePtr update() {
        UpdatePtr u = usingle();
        cur.skip_ws();
        while (cur.eat(',')) {
            UpdatePtr rhs = usingle();
            auto seq = std::make_shared<Update>();
            seq->kind = Update::Kind::Seq;
            seq->u1 = std::move(u);
            seq->u2 = std::move(rhs);
            u = std::move(seq);
            cur.skip_ws();
        }
        return u;
    }

    UpdatePtr usingle() {
        cur.skip_ws();
        auto u = std::make_shared<Update>();
        if (cur.at_word("for") && ahead_is_var_binding("for")) {
            cur.eat_word("for");
            cur.skip_ws();
            cur.expect('$', "before variable name");
            u->kind = Update::Kind::For;
            u->var = cur.name();
            cur.skip_ws();
            if (!cur.eat_word("in")) cur.fail("expected 'in'");
            u->q0 = single();
            cur.skip_ws();
            if (!cur.eat_word("return")) cur.fail("expected 'return'");
            u->u1 = usingle();
            return u;
        }
        if (cur.at_word("let") && ahead_is_var_binding("let")) {
            cur.eat_word("let");
            cur.skip_ws();
            cur.expect('$', "before variable name");
            u->kind = Update::Kind::Let;
            u->var = cur.name();
            cur.skip_ws();
            if (!cur.eat(":=")) cur.fail("expected ':='");
            u->q0 = single();
            cur.skip_ws();
            if (!cur.eat_word("return")) cur.fail("expected 'return'");
            u->u1 = usingle();
            return u;
        }
        if (cur.at_word("if") && ahead_is_paren("if")) {
            cur.eat_word("if");
            cur.skip_ws();
            cur.expect('(', "after 'if'");
            u->kind = Update::Kind::If;
            u->q0 = query();
            cur.skip_ws();
            cur.expect(')', "after condition");
            cur.skip_ws();
            if (!cur.eat_word("then")) cur.fail("expected 'then'");
            u->u1 = usingle();
            cur.skip_ws();
            if (!cur.eat_word("else")) cur.fail("expected 'else'");
            u->u2 = usingle();
            return u;
        }
        if (cur.eat_word("delete")) {
            cur.skip_ws();
            if (!cur.eat_word("nodes")) cur.eat_word("node");
            u->kind = Update::Kind::Delete;
            u->q0 = single();
            return u;
        }
        if (cur.eat_word("rename")) {
            cur.skip_ws();
            cur.eat_word("node");
            u->kind = Update::Kind::Rename;
            u->q0 = single();
            cur.skip_ws();
            if (!cur.eat_word("as")) cur.fail("expected 'as'");
            cur.skip_ws();
            u->tag = cur.name();
            return u;
        }
        if (cur.eat_word("insert")) {
            cur.skip_ws();
            if (!cur.eat_word("nodes")) cur.eat_word("node");
            u->kind = Update::Kind::Insert;
            u->q1 = single();
            cur.skip_ws();
            if (cur.eat_word("into")) {
                u->pos = InsertPos::Into;
            } else if (cur.eat_word("as")) {
                cur.skip_ws();
                if (cur.eat_word("first"))
                    u->pos = InsertPos::IntoFirst;
                else if (cur.eat_word("last"))
                    u->pos = InsertPos::IntoLast;
                else
                    cur.fail("expected 'first' or 'last'");
                cur.skip_ws();
                if (!cur.eat_word("into")) cur.fail("expected 'into'");
            } else if (cur.eat_word("before")) {
                u->pos = InsertPos::Before;
            } else if (cur.eat_word("after")) {
                u->pos = InsertPos::After;
            } else {
                cur.fail("expected 'into', 'as first into', 'as last into', 'before' or 'after'");
            }
            u->q0 = single();
            return u;
        }
        if (cur.eat_word("replace")) {
            cur.skip_ws();
            cur.eat_word("node");
            u->kind = Update::Kind::Replace;
            u->q0 = single();
            cur.skip_ws();
            if (!cur.eat_word("with")) cur.fail("expected 'with'");
            u->q1 = single();
            return u;
        }
        if (cur.peek() == '(') {
            cur.get();
            cur.skip_ws();
            if (cur.eat(')')) {
                u->kind = Update::Kind::Nop;
                return u;
            }
            UpdatePtr inner = update();
            cur.skip_ws();
            cur.expect(')', "to close parenthesized update");
            return inner;
        }
        cur.fail("expected an update expression");
    }
};

// --------------------------------------------------------------------------
// Id assignment (preorder; subtree = contiguous range)

void number(Query& q, int& next) {
    q.id = next++;
    if (q.a) number(*q.a, next);
    if (q.b) number(*q.b, next);
    if (q.c) number(*q.c, next);
    q.id_end = next;
}

void number(Update& u, int& next) {
    u.id = next++;
    if (u.q0) number(*u.q0, next);
    if (u.q1) number(*u.q1, next);
    if (u.u1) number(*u.u1, next);
    if (u.u2) number(*u.u2, next);
    u.id_end = next;
}

} // namespace

QueryPtr parse_query(std::string_view text) {
    ExprParser p(text);
    QueryPtr q = p.parse_query_top();
    int next = 0;
    number(*q, next);
    return q;
}

UpdatePtr parse_update(std::string_view text) {
    ExprParser p(text);
    UpdatePtr u = p.parse_update_top();
    int next = 0;
    number(*u, next);
    return u;
}

} // namespace xqui
