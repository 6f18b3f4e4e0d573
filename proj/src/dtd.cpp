#include "xqui/dtd.hpp"
#include "xqui/diag.hpp"

#include <algorithm>
#include <cctype>

namespace xqui {

// --------------------------------------------------------------------------
// ContentModel

std::string ContentModel::to_string() const {
    using K = Kind;
    switch (kind) {
    case K::Empty:
        return "EMPTY";
    case K::Atom:
        return atom.is_text() ? "#PCDATA" : atom.name();
    case K::Concat:
    case K::Alt: {
        std::string sep = kind == K::Concat ? "," : "|";
        std::string out = "(";
        for (size_t i = 0; i < kids.size(); ++i) {
            if (i) out += sep;
            out += kids[i].to_string();
        }
        return out + ")";
    }
    case K::Star:
    case K::Plus:
    case K::Opt: {
        char mod = kind == K::Star ? '*' : kind == K::Plus ? '+' : '?';
        const ContentModel& k = kids[0];
        std::string inner = k.to_string();
        // Atoms need parentheses before a modifier in DTD syntax.
        if (k.kind == K::Atom || k.kind == K::Star || k.kind == K::Plus || k.kind == K::Opt)
            inner = "(" + inner + ")";
        return inner + mod;
    }
    }
    return "?";
}

// --------------------------------------------------------------------------
// Dtd

Dtd::Dtd(std::vector<std::string> tags, std::vector<ContentModel> models, std::string root)
    : tags_(std::move(tags)), models_(std::move(models)), root_(std::move(root)) {
    if (tags_.size() != models_.size())
        throw Error("schema construction: tag/model count mismatch");
    if (tags_.empty())
        throw Error("schema has no element declarations");
    for (size_t i = 0; i < tags_.size(); ++i) {
        if (!index_.emplace(tags_[i], static_cast<int>(i)).second)
            throw Error("duplicate element declaration: " + tags_[i]);
    }
    if (!has_tag(root_))
        throw Error("schema root '" + root_ + "' is not a declared element");
}

int Dtd::tag_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw Error("unknown element tag: " + name);
    return it->second;
}

const ContentModel& Dtd::model_of(const Label& l) const {
    if (l.is_text())
        return text_model_;
    return models_[static_cast<size_t>(tag_index(l.name()))];
}

std::string Dtd::to_string() const {
    std::string out;
    for (size_t i = 0; i < tags_.size(); ++i) {
        const ContentModel& m = models_[i];
        std::string body = m.to_string();
        // <!ELEMENT a EMPTY> but <!ELEMENT a (b,c)>: wrap non-grouped bodies.
        if (m.kind == ContentModel::Kind::Atom)
            body = "(" + body + ")";
        out += "<!ELEMENT " + tags_[i] + " " + body + ">\n";
    }
    return out;
}

// --------------------------------------------------------------------------
// DTD parsing

namespace {

struct Scanner {
    std::string_view s;
    size_t i = 0;
    int line = 1, col = 1;

    bool eof() const { return i >= s.size(); }
    char peek() const { return eof() ? '\0' : s[i]; }

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

    void skip_space() {
        while (!eof()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                get();
            } else if (s.compare(i, 4, "<!--") == 0) {
                size_t end = s.find("-->", i + 4);
                if (end == std::string_view::npos) fail("unterminated comment");
                while (i < end + 3) get();
            } else {
                break;
            }
        }
    }

    bool literal(std::string_view w) {
        if (s.compare(i, w.size(), w) != 0) return false;
        for (size_t n = 0; n < w.size(); ++n) get();
        return true;
    }

    void expect(char c, const char* what) {
        if (peek() != c) fail(std::string("expected '") + c + "' " + what);
        get();
    }

    static bool name_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
    }
    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' ||
               c == '.';
    }

    std::string name() {
        if (!name_start(peek())) fail("expected a name");
        std::string out;
        while (!eof() && name_char(peek())) out += get();
        return out;
    }
};

struct AtomRef {
    std::string name;
    int line, col;
};

struct DtdParser {
    Scanner sc;
    std::vector<AtomRef> refs; // element names used inside content models

    explicit DtdParser(std::string_view text) : sc{text} {}

    // cp ::= (name | '(' group ')') ('?' | '*' | '+')?
    ContentModel cp() {
        ContentModel base;
        sc.skip_space();
        if (sc.peek() == '(') {
            sc.get();
            base = group();
        } else {
            int l = sc.line, c = sc.col;
            std::string n = sc.name();
            refs.push_back({n, l, c});
            base = ContentModel::make_atom(Label::elem(n));
        }
        return modifier(std::move(base));
    }

    ContentModel modifier(ContentModel base) {
        switch (sc.peek()) {
        case '*': sc.get(); return ContentModel::node(ContentModel::Kind::Star, {std::move(base)});
        case '+': sc.get(); return ContentModel::node(ContentModel::Kind::Plus, {std::move(base)});
        case '?': sc.get(); return ContentModel::node(ContentModel::Kind::Opt, {std::move(base)});
        default: return base;
        }
    }

    // group ::= cp (('|' cp)* | (',' cp)*) ')'   -- called after '('
    ContentModel group() {
        std::vector<ContentModel> kids;
        kids.push_back(cp());
        sc.skip_space();
        char sep = '\0';
        while (sc.peek() == '|' || sc.peek() == ',') {
            char c = sc.get();
            if (sep == '\0')
                sep = c;
            else if (c != sep)
                sc.fail("cannot mix ',' and '|' in one group");
            kids.push_back(cp());
            sc.skip_space();
        }
        sc.expect(')', "to close group");
        if (kids.size() == 1) return std::move(kids[0]);
        return ContentModel::node(sep == '|' ? ContentModel::Kind::Alt : ContentModel::Kind::Concat,
                                  std::move(kids));
    }

    // contentspec ::= 'EMPTY' | mixed | children
    ContentModel contentspec() {
        sc.skip_space();
        if (sc.literal("EMPTY")) return ContentModel::empty();
        if (sc.literal("ANY")) sc.fail("content model ANY is not supported");
        if (sc.peek() != '(') sc.fail("expected content model");
        sc.get();
        sc.skip_space();
        if (sc.peek() == '#') return mixed();
        return modifier(group());
    }

    // '(' already consumed; '#PCDATA' ('|' name)* ')' '*'?
    ContentModel mixed() {
        if (!sc.literal("#PCDATA")) sc.fail("expected #PCDATA");
        std::vector<ContentModel> alts;
        alts.push_back(ContentModel::make_atom(Label::text()));
        sc.skip_space();
        bool have_names = false;
        while (sc.peek() == '|') {
            sc.get();
            sc.skip_space();
            int l = sc.line, c = sc.col;
            std::string n = sc.name();
            refs.push_back({n, l, c});
            alts.push_back(ContentModel::make_atom(Label::elem(n)));
            sc.skip_space();
            have_names = true;
        }
        sc.expect(')', "to close mixed content");
        bool starred = sc.peek() == '*';
        if (starred) sc.get();
        if (have_names && !starred) sc.fail("mixed content with names requires ')*'");
        ContentModel body = alts.size() == 1
                                ? std::move(alts[0])
                                : ContentModel::node(ContentModel::Kind::Alt, std::move(alts));
        if (starred) return ContentModel::node(ContentModel::Kind::Star, {std::move(body)});
        // Bare (#PCDATA): character data is optional, so <a/> is valid content.
        return ContentModel::node(ContentModel::Kind::Opt, {std::move(body)});
    }

    void decl(std::vector<std::string>& tags, std::vector<ContentModel>& models) {
        if (!sc.literal("<!")) sc.fail("expected '<!'");
        std::string kw = sc.name();
        if (kw != "ELEMENT") sc.fail("unsupported declaration <!" + kw + ">");
        sc.skip_space();
        std::string tag = sc.name();
        sc.skip_space();
        ContentModel m = contentspec();
        sc.skip_space();
        sc.expect('>', "to close declaration");
        tags.push_back(std::move(tag));
        models.push_back(std::move(m));
    }
};

} // namespace

Dtd parse_dtd(std::string_view text, const std::optional<std::string>& root_override) {
    DtdParser p(text);
    std::vector<std::string> tags;
    std::vector<ContentModel> models;
    p.sc.skip_space();
    while (!p.sc.eof()) {
        p.decl(tags, models);
        p.sc.skip_space();
    }
    if (tags.empty()) throw Error("schema has no element declarations");
    std::string root = root_override.value_or(tags.front());
    Dtd d(std::move(tags), std::move(models), std::move(root));
    for (const AtomRef& r : p.refs) {
        if (!d.has_tag(r.name))
            throw ParseError("element '" + r.name + "' referenced but not declared", r.line, r.col);
    }
    return d;
}

// --------------------------------------------------------------------------
// Chains and the sibling order

std::set<Label> occurring(const ContentModel& m) {
    std::set<Label> out;
    if (m.kind == ContentModel::Kind::Atom) {
        out.insert(m.atom);
    } else {
        for (const ContentModel& k : m.kids) {
            auto sub = occurring(k);
            out.insert(sub.begin(), sub.end());
        }
    }
    return out;
}

bool reaches(const Dtd& d, const Label& a, const Label& b) {
    if (a.is_text()) return false;
    return occurring(d.model_of(a)).count(b) != 0;
}

bool is_chain(const Dtd& d, const Chain& c) {
    if (c.empty()) return false;
    if (c.front() != d.root_label()) return false;
    for (size_t i = 0; i + 1 < c.size(); ++i)
        if (!reaches(d, c[i], c[i + 1])) return false;
    return true;
}

bool is_k_chain(const Dtd& d, const Chain& c, int k) {
    if (!is_chain(d, c)) return false;
    std::map<Label, int> counts;
    for (const Label& l : c)
        if (++counts[l] > k) return false;
    return true;
}

std::set<std::pair<Label, Label>> sibling_order(const ContentModel& m) {
    using K = ContentModel::Kind;
    std::set<std::pair<Label, Label>> out;
    auto cross = [&out](const std::set<Label>& a, const std::set<Label>& b) {
        for (const Label& x : a)
            for (const Label& y : b) out.emplace(x, y);
    };
    switch (m.kind) {
    case K::Empty:
    case K::Atom:
        break;
    case K::Concat: {
        for (const ContentModel& k : m.kids) {
            auto sub = sibling_order(k);
            out.insert(sub.begin(), sub.end());
        }
        for (size_t i = 0; i < m.kids.size(); ++i)
            for (size_t j = i + 1; j < m.kids.size(); ++j)
                cross(occurring(m.kids[i]), occurring(m.kids[j]));
        break;
    }
    case K::Alt: {
        for (const ContentModel& k : m.kids) {
            auto sub = sibling_order(k);
            out.insert(sub.begin(), sub.end());
        }
        break;
    }
    case K::Star:
    case K::Plus: {
        out = sibling_order(m.kids[0]);
        auto occ = occurring(m.kids[0]);
        cross(occ, occ);
        break;
    }
    case K::Opt:
        out = sibling_order(m.kids[0]);
        break;
    }
    return out;
}

// --------------------------------------------------------------------------
// Word membership via Brzozowski derivatives.  The empty language is
// represented as an absent optional; ContentModel::Empty denotes {epsilon}.

namespace {

bool nullable(const ContentModel& m) {
    using K = ContentModel::Kind;
    switch (m.kind) {
    case K::Empty:
    case K::Star:
    case K::Opt:
        return true;
    case K::Atom:
        return false;
    case K::Plus:
        return nullable(m.kids[0]);
    case K::Concat:
        return std::all_of(m.kids.begin(), m.kids.end(), [](auto& k) { return nullable(k); });
    case K::Alt:
        return std::any_of(m.kids.begin(), m.kids.end(), [](auto& k) { return nullable(k); });
    }
    return false;
}

std::optional<ContentModel> deriv(const ContentModel& m, const Label& x) {
    using K = ContentModel::Kind;
    switch (m.kind) {
    case K::Empty:
        return std::nullopt;
    case K::Atom:
        if (m.atom == x) return ContentModel::empty();
        return std::nullopt;
    case K::Alt: {
        std::vector<ContentModel> alts;
        for (const ContentModel& k : m.kids)
            if (auto d = deriv(k, x)) alts.push_back(std::move(*d));
        if (alts.empty()) return std::nullopt;
        if (alts.size() == 1) return std::move(alts[0]);
        return ContentModel::node(K::Alt, std::move(alts));
    }
    case K::Concat: {
        // d(k1...kn) = d(k1).k2...kn  |  (k1 nullable) d(k2...kn)
        std::vector<ContentModel> alts;
        for (size_t i = 0; i < m.kids.size(); ++i) {
            if (auto d = deriv(m.kids[i], x)) {
                std::vector<ContentModel> seq;
                seq.push_back(std::move(*d));
                for (size_t j = i + 1; j < m.kids.size(); ++j) seq.push_back(m.kids[j]);
                alts.push_back(seq.size() == 1 ? std::move(seq[0])
                                               : ContentModel::node(K::Concat, std::move(seq)));
            }
            if (!nullable(m.kids[i])) break;
        }
        if (alts.empty()) return std::nullopt;
        if (alts.size() == 1) return std::move(alts[0]);
        return ContentModel::node(K::Alt, std::move(alts));
    }
    case K::Star:
    case K::Plus: {
        auto d = deriv(m.kids[0], x);
        if (!d) return std::nullopt;
        ContentModel rest = ContentModel::node(K::Star, {m.kids[0]});
        std::vector<ContentModel> seq;
        seq.push_back(std::move(*d));
        seq.push_back(std::move(rest));
        return ContentModel::node(K::Concat, std::move(seq));
    }
    case K::Opt:
        return deriv(m.kids[0], x);
    }
    return std::nullopt;
}

} // namespace

bool matches(const ContentModel& m, const std::vector<Label>& word) {
    ContentModel cur = m;
    for (const Label& x : word) {
        auto d = deriv(cur, x);
        if (!d) return false;
        cur = std::move(*d);
    }
    return nullable(cur);
}

} // namespace xqui
