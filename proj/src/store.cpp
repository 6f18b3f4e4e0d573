#include "xqui/store.hpp"
#include "xqui/diag.hpp"

#include <algorithm>
#include <cctype>

namespace xqui {

// --------------------------------------------------------------------------
// Store

Location Store::add_element(std::string tag) {
    Location l = next_++;
    Node n;
    n.label = Label::elem(std::move(tag));
    nodes_.emplace(l, std::move(n));
    return l;
}

Location Store::add_text(std::string value) {
    Location l = next_++;
    Node n;
    n.label = Label::text();
    n.text = std::move(value);
    nodes_.emplace(l, std::move(n));
    return l;
}

const Node& Store::at(Location l) const {
    auto it = nodes_.find(l);
    if (it == nodes_.end()) throw Error("dangling location " + std::to_string(l));
    return it->second;
}

Node& Store::at(Location l) {
    return const_cast<Node&>(static_cast<const Store*>(this)->at(l));
}

void Store::append_child(Location parent, Location child) {
    Node& c = at(child);
    if (c.parent != kNoLoc) throw Error("append_child: node already has a parent");
    at(parent).children.push_back(child);
    c.parent = parent;
}

void Store::insert_children(Location parent, size_t index, const std::vector<Location>& kids) {
    Node& p = at(parent);
    if (index > p.children.size()) throw Error("insert_children: index out of range");
    for (Location k : kids) {
        Node& c = at(k);
        if (c.parent != kNoLoc) throw Error("insert_children: node already has a parent");
        c.parent = parent;
    }
    p.children.insert(p.children.begin() + static_cast<ptrdiff_t>(index), kids.begin(), kids.end());
}

void Store::unlink(Location l) {
    Node& n = at(l);
    if (n.parent == kNoLoc) return;
    auto& sibs = at(n.parent).children;
    sibs.erase(std::remove(sibs.begin(), sibs.end(), l), sibs.end());
    n.parent = kNoLoc;
}

Location Store::component_root(Location l) const {
    while (at(l).parent != kNoLoc) l = at(l).parent;
    return l;
}

Chain Store::node_chain(Location l) const {
    Chain c;
    for (Location cur = l; cur != kNoLoc; cur = at(cur).parent) c.push_back(at(cur).label);
    std::reverse(c.begin(), c.end());
    return c;
}

std::vector<Location> Store::preorder(Location root) const {
    std::vector<Location> out, stack{root};
    while (!stack.empty()) {
        Location l = stack.back();
        stack.pop_back();
        out.push_back(l);
        const auto& kids = at(l).children;
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

Location Store::deep_copy(Location src) {
    const Node& n = at(src);
    if (n.label.is_text()) return add_text(n.text);
    Location dst = add_element(n.label.name());
    // Copy the child list first: at() references invalidate on insertion.
    std::vector<Location> kids = n.children;
    for (Location k : kids) append_child(dst, deep_copy(k));
    return dst;
}

Store Store::restricted(const Store& src, const LocationSet& keep) {
    Store out;
    out.next_ = src.next_;
    for (Location l : keep) {
        Node n = src.at(l);
        if (n.parent != kNoLoc && keep.count(n.parent) == 0) n.parent = kNoLoc;
        std::erase_if(n.children, [&keep](Location k) { return keep.count(k) == 0; });
        out.nodes_.emplace(l, std::move(n));
    }
    return out;
}

void Store::document_order(std::vector<Location>& locs) const {
    std::sort(locs.begin(), locs.end());
    locs.erase(std::unique(locs.begin(), locs.end()), locs.end());
    std::map<Location, std::pair<Location, int>> key; // loc -> (component root, preorder idx)
    std::set<Location> roots;
    for (Location l : locs) roots.insert(component_root(l));
    for (Location r : roots) {
        int idx = 0;
        for (Location l : preorder(r)) key[l] = {r, idx++};
    }
    std::sort(locs.begin(), locs.end(), [&key](Location a, Location b) {
        auto ka = key.find(a), kb = key.find(b);
        return ka->second < kb->second;
    });
}

// --------------------------------------------------------------------------
// Parsing

namespace {

struct DocScanner {
    std::string_view s;
    size_t i = 0;
    int line = 1, col = 1;

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

    std::string name() {
        if (!(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == ':'))
            fail("expected a name");
        std::string out;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' ||
                c == '.')
                out += get();
            else
                break;
        }
        return out;
    }

    std::string entity() {
        // '&' consumed
        std::string ref;
        while (!eof() && peek() != ';') ref += get();
        if (eof()) fail("unterminated entity reference");
        get(); // ';'
        if (ref == "amp") return "&";
        if (ref == "lt") return "<";
        if (ref == "gt") return ">";
        if (ref == "quot") return "\"";
        if (ref == "apos") return "'";
        if (ref.size() > 1 && ref[0] == '#') {
            int base = 10;
            std::string digits = ref.substr(1);
            if (digits[0] == 'x' || digits[0] == 'X') {
                base = 16;
                digits = digits.substr(1);
            }
            try {
                unsigned long cp = std::stoul(digits, nullptr, base);
                if (cp == 0 || cp > 0x10FFFF) fail("character reference out of range");
                // Encode as UTF-8.
                std::string out;
                if (cp < 0x80) {
                    out += static_cast<char>(cp);
                } else if (cp < 0x800) {
                    out += static_cast<char>(0xC0 | (cp >> 6));
                    out += static_cast<char>(0x80 | (cp & 0x3F));
                } else if (cp < 0x10000) {
                    out += static_cast<char>(0xE0 | (cp >> 12));
                    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                    out += static_cast<char>(0x80 | (cp & 0x3F));
                } else {
                    out += static_cast<char>(0xF0 | (cp >> 18));
                    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
                    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                    out += static_cast<char>(0x80 | (cp & 0x3F));
                }
                return out;
            } catch (const std::logic_error&) {
                fail("bad character reference &" + ref + ";");
            }
        }
        fail("unknown entity &" + ref + ";");
    }
};

bool all_space(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

// Parses one element, cursor at '<'.
Location parse_element(DocScanner& sc, Store& store) {
    sc.get(); // '<'
    if (sc.peek() == '!' || sc.peek() == '?')
        sc.fail("comments, doctypes and processing instructions are not supported");
    std::string tag = sc.name();
    while (std::isspace(static_cast<unsigned char>(sc.peek()))) sc.get();
    if (sc.peek() != '>' && sc.peek() != '/')
        sc.fail("attributes are not supported (element '" + tag + "')");
    Location el = store.add_element(tag);
    if (sc.peek() == '/') {
        sc.get();
        if (sc.get() != '>') sc.fail("malformed empty-element tag");
        return el;
    }
    sc.get(); // '>'
    std::string textbuf;
    auto flush_text = [&]() {
        if (!textbuf.empty() && !all_space(textbuf)) store.append_child(el, store.add_text(textbuf));
        textbuf.clear();
    };
    while (true) {
        if (sc.eof()) sc.fail("unterminated element '" + tag + "'");
        if (sc.peek() == '<') {
            if (sc.peek(1) == '/') {
                flush_text();
                sc.get();
                sc.get();
                std::string close = sc.name();
                if (close != tag)
                    sc.fail("mismatched closing tag </" + close + "> for <" + tag + ">");
                while (std::isspace(static_cast<unsigned char>(sc.peek()))) sc.get();
                if (sc.get() != '>') sc.fail("malformed closing tag");
                return el;
            }
            flush_text();
            store.append_child(el, parse_element(sc, store));
        } else if (sc.peek() == '&') {
            sc.get();
            textbuf += sc.entity();
        } else {
            textbuf += sc.get();
        }
    }
}

} // namespace

Tree parse_document(std::string_view text) {
    DocScanner sc{text};
    while (!sc.eof() && std::isspace(static_cast<unsigned char>(sc.peek()))) sc.get();
    if (sc.eof() || sc.peek() != '<') sc.fail("expected a root element");
    Tree t;
    t.root = parse_element(sc, t.store);
    while (!sc.eof()) {
        if (!std::isspace(static_cast<unsigned char>(sc.peek())))
            sc.fail("trailing content after root element");
        sc.get();
    }
    return t;
}

// --------------------------------------------------------------------------
// Serialization

namespace {

void escape_into(const std::string& text, std::string& out) {
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
}

void serialize_into(const Store& s, Location l, std::string& out) {
    const Node& n = s.at(l);
    if (n.label.is_text()) {
        escape_into(n.text, out);
        return;
    }
    out += '<';
    out += n.label.name();
    if (n.children.empty()) {
        out += "/>";
        return;
    }
    out += '>';
    for (Location k : n.children) serialize_into(s, k, out);
    out += "</";
    out += n.label.name();
    out += '>';
}

} // namespace

std::string serialize(const Store& s, Location root) {
    std::string out;
    serialize_into(s, root, out);
    return out;
}

std::string serialize_forest(const Store& s, const std::vector<Location>& roots) {
    std::string out;
    for (size_t i = 0; i < roots.size(); ++i) {
        if (i) out += '\n';
        serialize_into(s, roots[i], out);
    }
    return out;
}

// --------------------------------------------------------------------------
// Typing, projection, equivalence, validation

std::vector<Location> locations_typed_by(const Store& s, Location root, const Chain& c) {
    std::vector<Location> out;
    for (Location l : s.preorder(root))
        if (s.node_chain(l) == c) out.push_back(l);
    return out;
}

Tree project(const Store& s, Location root, const LocationSet& keep) {
    LocationSet closed;
    for (Location l : keep) {
        for (Location cur = l; cur != kNoLoc; cur = s.at(cur).parent) {
            if (!closed.insert(cur).second) break;
        }
    }
    // Restrict to the tree under root.
    LocationSet in_tree;
    for (Location l : s.preorder(root))
        if (closed.count(l)) in_tree.insert(l);
    Tree t;
    if (in_tree.count(root) == 0) return t; // root excluded: empty projection
    t.store = Store::restricted(s, in_tree);
    t.root = root;
    return t;
}

bool value_equivalent(const Store& a, const std::vector<Location>& ra,
                      const Store& b, const std::vector<Location>& rb) {
    if (ra.size() != rb.size()) return false;
    for (size_t i = 0; i < ra.size(); ++i) {
        const Node& na = a.at(ra[i]);
        const Node& nb = b.at(rb[i]);
        if (na.label != nb.label) return false;
        if (na.label.is_text()) {
            if (na.text != nb.text) return false;
        } else if (!value_equivalent(a, na.children, b, nb.children)) {
            return false;
        }
    }
    return true;
}

bool validate(const Dtd& d, const Store& s, Location root) {
    if (s.at(root).label != d.root_label()) return false;
    for (Location l : s.preorder(root)) {
        const Node& n = s.at(l);
        if (n.label.is_text()) continue;
        if (!d.has_tag(n.label.name())) return false;
        std::vector<Label> word;
        word.reserve(n.children.size());
        for (Location k : n.children) word.push_back(s.at(k).label);
        if (!matches(d.model_of(n.label), word)) return false;
    }
    return true;
}

// --------------------------------------------------------------------------
// Bounded word enumeration

std::vector<std::vector<Label>> bounded_words(const ContentModel& m, int max_repeat) {
    using K = ContentModel::Kind;
    using Word = std::vector<Label>;
    std::vector<Word> out;
    auto product = [](const std::vector<Word>& xs, const std::vector<Word>& ys) {
        std::vector<Word> r;
        r.reserve(xs.size() * ys.size());
        for (const Word& x : xs)
            for (const Word& y : ys) {
                Word w = x;
                w.insert(w.end(), y.begin(), y.end());
                r.push_back(std::move(w));
            }
        return r;
    };
    switch (m.kind) {
    case K::Empty:
        out = {Word{}};
        break;
    case K::Atom:
        out = {Word{m.atom}};
        break;
    case K::Concat: {
        out = {Word{}};
        for (const ContentModel& k : m.kids) out = product(out, bounded_words(k, max_repeat));
        break;
    }
    case K::Alt: {
        for (const ContentModel& k : m.kids) {
            auto sub = bounded_words(k, max_repeat);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        break;
    }
    case K::Star:
    case K::Plus: {
        auto base = bounded_words(m.kids[0], max_repeat);
        std::vector<Word> reps = {Word{}};
        if (m.kind == K::Star) out.push_back(Word{});
        for (int r = 1; r <= max_repeat; ++r) {
            reps = product(reps, base);
            out.insert(out.end(), reps.begin(), reps.end());
        }
        break;
    }
    case K::Opt: {
        out.push_back(Word{});
        auto sub = bounded_words(m.kids[0], max_repeat);
        out.insert(out.end(), sub.begin(), sub.end());
        break;
    }
    }
    // Dedup, keeping first occurrence.
    std::set<Word> seen;
    std::vector<Word> uniq;
    for (Word& w : out)
        if (seen.insert(w).second) uniq.push_back(std::move(w));
    return uniq;
}

// --------------------------------------------------------------------------
// Valid-document enumeration: an odometer over (word choice, per-child
// subtree choices), recursing through the schema.  Lazy so callers can cap
// the stream.

namespace {

struct TreeVal {
    Label label;
    std::string text;
    std::vector<TreeVal> kids;
};

} // namespace

struct ValidDocs::Impl {
    const Dtd d;
    int max_depth;
    int max_repeat;
    std::vector<std::string> pool;
    std::map<std::pair<std::string, int>, std::vector<std::vector<Label>>> word_cache;

    Impl(const Dtd& d_, int md, int mr, std::vector<std::string> p)
        : d(d_), max_depth(md), max_repeat(mr), pool(std::move(p)) {
        if (pool.empty()) pool = {"s"};
    }

    const std::vector<std::vector<Label>>& words_for(const Label& tag, int remaining) {
        auto key = std::make_pair(tag.name(), remaining > 1 ? 1 : 0);
        auto it = word_cache.find(key);
        if (it != word_cache.end()) return it->second;
        std::vector<std::vector<Label>> ws;
        if (remaining <= 1) {
            // Leaf level: only the empty word is allowed.
            if (matches(d.model_of(tag), {})) ws.push_back({});
        } else {
            ws = bounded_words(d.model_of(tag), max_repeat);
        }
        return word_cache.emplace(key, std::move(ws)).first->second;
    }

    // Generator for all subtrees rooted at `label` with `remaining` depth
    // budget (the node itself consumes one level).
    struct Gen {
        Impl* impl = nullptr;
        Label label;
        int remaining = 0;
        size_t word_idx = 0;     // elements: index into words_for
        size_t pool_idx = 0;     // text nodes: index into pool
        std::vector<Gen> kids;   // one per position of the current word
        std::vector<TreeVal> cur_kids;
        bool primed = false;

        bool next(TreeVal& out) {
            if (label.is_text()) {
                if (pool_idx >= impl->pool.size()) return false;
                out.label = label;
                out.text = impl->pool[pool_idx++];
                out.kids.clear();
                return true;
            }
            if (remaining <= 0) return false;
            const auto& words = impl->words_for(label, remaining);
            while (word_idx < words.size()) {
                if (!primed) {
                    const auto& w = words[word_idx];
                    kids.clear();
                    cur_kids.assign(w.size(), {});
                    bool ok = true;
                    for (size_t i = 0; i < w.size(); ++i) {
                        kids.push_back(Gen{impl, w[i], remaining - 1, 0, 0, {}, {}, false});
                        if (!kids[i].next(cur_kids[i])) {
                            ok = false; // dead position: whole word produces nothing
                            break;
                        }
                    }
                    if (!ok) {
                        ++word_idx;
                        continue;
                    }
                    primed = true;
                    emit(out);
                    return true;
                }
                // Odometer step: advance the last kid that can advance.
                size_t i = kids.size();
                while (i > 0) {
                    --i;
                    if (kids[i].next(cur_kids[i])) {
                        // Reset all kids after i.
                        bool ok = true;
                        for (size_t j = i + 1; j < kids.size(); ++j) {
                            kids[j] = Gen{impl, kids[j].label, remaining - 1, 0, 0, {}, {}, false};
                            if (!kids[j].next(cur_kids[j])) {
                                ok = false;
                                break;
                            }
                        }
                        if (!ok) continue; // cannot happen: position produced before
                        emit(out);
                        return true;
                    }
                }
                primed = false;
                ++word_idx;
            }
            return false;
        }

        void emit(TreeVal& out) const {
            out.label = label;
            out.text.clear();
            out.kids = cur_kids;
        }
    };

    Gen top;
    bool started = false;

    std::optional<Tree> next() {
        if (!started) {
            top = Gen{this, d.root_label(), max_depth, 0, 0, {}, {}, false};
            started = true;
        }
        TreeVal tv;
        if (!top.next(tv)) return std::nullopt;
        Tree t;
        t.root = instantiate(t.store, tv);
        return t;
    }

    static Location instantiate(Store& s, const TreeVal& tv) {
        if (tv.label.is_text()) return s.add_text(tv.text);
        Location el = s.add_element(tv.label.name());
        for (const TreeVal& k : tv.kids) s.append_child(el, instantiate(s, k));
        return el;
    }
};

ValidDocs::ValidDocs(const Dtd& d, int max_depth, int max_repeat, std::vector<std::string> text_pool)
    : impl_(std::make_unique<Impl>(d, max_depth, max_repeat, std::move(text_pool))) {}
ValidDocs::~ValidDocs() = default;
ValidDocs::ValidDocs(ValidDocs&&) noexcept = default;
ValidDocs& ValidDocs::operator=(ValidDocs&&) noexcept = default;

std::optional<Tree> ValidDocs::next() { return impl_->next(); }

} // namespace xqui
