#pragma once

#include <compare>
#include <string>
#include <vector>

namespace xqui {

// A node label: either an element tag or the distinguished text type.  The text
// type plays the role of a pseudo-label so that content models and chains can
// talk about character data positions uniformly; it prints as "#text", which
// cannot collide with an element name.
class Label {
public:
    Label() = default;
    static Label elem(std::string name) { return Label(std::move(name)); }
    static Label text() { return Label(std::string()); }

    bool is_text() const { return name_.empty(); }
    const std::string& name() const { return name_; }
    std::string display() const { return is_text() ? "#text" : name_; }

    auto operator<=>(const Label&) const = default;

private:
    explicit Label(std::string name) : name_(std::move(name)) {}
    std::string name_; // empty means text type
};

// A chain: a sequence of labels walking parent-to-child from the schema root.
// Code that manipulates possibly-empty prefixes uses the same type and says so.
using Chain = std::vector<Label>;

inline std::string to_string(const Chain& c) {
    std::string out;
    for (size_t i = 0; i < c.size(); ++i) {
        if (i) out += '.';
        out += c[i].display();
    }
    return out;
}

inline bool is_prefix(const Chain& a, const Chain& b) {
    if (a.size() > b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

inline Chain concat(Chain a, const Chain& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace xqui
