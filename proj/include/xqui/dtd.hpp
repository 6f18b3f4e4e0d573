#pragma once

#include "xqui/label.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xqui {

// Content model: a regular expression over element labels and the text type.
// The structure is kept as parsed (Star vs Plus vs Opt stay distinct) because
// the sibling-order relation is defined by induction on this syntax.
struct ContentModel {
    enum class Kind { Empty, Atom, Concat, Alt, Star, Plus, Opt };

    Kind kind = Kind::Empty;
    Label atom;                     // Kind::Atom only
    std::vector<ContentModel> kids; // Concat/Alt: >= 2, Star/Plus/Opt: exactly 1

    static ContentModel empty() { return {}; }
    static ContentModel make_atom(Label l) {
        ContentModel m;
        m.kind = Kind::Atom;
        m.atom = std::move(l);
        return m;
    }
    static ContentModel node(Kind k, std::vector<ContentModel> kids) {
        ContentModel m;
        m.kind = k;
        m.kids = std::move(kids);
        return m;
    }

    std::string to_string() const;
};

// A schema: alphabet of element tags, a root tag, and one content model per
// tag.  Tags keep declaration order; the text type implicitly has an empty
// content model.
class Dtd {
public:
    Dtd(std::vector<std::string> tags, std::vector<ContentModel> models, std::string root);

    const std::vector<std::string>& tags() const { return tags_; }
    const std::string& root() const { return root_; }
    Label root_label() const { return Label::elem(root_); }
    bool has_tag(const std::string& name) const { return index_.count(name) != 0; }
    int tag_index(const std::string& name) const; // throws Error on unknown tag

    // Content model of a label; the text type yields the empty model.
    const ContentModel& model_of(const Label& l) const;

    std::string to_string() const;

private:
    std::vector<std::string> tags_;
    std::vector<ContentModel> models_;
    std::map<std::string, int, std::less<>> index_;
    std::string root_;
    ContentModel text_model_; // shared empty model
};

// Parse a DTD in the usual <!ELEMENT name (model)> syntax.  Supported content
// specs: EMPTY, children models built from , | * + ? and parentheses, #PCDATA
// (alone or in a mixed model).  ATTLIST/ENTITY/NOTATION declarations and ANY
// are rejected.  The schema root is the first declared element unless
// overridden.
Dtd parse_dtd(std::string_view text, const std::optional<std::string>& root_override = {});

// True iff label b occurs (syntactically) in the content model of a.
bool reaches(const Dtd& d, const Label& a, const Label& b);

// True iff c is a chain of d: nonempty, starts at the root, and each label
// occurs in the content model of its predecessor.
bool is_chain(const Dtd& d, const Chain& c);

// is_chain plus: every label occurs at most k times in c.
bool is_k_chain(const Dtd& d, const Chain& c, int k);

// Labels occurring syntactically in a content model.
std::set<Label> occurring(const ContentModel& m);

// The sibling-order relation of a content model: (a,b) present when some word
// of the model can place an a-position before a b-position.  Defined by
// structural induction, not by language enumeration.
std::set<std::pair<Label, Label>> sibling_order(const ContentModel& m);
inline std::set<std::pair<Label, Label>> sibling_order(const Dtd& d, const Label& parent) {
    return sibling_order(d.model_of(parent));
}

// Word membership test for content models (Brzozowski derivatives).  Words are
// label sequences; used by document validation and the bounded enumerator.
bool matches(const ContentModel& m, const std::vector<Label>& word);

} // namespace xqui
