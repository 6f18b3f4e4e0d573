#pragma once

#include "xqui/dtd.hpp"
#include "xqui/label.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace xqui {

// Node identity.  Locations are never reused within a store; restriction and
// update application preserve them, which is what makes "same node before and
// after" a meaningful question.
using Location = uint32_t;
inline constexpr Location kNoLoc = 0xFFFFFFFFu;

using LocationSet = std::set<Location>;

struct Node {
    Label label;                     // element tag, or the text type
    std::string text;                // text nodes only
    std::vector<Location> children;  // element nodes only
    Location parent = kNoLoc;
};

// A store holds a forest of trees.  Evaluation grows the store (constructed
// nodes live beside the input document); applying an update rewires it.
class Store {
public:
    Location add_element(std::string tag);
    Location add_text(std::string value);

    const Node& at(Location l) const;
    Node& at(Location l);
    bool contains(Location l) const { return nodes_.count(l) != 0; }
    size_t size() const { return nodes_.size(); }

    // Append/insert children, maintaining parent links.  The child must be
    // currently parentless.
    void append_child(Location parent, Location child);
    void insert_children(Location parent, size_t index, const std::vector<Location>& kids);
    // Detach a node from its parent (no-op if already a root).
    void unlink(Location l);

    Location component_root(Location l) const;
    // Labels along the path component root -> l.
    Chain node_chain(Location l) const;
    std::vector<Location> preorder(Location root) const;

    // Deep copy of a subtree within this store; the copy is parentless.
    Location deep_copy(Location src);

    // Copy of src containing exactly the kept locations, with their original
    // ids.  Child lists are filtered; a node whose parent is dropped becomes a
    // component root.
    static Store restricted(const Store& src, const LocationSet& keep);

    // Sort locations by document order (component roots by creation id, then
    // preorder within the component) and drop duplicates.
    void document_order(std::vector<Location>& locs) const;

private:
    std::map<Location, Node> nodes_;
    Location next_ = 0;
};

struct Tree {
    Store store;
    Location root = kNoLoc;
};

// Parse a document.  Supported: elements, character data with the five
// predefined entities plus decimal/hex character references.  Attributes,
// comments, processing instructions and doctypes are rejected — documents in
// this toolchain are data, not markup soup.  Whitespace-only text between
// elements is dropped.
Tree parse_document(std::string_view text);

// Canonical serialization: no insignificant whitespace, & < > escaped in text,
// childless elements as <tag/>.
std::string serialize(const Store& s, Location root);
std::string serialize_forest(const Store& s, const std::vector<Location>& roots);

// Locations in t whose chain equals c.
std::vector<Location> locations_typed_by(const Store& s, Location root, const Chain& c);

// Restriction of a tree to a location set.  Ancestors of kept locations are
// kept too (the result must be a tree); location identities are preserved.
Tree project(const Store& s, Location root, const LocationSet& keep);

// Structural equality of forests: same labels, same text, same child order.
// Location identities are ignored.
bool value_equivalent(const Store& a, const std::vector<Location>& ra,
                      const Store& b, const std::vector<Location>& rb);

// Validity of a tree against a schema: the root carries the schema root tag
// and every element's child-label word matches its content model.
bool validate(const Dtd& d, const Store& s, Location root);

// Exhaustive enumerator of valid documents within bounds: element depth at
// most max_depth (root has depth 1), every starred/plus group unrolled at most
// max_repeat times, text content drawn from text_pool.  Deterministic order;
// lazy, because the space can be huge.
class ValidDocs {
public:
    ValidDocs(const Dtd& d, int max_depth, int max_repeat,
              std::vector<std::string> text_pool = {"s"});
    ~ValidDocs();
    ValidDocs(ValidDocs&&) noexcept;
    ValidDocs& operator=(ValidDocs&&) noexcept;

    // Next document, or nullopt when the space is exhausted.
    std::optional<Tree> next();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// All words of a content model with bounded unrolling (Star/Plus groups
// expanded 0..max_repeat / 1..max_repeat times), deduplicated, in a
// deterministic order.  Powers the enumerator; exposed for reuse.
std::vector<std::vector<Label>> bounded_words(const ContentModel& m, int max_repeat);

} // namespace xqui
