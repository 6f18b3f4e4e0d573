#pragma once

#include "xqui/label.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace xqui::test {

// "doc.a.#text" -> Chain
inline Chain ch(const std::string& dotted) {
    Chain out;
    std::istringstream in(dotted);
    std::string part;
    while (std::getline(in, part, '.'))
        out.push_back(part == "#text" ? Label::text() : Label::elem(part));
    return out;
}

inline std::string fixture(const std::string& name) {
    std::ifstream in(std::string(FIXTURES_DIR) + "/" + name, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace xqui::test
