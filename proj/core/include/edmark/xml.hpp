#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Minimal non-validating XML reader. Keeps mixed content (text interleaved
// with elements) in document order, which TEI conversion depends on.
// Supports declarations, comments, CDATA, DOCTYPE skipping, named and
// numeric character entities. Namespace prefixes are stripped.
namespace edmark::xml {

class XmlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct XmlNode {
  std::string name;  // "#text" for text nodes
  std::string text;  // text nodes only
  std::map<std::string, std::string> attrs;
  std::vector<XmlNode> children;

  bool is_text() const { return name == "#text"; }
  bool is_element(std::string_view n) const { return name == n; }
  const std::string* attr(const std::string& key) const {
    auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
  }
  // First descendant element with the given name, depth-first; nullptr if none.
  const XmlNode* find(std::string_view element_name) const;
};

// Parses a complete document and returns its root element.
XmlNode parse(std::string_view xml);

}  // namespace edmark::xml
