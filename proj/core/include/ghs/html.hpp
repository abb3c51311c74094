#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ghs::html {

struct Node {
  enum class Type { Document, Element, Text };

  Type type = Type::Element;
  std::string tag;  // lowercase; empty for text and document nodes
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // text nodes only, entities decoded
  Node* parent = nullptr;
  std::vector<std::unique_ptr<Node>> children;

  bool is_element() const { return type == Type::Element; }
  std::optional<std::string_view> attribute(std::string_view name) const;
  bool has_class(std::string_view cls) const;

  /// Descendant text with whitespace runs collapsed and ends trimmed.
  std::string text_content() const;
};

/// Lenient HTML parse tree. Unknown or mismatched end tags are tolerated;
/// script and style bodies are dropped.
class Document {
 public:
  static Document parse(std::string_view html);

  const Node& root() const { return *root_; }
  std::size_t element_count() const { return elements_; }

  /// No elements beyond the html/head/body skeleton and no visible text.
  bool structurally_empty() const;

 private:
  std::unique_ptr<Node> root_;
  std::size_t elements_ = 0;
};

/// Decodes character references (&amp;, &#39;, &#x2F;, &nbsp; ...).
std::string decode_entities(std::string_view s);

/// CSS selector subset: type, `*`, `#id`, `.class`, attribute tests
/// (`[a]`, `=`, `~=`, `^=`, `$=`, `*=`), descendant and child (`>`)
/// combinators, and comma-separated groups.
class Selector {
 public:
  /// Throws std::invalid_argument on syntax errors.
  static Selector parse(std::string_view text);

  bool matches(const Node& element) const;
  std::vector<const Node*> select_all(const Node& root) const;
  const Node* select_first(const Node& root) const;

  const std::string& text() const { return text_; }

 private:
  struct AttributeTest {
    std::string name;
    char op = 0;  // 0 (presence), '=', '~', '^', '$', '*'
    std::string value;
  };
  struct Compound {
    std::string tag;  // empty or "*" matches any element
    std::vector<std::string> ids;
    std::vector<std::string> classes;
    std::vector<AttributeTest> attributes;
  };
  struct Step {
    Compound compound;
    bool child_of_previous = false;  // '>' combinator before this step
  };
  using Complex = std::vector<Step>;

  static bool matches_compound(const Compound& c, const Node& n);
  static bool matches_complex(const Complex& steps, std::size_t index, const Node& n);

  std::string text_;
  std::vector<Complex> groups_;
};

}  // namespace ghs::html
