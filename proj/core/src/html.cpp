#include "ghs/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace ghs::html {

namespace {

constexpr std::array<std::string_view, 14> kVoidElements{
    "area", "base", "br", "col", "embed", "hr", "img",
    "input", "link", "meta", "param", "source", "track", "wbr"};

bool is_void(std::string_view tag) {
  return std::find(kVoidElements.begin(), kVoidElements.end(), tag) != kVoidElements.end();
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp == 0xA0) {  // nbsp reads as plain space for number parsing
    out += ' ';
  } else if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  std::unique_ptr<Node> run(std::size_t& element_count) {
    auto root = std::make_unique<Node>();
    root->type = Node::Type::Document;
    stack_.push_back(root.get());
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        if (starts_with("<!--")) {
          skip_past("-->");
        } else if (starts_with("<![CDATA[")) {
          skip_past("]]>");
        } else if (starts_with("<!") || starts_with("<?")) {
          skip_past(">");
        } else if (starts_with("</")) {
          end_tag();
        } else if (pos_ + 1 < src_.size() &&
                   std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
          start_tag(element_count);
        } else {
          text_until_tag();
        }
      } else {
        text_until_tag();
      }
    }
    return root;
  }

 private:
  bool starts_with(std::string_view p) const { return src_.substr(pos_, p.size()) == p; }

  void skip_past(std::string_view terminator) {
    auto end = src_.find(terminator, pos_);
    pos_ = end == std::string_view::npos ? src_.size() : end + terminator.size();
  }

  void add_text(std::string_view raw) {
    if (raw.empty()) return;
    auto node = std::make_unique<Node>();
    node->type = Node::Type::Text;
    node->text = decode_entities(raw);
    node->parent = stack_.back();
    stack_.back()->children.push_back(std::move(node));
  }

  void text_until_tag() {
    auto next = src_.find('<', pos_ + 1);
    if (next == std::string_view::npos) next = src_.size();
    add_text(src_.substr(pos_, next - pos_));
    pos_ = next;
  }

  void end_tag() {
    pos_ += 2;
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    std::string tag = lower(src_.substr(start, pos_ - start));
    skip_past(">");
    // Close the nearest matching open element; ignore strays.
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == tag) {
        stack_.resize(i);
        return;
      }
    }
  }

  void start_tag(std::size_t& element_count) {
    ++pos_;
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    auto node = std::make_unique<Node>();
    node->type = Node::Type::Element;
    node->tag = lower(src_.substr(start, pos_ - start));
    bool self_closing = false;
    for (;;) {
      while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        self_closing = true;
        ++pos_;
        continue;
      }
      std::size_t name_start = pos_;
      while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '=' &&
             src_[pos_] != '>' && src_[pos_] != '/') {
        ++pos_;
      }
      if (pos_ == name_start) {  // lone '=' or similar junk
        ++pos_;
        continue;
      }
      std::string name = lower(src_.substr(name_start, pos_ - name_start));
      while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
      std::string value;
      if (pos_ < src_.size() && src_[pos_] == '=') {
        ++pos_;
        while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
          char quote = src_[pos_++];
          auto end = src_.find(quote, pos_);
          if (end == std::string_view::npos) end = src_.size();
          value = decode_entities(src_.substr(pos_, end - pos_));
          pos_ = std::min(end + 1, src_.size());
        } else {
          std::size_t v = pos_;
          while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
          value = decode_entities(src_.substr(v, pos_ - v));
        }
      }
      node->attributes.emplace_back(std::move(name), std::move(value));
    }

    ++element_count;
    Node* parent = stack_.back();
    implicit_close(node->tag, parent);
    parent = stack_.back();
    node->parent = parent;
    Node* raw = node.get();
    parent->children.push_back(std::move(node));

    const std::string& tag = raw->tag;
    if (tag == "script" || tag == "style") {
      skip_raw_text(tag, nullptr);
      return;
    }
    if (tag == "textarea" || tag == "title") {
      skip_raw_text(tag, raw);
      return;
    }
    if (!self_closing && !is_void(tag)) stack_.push_back(raw);
  }

  // <li> closes an open <li>, <p> closes an open <p>, and so on.
  void implicit_close(const std::string& tag, Node* current) {
    auto closes = [&](std::string_view open) {
      return current->tag == open;
    };
    if ((tag == "li" && closes("li")) || (tag == "p" && closes("p")) ||
        ((tag == "td" || tag == "th") && (closes("td") || closes("th"))) ||
        (tag == "tr" && closes("tr")) || (tag == "option" && closes("option"))) {
      stack_.pop_back();
    }
  }

  void skip_raw_text(const std::string& tag, Node* keep_into) {
    std::string closing = "</" + tag;
    std::size_t end = pos_;
    for (;;) {
      end = src_.find("</", end);
      if (end == std::string_view::npos) {
        end = src_.size();
        break;
      }
      if (lower(src_.substr(end, closing.size())) == closing) break;
      end += 2;
    }
    if (keep_into != nullptr && end > pos_) {
      stack_.push_back(keep_into);
      add_text(src_.substr(pos_, end - pos_));
      stack_.pop_back();
    }
    pos_ = end;
    if (pos_ < src_.size()) skip_past(">");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Node*> stack_;
};

void collect_text(const Node& n, std::string& out) {
  if (n.type == Node::Type::Text) {
    out += n.text;
    out += ' ';
    return;
  }
  for (const auto& c : n.children) collect_text(*c, out);
}

void walk(const Node& n, const Selector& s, std::vector<const Node*>& out, bool first_only) {
  for (const auto& c : n.children) {
    if (first_only && !out.empty()) return;
    if (!c->is_element()) continue;
    if (s.matches(*c)) out.push_back(c.get());
    walk(*c, s, out, first_only);
  }
}

bool has_word(std::string_view list, std::string_view word) {
  std::size_t pos = 0;
  while (pos < list.size()) {
    while (pos < list.size() && is_space(list[pos])) ++pos;
    std::size_t end = pos;
    while (end < list.size() && !is_space(list[end])) ++end;
    if (end > pos && list.substr(pos, end - pos) == word) return true;
    pos = end;
  }
  return false;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::optional<std::string_view> Node::attribute(std::string_view name) const {
  for (const auto& [k, v] : attributes) {
    if (k == name) return std::string_view{v};
  }
  return std::nullopt;
}

bool Node::has_class(std::string_view cls) const {
  auto list = attribute("class");
  return list && has_word(*list, cls);
}

std::string Node::text_content() const {
  std::string raw;
  collect_text(*this, raw);
  std::string out;
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

Document Document::parse(std::string_view html) {
  Document doc;
  Parser parser(html);
  doc.root_ = parser.run(doc.elements_);
  return doc;
}

bool Document::structurally_empty() const {
  if (!root_->text_content().empty()) return false;
  // head metadata (title, meta, link) does not count as content
  std::size_t skeleton = 0;
  std::vector<std::pair<const Node*, bool>> todo{{root_.get(), false}};
  while (!todo.empty()) {
    auto [n, in_head] = todo.back();
    todo.pop_back();
    for (const auto& c : n->children) {
      if (!c->is_element()) continue;
      const bool head = in_head || c->tag == "head";
      if (head || c->tag == "html" || c->tag == "body") ++skeleton;
      todo.emplace_back(c.get(), head);
    }
  }
  return elements_ == skeleton;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += '&';
      continue;
    }
    std::string_view ent = s.substr(i + 1, semi - i - 1);
    bool ok = true;
    if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      std::string_view digits = ent.substr(hex ? 2 : 1);
      if (digits.empty()) ok = false;
      for (char c : digits) {
        int d = -1;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
        if (d < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(d);
      }
      if (ok) append_utf8(out, cp);
    } else if (ent == "amp") {
      out += '&';
    } else if (ent == "lt") {
      out += '<';
    } else if (ent == "gt") {
      out += '>';
    } else if (ent == "quot") {
      out += '"';
    } else if (ent == "apos") {
      out += '\'';
    } else if (ent == "nbsp") {
      out += ' ';
    } else {
      ok = false;
    }
    if (ok) {
      i = semi;
    } else {
      out += '&';
    }
  }
  return out;
}

// --- selectors -------------------------------------------------------------

namespace {

class SelectorLexer {
 public:
  explicit SelectorLexer(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  void skip_spaces() {
    while (!done() && is_space(s_[pos_])) ++pos_;
  }
  bool skip_spaces_reporting() {
    std::size_t before = pos_;
    skip_spaces();
    return pos_ != before;
  }
  char get() { return s_[pos_++]; }

  std::string ident() {
    std::size_t start = pos_;
    while (!done() && (is_name_char(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string{s_.substr(start, pos_ - start)};
  }

  std::string value() {
    if (peek() == '"' || peek() == '\'') {
      char q = get();
      auto end = s_.find(q, pos_);
      if (end == std::string_view::npos) fail("unterminated string");
      std::string v{s_.substr(pos_, end - pos_)};
      pos_ = end + 1;
      return v;
    }
    std::size_t start = pos_;
    while (!done() && s_[pos_] != ']' && !is_space(s_[pos_])) ++pos_;
    return std::string{s_.substr(start, pos_ - start)};
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("selector '" + std::string{s_} + "': " + why + " at " +
                                std::to_string(pos_));
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Selector Selector::parse(std::string_view text) {
  Selector sel;
  sel.text_ = std::string{text};
  SelectorLexer lx(text);
  lx.skip_spaces();
  if (lx.done()) lx.fail("empty selector");

  Complex complex;
  bool child_pending = false;
  for (;;) {
    Compound c;
    bool any = false;
    if (lx.peek() == '*') {
      lx.get();
      c.tag = "*";
      any = true;
    } else if (is_name_char(lx.peek())) {
      c.tag = lower(lx.ident());
      any = true;
    }
    for (;;) {
      char ch = lx.peek();
      if (ch == '#') {
        lx.get();
        c.ids.push_back(lx.ident());
      } else if (ch == '.') {
        lx.get();
        c.classes.push_back(lx.ident());
      } else if (ch == '[') {
        lx.get();
        lx.skip_spaces();
        AttributeTest t;
        t.name = lower(lx.ident());
        lx.skip_spaces();
        char op = lx.peek();
        if (op == '=') {
          lx.get();
          t.op = '=';
        } else if (op == '~' || op == '^' || op == '$' || op == '*') {
          lx.get();
          if (lx.peek() != '=') lx.fail("expected '='");
          lx.get();
          t.op = op;
        }
        if (t.op != 0) {
          lx.skip_spaces();
          t.value = lx.value();
          lx.skip_spaces();
        }
        if (lx.peek() != ']') lx.fail("expected ']'");
        lx.get();
        c.attributes.push_back(std::move(t));
      } else {
        break;
      }
      any = true;
    }
    if (!any) lx.fail("expected a compound selector");
    complex.push_back(Step{std::move(c), child_pending});
    child_pending = false;

    bool spaced = lx.skip_spaces_reporting();
    if (lx.done()) break;
    char ch = lx.peek();
    if (ch == ',') {
      lx.get();
      lx.skip_spaces();
      sel.groups_.push_back(std::move(complex));
      complex = {};
      if (lx.done()) lx.fail("trailing ','");
      continue;
    }
    if (ch == '>') {
      lx.get();
      lx.skip_spaces();
      child_pending = true;
      continue;
    }
    if (!spaced) lx.fail(std::string{"unexpected '"} + ch + "'");
  }
  if (child_pending) lx.fail("dangling '>'");
  sel.groups_.push_back(std::move(complex));
  return sel;
}

bool Selector::matches_compound(const Compound& c, const Node& n) {
  if (!n.is_element()) return false;
  if (!c.tag.empty() && c.tag != "*" && c.tag != n.tag) return false;
  for (const auto& id : c.ids) {
    auto v = n.attribute("id");
    if (!v || *v != id) return false;
  }
  for (const auto& cls : c.classes) {
    if (!n.has_class(cls)) return false;
  }
  for (const auto& t : c.attributes) {
    auto v = n.attribute(t.name);
    if (!v) return false;
    switch (t.op) {
      case 0: break;
      case '=': if (*v != t.value) return false; break;
      case '~': if (!has_word(*v, t.value)) return false; break;
      case '^': if (t.value.empty() || v->substr(0, t.value.size()) != t.value) return false; break;
      case '$': if (t.value.empty() || !ends_with(*v, t.value)) return false; break;
      case '*': if (t.value.empty() || v->find(t.value) == std::string_view::npos) return false; break;
      default: return false;
    }
  }
  return true;
}

bool Selector::matches_complex(const Complex& steps, std::size_t index, const Node& n) {
  if (!matches_compound(steps[index].compound, n)) return false;
  if (index == 0) return true;
  const bool child = steps[index].child_of_previous;
  for (const Node* p = n.parent; p != nullptr && p->is_element(); p = p->parent) {
    if (matches_complex(steps, index - 1, *p)) return true;
    if (child) return false;
  }
  return false;
}

bool Selector::matches(const Node& element) const {
  return std::any_of(groups_.begin(), groups_.end(), [&](const Complex& c) {
    return matches_complex(c, c.size() - 1, element);
  });
}

std::vector<const Node*> Selector::select_all(const Node& root) const {
  std::vector<const Node*> out;
  walk(root, *this, out, false);
  return out;
}

const Node* Selector::select_first(const Node& root) const {
  std::vector<const Node*> out;
  walk(root, *this, out, true);
  return out.empty() ? nullptr : out.front();
}

}  // namespace ghs::html
