#include "ghs/forge.hpp"

#include <cctype>
#include <charconv>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"

namespace ghs {

using nlohmann::json;

namespace {

std::optional<std::string> opt_string(const json& item, const char* key) {
  auto it = item.find(key);
  if (it == item.end() || !it->is_string()) return std::nullopt;
  auto s = it->get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

std::optional<Instant> opt_instant(const json& item, const char* key) {
  if (auto s = opt_string(item, key)) return parse_instant(*s);
  return std::nullopt;
}

Count count_or_zero(const json& item, const char* key) {
  auto it = item.find(key);
  if (it == item.end() || !it->is_number_integer()) return 0;
  return it->get<Count>();
}

bool flag_or_false(const json& item, const char* key) {
  auto it = item.find(key);
  return it != item.end() && it->is_boolean() && it->get<bool>();
}

std::string render_bound(Instant t, bool dates) {
  return dates ? format_date(t) : format_instant(t);
}

// Qualifiers are joined by '+'; once a query has been through URL decoding
// the joins arrive as spaces and a literal '+' may appear inside a value.
std::vector<std::string_view> split_plus(std::string_view q) {
  const char sep = q.find(' ') != std::string_view::npos ? ' ' : '+';
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos <= q.size()) {
    auto next = q.find(sep, pos);
    if (next == std::string_view::npos) next = q.size();
    parts.push_back(q.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

std::string encode_value(std::string_view v) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : v) {
    auto u = static_cast<unsigned char>(c);
    if (c == '+' || c == '%' || c == '#' || c == '&' || u <= 0x20 || u >= 0x7f) {
      out += '%';
      out += kHex[u >> 4];
      out += kHex[u & 0xf];
    } else {
      out += c;
    }
  }
  return out;
}

std::string decode_value(std::string_view v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '%' && i + 2 < v.size() &&
        std::isxdigit(static_cast<unsigned char>(v[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(v[i + 2]))) {
      out += static_cast<char>(std::stoi(std::string{v.substr(i + 1, 2)}, nullptr, 16));
      i += 2;
    } else {
      out += v[i];
    }
  }
  return out;
}

}  // namespace

json summary_to_wire(const RepoSummary& s) {
  json license = nullptr;
  if (s.license) license = {{"name", *s.license}};
  auto opt_time = [](const std::optional<Instant>& t) -> json {
    if (!t) return nullptr;
    return format_instant(*t);
  };
  return {
      {"full_name", s.name},
      {"license", license},
      {"default_branch", s.default_branch ? json(*s.default_branch) : json(nullptr)},
      {"stargazers_count", s.stars},
      {"forks_count", s.forks},
      {"fork", s.is_fork},
      {"size", s.size},
      {"created_at", format_instant(s.created_at)},
      {"pushed_at", opt_time(s.pushed_at)},
      {"updated_at", opt_time(s.updated_at)},
      {"homepage", s.homepage ? json(*s.homepage) : json(nullptr)},
      {"language", s.main_language},
      {"has_wiki", s.has_wiki},
      {"archived", s.archived},
  };
}

RepoSummary summary_from_wire(const json& item) {
  if (!item.is_object()) throw ValidationError("item", "expected an object");
  RepoSummary s;
  auto name = opt_string(item, "full_name");
  if (!name) throw ValidationError("full_name", "required");
  s.name = *name;
  if (auto it = item.find("license"); it != item.end() && it->is_object()) {
    s.license = opt_string(*it, "name");
  }
  s.default_branch = opt_string(item, "default_branch");
  s.stars = count_or_zero(item, "stargazers_count");
  s.forks = count_or_zero(item, "forks_count");
  s.is_fork = flag_or_false(item, "fork");
  s.size = count_or_zero(item, "size");
  auto created = opt_instant(item, "created_at");
  if (!created) throw ValidationError("created_at", "required");
  s.created_at = *created;
  s.pushed_at = opt_instant(item, "pushed_at");
  s.updated_at = opt_instant(item, "updated_at");
  s.homepage = opt_string(item, "homepage");
  s.main_language = opt_string(item, "language").value_or("");
  s.has_wiki = flag_or_false(item, "has_wiki");
  s.archived = flag_or_false(item, "archived");
  return s;
}

std::string build_query(const SearchCriteria& c) {
  check_criteria(c);
  const bool dates = is_midnight(c.interval.start) && is_midnight(c.interval.end);
  std::string q;
  q += c.include_forks ? "fork:true" : "fork:false";
  if (c.public_only) q += "+is:public";
  q += "+language:";
  q += encode_value(c.language);
  q += '+';
  q += to_string(c.interval_field);
  q += ':';
  q += render_bound(c.interval.start, dates);
  q += "..";
  q += render_bound(c.interval.end, dates);
  if (c.min_stars > 0) {
    q += "+stars:>=";
    q += std::to_string(c.min_stars);
  }
  return q;
}

ParsedQuery parse_query(std::string_view query) {
  ParsedQuery p;
  bool have_language = false;
  bool have_range = false;
  bool have_fork = false;
  for (std::string_view part : split_plus(query)) {
    auto colon = part.find(':');
    if (colon == std::string_view::npos) {
      throw MalformedQuery("qualifier without ':' in '" + std::string{part} + "'");
    }
    std::string_view key = part.substr(0, colon);
    std::string_view value = part.substr(colon + 1);
    if (key == "fork") {
      if (value == "true") p.include_forks = true;
      else if (value == "false") p.include_forks = false;
      else throw MalformedQuery("fork must be true or false");
      have_fork = true;
    } else if (key == "is") {
      if (value != "public") throw MalformedQuery("only is:public is supported");
      p.public_only = true;
    } else if (key == "language") {
      if (value.empty()) throw MalformedQuery("empty language");
      p.language = decode_value(value);
      have_language = true;
    } else if (auto field = interval_field_from(key)) {
      auto dots = value.find("..");
      if (dots == std::string_view::npos) throw MalformedQuery("range needs '..'");
      auto from = parse_instant(value.substr(0, dots));
      auto to = parse_instant(value.substr(dots + 2));
      if (!from || !to || !(*from < *to)) throw MalformedQuery("bad range '" + std::string{value} + "'");
      if (have_range) throw MalformedQuery("duplicate range qualifier");
      p.field = *field;
      p.interval = TimeInterval{*from, *to};
      have_range = true;
    } else if (key == "stars") {
      if (value.substr(0, 2) != ">=") throw MalformedQuery("stars must be >=<n>");
      auto digits = value.substr(2);
      Count n = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
      if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty() || n < 0) {
        throw MalformedQuery("bad star threshold");
      }
      p.min_stars = n;
    } else {
      throw MalformedQuery("unknown qualifier '" + std::string{key} + "'");
    }
  }
  if (!have_language || !have_range || !have_fork) {
    throw MalformedQuery("query needs fork, language and a date range");
  }
  return p;
}

namespace {

template <typename Rewrite>
std::string rewrite_range(std::string_view query, Rewrite&& rewrite) {
  const char sep = query.find(' ') != std::string_view::npos ? ' ' : '+';
  std::string out;
  bool found = false;
  for (std::string_view part : split_plus(query)) {
    auto colon = part.find(':');
    std::string piece{part};
    if (colon != std::string_view::npos) {
      if (auto field = interval_field_from(part.substr(0, colon))) {
        std::string_view value = part.substr(colon + 1);
        auto dots = value.find("..");
        if (dots == std::string_view::npos) throw MalformedQuery("range needs '..'");
        bool from_date = false;
        bool to_date = false;
        auto from = parse_instant(value.substr(0, dots), from_date);
        auto to = parse_instant(value.substr(dots + 2), to_date);
        if (!from || !to) throw MalformedQuery("bad range '" + std::string{value} + "'");
        auto [a, b] = rewrite(*from, *to, to_date);
        piece = std::string{to_string(*field)} + ":" + format_instant(a) + ".." + format_instant(b);
        found = true;
      }
    }
    if (!out.empty()) out += sep;
    out += piece;
  }
  if (!found) throw MalformedQuery("query has no date range");
  return out;
}

}  // namespace

std::string to_inclusive_query(std::string_view query) {
  return rewrite_range(query, [](Instant from, Instant to, bool) {
    if (!(from < to)) throw MalformedQuery("empty range");
    return std::pair{from, to - Seconds{1}};
  });
}

std::string from_inclusive_query(std::string_view query) {
  return rewrite_range(query, [](Instant from, Instant to, bool to_date) {
    Instant end = to_date ? to + std::chrono::days{1} : to + Seconds{1};
    if (!(from < end)) throw MalformedQuery("empty range");
    return std::pair{from, end};
  });
}

}  // namespace ghs
