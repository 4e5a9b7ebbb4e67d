#include "luxen/clause.hpp"

#include <algorithm>

namespace luxen {

std::string_view to_string(Channel c) noexcept {
  switch (c) {
    case Channel::x: return "x";
    case Channel::y: return "y";
    case Channel::color: return "color";
  }
  return "x";
}

std::string_view to_string(Aggregation a) noexcept {
  switch (a) {
    case Aggregation::none: return "none";
    case Aggregation::mean: return "mean";
    case Aggregation::sum: return "sum";
    case Aggregation::count: return "count";
    case Aggregation::min: return "min";
    case Aggregation::max: return "max";
    case Aggregation::variance: return "variance";
  }
  return "none";
}

std::string_view to_string(FilterOp op) noexcept {
  switch (op) {
    case FilterOp::eq: return "=";
    case FilterOp::gt: return ">";
    case FilterOp::lt: return "<";
    case FilterOp::le: return "<=";
    case FilterOp::ge: return ">=";
    case FilterOp::ne: return "!=";
  }
  return "=";
}

std::optional<Channel> parse_channel(std::string_view text) noexcept {
  auto t = trim(text);
  if (t == "x") return Channel::x;
  if (t == "y") return Channel::y;
  if (t == "color") return Channel::color;
  return std::nullopt;
}

std::optional<Aggregation> parse_aggregation(std::string_view text) noexcept {
  auto t = trim(text);
  if (t == "none") return Aggregation::none;
  if (t == "mean" || t == "average") return Aggregation::mean;
  if (t == "sum") return Aggregation::sum;
  if (t == "count") return Aggregation::count;
  if (t == "min") return Aggregation::min;
  if (t == "max") return Aggregation::max;
  if (t == "variance" || t == "var") return Aggregation::variance;
  return std::nullopt;
}

std::optional<FilterOp> parse_filter_op(std::string_view text) noexcept {
  auto t = trim(text);
  if (t == "=") return FilterOp::eq;
  if (t == ">") return FilterOp::gt;
  if (t == "<") return FilterOp::lt;
  if (t == "<=" || t == "≤") return FilterOp::le;
  if (t == ">=" || t == "≥") return FilterOp::ge;
  if (t == "!=" || t == "≠") return FilterOp::ne;
  return std::nullopt;
}

namespace {

void check_clause(const ClauseSpec& c, std::size_t pos) {
  const auto& a = c.attribute;
  if (!a.wildcard && a.names.empty()) throw ParseError("clause has no attribute", pos);
  if (!a.wildcard && a.constraint) throw ParseError("data_type constraint requires a wildcard attribute", pos);
  if (c.kind == ClauseKind::axis) {
    if (c.op || c.value.wildcard || !c.value.values.empty())
      throw ParseError("axis clause cannot carry a filter value", pos);
    if (c.bin_size && *c.bin_size <= 0) throw ParseError("bin_size must be positive", pos);
    return;
  }
  if (!c.op) throw ParseError("filter clause needs an operator", pos);
  if (c.channel || c.aggregation || c.bin_size)
    throw ParseError("channel, aggregation and bin_size apply to axis clauses only", pos);
  if (a.wildcard) throw ParseError("filter attribute cannot be a wildcard", pos);
  if (!c.value.wildcard && c.value.values.empty()) throw ParseError("filter clause needs a value", pos);
  if (c.value.wildcard && a.names.size() > 1)
    throw ParseError("union attribute with wildcard value is not supported", pos);
  if (c.value.wildcard && *c.op != FilterOp::eq)
    throw ParseError("wildcard values are only supported with '='", pos);
}

bool is_op_start(std::string_view s, std::size_t pos) {
  char ch = s[pos];
  if (ch == '=' || ch == '<' || ch == '>' || ch == '!') return true;
  // UTF-8 for the three unicode comparison signs share the prefix E2 89.
  return pos + 2 < s.size() + 0 && static_cast<unsigned char>(ch) == 0xE2 &&
         static_cast<unsigned char>(s[pos + 1]) == 0x89;
}

class ClauseParser {
 public:
  explicit ClauseParser(std::string_view s) : s_(s) {}

  ClauseSpec parse() {
    if (trim(s_).empty()) throw ParseError("empty clause", 0);
    ClauseSpec c;
    skip_ws();
    std::size_t start = pos_;
    if (peek() == '?' && wildcard_token_ends(pos_ + 1)) {
      ++pos_;
      c.attribute.wildcard = true;
    } else {
      c.attribute.names = name_list();
    }
    skip_ws();
    if (at_end()) {
      check_clause(c, start);
      return c;
    }
    if (peek() == '[') {
      modifiers(c);
      skip_ws();
      if (!at_end()) throw ParseError("unexpected text after modifiers", pos_);
      check_clause(c, start);
      return c;
    }
    if (is_op_start(s_, pos_)) {
      c.kind = ClauseKind::filter;
      c.op = op();
      skip_ws();
      if (at_end()) throw ParseError("filter clause needs a value", pos_);
      if (peek() == '?' && trim(s_.substr(pos_)) == "?") {
        c.value.wildcard = true;
        pos_ = s_.size();
      } else {
        c.value.values = value_list();
      }
      check_clause(c, start);
      return c;
    }
    throw ParseError(std::string("unexpected character '") + peek() + "'", pos_);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool wildcard_token_ends(std::size_t p) const {
    while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
    return p >= s_.size() || s_[p] == '[' || is_op_start(s_, p);
  }

  std::string quoted() {
    std::size_t open = pos_++;
    std::string out;
    while (!at_end()) {
      char ch = s_[pos_++];
      if (ch == '"') return out;
      if (ch == '\\' && !at_end()) ch = s_[pos_++];
      out.push_back(ch);
    }
    throw ParseError("unterminated quote", open);
  }

  std::string bare(std::string_view stops) {
    std::size_t begin = pos_;
    while (!at_end()) {
      char ch = s_[pos_];
      if (stops.find(ch) != std::string_view::npos) break;
      if (stops.find('=') != std::string_view::npos && is_op_start(s_, pos_)) break;
      ++pos_;
    }
    auto tok = trim(s_.substr(begin, pos_ - begin));
    if (tok.empty()) throw ParseError("expected a name", begin);
    return std::string(tok);
  }

  std::string token(std::string_view stops) {
    skip_ws();
    if (peek() == '"') return quoted();
    return bare(stops);
  }

  std::vector<std::string> name_list() {
    std::vector<std::string> names;
    names.push_back(token("=<>!|[],\""));
    skip_ws();
    while (peek() == '|') {
      ++pos_;
      names.push_back(token("=<>!|[],\""));
      skip_ws();
    }
    return names;
  }

  std::vector<std::string> value_list() {
    std::vector<std::string> values;
    values.push_back(token("|\""));
    skip_ws();
    while (peek() == '|') {
      ++pos_;
      values.push_back(token("|\""));
      skip_ws();
    }
    if (!at_end()) throw ParseError("unexpected text after value", pos_);
    return values;
  }

  FilterOp op() {
    std::size_t begin = pos_;
    auto two = s_.substr(pos_, 2);
    auto three = s_.substr(pos_, 3);
    FilterOp result;
    if (three == "≤") { result = FilterOp::le; pos_ += 3; }
    else if (three == "≥") { result = FilterOp::ge; pos_ += 3; }
    else if (three == "≠") { result = FilterOp::ne; pos_ += 3; }
    else if (two == "<=") { result = FilterOp::le; pos_ += 2; }
    else if (two == ">=") { result = FilterOp::ge; pos_ += 2; }
    else if (two == "!=") { result = FilterOp::ne; pos_ += 2; }
    else if (peek() == '<') { result = FilterOp::lt; ++pos_; }
    else if (peek() == '>') { result = FilterOp::gt; ++pos_; }
    else if (peek() == '=') { result = FilterOp::eq; ++pos_; }
    else throw ParseError("malformed operator", begin);
    if (!at_end() && (peek() == '=' || peek() == '<' || peek() == '>' || peek() == '!'))
      throw ParseError("malformed operator", begin);
    return result;
  }

  void modifiers(ClauseSpec& c) {
    ++pos_;  // '['
    bool first = true;
    for (;;) {
      skip_ws();
      if (peek() == ']' && first) { ++pos_; return; }
      std::size_t key_pos = pos_;
      auto key = token("=],\"");
      skip_ws();
      if (peek() != '=') throw ParseError("expected '=' after modifier '" + key + "'", pos_);
      ++pos_;
      std::size_t val_pos = pos_;
      auto val = token("],\"");
      if (key == "channel") {
        if (c.channel) throw ParseError("duplicate channel", key_pos);
        c.channel = parse_channel(val);
        if (!c.channel) throw ParseError("unknown channel '" + val + "'", val_pos);
      } else if (key == "aggregation") {
        if (c.aggregation) throw ParseError("duplicate aggregation", key_pos);
        c.aggregation = parse_aggregation(val);
        if (!c.aggregation) throw ParseError("unknown aggregation '" + val + "'", val_pos);
      } else if (key == "bin_size") {
        if (c.bin_size) throw ParseError("duplicate bin_size", key_pos);
        auto n = parse_int(val);
        if (!n || *n <= 0 || *n > 100000) throw ParseError("bin_size must be a positive integer", val_pos);
        c.bin_size = static_cast<int>(*n);
      } else if (key == "data_type") {
        if (c.attribute.constraint) throw ParseError("duplicate data_type", key_pos);
        c.attribute.constraint = parse_semantic_type(val);
        if (!c.attribute.constraint) throw ParseError("unknown data_type '" + val + "'", val_pos);
      } else {
        throw ParseError("unknown modifier '" + key + "'", key_pos);
      }
      first = false;
      skip_ws();
      if (peek() == ',') { ++pos_; continue; }
      if (peek() == ']') { ++pos_; return; }
      throw ParseError("expected ',' or ']'", pos_);
    }
  }
};

bool needs_quotes(std::string_view s, std::string_view specials) {
  if (s.empty() || s == "?" || trim(s) != s) return true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (specials.find(s[i]) != std::string_view::npos || s[i] == '\\') return true;
    if (static_cast<unsigned char>(s[i]) == 0xE2) return true;
  }
  return false;
}

std::string quote_if_needed(std::string_view s, std::string_view specials) {
  if (!needs_quotes(s, specials)) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

ClauseSpec parse_clause(std::string_view text) { return ClauseParser(text).parse(); }

std::string print_clause(const ClauseSpec& c) {
  std::string out;
  if (c.attribute.wildcard) {
    out = "?";
  } else {
    for (std::size_t i = 0; i < c.attribute.names.size(); ++i) {
      if (i) out += '|';
      out += quote_if_needed(c.attribute.names[i], "=<>!|[],\"");
    }
  }
  if (c.kind == ClauseKind::axis) {
    std::vector<std::string> mods;
    if (c.attribute.constraint) mods.push_back("data_type=" + std::string(to_string(*c.attribute.constraint)));
    if (c.channel) mods.push_back("channel=" + std::string(to_string(*c.channel)));
    if (c.aggregation) mods.push_back("aggregation=" + std::string(to_string(*c.aggregation)));
    if (c.bin_size) mods.push_back("bin_size=" + std::to_string(*c.bin_size));
    if (!mods.empty()) {
      out += '[';
      for (std::size_t i = 0; i < mods.size(); ++i) {
        if (i) out += ", ";
        out += mods[i];
      }
      out += ']';
    }
    return out;
  }
  out += to_string(*c.op);
  if (c.value.wildcard) return out + "?";
  for (std::size_t i = 0; i < c.value.values.size(); ++i) {
    if (i) out += '|';
    out += quote_if_needed(c.value.values[i], "|\"=<>!");
  }
  return out;
}

namespace {

std::string json_scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return format_cell(v.get<double>());
  throw ParseError("clause value must be a scalar", 0);
}

}  // namespace

ClauseSpec clause_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_clause(j.get<std::string>());
  if (!j.is_object()) throw ParseError("clause must be a string or an object", 0);
  ClauseSpec c;
  if (!j.contains("attribute")) throw ParseError("clause object needs 'attribute'", 0);
  const auto& attr = j.at("attribute");
  if (attr.is_string() && attr.get<std::string>() == "?") {
    c.attribute.wildcard = true;
  } else if (attr.is_string()) {
    c.attribute.names.push_back(attr.get<std::string>());
  } else if (attr.is_array()) {
    for (const auto& n : attr) {
      if (!n.is_string()) throw ParseError("attribute names must be strings", 0);
      c.attribute.names.push_back(n.get<std::string>());
    }
  } else {
    throw ParseError("attribute must be a string or a list of strings", 0);
  }
  if (j.contains("data_type")) {
    c.attribute.constraint = parse_semantic_type(j.at("data_type").get<std::string>());
    if (!c.attribute.constraint) throw ParseError("unknown data_type", 0);
  }
  if (j.contains("channel")) {
    c.channel = parse_channel(j.at("channel").get<std::string>());
    if (!c.channel) throw ParseError("unknown channel", 0);
  }
  if (j.contains("aggregation")) {
    c.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
    if (!c.aggregation) throw ParseError("unknown aggregation", 0);
  }
  if (j.contains("bin_size")) {
    if (!j.at("bin_size").is_number_integer()) throw ParseError("bin_size must be an integer", 0);
    c.bin_size = j.at("bin_size").get<int>();
  }
  if (j.contains("filter_op")) {
    c.kind = ClauseKind::filter;
    c.op = parse_filter_op(j.at("filter_op").get<std::string>());
    if (!c.op) throw ParseError("malformed operator", 0);
    if (!j.contains("value")) throw ParseError("filter clause needs a value", 0);
    const auto& v = j.at("value");
    if (v.is_string() && v.get<std::string>() == "?") {
      c.value.wildcard = true;
    } else if (v.is_array()) {
      for (const auto& e : v) c.value.values.push_back(json_scalar_text(e));
    } else {
      c.value.values.push_back(json_scalar_text(v));
    }
  } else if (j.contains("value")) {
    throw ParseError("value given without filter_op", 0);
  }
  check_clause(c, 0);
  return c;
}

nlohmann::json clause_to_json(const ClauseSpec& c) {
  nlohmann::json j = nlohmann::json::object();
  if (c.attribute.wildcard) j["attribute"] = "?";
  else if (c.attribute.names.size() == 1) j["attribute"] = c.attribute.names.front();
  else j["attribute"] = c.attribute.names;
  if (c.attribute.constraint) j["data_type"] = std::string(to_string(*c.attribute.constraint));
  if (c.channel) j["channel"] = std::string(to_string(*c.channel));
  if (c.aggregation) j["aggregation"] = std::string(to_string(*c.aggregation));
  if (c.bin_size) j["bin_size"] = *c.bin_size;
  if (c.op) {
    j["filter_op"] = std::string(to_string(*c.op));
    if (c.value.wildcard) j["value"] = "?";
    else if (c.value.values.size() == 1) j["value"] = c.value.values.front();
    else j["value"] = c.value.values;
  }
  return j;
}

IntentSpec parse_intent_list(std::string_view text) {
  IntentSpec intent;
  std::size_t begin = 0;
  int depth = 0;
  bool in_quote = false;
  auto flush = [&](std::size_t end) {
    auto piece = text.substr(begin, end - begin);
    if (trim(piece).empty()) throw ParseError("empty clause", begin);
    try {
      intent.clauses.push_back(parse_clause(piece));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()), begin + e.position());
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quote) {
      if (ch == '\\') ++i;
      else if (ch == '"') in_quote = false;
      continue;
    }
    if (ch == '"') in_quote = true;
    else if (ch == '[') ++depth;
    else if (ch == ']') depth = std::max(0, depth - 1);
    else if (ch == ',' && depth == 0) {
      flush(i);
      begin = i + 1;
    }
  }
  flush(text.size());
  return intent;
}

IntentSpec intent_from_json(const nlohmann::json& j) {
  const nlohmann::json* list = &j;
  if (j.is_object() && j.contains("intent")) list = &j.at("intent");
  if (!list->is_array()) throw ParseError("intent must be a list of clauses", 0);
  IntentSpec intent;
  for (std::size_t i = 0; i < list->size(); ++i) {
    try {
      intent.clauses.push_back(clause_from_json((*list)[i]));
    } catch (const ParseError& e) {
      throw ParseError("clause " + std::to_string(i) + ": " + e.what(), e.position());
    }
  }
  return intent;
}

nlohmann::json intent_to_json(const IntentSpec& intent) {
  auto arr = nlohmann::json::array();
  for (const auto& c : intent.clauses) arr.push_back(print_clause(c));
  return arr;
}

}  // namespace luxen
