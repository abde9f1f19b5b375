#include "gswmt/rules.hpp"

#include <fstream>
#include <stdexcept>

#include "gswmt/utf8.hpp"

namespace gswmt {

bool is_consonant(char32_t cp) {
  switch (utf8::to_lower(cp)) {
    case U'b': case U'c': case U'd': case U'f': case U'g': case U'h': case U'j':
    case U'k': case U'l': case U'm': case U'n': case U'p': case U'q': case U'r':
    case U's': case U't': case U'v': case U'w': case U'x': case U'z':
      return true;
    default:
      return false;
  }
}

namespace {

struct ParsedSide {
  bool anchored_start = false, anchored_end = false;
  bool open_start = false, open_end = false;
  std::vector<RewriteRule::Item> items;
};

ParsedSide parse_side(const std::string& text) {
  ParsedSide side;
  std::u32string cps = utf8::decode(text);
  std::size_t i = 0;
  if (i < cps.size() && cps[i] == U'^') {
    side.anchored_start = true;
    ++i;
  }
  std::size_t end = cps.size();
  if (end > i && cps[end - 1] == U'$') {
    side.anchored_end = true;
    --end;
  }
  while (i < end) {
    if (cps[i] == U'.' && i + 1 < end && cps[i + 1] == U'*') {
      side.items.push_back({RewriteRule::Item::Kind::Wildcard, 0});
      i += 2;
    } else if (cps[i] == U'C') {
      side.items.push_back({RewriteRule::Item::Kind::Consonant, 0});
      ++i;
    } else {
      side.items.push_back({RewriteRule::Item::Kind::Literal, cps[i]});
      ++i;
    }
  }
  // Edge wildcards are context, not captures.
  if (!side.items.empty() && side.items.front().kind == RewriteRule::Item::Kind::Wildcard &&
      !side.anchored_start) {
    side.open_start = true;
    side.items.erase(side.items.begin());
  }
  if (!side.items.empty() && side.items.back().kind == RewriteRule::Item::Kind::Wildcard &&
      !side.anchored_end) {
    side.open_end = true;
    side.items.pop_back();
  }
  return side;
}

std::vector<RewriteRule::Item::Kind> placeholder_shape(const std::vector<RewriteRule::Item>& items) {
  std::vector<RewriteRule::Item::Kind> shape;
  for (const auto& it : items)
    if (it.kind != RewriteRule::Item::Kind::Literal) shape.push_back(it.kind);
  return shape;
}

}  // namespace

RewriteRule RewriteRule::parse(const std::string& pattern, const std::string& replacement) {
  if (pattern.empty()) throw std::runtime_error("rewrite rule with empty pattern");
  ParsedSide pat = parse_side(pattern);
  ParsedSide rep = parse_side(replacement);
  if (pat.items.empty() && !pat.open_start && !pat.open_end)
    throw std::runtime_error("rewrite rule pattern matches nothing: " + pattern);
  if (pat.open_start != rep.open_start || pat.open_end != rep.open_end ||
      pat.anchored_start != rep.anchored_start || pat.anchored_end != rep.anchored_end)
    throw std::runtime_error("rule sides disagree on anchors/wildcards: " + pattern + " -> " +
                             replacement);
  if (placeholder_shape(pat.items) != placeholder_shape(rep.items))
    throw std::runtime_error("rule sides disagree on placeholder structure: " + pattern + " -> " +
                             replacement);

  RewriteRule rule;
  rule.pattern_text = pattern;
  rule.replacement_text = replacement;
  rule.anchored_start = pat.anchored_start;
  rule.anchored_end = pat.anchored_end;
  rule.open_start = pat.open_start;
  rule.open_end = pat.open_end;
  rule.pattern = std::move(pat.items);
  rule.replacement = std::move(rep.items);
  return rule;
}

namespace {

struct Bindings {
  std::vector<char32_t> consonants;
  std::vector<std::u32string> wildcards;
};

// Lazy matcher with backtracking for interior wildcards. Returns true and
// sets `end` to the first position after the consumed region.
bool match_items(const std::u32string& word, std::size_t pos,
                 const std::vector<RewriteRule::Item>& items, std::size_t k, bool anchored_end,
                 Bindings& bind, std::size_t& end) {
  if (k == items.size()) {
    if (anchored_end && pos != word.size()) return false;
    end = pos;
    return true;
  }
  const auto& item = items[k];
  switch (item.kind) {
    case RewriteRule::Item::Kind::Literal:
      if (pos < word.size() && utf8::to_lower(word[pos]) == utf8::to_lower(item.ch))
        return match_items(word, pos + 1, items, k + 1, anchored_end, bind, end);
      return false;
    case RewriteRule::Item::Kind::Consonant:
      if (pos < word.size() && is_consonant(word[pos])) {
        bind.consonants.push_back(word[pos]);
        if (match_items(word, pos + 1, items, k + 1, anchored_end, bind, end)) return true;
        bind.consonants.pop_back();
      }
      return false;
    case RewriteRule::Item::Kind::Wildcard:
      for (std::size_t len = 0; pos + len <= word.size(); ++len) {
        bind.wildcards.push_back(word.substr(pos, len));
        if (match_items(word, pos + len, items, k + 1, anchored_end, bind, end)) return true;
        bind.wildcards.pop_back();
      }
      return false;
  }
  return false;
}

std::u32string build_replacement(const RewriteRule& rule, const Bindings& bind, bool upper_first) {
  std::u32string out;
  std::size_t ci = 0, wi = 0;
  for (const auto& item : rule.replacement) {
    switch (item.kind) {
      case RewriteRule::Item::Kind::Literal:
        out.push_back(item.ch);
        break;
      case RewriteRule::Item::Kind::Consonant:
        out.push_back(bind.consonants[ci++]);
        break;
      case RewriteRule::Item::Kind::Wildcard:
        out += bind.wildcards[wi++];
        break;
    }
  }
  if (!out.empty()) out[0] = upper_first ? utf8::to_upper(out[0]) : utf8::to_lower(out[0]);
  return out;
}

}  // namespace

std::string apply_rule(const std::string& word, const RewriteRule& rule) {
  const std::u32string cps = utf8::decode(word);
  std::u32string out;
  std::size_t p = 0;
  while (p < cps.size()) {
    if (rule.anchored_start && p != 0) {
      out += cps.substr(p);
      break;
    }
    Bindings bind;
    std::size_t end = p;
    if (match_items(cps, p, rule.pattern, 0, rule.anchored_end, bind, end) && end > p) {
      out += build_replacement(rule, bind, utf8::is_upper(cps[p]));
      p = end;
    } else {
      out.push_back(cps[p]);
      ++p;
    }
  }
  // An anchored-start pattern may also match the empty remainder of a fully
  // consumed word only when p == 0 and the word is empty; nothing to do here.
  return utf8::encode(out);
}

std::string apply_rules(const std::string& word, const RuleSet& rules) {
  std::string out = word;
  for (const auto& rule : rules.rules) out = apply_rule(out, rule);
  return out;
}

RuleSet RuleSet::default_rules() {
  RuleSet rs;
  const std::pair<const char*, const char*> table[] = {
      {".*scht.*", ".*st.*"},
      {".*schp.*", ".*sp.*"},
      {"^gäge.*", "^gegen.*"},
      {"CäC", "CeC"},
      {"^gm.*", "^gem.*"},
      {"^gf.*", "^gef.*"},
      {"^gw.*", "^gew.*"},
      {"^aa.*", "^an.*"},
      {".*ig$", ".*ung$"},
      {"^ii.*", "^ein.*"},
  };
  for (const auto& [p, r] : table) rs.rules.push_back(RewriteRule::parse(p, r));
  return rs;
}

const std::vector<std::pair<std::string, std::string>>& default_rule_examples() {
  static const std::vector<std::pair<std::string, std::string>> examples = {
      {"Angscht", "Angst"},     {"Schprache", "Sprache"}, {"Gägesatz", "Gegensatz"},
      {"Präsident", "President"}, {"Gmeinde", "Gemeinde"},  {"gfunde", "gefunde"},
      {"gwählt", "gewählt"},    {"Aafang", "Anfang"},     {"Regierig", "Regierung"},
      {"Iiwohner", "Einwohner"},
  };
  return examples;
}

bool any_rule_converts(const RuleSet& rules, const std::string& input,
                       const std::string& expected) {
  for (const auto& rule : rules.rules)
    if (apply_rule(input, rule) == expected) return true;
  return false;
}

RuleSet RuleSet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  RuleSet rs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("rules line " + std::to_string(lineno) +
                               " lacks a tab separator");
    rs.rules.push_back(RewriteRule::parse(line.substr(0, tab), line.substr(tab + 1)));
  }
  return rs;
}

void RuleSet::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& r : rules) out << r.pattern_text << '\t' << r.replacement_text << '\n';
}

}  // namespace gswmt
