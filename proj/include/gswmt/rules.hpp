#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gswmt {

// One orthographic rewrite rule over words, with the meta-characters
//   ^   anchor at word start          $   anchor at word end
//   .*  any character run             C   a single consonant
// Edge wildcards act as context (the pattern may match anywhere); interior
// wildcards capture lazily. Wildcards and C positions map 1:1 between
// pattern and replacement.
struct RewriteRule {
  struct Item {
    enum class Kind { Literal, Consonant, Wildcard };
    Kind kind = Kind::Literal;
    char32_t ch = 0;
  };

  std::string pattern_text;
  std::string replacement_text;
  bool anchored_start = false;
  bool anchored_end = false;
  bool open_start = false;  // leading .*
  bool open_end = false;    // trailing .*
  std::vector<Item> pattern;
  std::vector<Item> replacement;

  static RewriteRule parse(const std::string& pattern, const std::string& replacement);
};

struct RuleSet {
  std::vector<RewriteRule> rules;  // application order is significant

  // The built-in ten-rule cascade (scht>st, schp>sp, ^gäge>^gegen, CäC>CeC,
  // ^gm>^gem, ^gf>^gef, ^gw>^gew, ^aa>^an, ig$>ung$, ^ii>^ein).
  static RuleSet default_rules();

  // UTF-8 TSV pattern<TAB>replacement; lines starting with # are comments.
  static RuleSet load(const std::string& path);
  void save(const std::string& path) const;
};

// Matching is case-insensitive; each rule replaces all matches left to right,
// non-overlapping; the replacement takes the case of the first matched
// character; the output of rule i feeds rule i+1.
std::string apply_rules(const std::string& word, const RuleSet& rules);

std::string apply_rule(const std::string& word, const RewriteRule& rule);

bool is_consonant(char32_t cp);

// The per-rule conversion fixtures: row i demonstrates rule i of the default
// cascade. (Row 7's "gwählt" is not cascade-stable: the CäC rule would touch
// its ä first, so fixtures are checked rule by rule, not through the cascade.)
const std::vector<std::pair<std::string, std::string>>& default_rule_examples();

// True when some single rule of the set converts input to expected.
bool any_rule_converts(const RuleSet& rules, const std::string& input,
                       const std::string& expected);

}  // namespace gswmt
