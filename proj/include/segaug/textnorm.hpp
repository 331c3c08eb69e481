// textnorm.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Reversible transcript cleaning for forced alignment.
//
// clean() maps a transcript to a list of CleanUnits. Each unit keeps
// the verbatim original token(s), any unvoiced text attached to it
// (event tags like "(Laughter)", utterance-initial speaker labels),
// and the cleaned uppercase words that actually get aligned. Integer
// tokens are spelled out. reverse_clean() reconstructs the original
// transcript (whitespace-normalized) from any run of units, unvoiced
// text included.

#ifndef SEGAUG_TEXTNORM_HPP_
#define SEGAUG_TEXTNORM_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "segaug/error.hpp"
#include "segaug/io.hpp"
#include "segaug/log.hpp"
#include "segaug/util.hpp"

namespace segaug {

// Characters the alignment vocabulary accepts inside cleaned words.
struct AlignCharSet {
  std::unordered_set<char32_t> chars;

  static AlignCharSet default_english() {
    AlignCharSet v;
    for (char32_t c = U'A'; c <= U'Z'; ++c) v.chars.insert(c);
    v.chars.insert(U'\'');
    v.chars.insert(U'-');
    return v;
  }

  bool contains(char32_t c) const { return chars.count(c) != 0; }
};

struct CleanUnit {
  std::string original_text;             // verbatim, casing and all
  std::string unvoiced_prefix;           // e.g. "(Laughter)"
  std::string unvoiced_suffix;
  std::vector<std::string> cleaned_words;  // uppercase, vocab-only
  size_t doc_char_offset = 0;            // into the normalized transcript
};

// token<TAB>SPELLED FORM per line
using SpellLexicon = std::map<std::string, std::vector<std::string>>;

inline SpellLexicon load_spell_lexicon(const std::filesystem::path& path) {
  SpellLexicon lex;
  for_each_line(path, [&](const std::string& line, size_t lineno) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path.string() + " line " + std::to_string(lineno) +
                      ": expected token<TAB>spelled form");
    lex[trim(line.substr(0, tab))] =
        split_whitespace(to_upper_ascii(trim(line.substr(tab + 1))));
  });
  return lex;
}

// ── Number spelling ──────────────────────────────────────────────────

// Accepts plain digit runs and 1,234-style grouped numerals; rejects
// anything else (decimals, signs, ordinals).
inline bool is_integer_numeral(const std::string& token) {
  if (token.empty() || token.size() > 19) return false;
  bool any_digit = false;
  bool grouped = token.find(',') != std::string::npos;
  if (!grouped) {
    for (char c : token)
      if (c < '0' || c > '9') return false;
    return true;
  }
  std::vector<std::string> groups = split(token, ',');
  for (size_t i = 0; i < groups.size(); ++i) {
    const std::string& g = groups[i];
    if (g.empty()) return false;
    if (i == 0 && g.size() > 3) return false;
    if (i > 0 && g.size() != 3) return false;
    for (char c : g)
      if (c < '0' || c > '9') return false;
    any_digit = true;
  }
  return any_digit;
}

namespace detail {

inline const char* const kOnes[] = {
    "ZERO", "ONE", "TWO", "THREE", "FOUR", "FIVE", "SIX", "SEVEN",
    "EIGHT", "NINE", "TEN", "ELEVEN", "TWELVE", "THIRTEEN", "FOURTEEN",
    "FIFTEEN", "SIXTEEN", "SEVENTEEN", "EIGHTEEN", "NINETEEN"};
inline const char* const kTens[] = {"", "", "TWENTY", "THIRTY", "FORTY",
                                    "FIFTY", "SIXTY", "SEVENTY", "EIGHTY",
                                    "NINETY"};
inline const char* const kScales[] = {"", "THOUSAND", "MILLION", "BILLION",
                                      "TRILLION", "QUADRILLION"};

inline void spell_below_thousand(uint64_t n, std::vector<std::string>* out) {
  if (n >= 100) {
    out->push_back(kOnes[n / 100]);
    out->push_back("HUNDRED");
    n %= 100;
  }
  if (n >= 20) {
    out->push_back(kTens[n / 10]);
    n %= 10;
  }
  if (n > 0) out->push_back(kOnes[n]);
}

}  // namespace detail

// Cardinal English words for an integer numeral; a lexicon entry for
// the exact token wins when provided.
inline std::vector<std::string> spell_number(
    const std::string& token, const SpellLexicon* lexicon = nullptr) {
  if (lexicon) {
    auto it = lexicon->find(token);
    if (it != lexicon->end()) return it->second;
  }
  if (!is_integer_numeral(token))
    throw DataError("not an integer numeral: '" + token + "'");
  std::string digits;
  for (char c : token)
    if (c != ',') digits.push_back(c);
  uint64_t n = 0;
  for (char c : digits) {
    if (n > (UINT64_MAX - 9) / 10)
      throw DataError("numeral too large to spell: '" + token + "'");
    n = n * 10 + static_cast<uint64_t>(c - '0');
  }
  if (n == 0) return {"ZERO"};

  std::vector<uint64_t> groups;  // base-1000 digits, least significant first
  while (n > 0) {
    groups.push_back(n % 1000);
    n /= 1000;
  }
  std::vector<std::string> out;
  for (size_t i = groups.size(); i-- > 0;) {
    if (groups[i] == 0) continue;
    detail::spell_below_thousand(groups[i], &out);
    if (i > 0) out.push_back(detail::kScales[i]);
  }
  return out;
}

// ── Cleaning ─────────────────────────────────────────────────────────

namespace detail {

inline bool starts_event(const std::string& tok) {
  return !tok.empty() && (tok.front() == '(' || tok.front() == '[');
}

inline bool closes_event(const std::string& tok) {
  return tok.find(')') != std::string::npos ||
         tok.find(']') != std::string::npos;
}

// "Chris" / "Anderson:" style tokens for utterance-initial speaker
// labels: letters (with optional . - ') and possibly a trailing colon.
inline bool is_capitalized_label_word(const std::string& tok,
                                      bool* ends_colon) {
  std::vector<char32_t> cps = utf8_decode(tok);
  if (cps.empty()) return false;
  *ends_colon = cps.back() == U':';
  size_t n = cps.size() - (*ends_colon ? 1 : 0);
  if (n == 0) return false;
  if (!(cps[0] >= U'A' && cps[0] <= U'Z')) return false;
  for (size_t i = 1; i < n; ++i) {
    char32_t c = cps[i];
    bool ok = (c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z') ||
              c == U'.' || c == U'-' || c == U'\'';
    if (!ok) return false;
  }
  return true;
}

// Strips everything outside the vocabulary and uppercases ASCII.
inline std::string filter_to_vocab(const std::string& tok,
                                   const AlignCharSet& vocab) {
  std::string out;
  size_t i = 0;
  while (i < tok.size()) {
    char32_t c = utf8_next(tok, i);
    if (c >= U'a' && c <= U'z') c = c - U'a' + U'A';
    if (vocab.contains(c)) utf8_append(out, c);
  }
  return out;
}

// The numeric core of a token: digits (and grouping commas) with any
// leading/trailing punctuation removed. Empty when the token is not a
// punctuation-wrapped numeral (letters anywhere disqualify it).
inline std::string numeral_core(const std::string& tok, std::string* head,
                                std::string* tail) {
  size_t b = 0, e = tok.size();
  auto is_core = [](char c) { return (c >= '0' && c <= '9') || c == ','; };
  auto is_letter = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           static_cast<unsigned char>(c) >= 0x80;
  };
  while (b < e && !is_core(tok[b])) ++b;
  while (e > b && !is_core(tok[e - 1])) --e;
  // grouping commas must be interior; trailing "," belongs to the tail
  while (e > b && tok[e - 1] == ',') --e;
  if (b >= e) return "";
  for (size_t i = b; i < e; ++i)
    if (!is_core(tok[i])) return "";
  for (size_t i = 0; i < b; ++i)
    if (is_letter(tok[i])) return "";
  for (size_t i = e; i < tok.size(); ++i)
    if (is_letter(tok[i])) return "";
  *head = tok.substr(0, b);
  *tail = tok.substr(e);
  return tok.substr(b, e - b);
}

}  // namespace detail

struct CleanStats {
  size_t attached_empty_tokens = 0;  // tokens with no voiced characters
  size_t passed_through_numbers = 0;  // decimals/ordinals etc.
};

// Splits a transcript into CleanUnits ready for alignment.
inline std::vector<CleanUnit> clean(const std::string& transcript,
                                    const AlignCharSet& vocab,
                                    const SpellLexicon* lexicon = nullptr,
                                    CleanStats* stats = nullptr) {
  if (transcript.empty()) throw DataError("clean: empty transcript");
  const std::string text = collapse_whitespace(transcript);
  std::vector<std::string> tokens = split_whitespace(text);

  // token start offsets within the normalized text
  std::vector<size_t> offsets(tokens.size(), 0);
  {
    size_t pos = 0;
    for (size_t i = 0; i < tokens.size(); ++i) {
      offsets[i] = pos;
      pos += tokens[i].size() + 1;
    }
  }

  std::vector<CleanUnit> units;
  std::string pending;        // unvoiced text waiting for the next unit
  size_t pending_offset = 0;  // offset of the first pending token

  auto flush_pending_into = [&](std::string* slot) {
    if (pending.empty()) return;
    if (!slot->empty()) slot->append(" ");
    slot->append(pending);
    pending.clear();
  };
  auto add_pending = [&](const std::string& text_piece, size_t offset) {
    if (pending.empty()) pending_offset = offset;
    if (!pending.empty()) pending.push_back(' ');
    pending.append(text_piece);
  };

  size_t i = 0;

  // utterance-initial speaker label: capitalized words ending in ':'
  {
    size_t j = 0;
    bool colon = false;
    while (j < tokens.size() && !colon) {
      bool ends_colon = false;
      if (!detail::is_capitalized_label_word(tokens[j], &ends_colon)) break;
      colon = ends_colon;
      ++j;
    }
    if (colon && j > 0 && j < tokens.size()) {
      std::string label;
      for (size_t k = 0; k < j; ++k) {
        if (k) label.push_back(' ');
        label += tokens[k];
      }
      add_pending(label, offsets[0]);
      i = j;
    }
  }

  while (i < tokens.size()) {
    // event tags: "(Laughter)", "[Music]", possibly spanning tokens
    if (detail::starts_event(tokens[i])) {
      size_t close = i;
      while (close < tokens.size() && !detail::closes_event(tokens[close]))
        ++close;
      if (close < tokens.size()) {
        std::string event;
        for (size_t k = i; k <= close; ++k) {
          if (k > i) event.push_back(' ');
          event += tokens[k];
        }
        add_pending(event, offsets[i]);
        i = close + 1;
        continue;
      }
      // unbalanced parenthesis: fall through and treat as plain text
    }

    const std::string& tok = tokens[i];
    std::vector<std::string> words;

    std::string head, tail;
    std::string core = detail::numeral_core(tok, &head, &tail);
    if (!core.empty() && is_integer_numeral(core)) {
      words = spell_number(core, lexicon);
      // surrounding punctuation carries no voiced characters
    } else {
      if (!core.empty() || tok.find_first_of("0123456789") !=
                               std::string::npos) {
        if (stats) ++stats->passed_through_numbers;
        log_debug("non-integer numeric token passed through filter: '" +
                  tok + "'");
      }
      std::string filtered = detail::filter_to_vocab(tok, vocab);
      if (!filtered.empty()) words.push_back(filtered);
    }

    if (words.empty()) {
      // nothing voiced survived; keep the token attached to a neighbor
      if (stats) ++stats->attached_empty_tokens;
      add_pending(tok, offsets[i]);
      ++i;
      continue;
    }

    CleanUnit unit;
    unit.original_text = tok;
    unit.cleaned_words = std::move(words);
    unit.doc_char_offset = pending.empty() ? offsets[i] : pending_offset;
    flush_pending_into(&unit.unvoiced_prefix);
    units.push_back(std::move(unit));
    ++i;
  }

  if (!pending.empty()) {
    if (units.empty()) {
      log_warn("clean: transcript contains no voiced tokens");
      return units;
    }
    flush_pending_into(&units.back().unvoiced_suffix);
  }
  return units;
}

// Reconstructs the transcript covered by `units` (prefixes, originals,
// suffixes, space-joined).
inline std::string reverse_clean(const std::vector<CleanUnit>& units) {
  std::string out;
  auto append_part = [&](const std::string& part) {
    if (part.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += part;
  };
  for (const CleanUnit& unit : units) {
    append_part(unit.unvoiced_prefix);
    append_part(unit.original_text);
    append_part(unit.unvoiced_suffix);
  }
  return out;
}

// ── Post-editing ─────────────────────────────────────────────────────

namespace detail {

inline bool ends_sentence(const std::string& text) {
  std::vector<char32_t> cps = utf8_decode(text);
  size_t i = cps.size();
  auto is_closer = [](char32_t c) {
    return c == U'"' || c == U'\'' || c == U')' || c == U']' ||
           c == U'”' /* ” */ || c == U'’' /* ’ */ ||
           c == U'»' /* » */ || c == U'›' /* › */;
  };
  while (i > 0 && is_closer(cps[i - 1])) --i;
  if (i == 0) return false;
  char32_t last = cps[i - 1];
  return last == U'.' || last == U'?' || last == U'!';
}

}  // namespace detail

// Uppercases the first alphabetic character of a recovered segment when
// it starts the document or follows sentence-final punctuation. Never
// touches punctuation.
inline std::string post_edit(const std::string& segment_text,
                             const std::optional<std::string>& prev_context) {
  bool sentence_start =
      !prev_context || detail::ends_sentence(trim(*prev_context));
  if (!sentence_start) return segment_text;
  std::string out = segment_text;
  for (size_t i = 0; i < out.size(); ++i) {
    char c = out[i];
    if (c >= 'a' && c <= 'z') {
      out[i] = static_cast<char>(c - 'a' + 'A');
      break;
    }
    if (c >= 'A' && c <= 'Z') break;
    if (static_cast<unsigned char>(c) >= 0x80) break;  // non-ASCII letter
  }
  return out;
}

}  // namespace segaug

#endif  // SEGAUG_TEXTNORM_HPP_
