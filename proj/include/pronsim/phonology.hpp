#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pronsim {

using PhoneId = int;

// Phone sequence; ids index into a PhoneInventory.  Always length >= 1.
using Pronunciation = std::vector<PhoneId>;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Closed, ordered set of phone symbols; ids are 0..size-1 in file order.
class PhoneInventory {
 public:
  explicit PhoneInventory(std::vector<std::string> symbols);

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(PhoneId id) const { return symbols_.at(id); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::optional<PhoneId> find(const std::string& symbol) const;
  bool valid(const Pronunciation& p) const;

  // FNV-1a over the newline-joined symbol list; stored in checkpoints so a
  // model is never applied against a different inventory.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, PhoneId> index_;
};

struct LexiconEntry {
  std::string word;
  Pronunciation canonical;
};

class Lexicon {
 public:
  explicit Lexicon(std::vector<LexiconEntry> entries);

  std::size_t size() const { return entries_.size(); }
  const LexiconEntry& entry(std::size_t i) const { return entries_[i]; }
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::optional<std::size_t> find(const std::string& word) const;

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct CorpusExample {
  std::string word;
  Pronunciation surface;
};

using Corpus = std::vector<CorpusExample>;

// One symbol per line; blank lines and '#' comment lines ignored.
PhoneInventory parse_inventory(const std::string& text);

// One entry per line: word<TAB>phone( phone)*.  LF or CRLF.
Lexicon parse_lexicon(const std::string& text, const PhoneInventory& inv);

// Same line format as the lexicon; every word must exist in lex and
// duplicate (word, surface) lines are permitted.
Corpus parse_corpus(const std::string& text, const PhoneInventory& inv,
                    const Lexicon& lex);

std::string format_inventory(const PhoneInventory& inv);
std::string format_lexicon(const Lexicon& lex, const PhoneInventory& inv);
std::string format_corpus(const Corpus& corpus, const PhoneInventory& inv);

std::string format_pronunciation(const Pronunciation& p,
                                 const PhoneInventory& inv);

// Unit-cost edit distance over phone ids.
std::size_t levenshtein(const Pronunciation& a, const Pronunciation& b);

// First entry (lexicon order) whose canonical equals surface exactly.
std::optional<std::string> exact_lookup(const Pronunciation& surface,
                                        const Lexicon& lex);

// k words sorted ascending by edit distance to surface, lexicon-order ties.
std::vector<std::string> levenshtein_lookup(const Pronunciation& surface,
                                            const Lexicon& lex, std::size_t k);

}  // namespace pronsim
