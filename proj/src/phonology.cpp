#include "pronsim/phonology.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pronsim {

namespace {

// Splits on LF, stripping a trailing CR from each line.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> toks;
  std::istringstream iss(s);
  std::string t;
  while (iss >> t) toks.push_back(t);
  return toks;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw ParseError("line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

PhoneInventory::PhoneInventory(std::vector<std::string> symbols)
    : symbols_(std::move(symbols)) {
  if (symbols_.empty())
    throw std::invalid_argument("phone inventory must be non-empty");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty())
      throw std::invalid_argument("empty phone symbol");
    if (!index_.emplace(symbols_[i], static_cast<PhoneId>(i)).second)
      throw std::invalid_argument("duplicate phone symbol: " + symbols_[i]);
  }
}

std::optional<PhoneId> PhoneInventory::find(const std::string& symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool PhoneInventory::valid(const Pronunciation& p) const {
  if (p.empty()) return false;
  for (PhoneId id : p)
    if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) return false;
  return true;
}

std::uint64_t PhoneInventory::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  };
  for (const auto& s : symbols_) {
    for (char c : s) mix(c);
    mix('\n');
  }
  return h;
}

Lexicon::Lexicon(std::vector<LexiconEntry> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].word.empty())
      throw std::invalid_argument("empty word in lexicon");
    if (entries_[i].canonical.empty())
      throw std::invalid_argument("empty canonical for " + entries_[i].word);
    if (!index_.emplace(entries_[i].word, i).second)
      throw std::invalid_argument("duplicate word: " + entries_[i].word);
  }
}

std::optional<std::size_t> Lexicon::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PhoneInventory parse_inventory(const std::string& text) {
  std::vector<std::string> symbols;
  std::unordered_map<std::string, std::size_t> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    const auto toks = split_spaces(line);
    if (toks.size() != 1) fail(i + 1, "expected a single phone symbol");
    if (!seen.emplace(toks[0], i + 1).second)
      fail(i + 1, "duplicate symbol '" + toks[0] + "'");
    symbols.push_back(toks[0]);
  }
  if (symbols.empty()) throw ParseError("empty phone inventory");
  return PhoneInventory(std::move(symbols));
}

namespace {

// Shared line format of lexicon and corpus files.
std::pair<std::string, Pronunciation> parse_entry_line(
    const std::string& line, std::size_t line_no, const PhoneInventory& inv) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos) fail(line_no, "missing TAB separator");
  const std::string word = line.substr(0, tab);
  if (word.empty()) fail(line_no, "empty word");
  const auto phones = split_spaces(line.substr(tab + 1));
  if (phones.empty()) fail(line_no, "no phones after TAB");
  Pronunciation p;
  for (const auto& sym : phones) {
    const auto id = inv.find(sym);
    if (!id) fail(line_no, "unknown phone symbol '" + sym + "'");
    p.push_back(*id);
  }
  return {word, std::move(p)};
}

}  // namespace

Lexicon parse_lexicon(const std::string& text, const PhoneInventory& inv) {
  std::vector<LexiconEntry> entries;
  std::unordered_map<std::string, std::size_t> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto [word, pron] = parse_entry_line(lines[i], i + 1, inv);
    if (!seen.emplace(word, i + 1).second)
      fail(i + 1, "duplicate word '" + word + "'");
    entries.push_back({std::move(word), std::move(pron)});
  }
  return Lexicon(std::move(entries));
}

Corpus parse_corpus(const std::string& text, const PhoneInventory& inv,
                    const Lexicon& lex) {
  Corpus corpus;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto [word, pron] = parse_entry_line(lines[i], i + 1, inv);
    if (!lex.find(word))
      fail(i + 1, "word '" + word + "' not in lexicon");
    corpus.push_back({std::move(word), std::move(pron)});
  }
  return corpus;
}

std::string format_pronunciation(const Pronunciation& p,
                                 const PhoneInventory& inv) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ' ';
    out += inv.symbol(p[i]);
  }
  return out;
}

std::string format_inventory(const PhoneInventory& inv) {
  std::string out;
  for (const auto& s : inv.symbols()) {
    out += s;
    out += '\n';
  }
  return out;
}

std::string format_lexicon(const Lexicon& lex, const PhoneInventory& inv) {
  std::string out;
  for (const auto& e : lex.entries()) {
    out += e.word;
    out += '\t';
    out += format_pronunciation(e.canonical, inv);
    out += '\n';
  }
  return out;
}

std::string format_corpus(const Corpus& corpus, const PhoneInventory& inv) {
  std::string out;
  for (const auto& e : corpus) {
    out += e.word;
    out += '\t';
    out += format_pronunciation(e.surface, inv);
    out += '\n';
  }
  return out;
}

std::size_t levenshtein(const Pronunciation& a, const Pronunciation& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::optional<std::string> exact_lookup(const Pronunciation& surface,
                                        const Lexicon& lex) {
  for (const auto& e : lex.entries())
    if (e.canonical == surface) return e.word;
  return std::nullopt;
}

std::vector<std::string> levenshtein_lookup(const Pronunciation& surface,
                                            const Lexicon& lex,
                                            std::size_t k) {
  if (k == 0 || k > lex.size())
    throw std::invalid_argument("levenshtein_lookup: k out of range");
  std::vector<std::size_t> order(lex.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> dist(lex.size());
  for (std::size_t i = 0; i < lex.size(); ++i)
    dist[i] = levenshtein(surface, lex.entry(i).canonical);
  std::stable_sort(order.begin(), order.end(),
                   [&dist](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(lex.entry(order[i]).word);
  return out;
}

}  // namespace pronsim
