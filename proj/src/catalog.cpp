#include "promptga/catalog.hpp"

#include "promptga/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <unordered_set>

namespace promptga {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

KeywordCatalog::KeywordCatalog(std::vector<Keyword> keywords) : keywords_(std::move(keywords)) {
  std::unordered_set<std::string> seen;
  for (const auto& kw : keywords_) {
    if (kw.text.empty()) throw ValidationError("keyword text is empty");
    if (trim(kw.text) != kw.text) throw ValidationError("keyword has surrounding whitespace: '" + kw.text + "'");
    if (kw.text.find(',') != std::string::npos)
      throw ValidationError("keyword contains a comma: '" + kw.text + "'");
    if (kw.popularity < 0) throw ValidationError("negative popularity for '" + kw.text + "'");
    if (!seen.insert(kw.text).second) throw ValidationError("duplicate keyword '" + kw.text + "'");
  }
  std::sort(keywords_.begin(), keywords_.end(), [](const Keyword& a, const Keyword& b) {
    if (a.popularity != b.popularity) return a.popularity > b.popularity;
    return a.text < b.text;
  });
  for (std::size_t i = 0; i < keywords_.size(); ++i) keywords_[i].index = i;
}

std::optional<std::size_t> KeywordCatalog::find(std::string_view text) const {
  for (const auto& kw : keywords_)
    if (kw.text == text) return kw.index;
  return std::nullopt;
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::portraits: return "portraits";
    case Category::landscapes: return "landscapes";
    case Category::buildings: return "buildings";
    case Category::interiors: return "interiors";
    case Category::animals: return "animals";
    case Category::other: return "other";
  }
  return "other";
}

std::string_view to_string(Orientation o) noexcept {
  switch (o) {
    case Orientation::portrait: return "portrait";
    case Orientation::album: return "album";
    case Orientation::square: return "square";
  }
  return "square";
}

std::string_view to_string(Split s) noexcept {
  return s == Split::train ? "train" : "validation";
}

Category parse_category(std::string_view s) {
  const auto v = lowercase(trim(s));
  // The published description tables use singular and plural forms interchangeably.
  if (v == "portraits" || v == "portrait") return Category::portraits;
  if (v == "landscapes" || v == "landscape") return Category::landscapes;
  if (v == "buildings" || v == "building") return Category::buildings;
  if (v == "interiors" || v == "interior") return Category::interiors;
  if (v == "animals" || v == "animal") return Category::animals;
  if (v == "other") return Category::other;
  throw ValidationError("unknown category '" + std::string(s) + "'");
}

Orientation parse_orientation(std::string_view s) {
  const auto v = lowercase(trim(s));
  if (v == "portrait") return Orientation::portrait;
  if (v == "album") return Orientation::album;
  if (v == "square") return Orientation::square;
  throw ValidationError("unknown orientation '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  const auto v = lowercase(trim(s));
  if (v == "train") return Split::train;
  if (v == "validation" || v == "val") return Split::validation;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

KeywordCatalog parse_catalog(std::istream& in) {
  std::vector<Keyword> keywords;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) throw ParseError(line_error(line_no, "expected keyword<TAB>count"));
    const auto text = trim(fields[0]);
    const auto count = trim(fields[1]);
    if (text.empty()) throw ParseError(line_error(line_no, "empty keyword"));
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), value);
    if (ec != std::errc{} || ptr != count.data() + count.size() || count.empty())
      throw ParseError(line_error(line_no, "count is not an integer: '" + std::string(count) + "'"));
    if (value < 0) throw ParseError(line_error(line_no, "negative count"));
    keywords.push_back(Keyword{0, std::string(text), value});
  }
  if (keywords.empty()) throw ParseError("empty catalog");
  return KeywordCatalog(std::move(keywords));
}

KeywordCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open catalog file " + path.string());
  return parse_catalog(in);
}

std::vector<DescriptionSpec> parse_descriptions(std::istream& in) {
  std::vector<DescriptionSpec> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 4)
      throw ParseError(line_error(line_no, "expected text<TAB>category<TAB>orientation<TAB>split"));
    DescriptionSpec d;
    d.id = static_cast<std::int64_t>(out.size());
    d.text = std::string(trim(fields[0]));
    if (d.text.empty()) throw ParseError(line_error(line_no, "empty description"));
    try {
      d.category = parse_category(fields[1]);
      d.orientation = parse_orientation(fields[2]);
      d.split = parse_split(fields[3]);
    } catch (const ValidationError& e) {
      throw ParseError(line_error(line_no, e.what()));
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DescriptionSpec> load_descriptions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open descriptions file " + path.string());
  return parse_descriptions(in);
}

KeywordMask top_k_mask(const KeywordCatalog& catalog, std::size_t k) {
  if (k > catalog.size())
    throw RangeError("top_k_mask: k=" + std::to_string(k) + " exceeds catalog size " +
                     std::to_string(catalog.size()));
  KeywordMask m(catalog.size());
  for (std::size_t i = 0; i < k; ++i) m.set(i);
  return m;
}

std::vector<std::string> sorted_keywords(const KeywordMask& mask, const KeywordCatalog& catalog) {
  if (mask.size() != catalog.size())
    throw ValidationError("mask length " + std::to_string(mask.size()) + " does not match catalog size " +
                          std::to_string(catalog.size()));
  std::vector<std::pair<std::string, std::string>> keyed;
  for (auto i : mask.indices()) keyed.emplace_back(lowercase(catalog[i].text), catalog[i].text);
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::string> out;
  out.reserve(keyed.size());
  for (auto& [key, text] : keyed) out.push_back(std::move(text));
  return out;
}

std::string build_prompt(std::string_view description_text, const KeywordMask& mask,
                         const KeywordCatalog& catalog) {
  std::string prompt(description_text);
  for (const auto& kw : sorted_keywords(mask, catalog)) {
    prompt += ", ";
    prompt += kw;
  }
  return prompt;
}

std::string build_prompt(const DescriptionSpec& description, const KeywordMask& mask,
                         const KeywordCatalog& catalog) {
  return build_prompt(description.text, mask, catalog);
}

}  // namespace promptga
