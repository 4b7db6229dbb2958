#pragma once

#include "promptga/mask.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptga {

struct Keyword {
  std::size_t index = 0;
  std::string text;
  std::int64_t popularity = 0;
};

/// Keywords ordered by descending popularity, ties by text ascending.
/// Indices are 0..K-1 in that order. Immutable after loading.
class KeywordCatalog {
 public:
  KeywordCatalog() = default;
  /// Sorts, assigns indices and validates (unique, comma-free, trimmed text).
  explicit KeywordCatalog(std::vector<Keyword> keywords);

  std::size_t size() const noexcept { return keywords_.size(); }
  const Keyword& operator[](std::size_t i) const { return keywords_.at(i); }
  const std::vector<Keyword>& keywords() const noexcept { return keywords_; }
  std::optional<std::size_t> find(std::string_view text) const;

 private:
  std::vector<Keyword> keywords_;
};

enum class Category { portraits, landscapes, buildings, interiors, animals, other };
enum class Orientation { portrait, album, square };
enum class Split { train, validation };

std::string_view to_string(Category c) noexcept;
std::string_view to_string(Orientation o) noexcept;
std::string_view to_string(Split s) noexcept;
Category parse_category(std::string_view s);
Orientation parse_orientation(std::string_view s);
Split parse_split(std::string_view s);

struct DescriptionSpec {
  std::int64_t id = 0;
  std::string text;
  Category category = Category::other;
  Orientation orientation = Orientation::square;
  Split split = Split::train;
};

/// Reads `keyword<TAB>count` lines.
KeywordCatalog load_catalog(const std::filesystem::path& path);
KeywordCatalog parse_catalog(std::istream& in);

/// Reads `text<TAB>category<TAB>orientation<TAB>split` lines; ids are assigned
/// in file order starting at 0.
std::vector<DescriptionSpec> load_descriptions(const std::filesystem::path& path);
std::vector<DescriptionSpec> parse_descriptions(std::istream& in);

/// Mask selecting the k most popular keywords.
KeywordMask top_k_mask(const KeywordCatalog& catalog, std::size_t k);

/// Selected keyword texts sorted byte-wise on their lowercased form.
std::vector<std::string> sorted_keywords(const KeywordMask& mask, const KeywordCatalog& catalog);

/// `<description>` or `<description>, kw_a, kw_b, ...`.
std::string build_prompt(const DescriptionSpec& description, const KeywordMask& mask,
                         const KeywordCatalog& catalog);
std::string build_prompt(std::string_view description_text, const KeywordMask& mask,
                         const KeywordCatalog& catalog);

}  // namespace promptga
