#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pgraft {

inline constexpr std::size_t kMaxRegions = 9;

struct ItemSpec {
    std::string label;
    std::string container = "plate";
};

/// Container words accepted by the compiler. Starts as {plate, bowl, tray}.
class ContainerVocabulary {
public:
    ContainerVocabulary();

    void add(std::string word);
    bool contains(std::string_view word) const;
    const std::set<std::string, std::less<>>& words() const noexcept { return m_words; }

private:
    std::set<std::string, std::less<>> m_words;
};

/// Ordered partition of item indices into regions, one position phrase per region.
struct RegionAssignment {
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::string> positions;
};

struct PromptBundle {
    std::string target;
    std::string layout;
    std::string negative;
    RegionAssignment regions;
    std::vector<ItemSpec> items;
    std::vector<std::string> warnings;

    /// Stable identifier derived from the three prompt texts.
    std::string id() const;
};

using Grouping = std::vector<std::vector<std::size_t>>;

/// Position phrases for `n_regions` distinct regions (1..9).
std::vector<std::string> assign_positions(std::size_t n_regions);

/// Pass `std::nullopt` for automatic grouping (one region per item, input order).
PromptBundle compile_prompts(std::span<const ItemSpec> items,
                             const std::optional<Grouping>& groups = std::nullopt,
                             const ContainerVocabulary& vocabulary = ContainerVocabulary{});

/// "a, b ,c" -> {"a","b","c"}; whitespace around entries is trimmed.
std::vector<std::string> parse_item_list(std::string_view text);

/// "0;1,2" -> {{0},{1,2}}; "auto" or empty -> nullopt.
std::optional<Grouping> parse_grouping(std::string_view text);

/// Joins with "and" for two entries, serial comma form for three or more.
std::string join_phrases(std::span<const std::string> parts);

}  // namespace pgraft
