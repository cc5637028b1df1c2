#include "pgraft/prompt.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <map>

#include "pgraft/errors.hpp"
#include "pgraft/log.hpp"

namespace pgraft {

namespace {

// Rows top to bottom, columns left to right.
constexpr std::array<std::array<std::string_view, 3>, 3> kGrid = {{
    {"on the upper left", "at the top", "on the upper right"},
    {"on the left", "in the center", "on the right"},
    {"on the lower left", "at the bottom", "on the lower right"},
}};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string with_article(const std::string& noun) {
    const bool vowel = !noun.empty() && std::string_view("aeiouAEIOU").find(noun.front()) != std::string_view::npos;
    return (vowel ? "an " : "a ") + noun;
}

std::string clause(std::string subject, const std::string& position) {
    if (!position.empty()) {
        subject += ' ';
        subject += position;
    }
    return subject;
}

void validate_grouping(const Grouping& groups, std::size_t n_items) {
    if (groups.empty() || groups.size() > kMaxRegions) {
        throw InvalidArgument("grouping must have 1.." + std::to_string(kMaxRegions) + " regions, got " +
                              std::to_string(groups.size()));
    }
    std::vector<int> seen(n_items, 0);
    for (const auto& group : groups) {
        if (group.empty()) {
            throw InvalidArgument("grouping contains an empty region");
        }
        for (std::size_t index : group) {
            if (index >= n_items) {
                throw InvalidArgument("grouping references item " + std::to_string(index) + " but only " +
                                      std::to_string(n_items) + " items were given");
            }
            ++seen[index];
        }
    }
    for (std::size_t i = 0; i < n_items; ++i) {
        if (seen[i] != 1) {
            throw InvalidArgument("item " + std::to_string(i) + " appears in " + std::to_string(seen[i]) +
                                  " regions, expected exactly one");
        }
    }
}

}  // namespace

ContainerVocabulary::ContainerVocabulary() : m_words{"plate", "bowl", "tray"} {}

void ContainerVocabulary::add(std::string word) {
    if (trim(word).empty() || word.find('\n') != std::string::npos) {
        throw InvalidArgument("container word must be non-empty single-line text");
    }
    m_words.insert(std::move(word));
}

bool ContainerVocabulary::contains(std::string_view word) const {
    return m_words.find(word) != m_words.end();
}

std::string PromptBundle::id() const {
    // FNV-1a over the three prompts, separated by NUL.
    std::uint64_t hash = 1469598103934665603ULL;
    auto mix = [&hash](std::string_view s) {
        for (unsigned char c : s) {
            hash ^= c;
            hash *= 1099511628211ULL;
        }
        hash *= 1099511628211ULL;  // NUL separator
    };
    mix(target);
    mix(layout);
    mix(negative);
    char buf[17];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), hash, 16);
    return "pb-" + std::string(buf, ptr);
}

std::vector<std::string> assign_positions(std::size_t n_regions) {
    if (n_regions == 0 || n_regions > kMaxRegions) {
        throw InvalidArgument("n_regions must be in 1.." + std::to_string(kMaxRegions) + ", got " +
                              std::to_string(n_regions));
    }
    switch (n_regions) {
    case 1:
        return {""};
    case 2:
        return {"on the left", "on the right"};
    case 3:
        return {"on the left", "in the center", "on the right"};
    default:
        break;
    }

    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    if (n_regions == 4) {
        rows = {0, 2};
        cols = {0, 2};
    } else if (n_regions <= 6) {
        rows = {0, 2};
        cols = {0, 1, 2};
    } else {
        rows = {0, 1, 2};
        cols = {0, 1, 2};
    }
    std::vector<std::string> out;
    for (std::size_t r : rows) {
        for (std::size_t c : cols) {
            if (out.size() == n_regions) {
                return out;
            }
            out.emplace_back(kGrid[r][c]);
        }
    }
    return out;
}

std::string join_phrases(std::span<const std::string> parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            if (parts.size() == 2) {
                out += " and ";
            } else if (i + 1 == parts.size()) {
                out += ", and ";
            } else {
                out += ", ";
            }
        }
        out += parts[i];
    }
    return out;
}

PromptBundle compile_prompts(std::span<const ItemSpec> items, const std::optional<Grouping>& groups,
                             const ContainerVocabulary& vocabulary) {
    if (items.empty()) {
        throw InvalidArgument("at least one item is required");
    }

    PromptBundle bundle;
    bundle.items.assign(items.begin(), items.end());

    std::map<std::string, int> label_count;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        if (trim(item.label).empty()) {
            throw InvalidArgument("item " + std::to_string(i) + " has an empty label");
        }
        if (item.label.find('\n') != std::string::npos || item.label.find('\r') != std::string::npos) {
            throw InvalidArgument("item " + std::to_string(i) + " label contains a newline");
        }
        if (!vocabulary.contains(item.container)) {
            throw InvalidArgument("item '" + item.label + "' uses unknown container '" + item.container + "'");
        }
        if (++label_count[item.label] == 2) {
            bundle.warnings.push_back("duplicate label '" + item.label + "'");
            log()->warn("compile_prompts: duplicate label '{}'", item.label);
        }
    }

    Grouping grouping;
    if (groups) {
        grouping = *groups;
    } else {
        for (std::size_t i = 0; i < items.size(); ++i) {
            grouping.push_back({i});
        }
    }
    validate_grouping(grouping, items.size());

    const auto positions = assign_positions(grouping.size());

    std::vector<std::string> target_clauses;
    std::vector<std::string> layout_clauses;
    std::vector<std::string> group_containers;
    for (std::size_t g = 0; g < grouping.size(); ++g) {
        std::vector<std::string> labels;
        for (std::size_t index : grouping[g]) {
            labels.push_back(items[index].label);
        }
        const std::string& container = items[grouping[g].front()].container;
        for (std::size_t index : grouping[g]) {
            if (items[index].container != container) {
                bundle.warnings.push_back("region " + std::to_string(g) + " mixes containers; using '" + container +
                                          "'");
                log()->warn("compile_prompts: region {} mixes containers, using '{}'", g, container);
                break;
            }
        }
        group_containers.push_back(container);
        target_clauses.push_back(clause(join_phrases(labels), positions[g]));
        layout_clauses.push_back(clause(with_article(container), positions[g]));
    }

    // Most frequent region container; ties go to the earliest region.
    std::string dominant = group_containers.front();
    std::size_t best = 0;
    for (const auto& c : group_containers) {
        const auto n = static_cast<std::size_t>(std::count(group_containers.begin(), group_containers.end(), c));
        if (n > best) {
            best = n;
            dominant = c;
        }
    }

    bundle.target = "A photo of " + join_phrases(target_clauses);
    bundle.layout = "A photo of " + join_phrases(layout_clauses);
    bundle.negative = "Empty " + dominant;
    bundle.regions.groups = std::move(grouping);
    bundle.regions.positions = positions;
    return bundle;
}

std::vector<std::string> parse_item_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find(',', start);
        const auto piece = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        out.emplace_back(piece);
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    return out;
}

std::optional<Grouping> parse_grouping(std::string_view text) {
    text = trim(text);
    if (text.empty() || text == "auto") {
        return std::nullopt;
    }
    Grouping out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find(';', start);
        const auto region = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        std::vector<std::size_t> group;
        for (const auto& token : parse_item_list(region)) {
            std::size_t value = 0;
            const auto* first = token.data();
            const auto* last = token.data() + token.size();
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (token.empty() || ec != std::errc{} || ptr != last) {
                throw InvalidArgument("bad item index '" + token + "' in grouping '" + std::string(text) + "'");
            }
            group.push_back(value);
        }
        out.push_back(std::move(group));
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    return out;
}

}  // namespace pgraft
