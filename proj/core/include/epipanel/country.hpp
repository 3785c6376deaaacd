#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epipanel {

enum class WhoRegion { AFR, AMR, EMR, EUR, SEAR, WPR, Other };

const char* who_region_name(WhoRegion r);

/// Parses the WHO surveillance file's region column ("EURO"/"EUR" both map to
/// EUR); anything unrecognised maps to Other.
WhoRegion parse_who_region(const std::string& text);

struct CountryMeta {
    std::string code;  // ISO 3166 alpha-2, unique within a registry
    std::string name;
    WhoRegion region = WhoRegion::Other;
};

/// ISO 3166 alpha-3 -> alpha-2 (OxCGRT keys countries by alpha-3; the other
/// sources use alpha-2). Returns nullopt for unknown codes. Alpha-2 input is
/// passed through.
std::optional<std::string> to_alpha2(const std::string& code);

/// Registry of country metadata keyed by alpha-2 code.
class CountryRegistry {
public:
    void add(CountryMeta meta);
    bool contains(const std::string& code) const { return by_code_.count(code) > 0; }
    const CountryMeta& get(const std::string& code) const;

    /// Codes of all countries in `region`, sorted.
    std::vector<std::string> in_region(WhoRegion region) const;
    std::size_t size() const { return by_code_.size(); }
    const std::map<std::string, CountryMeta>& all() const { return by_code_; }

private:
    std::map<std::string, CountryMeta> by_code_;
};

}  // namespace epipanel
