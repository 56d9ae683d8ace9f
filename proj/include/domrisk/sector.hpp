#pragma once

#include <optional>
#include <string>
#include <vector>

#include "domrisk/features.hpp"

namespace domrisk {

struct SectorCode {
    std::string code;   // 2-digit NAICS sector id ("31-33" style ranges included)
    std::string label;  // canonical sector name
};

/// The fixed 20-sector NAICS table.
class SectorTable {
public:
    static const SectorTable& builtin();
    static SectorTable from_csv(const std::string& path);
    void save_csv(const std::string& path) const;

    const std::vector<SectorCode>& codes() const { return codes_; }
    bool has(const std::string& code) const;
    size_t index_of(const std::string& code) const;  // throws on unknown code
    size_t size() const { return codes_.size(); }

private:
    std::vector<SectorCode> codes_;
};

/// One-hot 20-slot sub-vector; all zeros when the sector is absent.
/// Unknown codes are an error.
std::vector<double> encode_sector(const std::optional<std::string>& sector,
                                  const SectorTable& table = SectorTable::builtin());

/// Appends the 20 sector slots after all technology features and re-hashes.
/// Extending twice is an error.
FeatureSchema extend_schema(const FeatureSchema& schema,
                            const SectorTable& table = SectorTable::builtin());

/// Writes the sector one-hot into an already-extended vector.
void apply_sector(FeatureVector& vec, const FeatureSchema& schema,
                  const std::optional<std::string>& sector,
                  const SectorTable& table = SectorTable::builtin());

}  // namespace domrisk
