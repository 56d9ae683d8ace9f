#include "domrisk/sector.hpp"

#include <fstream>

#include "domrisk/csv.hpp"

namespace domrisk {

const SectorTable& SectorTable::builtin() {
    static const SectorTable table = [] {
        SectorTable t;
        t.codes_ = {
            {"11", "Agriculture, Forestry, Fishing and Hunting"},
            {"21", "Mining, Quarrying, and Oil and Gas Extraction"},
            {"22", "Utilities"},
            {"23", "Construction"},
            {"31-33", "Manufacturing"},
            {"42", "Wholesale Trade"},
            {"44-45", "Retail Trade"},
            {"48-49", "Transportation and Warehousing"},
            {"51", "Information"},
            {"52", "Finance and Insurance"},
            {"53", "Real Estate and Rental and Leasing"},
            {"54", "Professional, Scientific, and Technical Services"},
            {"55", "Management of Companies and Enterprises"},
            {"56", "Administrative and Support and Waste Management and Remediation Services"},
            {"61", "Educational Services"},
            {"62", "Health Care and Social Assistance"},
            {"71", "Arts, Entertainment, and Recreation"},
            {"72", "Accommodation and Food Services"},
            {"81", "Other Services (except Public Administration)"},
            {"92", "Public Administration"},
        };
        return t;
    }();
    return table;
}

SectorTable SectorTable::from_csv(const std::string& path) {
    SectorTable t;
    for (const auto& row : read_csv(path)) {
        if (row.size() != 2) throw DomriskError("sector table rows must be code,label: " + path);
        if (row[0] == "code") continue;  // header
        t.codes_.push_back({row[0], row[1]});
    }
    if (t.codes_.size() != 20)
        throw DomriskError("sector table must have exactly 20 rows, got " +
                           std::to_string(t.codes_.size()));
    return t;
}

void SectorTable::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DomriskError("cannot write sector table: " + path);
    out << "code,label\n";
    for (const auto& s : codes_) out << csv_join({s.code, s.label}) << "\n";
}

bool SectorTable::has(const std::string& code) const {
    for (const auto& s : codes_)
        if (s.code == code) return true;
    return false;
}

size_t SectorTable::index_of(const std::string& code) const {
    for (size_t i = 0; i < codes_.size(); ++i)
        if (codes_[i].code == code) return i;
    throw DomriskError("unknown sector code: '" + code + "'");
}

std::vector<double> encode_sector(const std::optional<std::string>& sector,
                                  const SectorTable& table) {
    std::vector<double> slots(table.size(), 0.0);
    if (sector) slots[table.index_of(*sector)] = 1.0;
    return slots;
}

FeatureSchema extend_schema(const FeatureSchema& schema, const SectorTable& table) {
    if (schema.has_sector()) throw DomriskError("schema already has sector slots");
    FeatureSchema extended = schema;
    for (const auto& s : table.codes()) extended.sector_codes.push_back(s.code);
    extended.schema_hash = extended.compute_hash();
    return extended;
}

void apply_sector(FeatureVector& vec, const FeatureSchema& schema,
                  const std::optional<std::string>& sector, const SectorTable& table) {
    if (!schema.has_sector()) throw DomriskError("schema has no sector slots");
    if (vec.values.size() != schema.width())
        throw DomriskError("vector width does not match extended schema");
    auto slots = encode_sector(sector, table);
    std::copy(slots.begin(), slots.end(), vec.values.begin() + schema.sector_offset());
}

}  // namespace domrisk
