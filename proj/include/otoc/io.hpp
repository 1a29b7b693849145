#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace otoc::io {

// Result record emitted by the observables pipeline.
struct Record {
    std::string instance_id;
    std::string observable;
    int k = 0;
    double value = 0.0;
    double stderr = 0.0;
    std::uint64_t seed = 0;
};

std::string to_csv(const std::vector<Record>& recs);
std::string to_json(const std::vector<Record>& recs);
std::vector<Record> records_from_csv(const std::string& text);

// Two-column (instance_id, value) tables used by the metrics commands.
std::string column_csv(const std::vector<std::pair<std::string, double>>& rows,
                       const std::string& value_name = "value");
std::vector<std::pair<std::string, double>> column_from_csv(const std::string& text);

std::string format_double(double v);  // shortest round-trip representation

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace otoc::io
