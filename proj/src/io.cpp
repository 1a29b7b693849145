#include "otoc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace otoc::io {

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

std::string to_csv(const std::vector<Record>& recs) {
    std::ostringstream os;
    os << "instance_id,observable,k,value,stderr,seed\n";
    for (const auto& r : recs)
        os << r.instance_id << "," << r.observable << "," << r.k << "," << format_double(r.value)
           << "," << format_double(r.stderr) << "," << r.seed << "\n";
    return os.str();
}

std::string to_json(const std::vector<Record>& recs) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : recs)
        j.push_back({{"instance_id", r.instance_id},
                     {"observable", r.observable},
                     {"k", r.k},
                     {"value", r.value},
                     {"stderr", r.stderr},
                     {"seed", r.seed}});
    return j.dump(2) + "\n";
}

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}
}  // namespace

std::vector<Record> records_from_csv(const std::string& text) {
    std::vector<Record> out;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto f = split_csv_line(line);
        if (f.size() < 6) throw std::invalid_argument("records csv: need 6 fields per row");
        Record r;
        r.instance_id = f[0];
        r.observable = f[1];
        r.k = std::stoi(f[2]);
        r.value = std::stod(f[3]);
        r.stderr = std::stod(f[4]);
        r.seed = std::stoull(f[5]);
        out.push_back(std::move(r));
    }
    return out;
}

std::string column_csv(const std::vector<std::pair<std::string, double>>& rows,
                       const std::string& value_name) {
    std::ostringstream os;
    os << "instance_id," << value_name << "\n";
    for (const auto& [id, v] : rows) os << id << "," << format_double(v) << "\n";
    return os.str();
}

std::vector<std::pair<std::string, double>> column_from_csv(const std::string& text) {
    std::vector<std::pair<std::string, double>> out;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto f = split_csv_line(line);
        if (f.size() < 2) throw std::invalid_argument("column csv: need 2 fields per row");
        out.emplace_back(f[0], std::stod(f[1]));
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace otoc::io
