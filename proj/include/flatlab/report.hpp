#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "flatlab/quadnum.hpp"

namespace flatlab {

inline constexpr int kSchemaVersion = 1;

enum class Exactness { exact, interval_lower, interval_upper, empirical };

inline const char* exactness_name(Exactness e) {
    switch (e) {
        case Exactness::exact: return "exact";
        case Exactness::interval_lower: return "interval-lower";
        case Exactness::interval_upper: return "interval-upper";
        case Exactness::empirical: return "empirical";
    }
    return "exact";
}

/// A number together with how it was obtained.
struct Tagged {
    std::string text;
    double approx{0};
    Exactness tag{Exactness::exact};
};

inline Tagged tagged(const QuadNum& x, Exactness e = Exactness::exact) { return {render(x), x.to_double(), e}; }
inline Tagged tagged(const Rational& x, Exactness e = Exactness::exact) { return {render(x), x.get_d(), e}; }
inline Tagged tagged(long x, Exactness e = Exactness::exact) { return {std::to_string(x), static_cast<double>(x), e}; }
inline Tagged tagged(int x, Exactness e = Exactness::exact) { return tagged(static_cast<long>(x), e); }
inline Tagged tagged(std::size_t x, Exactness e = Exactness::exact) { return tagged(static_cast<long>(x), e); }

inline Tagged tagged(double x, Exactness e = Exactness::empirical) {
    nlohmann::json j = x;
    return {j.dump(), x, e};
}

inline nlohmann::json to_json(const Tagged& t) {
    return {{"value", t.text}, {"approx", t.approx}, {"exactness", exactness_name(t.tag)}};
}

/// CSV with a fixed column list. Numeric columns are written as a value column
/// followed by `<name>_exactness`.
class CsvTable {
public:
    struct Column {
        std::string name;
        bool numeric{true};
    };
    using Cell = std::variant<std::string, Tagged>;

    explicit CsvTable(std::vector<Column> cols) : cols_(std::move(cols)) {}

    void add_row(std::vector<Cell> row) {
        if (row.size() != cols_.size()) throw std::logic_error("csv row has the wrong number of cells");
        rows_.push_back(std::move(row));
    }
    std::size_t rows() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        bool first = true;
        for (const auto& c : cols_) {
            if (!first) out += ',';
            first = false;
            out += c.name;
            if (c.numeric) out += "," + c.name + "_exactness";
        }
        out += '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                if (const auto* t = std::get_if<Tagged>(&r[i])) {
                    out += quote(t->text) + "," + exactness_name(t->tag);
                } else {
                    out += quote(std::get<std::string>(r[i]));
                    if (cols_[i].numeric) out += ",";
                }
            }
            out += '\n';
        }
        return out;
    }

private:
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    }

    std::vector<Column> cols_;
    std::vector<std::vector<Cell>> rows_;
};

/// JSON summary plus optional CSV detail for one experiment.
struct Report {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json result = nlohmann::json::object();
    std::string status{"PASS"};  // PASS | FAIL | CAP_EXHAUSTED | ERROR
    std::optional<CsvTable> detail;

    nlohmann::json json() const {
        nlohmann::json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = command;
        j["config"] = config;
        j["status"] = status;
        j["result"] = result;
        if (detail) j["detail_rows"] = detail->rows();
        return j;
    }

    // Files are <dir>/<command>.json and <dir>/<command>.csv.
    void write(const std::string& dir) const {
        std::ofstream js(dir + "/" + command + ".json", std::ios::binary);
        if (!js) throw std::runtime_error("cannot write " + dir + "/" + command + ".json");
        js << json().dump(2) << '\n';
        if (detail) {
            std::ofstream cs(dir + "/" + command + ".csv", std::ios::binary);
            if (!cs) throw std::runtime_error("cannot write " + dir + "/" + command + ".csv");
            cs << detail->str();
        }
    }
};

}  // namespace flatlab
