#pragma once

// CSV and JSON reading/writing. Floats are written with 12 significant
// digits; JSON objects keep insertion order so output is byte-stable.

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "concentra/axiom_harness.hpp"
#include "concentra/concentration.hpp"
#include "concentra/copula.hpp"

namespace concentra {

using Json = nlohmann::ordered_json;

inline std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// x rounded to 12 significant digits, so the JSON writer prints at most that
/// many. Whole numbers are stored as integers to print like %g ("2", not "2.0").
inline Json json_number(double x) {
    const double r = std::strtod(format_number(x).c_str(), nullptr);
    if (r == std::round(r) && std::abs(r) < 1e12) return static_cast<std::int64_t>(r);
    return r;
}

/// Serializes j and reprints every number token outside strings with %.12g.
/// The library's shortest-digits printer can emit 17 digits for a value that
/// %.12g prints in 12, so the text is normalised here.
inline std::string dump_json(const Json& j, int indent = 2) {
    const std::string raw = j.dump(indent);
    std::string out;
    out.reserve(raw.size());
    bool in_string = false;
    for (std::size_t i = 0; i < raw.size();) {
        const char ch = raw[i];
        if (in_string) {
            out += ch;
            if (ch == '\\' && i + 1 < raw.size()) out += raw[++i];
            else if (ch == '"') in_string = false;
            ++i;
        } else if (ch == '"') {
            in_string = true;
            out += ch;
            ++i;
        } else if (ch == '-' || std::isdigit(static_cast<unsigned char>(ch))) {
            std::size_t end = i + 1;
            while (end < raw.size() && std::strchr("0123456789.eE+-", raw[end]) != nullptr) ++end;
            const std::string token = raw.substr(i, end - i);
            const bool integral = token.find_first_of(".eE") == std::string::npos;
            out += integral ? token : format_number(std::strtod(token.c_str(), nullptr));
            i = end;
        } else {
            out += ch;
            ++i;
        }
    }
    return out;
}

inline Json json_array(const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(json_number(x));
    return a;
}

inline Json json_value(const ExtendedReal& x) {
    if (x.infinite) return "+inf";
    return json_number(x.value);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(what + ": " + e.what());
    }
}

// ---------------------------------------------------------------- CSV

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // rows[i] is data row i + 2 in the file (header is row 1)
};

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        else if (ch == ',' && !quoted) {
            cells.push_back(trim(cur));
            cur.clear();
        } else cur += ch;
    }
    cells.push_back(trim(cur));
    return cells;
}

inline CsvTable parse_csv(const std::string& text, bool has_header = true) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        auto cells = split_csv_line(line);
        if (first && has_header) t.header = std::move(cells);
        else t.rows.push_back(std::move(cells));
        first = false;
    }
    return t;
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != cell.size() || !std::isfinite(v)) {
        throw InputError("row " + std::to_string(row) + ", column " + std::to_string(col) + ": '" + cell +
                         "' is not a finite number");
    }
    return v;
}

inline bool looks_numeric(const std::string& cell) {
    char* end = nullptr;
    std::strtod(cell.c_str(), &end);
    return !cell.empty() && end == cell.c_str() + cell.size();
}

struct LoadedScenarios {
    ScenarioSet set;
    bool weights_defaulted = false;
};

/// Header of position labels plus an optional `weight` column; one scenario per row.
inline LoadedScenarios parse_scenarios_csv(const std::string& text) {
    const auto t = parse_csv(text);
    if (t.header.empty()) throw InputError("scenario CSV is empty");
    std::size_t weight_col = t.header.size();
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        std::string lower = t.header[j];
        for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (lower == "weight") {
            if (weight_col != t.header.size()) throw InputError("row 1: more than one weight column");
            weight_col = j;
        } else {
            if (t.header[j].empty()) throw InputError("row 1, column " + std::to_string(j + 1) + ": empty label");
            labels.push_back(t.header[j]);
        }
    }
    if (labels.empty()) throw InputError("row 1: no position columns");
    if (t.rows.empty()) throw InputError("scenario CSV has no data rows");
    const std::size_t m = t.rows.size();
    const std::size_t k = labels.size();
    std::vector<double> losses;
    std::vector<double> weights;
    losses.reserve(m * k);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = t.rows[i];
        if (row.size() != t.header.size()) {
            throw InputError("row " + std::to_string(i + 2) + ": expected " + std::to_string(t.header.size()) +
                             " columns, found " + std::to_string(row.size()));
        }
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double v = parse_cell(row[j], i + 2, j + 1);
            if (j == weight_col) {
                if (!(v > 0.0)) {
                    throw InputError("row " + std::to_string(i + 2) + ", column " + std::to_string(j + 1) +
                                     ": weight must be positive");
                }
                weights.push_back(v);
            } else {
                losses.push_back(v);
            }
        }
    }
    const bool defaulted = weight_col == t.header.size();
    if (defaulted) weights.assign(m, 1.0 / static_cast<double>(m));
    return {ScenarioSet(m, k, std::move(losses), std::move(weights), std::move(labels)), defaulted};
}

inline std::string scenarios_to_csv(const ScenarioSet& s, bool with_weights = true) {
    std::ostringstream os;
    for (std::size_t j = 0; j < s.positions(); ++j) os << (j ? "," : "") << s.labels()[j];
    if (with_weights) os << ",weight";
    os << "\n";
    for (std::size_t i = 0; i < s.scenarios(); ++i) {
        for (std::size_t j = 0; j < s.positions(); ++j) os << (j ? "," : "") << format_number(s.loss(i, j));
        if (with_weights) os << "," << format_number(s.weight(i));
        os << "\n";
    }
    return os.str();
}

/// `value,prob` rows; a non-numeric first row is taken as a header.
inline DiscreteDistribution parse_distribution_csv(const std::string& text) {
    auto t = parse_csv(text, false);
    std::size_t first_row = 1;
    if (!t.rows.empty() && !t.rows.front().empty() && !looks_numeric(t.rows.front()[0])) {
        t.rows.erase(t.rows.begin());
        first_row = 2;
    }
    if (t.rows.empty()) throw InputError("distribution CSV has no data rows");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = i + first_row;
        if (row.size() != 2) throw InputError("row " + std::to_string(line) + ": expected value,prob");
        const double v = parse_cell(row[0], line, 1);
        const double p = parse_cell(row[1], line, 2);
        if (p < 0.0) throw InputError("row " + std::to_string(line) + ", column 2: negative probability");
        atoms.push_back({v, p});
    }
    return DiscreteDistribution(std::move(atoms));
}

inline std::string distribution_to_csv(const DiscreteDistribution& d) {
    std::ostringstream os;
    os << "value,prob\n";
    for (const auto& a : d.atoms()) os << format_number(a.value) << "," << format_number(a.prob) << "\n";
    return os.str();
}

// ---------------------------------------------------------------- JSON

inline Json to_json(const DiscreteDistribution& d) {
    Json a = Json::array();
    for (const auto& x : d.atoms()) a.push_back({{"value", json_number(x.value)}, {"prob", json_number(x.prob)}});
    return a;
}

inline DiscreteDistribution distribution_from_json(const Json& j) {
    if (!j.is_array()) throw InputError("distribution JSON must be an array of {value, prob}");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        if (!e.is_object() || !e.contains("value") || !e.contains("prob") || !e["value"].is_number() ||
            !e["prob"].is_number()) {
            throw InputError("distribution entry " + std::to_string(i) + " needs numeric value and prob");
        }
        atoms.push_back({e["value"].get<double>(), e["prob"].get<double>()});
    }
    return DiscreteDistribution(std::move(atoms));
}

inline Json to_json(const CheckerboardCopula& c) {
    return Json{{"n", c.n()}, {"mass", json_array(c.mass())}};
}

inline CheckerboardCopula copula_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("mass")) throw InputError("copula JSON needs n and mass");
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) throw InputError("copula n must be a positive integer");
    if (!j["mass"].is_array()) throw InputError("copula mass must be an array");
    std::vector<double> mass;
    for (std::size_t i = 0; i < j["mass"].size(); ++i) {
        if (!j["mass"][i].is_number()) throw InputError("copula mass entry " + std::to_string(i) + " is not a number");
        mass.push_back(j["mass"][i].get<double>());
    }
    return CheckerboardCopula(j["n"].get<std::size_t>(), std::move(mass));
}

inline Json to_json(const TailCertificate& c) {
    Json ev = Json::array();
    for (auto i : c.event) ev.push_back(i);
    return Json{{"event", ev},
                {"level", json_number(c.level)},
                {"weight", json_number(c.weight)},
                {"thresholds", json_array(c.thresholds)}};
}

inline Json to_json(const HarnessReport& r) {
    Json j{{"axiom", to_string(r.axiom)}, {"result", r.passed ? "PASS" : "FAIL"}, {"trials", r.trials}};
    if (r.counterexample) {
        const auto& c = *r.counterexample;
        j["counterexample"] = Json{{"scenarios", scenarios_to_csv(c.scenarios, false)},
                                   {"parameter", json_number(c.parameter)},
                                   {"lhs", json_value(c.lhs)},
                                   {"rhs", json_value(c.rhs)},
                                   {"relation", c.relation}};
    }
    return j;
}

inline Json to_json(const CollapseResult& r, double p, double eps) {
    Json trace = Json::array();
    for (const auto& s : r.trace) {
        trace.push_back(Json{{"iteration", s.iteration},
                             {"es", json_number(s.es)},
                             {"lower_es", json_number(s.lower_es)},
                             {"mean", json_number(s.mean)},
                             {"upper_width", json_number(s.upper_width)},
                             {"lower_width", json_number(s.lower_width)},
                             {"atoms", s.atoms}});
    }
    return Json{{"operation", "collapse"},
                {"p", json_number(p)},
                {"eps", json_number(eps)},
                {"iterations", r.iterations},
                {"trace", trace},
                {"terminal", to_json(r.terminal)},
                {"limit", to_json(r.limit)}};
}

inline Json to_json(const ChainDiagnostics& d) {
    Json j{{"length", d.length},
           {"replications", d.replications},
           {"verdict", to_string(d.verdict)},
           {"deviation_quantile", json_number(d.deviation_quantile)},
           {"quantile", json_number(d.thresholds.quantile)},
           {"band", json_number(d.band)},
           {"band_sigmas", json_number(d.thresholds.band_sigmas)},
           {"floor", json_number(d.thresholds.floor)},
           {"sup_deviation_median", json_number(d.sup_deviation_median)},
           {"sup_deviation_quantile", json_number(d.sup_deviation_quantile)},
           {"final_deviation", json_array(d.final_deviation)}};
    if (d.tail_level) {
        j["tail"] = Json{{"level", json_number(*d.tail_level)},
                         {"count", d.tail_count},
                         {"mean", json_number(d.tail_mean)},
                         {"target", json_number(d.tail_target)}};
    }
    return j;
}

/// One row per replication: replication,n_1,n_2,... with the partial means.
inline std::string partial_means_csv(const ChainDiagnostics& d) {
    std::ostringstream os;
    os << "replication";
    for (auto n : d.checkpoints) os << ",n" << n;
    os << "\n";
    for (std::size_t r = 0; r < d.partial_means.size(); ++r) {
        os << r;
        for (double x : d.partial_means[r]) os << "," << format_number(x);
        os << "\n";
    }
    return os.str();
}

}  // namespace concentra
