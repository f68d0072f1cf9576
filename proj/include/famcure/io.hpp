#pragma once

// File formats: the family CSV schema, and the key/value document used for
// configs, fit reports and evaluation reports. Numbers are written with the
// shortest representation that round-trips, so identical inputs produce
// byte-identical files.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "famcure/data.hpp"

namespace famcure {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace csv {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace csv

/// Writes families in the registry schema. Birth/event years and the true
/// frailty column appear only when any record carries them.
inline void write_families_csv(std::ostream& os, std::span<const Family> families) {
    bool any_calendar = false, any_truth = false;
    for (const auto& f : families) {
        if (f.true_frailty) any_truth = true;
        for (const auto& m : f.members) {
            if (m.birth_year || m.event_year) any_calendar = true;
        }
    }
    os << "family_id,subject_id,role,age,event";
    if (any_calendar) os << ",birth_year,event_year";
    if (any_truth) os << ",true_frailty";
    os << "\n";
    for (const auto& f : families) {
        for (std::size_t j = 0; j < f.members.size(); ++j) {
            const auto& m = f.members[j];
            os << f.id << "," << j << "," << role_name(m.role) << "," << format_double(m.x) << ","
               << m.delta;
            if (any_calendar) {
                os << ",";
                if (m.birth_year) os << format_double(*m.birth_year);
                os << ",";
                if (m.event_year) os << format_double(*m.event_year);
            }
            if (any_truth) {
                os << ",";
                if (f.true_frailty) os << format_double(*f.true_frailty);
            }
            os << "\n";
        }
    }
}

inline void write_families_csv(const std::string& path, std::span<const Family> families) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_families_csv(os, families);
}

/// Reads the registry schema; rows sharing a family_id are grouped in order
/// of first appearance. Parse failures carry the 1-based line number.
inline std::vector<Family> read_families_csv(std::istream& is, const std::string& name = "<stream>") {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(name + ":1: empty file, header required");
    auto header = csv::split_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[csv::trim(header[i])] = i;
    for (const char* required : {"family_id", "subject_id", "role", "age", "event"}) {
        if (!col.count(required)) {
            throw std::runtime_error(name + ":1: missing required column '" + std::string(required) + "'");
        }
    }
    const bool has_birth = col.count("birth_year") > 0;
    const bool has_event_year = col.count("event_year") > 0;
    const bool has_truth = col.count("true_frailty") > 0;

    std::vector<Family> families;
    std::map<std::string, std::size_t> index_of;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        auto field = [&](const char* key) -> std::string {
            const std::size_t i = col.at(key);
            if (i >= fields.size()) {
                throw std::runtime_error(name + ":" + std::to_string(line_no) + ": too few fields");
            }
            return csv::trim(fields[i]);
        };
        auto parse_num = [&](const std::string& s, const char* what) -> double {
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
                return v;
            } catch (const std::exception&) {
                throw std::runtime_error(name + ":" + std::to_string(line_no) + ": bad " +
                                         std::string(what) + " '" + s + "'");
            }
        };

        const std::string fid = field("family_id");
        SubjectRecord rec;
        rec.x = parse_num(field("age"), "age");
        const double ev = parse_num(field("event"), "event");
        if (ev != 0.0 && ev != 1.0) {
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": event must be 0 or 1");
        }
        rec.delta = static_cast<int>(ev);
        try {
            rec.role = role_from_name(field("role"));
            rec.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error(name + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (has_birth) {
            const std::string s = field("birth_year");
            if (!s.empty()) rec.birth_year = parse_num(s, "birth_year");
        }
        if (has_event_year) {
            const std::string s = field("event_year");
            if (!s.empty()) rec.event_year = parse_num(s, "event_year");
        }

        auto it = index_of.find(fid);
        if (it == index_of.end()) {
            it = index_of.emplace(fid, families.size()).first;
            families.emplace_back();
            families.back().id = fid;
        }
        Family& fam = families[it->second];
        fam.members.push_back(rec);
        if (has_truth) {
            const std::string s = field("true_frailty");
            if (!s.empty()) {
                const double r = parse_num(s, "true_frailty");
                if (fam.true_frailty && *fam.true_frailty != r) {
                    throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                             ": conflicting true_frailty within family " + fid);
                }
                fam.true_frailty = r;
            }
        }
    }
    for (auto& f : families) {
        try {
            f.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error(name + ": family " + f.id + ": " + e.what());
        }
    }
    if (families.empty()) throw std::runtime_error(name + ": no data rows");
    return families;
}

inline std::vector<Family> read_families_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_families_csv(is, path);
}

/// Ordered key/value document ("key = value" lines, '#' comments). Values
/// may be scalars, names, or bracketed numeric arrays.
class KeyValueDoc {
public:
    void set(const std::string& key, const std::string& value) {
        for (auto& kv : items_) {
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        }
        items_.emplace_back(key, value);
    }
    void set_num(const std::string& key, double v) { set(key, format_double(v)); }
    void set_array(const std::string& key, std::span<const double> v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += format_double(v[i]);
        }
        set(key, s + "]");
    }

    [[nodiscard]] bool has(const std::string& key) const { return find(key) != nullptr; }
    [[nodiscard]] std::string get(const std::string& key) const {
        const std::string* v = find(key);
        if (!v) throw std::runtime_error("missing key: " + key);
        return *v;
    }
    [[nodiscard]] std::string get_or(const std::string& key, const std::string& fallback) const {
        const std::string* v = find(key);
        return v ? *v : fallback;
    }
    [[nodiscard]] double get_num(const std::string& key) const {
        const std::string s = get(key);
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw std::runtime_error("key '" + key + "': not a number: " + s);
        }
    }
    [[nodiscard]] double get_num_or(const std::string& key, double fallback) const {
        return has(key) ? get_num(key) : fallback;
    }
    [[nodiscard]] std::vector<double> get_array(const std::string& key) const {
        std::string s = get(key);
        if (!s.empty() && s.front() == '[') s = s.substr(1);
        if (!s.empty() && s.back() == ']') s.pop_back();
        std::vector<double> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = csv::trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw std::runtime_error("key '" + key + "': bad array element: " + tok);
            }
        }
        return out;
    }

    [[nodiscard]] std::string serialize() const {
        std::string out;
        for (const auto& [k, v] : items_) {
            out += k;
            out += " = ";
            out += v;
            out += "\n";
        }
        return out;
    }

    static KeyValueDoc parse(std::istream& is, const std::string& name = "<stream>") {
        KeyValueDoc doc;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const std::string t = csv::trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                throw std::runtime_error(name + ":" + std::to_string(line_no) + ": expected 'key = value'");
            }
            const std::string key = csv::trim(t.substr(0, eq));
            const std::string value = csv::trim(t.substr(eq + 1));
            if (key.empty()) {
                throw std::runtime_error(name + ":" + std::to_string(line_no) + ": empty key");
            }
            doc.set(key, value);
        }
        return doc;
    }

    static KeyValueDoc parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot open: " + path);
        return parse(is, path);
    }

    void save(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open for writing: " + path);
        os << serialize();
    }

private:
    [[nodiscard]] const std::string* find(const std::string& key) const {
        for (const auto& kv : items_) {
            if (kv.first == key) return &kv.second;
        }
        return nullptr;
    }
    std::vector<std::pair<std::string, std::string>> items_;
};

} // namespace famcure
