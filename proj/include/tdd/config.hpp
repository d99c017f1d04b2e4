#pragma once

#include <map>
#include <string>
#include <vector>

#include "tdd/linalg.hpp"

namespace tdd {

// Sectioned key = value configuration text.  '#' and ';' start comments.
// Unknown keys are rejected by the scenario assembler, and every parse error
// names the offending key.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> get_vector(const std::string& section, const std::string& key) const;

    std::vector<std::string> keys(const std::string& section) const;
    bool has_section(const std::string& section) const;

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

} // namespace tdd
