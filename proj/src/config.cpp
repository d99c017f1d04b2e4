#include "tdd/config.hpp"

#include <fstream>
#include <sstream>

#include "tdd/errors.hpp"

namespace tdd {

namespace {

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigInvalid("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
    Config c;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigInvalid("line " + std::to_string(lineno) + ": unterminated section");
            section = strip(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigInvalid("line " + std::to_string(lineno) + ": empty section name");
            c.data_[section];
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        if (key.empty()) throw ConfigInvalid("line " + std::to_string(lineno) + ": empty key");
        c.data_[section][key] = val;
    }
    return c;
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

bool Config::has_section(const std::string& section) const { return data_.count(section) > 0; }

std::string Config::get_string(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    if (s == data_.end() || !s->second.count(key))
        throw ConfigInvalid("missing key [" + section + "] " + key);
    return s->second.at(key);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    const std::string v = get_string(section, key);
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigInvalid("key [" + section + "] " + key + ": not a number: '" + v + "'");
    }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long Config::get_int(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    const double d = get_double(section, key);
    const long l = std::lround(d);
    if (d != static_cast<double>(l))
        throw ConfigInvalid("key [" + section + "] " + key + ": expected an integer");
    return l;
}

std::vector<double> Config::get_vector(const std::string& section, const std::string& key) const {
    const std::string v = get_string(section, key);
    std::istringstream is(v);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigInvalid("key [" + section + "] " + key + ": bad vector entry '" + tok +
                                "'");
        }
    }
    if (out.empty()) throw ConfigInvalid("key [" + section + "] " + key + ": empty vector");
    return out;
}

std::vector<std::string> Config::keys(const std::string& section) const {
    std::vector<std::string> out;
    auto s = data_.find(section);
    if (s == data_.end()) return out;
    for (const auto& kv : s->second) out.push_back(kv.first);
    return out;
}

} // namespace tdd
