#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "tdd/errors.hpp"

namespace tdd {

// CSV writer with locale-independent "%.17g" formatting, '\n' endings.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : os_(path, std::ios::binary) {
        if (!os_) throw Error("cannot open " + path);
    }

    void header(const std::vector<std::string>& cols) {
        for (size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
        os_ << "\n";
    }

    void row(const std::vector<double>& vals) {
        char buf[32];
        for (size_t i = 0; i < vals.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
            os_ << (i ? "," : "") << buf;
        }
        os_ << "\n";
    }

private:
    std::ofstream os_;
};

// flat key=value summary
class SummaryWriter {
public:
    explicit SummaryWriter(const std::string& path) : os_(path, std::ios::binary) {
        if (!os_) throw Error("cannot open " + path);
    }
    void put(const std::string& key, double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os_ << key << "=" << buf << "\n";
    }
    void put(const std::string& key, const std::string& v) { os_ << key << "=" << v << "\n"; }

private:
    std::ofstream os_;
};

} // namespace tdd
