#include "pollwait/csvio.hpp"

#include "pollwait/error.hpp"

#include <cstdio>

namespace pollwait::csv {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

Reader::Reader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in_, line)) throw SchemaMismatch(path + ": missing header");
    header_ = split(line);
}

bool Reader::next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
        if (line.empty() || line == "\r") continue;
        fields = split(line);
        return true;
    }
    return false;
}

void Reader::require_header(const std::vector<std::string>& expected, const std::string& what) const {
    if (header_ != expected)
        throw SchemaMismatch(path_ + ": unexpected header for " + what);
}

Writer::Writer(const std::string& path) : out_(path) {
    if (!out_) throw Error("cannot open " + path + " for writing");
}

void Writer::row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

} // namespace pollwait::csv
