#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace pollwait::csv {

// Minimal CSV support: comma-separated, no quoting (none of our schemas
// need embedded commas), '\n' or '\r\n' line endings.

std::vector<std::string> split(const std::string& line);

class Reader {
public:
    explicit Reader(const std::string& path);

    const std::vector<std::string>& header() const { return header_; }
    // Returns false at end of file; blank lines are skipped.
    bool next(std::vector<std::string>& fields);
    // Throws SchemaMismatch unless the header equals `expected` exactly.
    void require_header(const std::vector<std::string>& expected, const std::string& what) const;

private:
    std::ifstream in_;
    std::string path_;
    std::vector<std::string> header_;
};

class Writer {
public:
    explicit Writer(const std::string& path);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
};

std::string fmt(double v, int precision = 6);

} // namespace pollwait::csv
