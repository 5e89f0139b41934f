#include "ufcsim/io_util.hpp"

#include "ufcsim/errors.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ufcsim {

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path);
    }
    out << content;
    if (!out) {
        throw std::runtime_error("short write: " + path);
    }
}

static std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        size_t a = f.find_first_not_of(" \t");
        size_t b = f.find_last_not_of(" \t");
        f = (a == std::string::npos) ? std::string() : f.substr(a, b - a + 1);
    }
    return fields;
}

CsvTable parse_csv(const std::string& text, const std::string& source_name) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto fields = split_fields(line);
        if (!have_header) {
            table.header = fields;
            have_header = true;
        } else {
            table.rows.push_back(CsvRow{lineno, std::move(fields)});
        }
    }
    if (!have_header) {
        throw ParseError(source_name + ": missing CSV header row");
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    return parse_csv(slurp_file(path), path);
}

double parse_double_field(const std::string& field, const std::string& source_name, int line) {
    if (field.empty()) {
        throw ParseError(source_name + ":" + std::to_string(line) + ": empty numeric field");
    }
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || errno == ERANGE) {
        throw ParseError(source_name + ":" + std::to_string(line) + ": malformed number '" + field + "'");
    }
    return v;
}

std::string format_double(double v) {
    char buf[40];
    // %.17g round-trips but is noisy; try increasing precision until exact.
    for (int prec = 12; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) {
            break;
        }
    }
    return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace ufcsim
