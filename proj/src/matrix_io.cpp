#include "matsqrt/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "matsqrt/errors.hpp"

namespace matsqrt::io {
namespace {

// Returns false at end of input; skips comments and blank lines.
bool next_content_line(std::istream& in, std::string& line, int& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        return true;
    }
    return false;
}

} // namespace

linalg::Matrix read_matrix(std::istream& in) {
    std::string line;
    int line_no = 0;
    if (!next_content_line(in, line, line_no)) throw ParseError("matrix file is empty");

    long long n = 0;
    {
        std::istringstream header(line);
        std::string extra;
        if (!(header >> n) || (header >> extra))
            throw ParseError("line " + std::to_string(line_no) + ": expected a single integer dimension");
        if (n < 1) throw ParseError("line " + std::to_string(line_no) + ": dimension must be at least 1");
    }

    const auto dim = static_cast<std::size_t>(n);
    linalg::Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        if (!next_content_line(in, line, line_no))
            throw ParseError("expected " + std::to_string(dim) + " rows, found " + std::to_string(i));
        std::istringstream row(line);
        for (std::size_t j = 0; j < dim; ++j) {
            std::string token;
            if (!(row >> token))
                throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) + " values");
            try {
                std::size_t used = 0;
                m(i, j) = std::stod(token, &used);
                if (used != token.size()) throw std::invalid_argument(token);
            } catch (const std::logic_error&) {
                throw ParseError("line " + std::to_string(line_no) + ": '" + token + "' is not a number");
            }
        }
        std::string extra;
        if (row >> extra)
            throw ParseError("line " + std::to_string(line_no) + ": more than " + std::to_string(dim) + " values");
    }
    if (next_content_line(in, line, line_no))
        throw ParseError("line " + std::to_string(line_no) + ": unexpected content after last row");
    return m;
}

linalg::Matrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_matrix(in);
}

void write_matrix(std::ostream& out, const linalg::Matrix& m) {
    const auto old_flags = out.flags();
    const auto old_precision = out.precision();
    out << m.rows() << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << m(i, j);
        }
        out << '\n';
    }
    out.flags(old_flags);
    out.precision(old_precision);
}

void write_matrix_file(const std::filesystem::path& path, const linalg::Matrix& m) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_matrix(out, m);
}

} // namespace matsqrt::io
