#include "eivsel/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "eivsel/errors.hpp"
#include "eivsel/format.hpp"

namespace eiv {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.emplace_back(trim(cur));
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

}  // namespace

CsvTable read_csv(std::istream& in, CsvHeader header) {
    CsvTable t;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (first) {
            first = false;
            width = fields.size();
            bool numeric = true;
            for (const auto& f : fields) numeric = numeric && parse_number(f).has_value();
            if (header == CsvHeader::required || (header == CsvHeader::optional && !numeric)) {
                t.header = fields;
                continue;
            }
        }
        if (fields.size() != width)
            throw ParseError("expected " + std::to_string(width) + " fields, found " +
                                 std::to_string(fields.size()),
                             lineno);
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto v = parse_number(fields[c]);
            if (!v) throw ParseError("not a number in column " + std::to_string(c + 1) + ": '" + fields[c] + "'", lineno);
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    if (first) throw ParseError("empty CSV input");
    t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c)
            t.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return t;
}

CsvTable read_csv_file(const std::string& path, CsvHeader header) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return read_csv(in, header);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

EivDataset read_dataset(const std::string& data_path, const std::optional<std::string>& x_path) {
    const CsvTable t = read_csv_file(data_path, CsvHeader::required);
    if (t.values.cols() < 2) throw ParseError(data_path + ": need y and at least one Z column");
    if (t.values.rows() < 1) throw ParseError(data_path + ": no data rows");
    EivDataset d;
    d.y = t.values.col(0);
    d.z = t.values.rightCols(t.values.cols() - 1);
    if (x_path) d.x = read_csv_file(*x_path, CsvHeader::required).values;
    validate_dataset(d);
    return d;
}

void write_dataset(std::ostream& data_out, const EivDataset& d, std::ostream* x_out) {
    data_out << 'y';
    for (Index j = 0; j < d.p(); ++j) data_out << ",z" << j + 1;
    data_out << '\n';
    for (Index i = 0; i < d.n(); ++i) {
        data_out << fmt_exact(d.y(i));
        for (Index j = 0; j < d.p(); ++j) data_out << ',' << fmt_exact(d.z(i, j));
        data_out << '\n';
    }
    if (x_out && d.x) {
        for (Index j = 0; j < d.p(); ++j) *x_out << (j ? ",x" : "x") << j + 1;
        *x_out << '\n';
        for (Index i = 0; i < d.n(); ++i) {
            for (Index j = 0; j < d.p(); ++j) *x_out << (j ? "," : "") << fmt_exact((*d.x)(i, j));
            *x_out << '\n';
        }
    }
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

}  // namespace eiv
