#ifndef EIVSEL_CSV_IO_HPP_
#define EIVSEL_CSV_IO_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eivsel/model.hpp"

namespace eiv {

struct CsvTable {
    std::vector<std::string> header;  ///< empty when the file had none
    MatrixXd values;
};

enum class CsvHeader { required, optional, none };

/// Comma-separated decimal numbers, one row per line; blank lines are skipped.
/// With CsvHeader::optional the first row is a header iff it does not parse
/// as numbers. Throws ParseError carrying the 1-based line number.
CsvTable read_csv(std::istream& in, CsvHeader header);
CsvTable read_csv_file(const std::string& path, CsvHeader header);

/// Dataset file: header row, y in the first column, Z in the remaining p.
/// The optional X file holds p columns with a header. Validated before return.
EivDataset read_dataset(const std::string& data_path, const std::optional<std::string>& x_path = {});

/// Writes the layout read_dataset expects (and X to `x_out` when given).
void write_dataset(std::ostream& data_out, const EivDataset& d, std::ostream* x_out = nullptr);

/// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(std::string_view s);

}  // namespace eiv

#endif  // EIVSEL_CSV_IO_HPP_
