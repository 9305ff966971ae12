#pragma once

#include <string>
#include <vector>

namespace robustgen {

// Comma-separated interchange table. On disk the first line is the comment
// `# manifest_hash=<hex>` tying the file to the settings that produced it,
// then the header row, then data rows. Cells containing commas or quotes are
// double-quoted with "" escapes; embedded newlines are not supported. Byte
// output is a pure function of the table, so identical tables serialize
// identically.
struct CsvTable {
    std::string manifest_hash;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string write_csv(const CsvTable& table);
void write_csv_file(const std::string& path, const CsvTable& table);

// ParseError when the hash comment is missing, a quote never closes, or a
// row's cell count disagrees with the header.
CsvTable parse_csv(const std::string& text);

// IngestionError when the file cannot be read; ParseError as parse_csv.
CsvTable read_csv_file(const std::string& path);

}  // namespace robustgen
