#include "robustgen/csv.hpp"

#include <fstream>

#include "robustgen/errors.hpp"

namespace robustgen {

namespace {

constexpr const char* kHashPrefix = "# manifest_hash=";

void append_cell(std::string& out, const std::string& cell) {
    if (cell.find_first_of(",\"") == std::string::npos) {
        out += cell;
        return;
    }
    out += '"';
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

void append_row(std::string& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        append_cell(out, row[i]);
    }
    out += '\n';
}

// One line into cells. Quotes open only at a cell boundary; "" inside a
// quoted cell is a literal quote.
std::vector<std::string> split_row(const std::string& line, std::size_t lineno) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"' && cell.empty()) {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
        ++i;
    }
    if (quoted)
        throw ParseError("csv line " + std::to_string(lineno) + ": unterminated quote",
                         static_cast<long long>(lineno));
    cells.push_back(std::move(cell));
    return cells;
}

}  // namespace

std::string write_csv(const CsvTable& table) {
    std::string out = kHashPrefix + table.manifest_hash + "\n";
    append_row(out, table.header);
    for (const auto& row : table.rows) append_row(out, row);
    return out;
}

void write_csv_file(const std::string& path, const CsvTable& table) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IngestionError("cannot write '" + path + "'");
    f << write_csv(table);
    if (!f) throw IngestionError("write to '" + path + "' failed");
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::size_t pos = 0;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = end + 1;
        ++lineno;
        if (lineno == 1) {
            if (line.rfind(kHashPrefix, 0) != 0)
                throw ParseError("csv line 1: expected '# manifest_hash=...' comment", 1);
            table.manifest_hash = line.substr(std::string(kHashPrefix).size());
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cells = split_row(line, lineno);
        if (!saw_header) {
            table.header = std::move(cells);
            saw_header = true;
            continue;
        }
        if (cells.size() != table.header.size())
            throw ParseError("csv line " + std::to_string(lineno) + ": has " +
                                 std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(table.header.size()),
                             static_cast<long long>(lineno));
        table.rows.push_back(std::move(cells));
    }
    if (!saw_header) throw ParseError("csv: missing header row");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IngestionError("cannot read '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    try {
        return parse_csv(text);
    } catch (ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.where);
    }
}

}  // namespace robustgen
