#include "cpf/csv.h"

#include <cstdio>
#include <fstream>

#include "cpf/error.h"

namespace cpf {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\r') {
      // ignore
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV file: " + path);
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
  }
  return table;
}

std::string fmt_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("cannot open file for writing: " + path);
  file_ = f;
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(static_cast<FILE*>(file_));
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  FILE* f = static_cast<FILE*>(file_);
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) std::fputc(',', f);
    const std::string& c = cells[i];
    const bool needs_quote = c.find_first_of(",\"\n") != std::string::npos;
    if (needs_quote) {
      std::fputc('"', f);
      for (char ch : c) {
        if (ch == '"') std::fputc('"', f);
        std::fputc(ch, f);
      }
      std::fputc('"', f);
    } else {
      std::fwrite(c.data(), 1, c.size(), f);
    }
  }
  std::fputc('\n', f);
}

}  // namespace cpf
