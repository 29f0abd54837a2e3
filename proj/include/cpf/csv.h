#ifndef CPF_CSV_H
#define CPF_CSV_H

#include <string>
#include <vector>

namespace cpf {

/// Split one CSV line, honoring double-quoted fields and "" escapes.
/// Trailing \r is stripped.
std::vector<std::string> split_csv_line(const std::string& line);

/// Minimal CSV table: header row plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name, -1 when absent.
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

/// Deterministic shortest-ish formatting for doubles in text artifacts.
std::string fmt_double(double v, int precision = 12);

class CsvWriter {
public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  void write_row(const std::vector<std::string>& cells);

private:
  void* file_;
};

}  // namespace cpf

#endif
